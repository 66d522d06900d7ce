use conlaw::baseline::{gradient_descent, heavy_ball, nesterov_agd, BaselineConfig};
use conlaw::conserve::{ade_minimize, combined_search, ec_detect, first_reset_index, RunConfig};
use conlaw::integrate::{energy, trajectory, PhaseState, Scheme};
use conlaw::objective::{quadratic, shekel, styblinski_tang, Objective, QuadraticSpec, ShekelSpec};
use conlaw::{Result, Termination};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// `g(x) = f(x + c) + offset`.
struct Shifted<F> {
    inner: F,
    c: DVector<f64>,
    offset: f64,
}

impl<F: Objective> Objective for Shifted<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.inner.value(&(x + &self.c))? + self.offset)
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.inner.gradient(&(x + &self.c))
    }
}

fn diag_quadratic(d: &[f64]) -> impl Objective {
    quadratic(QuadraticSpec::diagonal(d, None).unwrap())
}

fn vec_strategy(dim: usize, lo: f64, hi: f64) -> impl Strategy<Value = DVector<f64>> {
    proptest::collection::vec(lo..hi, dim).prop_map(DVector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reset_leaves_position_and_next_step_moves(
        curv in proptest::collection::vec(0.01..1.0f64, 3),
        x0 in vec_strategy(3, -5.0, 5.0),
        h in 0.05..0.9f64,
    ) {
        let f = diag_quadratic(&curv);
        let cfg = RunConfig::new(h, 400, 1e-12).keep_positions(true);
        let t = ade_minimize(&f, &x0, &cfg).unwrap();
        for w in t.records.windows(2) {
            if w[1].reset {
                prop_assert_eq!(&w[1].x, &w[0].x);
                prop_assert_eq!(w[1].v_norm, 0.0);
            }
            if w[0].reset && w[0].grad_norm > 0.0 {
                prop_assert!(!w[1].reset);
                prop_assert!(w[1].v_norm > 0.0);
            }
        }
        prop_assert!(t.records.windows(2).all(|w| w[1].k == w[0].k + 1));
    }

    #[test]
    fn energy_drops_at_resets(
        curv in proptest::collection::vec(0.01..1.0f64, 4),
        x0 in vec_strategy(4, -10.0, 10.0),
        h in 0.05..0.99f64,
    ) {
        // hω_max < 1 since every curvature is below 1 and h < 1
        let f = diag_quadratic(&curv);
        let t = ade_minimize(&f, &x0, &RunConfig::new(h, 2000, 1e-12)).unwrap();
        let at_resets: Vec<f64> = t.records.iter().filter(|r| r.reset).map(|r| r.f).collect();
        let tol = 1e-8 * (1.0 + t.records[0].f.abs());
        for w in at_resets.windows(2) {
            prop_assert!(w[1] <= w[0] + tol, "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn first_reset_not_before_quarter_period(omega in 0.01..3.0f64, hw in 0.01..0.99f64, x0 in 0.1..100.0f64) {
        let h = hw / omega;
        let f = diag_quadratic(&[omega * omega]);
        let t = ade_minimize(&f, &DVector::from_element(1, x0), &RunConfig::new(h, 10_000, 1e-300)).unwrap();
        let k = first_reset_index(&t).unwrap() as f64;
        prop_assert!(k * hw >= std::f64::consts::FRAC_PI_2 - hw, "k = {}", k);
    }

    #[test]
    fn detection_is_deterministic_and_shift_invariant(
        x0 in vec_strategy(2, -4.0, 4.0),
        v0 in vec_strategy(2, -3.0, 3.0),
        offset in -1e3..1e3f64,
        seed in 0u64..1000,
    ) {
        let f = styblinski_tang(2).unwrap();
        let cfg = RunConfig::new(0.01, 1, 1e-8).with_v0(v0);
        let a = ec_detect(&f, &x0, &cfg, 1500).unwrap();
        prop_assert_eq!(&a, &ec_detect(&f, &x0, &cfg, 1500).unwrap());
        let g = Shifted { inner: styblinski_tang(2).unwrap(), c: DVector::zeros(2), offset };
        let b = ec_detect(&g, &x0, &cfg, 1500).unwrap();
        let ia: Vec<usize> = a.candidates.iter().map(|c| c.step_index).collect();
        let ib: Vec<usize> = b.candidates.iter().map(|c| c.step_index).collect();
        prop_assert_eq!(ia, ib);

        let heuristic = RunConfig::new(0.01, 1, 1e-8).with_seed(seed);
        prop_assert_eq!(ec_detect(&f, &x0, &heuristic, 300).unwrap(), ec_detect(&f, &x0, &heuristic, 300).unwrap());
    }

    #[test]
    fn detection_indices_increase(x0 in vec_strategy(2, -4.0, 4.0), v0 in vec_strategy(2, -3.0, 3.0)) {
        let f = styblinski_tang(2).unwrap();
        let n = 1000;
        let set = ec_detect(&f, &x0, &RunConfig::new(0.01, 1, 1e-8).with_v0(v0), n).unwrap();
        prop_assert!(set.candidates.windows(2).all(|w| w[0].step_index < w[1].step_index));
        prop_assert!(set.candidates.iter().all(|c| c.step_index >= 1 && c.step_index < n && c.position.len() == 2));
    }

    #[test]
    fn baselines_are_translation_invariant(
        curv in proptest::collection::vec(0.1..1.0f64, 3),
        x0 in vec_strategy(3, -2.0, 2.0),
        c in vec_strategy(3, -2.0, 2.0),
    ) {
        let f = diag_quadratic(&curv);
        let g = Shifted { inner: diag_quadratic(&curv), c: c.clone(), offset: 0.0 };
        let y0 = &x0 - &c;
        let configs = [
            BaselineConfig::new(0.5, 60, 1e-12),
            BaselineConfig::new(0.5, 60, 1e-12).with_gamma(0.6),
            BaselineConfig::new(0.5, 60, 1e-12).with_kappa(0.1),
            BaselineConfig::new(0.5, 60, 1e-12),
        ];
        for (i, cfg) in configs.iter().enumerate() {
            let (a, b) = match i {
                0 => (gradient_descent(&f, &x0, cfg).unwrap(), gradient_descent(&g, &y0, cfg).unwrap()),
                1 => (heavy_ball(&f, &x0, cfg).unwrap(), heavy_ball(&g, &y0, cfg).unwrap()),
                _ => (nesterov_agd(&f, &x0, cfg).unwrap(), nesterov_agd(&g, &y0, cfg).unwrap()),
            };
            prop_assert_eq!(a.records.len(), b.records.len());
            for (ra, rb) in a.records.iter().zip(&b.records) {
                prop_assert!((ra.f - rb.f).abs() < 1e-12, "{} vs {}", ra.f, rb.f);
            }
        }
    }

    #[test]
    fn methods_converge_on_unit_quadratic(x0 in 0.5..100.0f64, h in 0.05..1.95f64) {
        let f = diag_quadratic(&[1.0]);
        let x0 = DVector::from_element(1, x0);
        let cfg = BaselineConfig::new(h, 100_000, 1e-8);
        let gd = gradient_descent(&f, &x0, &cfg).unwrap();
        prop_assert!(gd.converged());
        prop_assert!(gd.records.windows(2).all(|w| w[1].grad_norm <= w[0].grad_norm));
        prop_assert!(heavy_ball(&f, &x0, &cfg.clone().with_gamma(0.3)).unwrap().converged());
        // each reset cycle scales x by 1 - h², so ADE needs hω < √2
        let ade = ade_minimize(&f, &x0, &RunConfig::new(h, 100_000, 1e-8)).unwrap();
        if (h - std::f64::consts::SQRT_2).abs() > 0.01 {
            prop_assert_eq!(ade.converged(), h < std::f64::consts::SQRT_2);
        }
        // constant momentum γ is stable on ½x² only for h < 1 + 1/(1 + 2γ)
        let kappa: f64 = 0.5;
        let gamma = (1.0 - kappa.sqrt()) / (1.0 + kappa.sqrt());
        let nest = nesterov_agd(&f, &x0, &cfg.clone().with_kappa(kappa)).unwrap();
        let limit = 1.0 + 1.0 / (1.0 + 2.0 * gamma);
        if (h - limit).abs() > 0.01 {
            prop_assert_eq!(nest.converged(), h < limit);
        }
    }

    #[test]
    fn heavy_ball_without_momentum_is_gradient_descent(x0 in vec_strategy(4, 0.0, 10.0), h in 0.001..0.05f64) {
        let f = shekel(ShekelSpec::new(7).unwrap());
        let cfg = BaselineConfig::new(h, 300, 1e-9).keep_positions(true);
        prop_assert_eq!(gradient_descent(&f, &x0, &cfg).unwrap(), heavy_ball(&f, &x0, &cfg.clone().with_gamma(0.0)).unwrap());
    }

    #[test]
    fn shekel_is_negative(x in vec_strategy(4, -20.0, 30.0), m in prop::sample::select(vec![5usize, 7, 10])) {
        prop_assert!(shekel(ShekelSpec::new(m).unwrap()).value(&x).unwrap() < 0.0);
    }

    #[test]
    fn quadratic_hessian_is_constant(x in vec_strategy(6, -50.0, 50.0), seed in 0u64..50) {
        let f = quadratic(QuadraticSpec::random_ill_conditioned(6, seed).unwrap());
        prop_assert_eq!(f.hessian(&x), f.hessian(&DVector::zeros(6)));
    }

    #[test]
    fn energy_decomposes(x in vec_strategy(3, -5.0, 5.0), v in vec_strategy(3, -5.0, 5.0)) {
        let f = styblinski_tang(3).unwrap();
        let e = energy(&f, &PhaseState::new(x.clone(), v.clone()).unwrap()).unwrap();
        prop_assert!(e.kinetic >= 0.0);
        prop_assert_eq!(e.total, e.kinetic + e.potential);
        prop_assert_eq!(e.kinetic, 0.5 * v.norm_squared());
    }
}

#[test]
fn nesterov_momentum_limits_the_step() {
    let f = diag_quadratic(&[1.0]);
    let x0 = DVector::from_element(1, 41.5);
    let cfg = BaselineConfig::new(1.94, 10_000, 1e-8).with_kappa(0.5);
    assert_eq!(nesterov_agd(&f, &x0, &cfg).unwrap().termination, Termination::Diverged);
    let cfg = BaselineConfig::new(1.65, 10_000, 1e-8).with_kappa(0.5);
    assert!(nesterov_agd(&f, &x0, &cfg).unwrap().converged());
}

#[test]
fn combined_best_is_no_worse_than_direct_refinement() {
    let f = shekel(ShekelSpec::new(10).unwrap());
    let start = DVector::from_element(4, 3.0);
    let detect = RunConfig::new(0.01, 1, 1e-8).with_seed(11);
    let local = RunConfig::new(0.01, 100_000, 1e-8);
    let res = combined_search(&f, &[start], &detect, 1000, &local).unwrap();
    let direct = res.detections[0]
        .candidates
        .iter()
        .map(|c| ade_minimize(&f, &c.position, &local).unwrap())
        .filter(|t| t.termination != Termination::Diverged)
        .map(|t| f.value(t.final_x()).unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(res.best().value <= direct);
    assert_eq!(res.best().value, direct);
}

#[test]
fn combined_search_is_independent_of_execution_policy() {
    let f = styblinski_tang(4).unwrap();
    let starts =
        vec![DVector::from_element(4, 5.0), DVector::from_fn(4, |i, _| if i % 2 == 0 { 5.0 } else { -5.0 })];
    let detect = RunConfig::new(0.01, 1, 1e-8).with_v0(DVector::zeros(4));
    let local = RunConfig::new(0.01, 100_000, 1e-8);
    let search = conlaw::CombinedSearch::new(detect, 800, local);
    let seq = search.clone().with_exec(conlaw::Exec::Sequential).run(&f, &starts).unwrap();
    let par = search.with_exec(conlaw::Exec::Parallel).run(&f, &starts).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn symplectic_euler_energy_stays_bounded() {
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let f = quadratic(QuadraticSpec::new(a, DVector::zeros(2)).unwrap());
    let s0 = PhaseState::new(DVector::from_vec(vec![1.0, -1.0]), DVector::from_vec(vec![0.2, 0.1])).unwrap();
    let e0 = energy(&f, &s0).unwrap().total;
    let h = 0.05;
    for scheme in [Scheme::SymplecticEuler, Scheme::StormerVerlet] {
        let traj = trajectory(&f, s0.clone(), h, 20_000, scheme).unwrap();
        let worst = traj.iter().map(|s| (energy(&f, s).unwrap().total - e0).abs()).fold(0.0, f64::max);
        let bound = match scheme {
            Scheme::SymplecticEuler => 2.0 * h * 2.0 * e0,
            Scheme::StormerVerlet => 2.0 * h * h * 2.0 * e0,
        };
        assert!(worst <= bound, "{scheme:?}: drift {worst}");
    }
}
