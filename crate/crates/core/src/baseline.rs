//! First-order comparison methods: gradient descent, Polyak heavy ball and
//! Nesterov's accelerated gradient.
//!
//! All three share the stopping rule used by the conservation solvers:
//! `‖∇f(x_k)‖₂ <= eps` is checked before each update, with `maxiter` as a cap.

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::integrate::{all_finite, PhaseState};
use crate::objective::Objective;
use crate::trace::{RunTrace, Termination, TraceBuilder};

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub h: f64,
    /// Heavy-ball momentum, constant across iterations.
    pub gamma: Option<f64>,
    /// Strong-convexity ratio `μ/L` for Nesterov. `None` selects the
    /// non-strongly-convex schedule.
    pub kappa: Option<f64>,
    pub maxiter: usize,
    pub eps: f64,
    pub keep_positions: bool,
}

impl BaselineConfig {
    pub fn new(h: f64, maxiter: usize, eps: f64) -> Self {
        BaselineConfig { h, gamma: None, kappa: None, maxiter, eps, keep_positions: false }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    pub fn keep_positions(mut self, keep: bool) -> Self {
        self.keep_positions = keep;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::invalid(format!("h must be positive, got {}", self.h)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::invalid(format!("eps must be positive, got {}", self.eps)));
        }
        if self.maxiter == 0 {
            return Err(Error::invalid("maxiter must be at least 1"));
        }
        if let Some(g) = self.gamma {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::invalid(format!("gamma must lie in [0, 1), got {g}")));
            }
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k <= 1.0) {
                return Err(Error::invalid(format!("kappa must lie in (0, 1], got {k}")));
            }
        }
        Ok(())
    }
}

/// Shared iteration loop. `update` maps `(x_k, ∇f(x_k))` to `x_{k+1}`.
fn drive<F, U>(f: &F, x0: &DVector<f64>, cfg: &BaselineConfig, mut update: U) -> Result<RunTrace>
where
    F: Objective + ?Sized,
    U: FnMut(&DVector<f64>, &DVector<f64>) -> DVector<f64>,
{
    cfg.validate()?;
    check_dim(f.dim(), x0.len())?;
    if !all_finite(x0) {
        return Err(Error::invalid("x0 must be finite"));
    }
    let mut trace = TraceBuilder::new(cfg.keep_positions);
    let mut x = x0.clone();
    let mut step = DVector::zeros(x.len());
    let finish = |trace: TraceBuilder, x, step: DVector<f64>, t, k, diag| {
        let v = step / cfg.h;
        trace.finish(PhaseState { x, v }, t, k, diag)
    };

    for k in 0..cfg.maxiter {
        let (fx, g) = match f.value_and_gradient(&x) {
            Ok(pair) => pair,
            Err(e) => return Ok(finish(trace, x, step, Termination::Diverged, k, Some(e.to_string()))),
        };
        if !fx.is_finite() || !all_finite(&g) {
            let msg = format!("non-finite objective or gradient at iteration {k}");
            return Ok(finish(trace, x, step, Termination::Diverged, k, Some(msg)));
        }
        let gnorm = g.norm();
        trace.push(k, &x, fx, gnorm, step.norm() / cfg.h, false);
        if gnorm <= cfg.eps {
            return Ok(finish(trace, x, step, Termination::Converged, k, None));
        }
        let next = update(&x, &g);
        if !all_finite(&next) {
            let msg = format!("non-finite iterate at iteration {}", k + 1);
            return Ok(finish(trace, x, step, Termination::Diverged, k, Some(msg)));
        }
        step = &next - &x;
        x = next;
    }
    Ok(finish(trace, x, step, Termination::MaxIter, cfg.maxiter, None))
}

/// `x_{k+1} = x_k - h∇f(x_k)`.
pub fn gradient_descent<F: Objective + ?Sized>(
    f: &F,
    x0: &DVector<f64>,
    cfg: &BaselineConfig,
) -> Result<RunTrace> {
    let h = cfg.h;
    drive(f, x0, cfg, |x, g| x - h * g)
}

/// `x_{k+1} = x_k - h∇f(x_k) + γ(x_k - x_{k-1})` with `x_{-1} = x_0`.
pub fn heavy_ball<F: Objective + ?Sized>(f: &F, x0: &DVector<f64>, cfg: &BaselineConfig) -> Result<RunTrace> {
    let gamma = cfg.gamma.ok_or_else(|| Error::invalid("heavy ball needs gamma"))?;
    let h = cfg.h;
    let mut prev = x0.clone();
    drive(f, x0, cfg, |x, g| {
        let next = (x - h * g) + gamma * (x - &prev);
        prev = x.clone();
        next
    })
}

/// One entry of the Nesterov momentum schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumStep {
    pub alpha: f64,
    pub alpha_next: f64,
    pub gamma: f64,
}

/// The `α`-recurrence `α_{k+1}² = (1 - α_{k+1}) α_k² + α_{k+1} κ` with
/// `γ_k = α_k (1 - α_k) / (α_k² + α_{k+1})`.
///
/// Starts at `α₀ = √κ` (constant schedule) when `κ > 0` and at `α₀ = 1` for
/// the `κ = 0` variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NesterovSchedule {
    kappa: f64,
    alpha: f64,
}

impl NesterovSchedule {
    pub fn new(kappa: Option<f64>) -> Result<Self> {
        match kappa {
            Some(k) if k > 0.0 && k <= 1.0 => Ok(NesterovSchedule { kappa: k, alpha: k.sqrt() }),
            Some(k) => Err(Error::invalid(format!("kappa must lie in (0, 1], got {k}"))),
            None => Ok(NesterovSchedule { kappa: 0.0, alpha: 1.0 }),
        }
    }

    pub fn with_initial_alpha(kappa: f64, alpha0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa) || !(alpha0 > 0.0 && alpha0 <= 1.0) {
            return Err(Error::invalid("need kappa in [0, 1] and alpha0 in (0, 1]"));
        }
        Ok(NesterovSchedule { kappa, alpha: alpha0 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Positive root of `a² + (α² - κ) a - α² = 0`.
    pub fn next_alpha(alpha: f64, kappa: f64) -> f64 {
        let b = alpha * alpha - kappa;
        let c = alpha * alpha;
        let disc = (b * b + 4.0 * c).sqrt();
        if b > 0.0 {
            2.0 * c / (b + disc)
        } else {
            0.5 * (disc - b)
        }
    }

    /// Residual of the defining equation for a step of the recurrence.
    pub fn residual(alpha: f64, alpha_next: f64, kappa: f64) -> f64 {
        alpha_next * alpha_next - ((1.0 - alpha_next) * alpha * alpha + alpha_next * kappa)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

impl Iterator for NesterovSchedule {
    type Item = MomentumStep;

    fn next(&mut self) -> Option<MomentumStep> {
        let alpha = self.alpha;
        let alpha_next = Self::next_alpha(alpha, self.kappa);
        let gamma = alpha * (1.0 - alpha) / (alpha * alpha + alpha_next);
        self.alpha = alpha_next;
        Some(MomentumStep { alpha, alpha_next, gamma })
    }
}

/// `y_{k+1} = x_k - h∇f(x_k)`, `x_{k+1} = y_{k+1} + γ_k (y_{k+1} - y_k)`,
/// `y_0 = x_0`, with `h` playing the role of `1/L`.
pub fn nesterov_agd<F: Objective + ?Sized>(
    f: &F,
    x0: &DVector<f64>,
    cfg: &BaselineConfig,
) -> Result<RunTrace> {
    let mut schedule = NesterovSchedule::new(cfg.kappa)?;
    let h = cfg.h;
    let mut y = x0.clone();
    drive(f, x0, cfg, |x, g| {
        let gamma = schedule.next().map(|s| s.gamma).unwrap_or(0.0);
        let y_next = x - h * g;
        let next = &y_next + gamma * (&y_next - &y);
        y = y_next;
        next
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{quadratic, QuadraticSpec};
    use nalgebra::dvector;

    fn half_square() -> impl Objective {
        quadratic(QuadraticSpec::identity(1))
    }

    #[test]
    fn gd_exact_one_step() {
        let cfg = BaselineConfig::new(1.0, 10, 1e-12).keep_positions(true);
        let t = gradient_descent(&half_square(), &dvector![5.0], &cfg).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert_eq!(t.iterations, 1);
        assert_eq!(t.final_x()[0], 0.0);
    }

    #[test]
    fn gd_geometric() {
        let cfg = BaselineConfig::new(0.1, 20, 1e-300).keep_positions(true);
        let t = gradient_descent(&half_square(), &dvector![1.0], &cfg).unwrap();
        for r in &t.records {
            let x = r.x.as_ref().unwrap()[0];
            assert!((x - 0.9f64.powi(r.k as i32)).abs() < 1e-14);
        }
        assert_eq!(t.termination, Termination::MaxIter);
        assert_eq!(t.records.len(), 20);
    }

    #[test]
    fn gd_slowest_mode_contraction() {
        let alpha = 1e-5;
        let f = quadratic(QuadraticSpec::diagonal(&[1.0, alpha], None).unwrap());
        let h = 2.0 / (1.0 + alpha);
        let cfg = BaselineConfig::new(h, 50, 1e-300).keep_positions(true);
        let t = gradient_descent(&f, &dvector![0.0, 1.0], &cfg).unwrap();
        for w in t.records.windows(2) {
            let ratio = w[1].x.as_ref().unwrap()[1] / w[0].x.as_ref().unwrap()[1];
            assert!((ratio - (1.0 - h * alpha)).abs() < 1e-12);
        }
    }

    #[test]
    fn heavy_ball_two_steps() {
        let cfg = BaselineConfig::new(0.1, 3, 1e-300).with_gamma(0.5).keep_positions(true);
        let t = heavy_ball(&half_square(), &dvector![1.0], &cfg).unwrap();
        let xs: Vec<f64> = t.records.iter().map(|r| r.x.as_ref().unwrap()[0]).collect();
        assert!((xs[1] - 0.9).abs() < 1e-15);
        assert!((xs[2] - 0.76).abs() < 1e-15);
    }

    #[test]
    fn heavy_ball_needs_valid_gamma() {
        let cfg = BaselineConfig::new(0.1, 3, 1e-6);
        assert!(heavy_ball(&half_square(), &dvector![1.0], &cfg).is_err());
        assert!(heavy_ball(&half_square(), &dvector![1.0], &cfg.clone().with_gamma(1.0)).is_err());
        assert!(heavy_ball(&half_square(), &dvector![1.0], &cfg.with_gamma(-0.1)).is_err());
    }

    #[test]
    fn config_validation() {
        let f = half_square();
        let x0 = dvector![1.0];
        assert!(gradient_descent(&f, &x0, &BaselineConfig::new(0.0, 3, 1e-6)).is_err());
        assert!(gradient_descent(&f, &x0, &BaselineConfig::new(0.1, 0, 1e-6)).is_err());
        assert!(gradient_descent(&f, &x0, &BaselineConfig::new(0.1, 3, 0.0)).is_err());
        assert!(gradient_descent(&f, &dvector![1.0, 2.0], &BaselineConfig::new(0.1, 3, 1e-6)).is_err());
        let bad_kappa = BaselineConfig::new(0.1, 3, 1e-6).with_kappa(1.5);
        assert!(nesterov_agd(&f, &x0, &bad_kappa).is_err());
    }

    #[test]
    fn divergence_keeps_last_finite_trace() {
        // h = 3 on ω = 1 multiplies x by -2 each step
        let cfg = BaselineConfig::new(3.0, 100_000, 1e-6);
        let t = gradient_descent(&half_square(), &dvector![1.0], &cfg).unwrap();
        assert_eq!(t.termination, Termination::Diverged);
        assert!(t.diagnostic.is_some());
        assert!(t.records.iter().all(|r| r.f.is_finite()));
        assert!(t.final_x()[0].is_finite());
        assert!(t.records.len() < 2000);
    }

    #[test]
    fn schedule_fixed_points() {
        // κ = 1: α stays 1 and γ = 0
        let mut s = NesterovSchedule::new(Some(1.0)).unwrap();
        for step in s.by_ref().take(10) {
            assert!((step.alpha - 1.0).abs() < 1e-15);
            assert!(step.gamma.abs() < 1e-15);
        }
        // α₀ = √κ keeps γ constant at (1-√κ)/(1+√κ)
        let kappa: f64 = 1e-4;
        let expected = (1.0 - kappa.sqrt()) / (1.0 + kappa.sqrt());
        for step in NesterovSchedule::new(Some(kappa)).unwrap().take(100) {
            assert!((step.gamma - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_kappa_zero_decays() {
        let steps: Vec<_> = NesterovSchedule::new(None).unwrap().take(1000).collect();
        assert_eq!(steps[0].gamma, 0.0);
        assert!((steps[0].alpha_next - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        for w in steps.windows(2) {
            assert!(w[1].alpha < w[0].alpha);
            assert!(w[1].gamma >= w[0].gamma);
        }
        // α_k ~ 2/k
        assert!((steps[999].alpha * 1000.0 - 2.0).abs() < 0.1);
    }

    #[test]
    fn nesterov_kappa_one_is_gradient_descent() {
        let f = quadratic(QuadraticSpec::diagonal(&[1.0, 0.5], None).unwrap());
        let x0 = dvector![1.0, -1.0];
        let cfg = BaselineConfig::new(0.3, 40, 1e-10).with_kappa(1.0);
        let a = nesterov_agd(&f, &x0, &cfg).unwrap();
        let b = gradient_descent(&f, &x0, &cfg).unwrap();
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert!((ra.f - rb.f).abs() < 1e-15);
        }
    }

    #[test]
    fn nesterov_ill_conditioned_converges() {
        let alpha = 1e-6;
        let f = quadratic(QuadraticSpec::diagonal(&[1.0, alpha], None).unwrap());
        let cfg = BaselineConfig::new(1.0, 200_000, 1e-6).with_kappa(alpha);
        let t = nesterov_agd(&f, &dvector![1.0, 1.0], &cfg).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert!(t.last_record().unwrap().grad_norm <= 1e-6);
    }

    #[test]
    fn gd_monotone_on_convex_quadratic() {
        for h in [0.1, 0.5, 1.0, 1.5, 1.9] {
            let cfg = BaselineConfig::new(h, 500, 1e-10);
            let t = gradient_descent(&half_square(), &dvector![3.0], &cfg).unwrap();
            assert!(t.converged(), "h = {h}");
            for w in t.records.windows(2) {
                assert!(w[1].grad_norm <= w[0].grad_norm);
            }
        }
    }
}
