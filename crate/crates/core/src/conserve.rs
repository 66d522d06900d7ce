//! Optimization by frictionless dynamics.
//!
//! * [`ade_minimize`] integrates `ẍ = -∇f(x)` with symplectic Euler from rest
//!   and zeroes the velocity whenever the speed stops growing. Each reset
//!   throws away the kinetic part of the energy, so the particle settles into
//!   the basin it is in.
//! * [`ec_detect`] integrates the same dynamics without resets and records
//!   the positions where the speed peaks. With enough initial energy the
//!   particle rolls across several basins and every speed peak sits close to
//!   a local minimum along the path.
//! * [`combined_search`] runs detection from several starts and refines every
//!   detected position with [`ade_minimize`].

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::exec::Exec;
use crate::integrate::{all_finite, symplectic_euler_step, PhaseState};
use crate::objective::Objective;
use crate::trace::TraceBuilder;
pub use crate::trace::{Record, RunTrace, Termination};

/// Solver parameters shared by the conservation algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub h: f64,
    pub maxiter: usize,
    /// Gradient-norm tolerance.
    pub eps: f64,
    /// Initial velocity. Must be zero (or absent) for [`ade_minimize`]. For
    /// [`ec_detect`], `None` selects [`default_detection_velocity`].
    pub v0: Option<DVector<f64>>,
    /// Seed for the velocity heuristic.
    pub seed: u64,
    /// Store `x_k` in every trace record.
    pub keep_positions: bool,
}

impl RunConfig {
    pub fn new(h: f64, maxiter: usize, eps: f64) -> Self {
        RunConfig { h, maxiter, eps, v0: None, seed: 0, keep_positions: false }
    }

    pub fn with_v0(mut self, v0: DVector<f64>) -> Self {
        self.v0 = Some(v0);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn keep_positions(mut self, keep: bool) -> Self {
        self.keep_positions = keep;
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::invalid(format!("h must be positive, got {}", self.h)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::invalid(format!("eps must be positive, got {}", self.eps)));
        }
        if self.maxiter == 0 {
            return Err(Error::invalid("maxiter must be at least 1"));
        }
        if let Some(v0) = &self.v0 {
            check_dim(dim, v0.len())?;
            if !all_finite(v0) {
                return Err(Error::invalid("v0 must be finite"));
            }
        }
        Ok(())
    }
}

/// Energy-dissipating minimization.
///
/// Per iteration: `v_iter = v - h∇f(x)`; if `‖v_iter‖ <= ‖v‖` the velocity is
/// reset to zero, otherwise `v = v_iter`; then `x += h v`. Stops when
/// `‖∇f(x)‖ <= eps` or after `maxiter` updates. A reset step leaves `x`
/// unchanged.
pub fn ade_minimize<F: Objective + ?Sized>(f: &F, x0: &DVector<f64>, cfg: &RunConfig) -> Result<RunTrace> {
    cfg.validate(f.dim())?;
    check_dim(f.dim(), x0.len())?;
    if let Some(v0) = &cfg.v0 {
        if v0.iter().any(|c| *c != 0.0) {
            return Err(Error::invalid("energy-dissipating runs start at rest; v0 must be zero"));
        }
    }
    let mut state = PhaseState::at_rest(x0.clone())?;
    let mut trace = TraceBuilder::new(cfg.keep_positions);
    let mut reset = false;
    let h = cfg.h;

    for k in 0..cfg.maxiter {
        let (fx, g) = match f.value_and_gradient(&state.x) {
            Ok(pair) if pair.0.is_finite() && all_finite(&pair.1) => pair,
            Ok(_) => {
                let msg = format!("non-finite objective or gradient at iteration {k}");
                return Ok(trace.finish(state, Termination::Diverged, k, Some(msg)));
            }
            Err(e) => return Ok(trace.finish(state, Termination::Diverged, k, Some(e.to_string()))),
        };
        let gnorm = g.norm();
        let speed = state.v.norm();
        trace.push(k, &state.x, fx, gnorm, speed, reset);
        if gnorm <= cfg.eps {
            return Ok(trace.finish(state, Termination::Converged, k, None));
        }

        let v_iter = &state.v - h * g;
        let v = if v_iter.norm() <= speed {
            reset = true;
            DVector::zeros(v_iter.len())
        } else {
            reset = false;
            v_iter
        };
        let x = &state.x + h * &v;
        if !all_finite(&x) || !all_finite(&v) {
            let msg = format!("non-finite iterate at iteration {}", k + 1);
            return Ok(trace.finish(state, Termination::Diverged, k, Some(msg)));
        }
        state = PhaseState { x, v };
    }
    Ok(trace.finish(state, Termination::MaxIter, cfg.maxiter, None))
}

/// [`ade_minimize`] from many starting points.
pub fn ade_minimize_batch<F: Objective + ?Sized>(
    f: &F,
    starts: &[DVector<f64>],
    cfg: &RunConfig,
    exec: Exec,
) -> Vec<Result<RunTrace>> {
    exec.map(starts, |_, x0| ade_minimize(f, x0, cfg))
}

/// Index of the first record flagged as a velocity reset.
pub fn first_reset_index(trace: &RunTrace) -> Option<usize> {
    trace.reset_indices().next()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub position: DVector<f64>,
    pub step_index: usize,
    pub f: f64,
}

/// Positions recorded by [`ec_detect`], ordered by step index.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
    /// Echo of the configuration, with `v0` resolved.
    pub source_run: RunConfig,
    /// Number of integration steps completed.
    pub steps: usize,
    /// The trajectory blew up. A domain exit stops the run without this.
    pub diverged: bool,
    pub diagnostic: Option<String>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = &DVector<f64>> {
        self.candidates.iter().map(|c| &c.position)
    }
}

/// Initial velocity for detection when none is given.
///
/// Draws 100 seeded probes uniformly from the box `x0 ± r`, with
/// `r = max(1, ‖x0‖∞)`. The speed is `√(2 E)` where `E` is the spread of `f`
/// over the probes; the direction points at the lowest probe. Probes where
/// `f` cannot be evaluated are skipped.
pub fn default_detection_velocity<F: Objective + ?Sized>(
    f: &F,
    x0: &DVector<f64>,
    seed: u64,
) -> Result<DVector<f64>> {
    check_dim(f.dim(), x0.len())?;
    let r = x0.amax().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lowest: Option<(f64, DVector<f64>)> = None;
    let mut highest = f64::NEG_INFINITY;
    for _ in 0..100 {
        let p = DVector::from_fn(x0.len(), |i, _| x0[i] + r * (2.0 * rng.random::<f64>() - 1.0));
        let Ok(fp) = f.value(&p) else { continue };
        if !fp.is_finite() {
            continue;
        }
        highest = highest.max(fp);
        if lowest.as_ref().is_none_or(|(best, _)| fp < *best) {
            lowest = Some((fp, p));
        }
    }
    let (fmin, pmin) = lowest.ok_or_else(|| Error::invalid("no probe around x0 could be evaluated"))?;
    let dir = pmin - x0;
    let norm = dir.norm();
    if norm == 0.0 {
        return Ok(DVector::zeros(x0.len()));
    }
    Ok(dir * ((2.0 * (highest - fmin)).sqrt() / norm))
}

/// Energy-conservation detection.
///
/// Integrates `n` symplectic Euler steps from `(x0, v0)` without resets and
/// records `x_k`, `1 <= k <= n-1`, whenever `‖v_k‖ >= ‖v_{k+1}‖` and
/// `‖v_k‖ >= ‖v_{k-1}‖`. On a plateau of equal speeds only the first index is
/// recorded. `f` is evaluated only at recorded positions.
///
/// A step that fails ends the run early with the candidates found so far and
/// a diagnostic. Leaving the objective's domain is an ordinary end of the
/// trajectory; anything else (non-finite values) also sets `diverged`.
pub fn ec_detect<F: Objective + ?Sized>(
    f: &F,
    x0: &DVector<f64>,
    cfg: &RunConfig,
    n: usize,
) -> Result<CandidateSet> {
    cfg.validate(f.dim())?;
    check_dim(f.dim(), x0.len())?;
    if n < 2 {
        return Err(Error::invalid(format!("detection needs at least 2 steps, got {n}")));
    }
    let v0 = match &cfg.v0 {
        Some(v) => v.clone(),
        None => default_detection_velocity(f, x0, cfg.seed)?,
    };
    let mut source_run = cfg.clone();
    source_run.v0 = Some(v0.clone());

    let mut current = PhaseState::new(x0.clone(), v0)?;
    let mut speed_prev = f64::NAN;
    let mut speed_cur = current.speed();
    let mut candidates = Vec::new();
    let mut diagnostic = None;
    let mut diverged = false;
    let mut steps = 0;

    for k in 0..n {
        let next = match symplectic_euler_step(f, &current, cfg.h) {
            Ok(s) => s,
            Err(e) => {
                diverged = !matches!(e, Error::OutOfDomain { .. });
                diagnostic = Some(e.to_string());
                break;
            }
        };
        steps = k + 1;
        let speed_next = next.speed();
        // `current` is x_k, with both neighbours known once k >= 1
        if k >= 1 && speed_cur >= speed_next && speed_cur >= speed_prev && speed_cur != speed_prev {
            match f.value(&current.x) {
                Ok(fx) => candidates.push(Candidate { position: current.x.clone(), step_index: k, f: fx }),
                Err(e) => {
                    diverged = !matches!(e, Error::OutOfDomain { .. });
                    diagnostic = Some(e.to_string());
                    break;
                }
            }
        }
        speed_prev = speed_cur;
        speed_cur = speed_next;
        current = next;
    }

    Ok(CandidateSet { candidates, source_run, steps, diverged, diagnostic })
}

/// A refined local minimum and the detections that led to it.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMinimum {
    pub position: DVector<f64>,
    pub value: f64,
    /// `(start index, candidate index)` pairs that converged here.
    pub sources: Vec<(usize, usize)>,
    pub termination: Termination,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedResult {
    /// One detection per start, in start order.
    pub detections: Vec<CandidateSet>,
    /// Deduplicated minima, ordered by their first source.
    pub minima: Vec<LocalMinimum>,
    /// Index into `minima` of the lowest value.
    pub best: usize,
    pub warnings: Vec<String>,
}

impl CombinedResult {
    pub fn best(&self) -> &LocalMinimum {
        &self.minima[self.best]
    }

    pub fn candidate_count(&self) -> usize {
        self.detections.iter().map(|d| d.len()).sum()
    }
}

/// Detection from several starts followed by local refinement of every
/// detected position.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedSearch {
    pub detect: RunConfig,
    pub steps: usize,
    pub local: RunConfig,
    pub exec: Exec,
    /// Minima closer than `merge_tol * √dim` are merged. Defaults to 1e-4.
    pub merge_tol: f64,
}

impl CombinedSearch {
    pub fn new(detect: RunConfig, steps: usize, local: RunConfig) -> Self {
        CombinedSearch { detect, steps, local, exec: Exec::default(), merge_tol: 1e-4 }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn run<F: Objective + ?Sized>(&self, f: &F, starts: &[DVector<f64>]) -> Result<CombinedResult> {
        if starts.is_empty() {
            return Err(Error::invalid("combined search needs at least one start"));
        }
        let local = RunConfig { v0: None, ..self.local.clone() };
        local.validate(f.dim())?;

        let detections: Vec<CandidateSet> = self
            .exec
            .map(starts, |_, x0| ec_detect(f, x0, &self.detect, self.steps))
            .into_iter()
            .collect::<Result<_>>()?;

        let mut warnings = Vec::new();
        for (i, d) in detections.iter().enumerate() {
            if let Some(msg) = &d.diagnostic {
                warnings.push(format!("detection from start {i} stopped early: {msg}"));
            }
        }

        let seeds: Vec<((usize, usize), DVector<f64>)> = detections
            .iter()
            .enumerate()
            .flat_map(|(i, d)| {
                d.candidates.iter().enumerate().map(move |(j, c)| ((i, j), c.position.clone()))
            })
            .collect();
        if seeds.is_empty() {
            return Err(Error::NoCandidates);
        }

        let runs = self.exec.map(&seeds, |_, (_, x)| ade_minimize(f, x, &local));

        let radius = self.merge_tol * (f.dim() as f64).sqrt();
        let mut minima: Vec<LocalMinimum> = Vec::new();
        for ((source, _), run) in seeds.iter().zip(runs) {
            let trace = run?;
            if trace.termination == Termination::Diverged {
                warnings.push(format!(
                    "local run from start {} candidate {} diverged: {}",
                    source.0,
                    source.1,
                    trace.diagnostic.as_deref().unwrap_or("unknown"),
                ));
                continue;
            }
            let value = match trace.last_record() {
                Some(r) if trace.termination == Termination::Converged => r.f,
                _ => f.value(trace.final_x())?,
            };
            let position = trace.final_state.x;
            match minima.iter_mut().find(|m| (&m.position - &position).norm() < radius) {
                Some(m) => {
                    m.sources.push(*source);
                    if value < m.value {
                        m.value = value;
                        m.position = position;
                        m.termination = trace.termination;
                        m.iterations = trace.iterations;
                    }
                }
                None => minima.push(LocalMinimum {
                    position,
                    value,
                    sources: vec![*source],
                    termination: trace.termination,
                    iterations: trace.iterations,
                }),
            }
        }
        if minima.is_empty() {
            return Err(Error::invalid("every local run diverged"));
        }
        let best = minima
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.value.total_cmp(&b.1.value))
            .map(|(i, _)| i)
            .unwrap_or(0);
        Ok(CombinedResult { detections, minima, best, warnings })
    }
}

/// [`CombinedSearch`] with the default execution policy.
pub fn combined_search<F: Objective + ?Sized>(
    f: &F,
    starts: &[DVector<f64>],
    cfg_detect: &RunConfig,
    n: usize,
    cfg_local: &RunConfig,
) -> Result<CombinedResult> {
    CombinedSearch::new(cfg_detect.clone(), n, cfg_local.clone()).run(f, starts)
}

/// Rough iteration count `(π/2) √(L/μ)` until the first velocity reset on a
/// quadratic with extreme curvatures `L` and `μ`, at step `1/√L`.
pub fn iteration_estimate(l: f64, mu: f64) -> Result<f64> {
    if !(mu > 0.0) || !(mu <= l) || !l.is_finite() {
        return Err(Error::invalid(format!("need 0 < mu <= L, got mu = {mu}, L = {l}")));
    }
    Ok(FRAC_PI_2 * (l / mu).sqrt())
}
