//! Symplectic discretizations of the frictionless dynamics `ẍ = -∇f(x)`.
//!
//! Both steppers are pure functions of `(f, state, h)`. Any non-finite
//! gradient or iterate aborts with [`Error::NonFinite`] carrying the last
//! finite state.

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::objective::Objective;

/// A point `(x, v)` in phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub x: DVector<f64>,
    pub v: DVector<f64>,
}

impl PhaseState {
    pub fn new(x: DVector<f64>, v: DVector<f64>) -> Result<Self> {
        check_dim(x.len(), v.len())?;
        if !all_finite(&x) || !all_finite(&v) {
            return Err(Error::invalid("phase state must be finite"));
        }
        Ok(PhaseState { x, v })
    }

    /// State at rest at `x`.
    pub fn at_rest(x: DVector<f64>) -> Result<Self> {
        let v = DVector::zeros(x.len());
        Self::new(x, v)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn speed(&self) -> f64 {
        self.v.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

/// `H(x, v) = ½‖v‖² + f(x)`.
pub fn energy<F: Objective + ?Sized>(f: &F, s: &PhaseState) -> Result<Energy> {
    let kinetic = 0.5 * s.v.norm_squared();
    let potential = f.value(&s.x)?;
    Ok(Energy { kinetic, potential, total: kinetic + potential })
}

pub(crate) fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|c| c.is_finite())
}

fn check_step<F: Objective + ?Sized>(f: &F, s: &PhaseState, h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(format!("step size must be positive, got {h}")));
    }
    check_dim(f.dim(), s.dim())
}

fn finite_gradient<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    last: &PhaseState,
) -> Result<DVector<f64>> {
    let g = f.gradient(x)?;
    if all_finite(&g) {
        Ok(g)
    } else {
        Err(Error::NonFinite { state: Box::new(last.clone()) })
    }
}

fn finite_state(x: DVector<f64>, v: DVector<f64>, last: &PhaseState) -> Result<PhaseState> {
    if all_finite(&x) && all_finite(&v) {
        Ok(PhaseState { x, v })
    } else {
        Err(Error::NonFinite { state: Box::new(last.clone()) })
    }
}

/// One symplectic Euler step: `v' = v - h∇f(x)`, then `x' = x + h v'`.
///
/// The velocity update comes first and the drift uses the new velocity.
pub fn symplectic_euler_step<F: Objective + ?Sized>(f: &F, s: &PhaseState, h: f64) -> Result<PhaseState> {
    check_step(f, s, h)?;
    let g = finite_gradient(f, &s.x, s)?;
    let v = &s.v - h * g;
    let x = &s.x + h * &v;
    finite_state(x, v, s)
}

/// One Störmer-Verlet step (half kick, drift, half kick). Two gradient
/// evaluations per step.
pub fn stormer_verlet_step<F: Objective + ?Sized>(f: &F, s: &PhaseState, h: f64) -> Result<PhaseState> {
    check_step(f, s, h)?;
    let g0 = finite_gradient(f, &s.x, s)?;
    let v_half = &s.v - (0.5 * h) * g0;
    let x = &s.x + h * &v_half;
    let half = PhaseState { x: x.clone(), v: v_half.clone() };
    let g1 = finite_gradient(f, &x, &half)?;
    let v = v_half - (0.5 * h) * g1;
    finite_state(x, v, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    SymplecticEuler,
    StormerVerlet,
}

impl Scheme {
    pub fn step<F: Objective + ?Sized>(self, f: &F, s: &PhaseState, h: f64) -> Result<PhaseState> {
        match self {
            Scheme::SymplecticEuler => symplectic_euler_step(f, s, h),
            Scheme::StormerVerlet => stormer_verlet_step(f, s, h),
        }
    }
}

/// Integrate `steps` steps, returning every state including the initial one.
pub fn trajectory<F: Objective + ?Sized>(
    f: &F,
    initial: PhaseState,
    h: f64,
    steps: usize,
    scheme: Scheme,
) -> Result<Vec<PhaseState>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = initial;
    for _ in 0..steps {
        let next = scheme.step(f, &s, h)?;
        out.push(s);
        s = next;
    }
    out.push(s);
    Ok(out)
}
