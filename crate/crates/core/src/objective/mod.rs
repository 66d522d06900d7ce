//! Objective functions and the test landscapes used throughout the crate.
//!
//! An [`Objective`] is an immutable scalar field over `R^dim` with an
//! analytic gradient and, where cheap, an analytic Hessian. Every landscape
//! shipped here is checked against [`finite_difference_gradient`].

mod landscapes;
mod lse;
mod quadratic;

pub use landscapes::{
    piecewise_cosine_1d, shekel, sine_bowl_2d, styblinski_tang, Linear, PiecewiseCosine, Shekel, ShekelSpec,
    SineBowl, StyblinskiTang, SHEKEL_BETA, SHEKEL_C,
};
pub use lse::{log_sum_exp, LogSumExp};
pub use quadratic::{nesterov_worst_case, quadratic, Quadratic, QuadraticSpec, SymMatrix};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::exec::Exec;

pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &DVector<f64>) -> Result<f64>;

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>>;

    /// Implementations that share work between `f` and `∇f` override this.
    fn value_and_gradient(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        Ok((self.value(x)?, self.gradient(x)?))
    }

    fn hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }

    /// Whether `x` lies in the landscape's nominal domain. Evaluation outside
    /// it may still succeed; see the individual landscapes.
    fn in_domain(&self, _x: &DVector<f64>) -> bool {
        true
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        (**self).value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        (**self).value_and_gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        (**self).hessian(x)
    }
    fn in_domain(&self, x: &DVector<f64>) -> bool {
        (**self).in_domain(x)
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        (**self).value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        (**self).value_and_gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        (**self).hessian(x)
    }
    fn in_domain(&self, x: &DVector<f64>) -> bool {
        (**self).in_domain(x)
    }
}

/// Central-difference gradient with per-component perturbation
/// `step * (1 + |x_i|)`.
pub fn finite_difference_gradient<F: Objective + ?Sized>(
    f: &F,
    x: &DVector<f64>,
    step: f64,
) -> Result<DVector<f64>> {
    if !(step > 0.0) {
        return Err(Error::invalid(format!("finite-difference step must be positive, got {step}")));
    }
    check_dim(f.dim(), x.len())?;
    let mut probe = x.clone();
    let mut out = DVector::zeros(x.len());
    for i in 0..x.len() {
        let hi = step * (1.0 + x[i].abs());
        probe[i] = x[i] + hi;
        let plus = f.value(&probe)?;
        probe[i] = x[i] - hi;
        let minus = f.value(&probe)?;
        probe[i] = x[i];
        out[i] = (plus - minus) / (2.0 * hi);
    }
    Ok(out)
}

/// `‖∇f(x) - fd(x)‖₂ / max(‖∇f(x)‖₂, 1)`.
///
/// The floor keeps the measure meaningful near stationary points, where a
/// purely relative error is dominated by round-off in the difference quotient.
pub fn gradient_relative_error<F: Objective + ?Sized>(f: &F, x: &DVector<f64>, step: f64) -> Result<f64> {
    let analytic = f.gradient(x)?;
    let numeric = finite_difference_gradient(f, x, step)?;
    Ok((&analytic - &numeric).norm() / analytic.norm().max(1.0))
}

/// [`gradient_relative_error`] over many points.
pub fn gradient_check_batch<F: Objective + ?Sized>(
    f: &F,
    points: &[DVector<f64>],
    step: f64,
    exec: Exec,
) -> Result<Vec<f64>> {
    exec.map(points, |_, x| gradient_relative_error(f, x, step)).into_iter().collect()
}

/// Evaluate `f` at many points.
pub fn evaluate_batch<F: Objective + ?Sized>(f: &F, points: &[DVector<f64>], exec: Exec) -> Result<Vec<f64>> {
    exec.map(points, |_, x| f.value(x)).into_iter().collect()
}

/// Largest Hessian eigenvalue at `x` by power iteration, or `None` when the
/// objective has no Hessian.
pub fn estimate_lipschitz<F: Objective + ?Sized>(f: &F, x: &DVector<f64>) -> Option<f64> {
    let h = f.hessian(x)?;
    let n = h.nrows();
    if n == 0 {
        return None;
    }
    if n <= 64 {
        let eig = h.symmetric_eigen();
        return Some(eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    }
    // deterministic, non-degenerate start vector
    let mut v = DVector::from_fn(n, |i, _| 1.0 + ((i * 7919) % 101) as f64 / 101.0);
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w = &h * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return Some(0.0);
        }
        let next = v.dot(&w).abs();
        v = w / norm;
        if (next - lambda).abs() <= 1e-10 * next.max(1.0) {
            return Some(next);
        }
        lambda = next;
    }
    Some(lambda)
}

/// Default step `1/√L` with `L` from the Hessian at `x`.
pub fn default_step_size<F: Objective + ?Sized>(f: &F, x: &DVector<f64>) -> Option<f64> {
    let l = estimate_lipschitz(f, x)?;
    (l > 0.0).then(|| 1.0 / l.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn fd_exact_on_linear_gradient() {
        let f = quadratic(QuadraticSpec::identity(2));
        let g = finite_difference_gradient(&f, &dvector![1.0, 1.0], 1e-5).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-8);
        assert!((g[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fd_matches_styblinski_tang() {
        let f = styblinski_tang(2).unwrap();
        let err = gradient_relative_error(&f, &dvector![1.0, 2.0], 1e-5).unwrap();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn fd_matches_shekel() {
        let f = shekel(ShekelSpec::new(5).unwrap());
        let x = dvector![3.0, 3.0, 3.0, 3.0];
        let g = f.gradient(&x).unwrap();
        let fd = finite_difference_gradient(&f, &x, 1e-5).unwrap();
        assert!((&g - &fd).norm() / g.norm() < 1e-6);
    }

    #[test]
    fn fd_rejects_bad_step() {
        let f = styblinski_tang(1).unwrap();
        assert!(finite_difference_gradient(&f, &dvector![0.0], 0.0).is_err());
        assert!(finite_difference_gradient(&f, &dvector![0.0], -1.0).is_err());
    }

    #[test]
    fn batch_check_sequential_equals_parallel() {
        let f = styblinski_tang(3).unwrap();
        let pts: Vec<_> = (0..20).map(|i| DVector::from_element(3, -4.0 + 0.4 * i as f64)).collect();
        let a = gradient_check_batch(&f, &pts, 1e-5, Exec::Sequential).unwrap();
        let b = gradient_check_batch(&f, &pts, 1e-5, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lipschitz_estimate_on_known_spectra() {
        let f = quadratic(QuadraticSpec::diagonal(&[1.0, 1e-4], None).unwrap());
        let l = estimate_lipschitz(&f, &dvector![0.0, 0.0]).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        let f = quadratic(nesterov_worst_case(200).unwrap());
        let l = estimate_lipschitz(&f, &DVector::zeros(200)).unwrap();
        let exact = 4.0 * (200.0 * std::f64::consts::PI / (2.0 * 201.0)).sin().powi(2);
        assert!((l - exact).abs() < 1e-3, "{l} vs {exact}");
        assert!(estimate_lipschitz(&Linear::new(dvector![1.0], 0.0), &dvector![0.0]).is_none());
    }

    #[test]
    fn default_step_is_inverse_sqrt_l() {
        let f = quadratic(QuadraticSpec::diagonal(&[4.0, 1.0], None).unwrap());
        let h = default_step_size(&f, &dvector![0.0, 0.0]).unwrap();
        assert!((h - 0.5).abs() < 1e-12);
    }
}
