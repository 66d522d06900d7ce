use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Objective;
use crate::error::{check_dim, Error, Result};

/// `f(x) = ρ log Σᵢ exp((⟨aᵢ, x⟩ - bᵢ) / ρ)` where `aᵢ` are the columns of a
/// `d × m` matrix `A` and `x ∈ R^d`.
///
/// Smooth and convex but not strongly convex.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSumExp {
    a: DMatrix<f64>,
    b: DVector<f64>,
    rho: f64,
}

pub fn log_sum_exp(a: DMatrix<f64>, b: DVector<f64>, rho: f64) -> Result<LogSumExp> {
    LogSumExp::new(a, b, rho)
}

impl LogSumExp {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::invalid(format!("rho must be positive, got {rho}")));
        }
        check_dim(a.ncols(), b.len())?;
        Ok(LogSumExp { a, b, rho })
    }

    /// Standard Gaussian `A` (`d × m`) and `b` (`m`) from a seeded stream.
    pub fn random(d: usize, m: usize, rho: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(d, m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let b = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        Self::new(a, b, rho)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn scaled_logits(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.a.tr_mul(x) - &self.b) / self.rho
    }

    /// Softmax weights `sᵢ`; `∇f = A s`.
    pub fn weights(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.a.nrows(), x.len())?;
        let z = self.scaled_logits(x);
        let zmax = z.max();
        let e = z.map(|zi| (zi - zmax).exp());
        let total = e.sum();
        Ok(e / total)
    }
}

impl Objective for LogSumExp {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let z = self.scaled_logits(x);
        let zmax = z.max();
        let total: f64 = z.iter().map(|zi| (zi - zmax).exp()).sum();
        Ok(self.rho * (zmax + total.ln()))
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.a * self.weights(x)?)
    }

    fn value_and_gradient(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        check_dim(self.dim(), x.len())?;
        let z = self.scaled_logits(x);
        let zmax = z.max();
        let e = z.map(|zi| (zi - zmax).exp());
        let total = e.sum();
        let f = self.rho * (zmax + total.ln());
        Ok((f, &self.a * (e / total)))
    }

    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let s = self.weights(x).ok()?;
        // (1/ρ) A (diag(s) - s sᵀ) Aᵀ
        let mut weighted = self.a.clone();
        for (j, sj) in s.iter().enumerate() {
            weighted.column_mut(j).scale_mut(*sj);
        }
        let as_ = &self.a * &s;
        let h = (weighted * self.a.transpose() - &as_ * as_.transpose()) / self.rho;
        Some((&h + h.transpose()) * 0.5)
    }
}
