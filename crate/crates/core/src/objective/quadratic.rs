use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Objective;
use crate::error::{check_dim, Error, Result};

/// Symmetric matrix storage for quadratic objectives.
#[derive(Debug, Clone, PartialEq)]
pub enum SymMatrix {
    Dense(DMatrix<f64>),
    /// `diag` has length n, `off` length n-1 (sub- and super-diagonal).
    Tridiagonal {
        diag: Vec<f64>,
        off: Vec<f64>,
    },
}

impl SymMatrix {
    pub fn dim(&self) -> usize {
        match self {
            SymMatrix::Dense(m) => m.nrows(),
            SymMatrix::Tridiagonal { diag, .. } => diag.len(),
        }
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            SymMatrix::Dense(m) => m * x,
            SymMatrix::Tridiagonal { diag, off } => {
                let n = diag.len();
                DVector::from_fn(n, |i, _| {
                    let mut s = diag[i] * x[i];
                    if i > 0 {
                        s += off[i - 1] * x[i - 1];
                    }
                    if i + 1 < n {
                        s += off[i] * x[i + 1];
                    }
                    s
                })
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            SymMatrix::Dense(m) => m.clone(),
            SymMatrix::Tridiagonal { diag, off } => {
                let n = diag.len();
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    m[(i, i)] = diag[i];
                }
                for i in 0..n.saturating_sub(1) {
                    m[(i, i + 1)] = off[i];
                    m[(i + 1, i)] = off[i];
                }
                m
            }
        }
    }
}

/// `f(x) = ½ xᵀAx + bᵀx` with `A` symmetric positive-semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpec {
    a: SymMatrix,
    b: DVector<f64>,
    spectrum: Option<Vec<f64>>,
}

impl QuadraticSpec {
    /// Dense `A`, which must be exactly symmetric.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid(format!("A is {}x{}, expected square", a.nrows(), a.ncols())));
        }
        check_dim(a.nrows(), b.len())?;
        if a != a.transpose() {
            return Err(Error::NotSymmetric);
        }
        Ok(QuadraticSpec { a: SymMatrix::Dense(a), b, spectrum: None })
    }

    pub fn identity(n: usize) -> Self {
        QuadraticSpec {
            a: SymMatrix::Dense(DMatrix::identity(n, n)),
            b: DVector::zeros(n),
            spectrum: Some(vec![1.0; n]),
        }
    }

    /// `A = diag(d)`; `b` defaults to zero.
    pub fn diagonal(d: &[f64], b: Option<DVector<f64>>) -> Result<Self> {
        if let Some(&bad) = d.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::invalid(format!("diagonal entry {bad} is negative")));
        }
        let b = b.unwrap_or_else(|| DVector::zeros(d.len()));
        check_dim(d.len(), b.len())?;
        Ok(QuadraticSpec {
            a: SymMatrix::Dense(DMatrix::from_diagonal(&DVector::from_column_slice(d))),
            b,
            spectrum: Some(d.to_vec()),
        })
    }

    /// `A = Q diag(λ) Qᵀ` for an orthogonal `Q`. The product is symmetrised so
    /// `A` is stored exactly symmetric.
    pub fn from_spectrum(eigenvalues: &[f64], q: &DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        if let Some(&bad) = eigenvalues.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::invalid(format!("eigenvalue {bad} is negative")));
        }
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: q.nrows() });
        }
        check_dim(n, b.len())?;
        let mut scaled = q.clone();
        for (j, lambda) in eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*lambda);
        }
        let a = &scaled * q.transpose();
        let a = (&a + a.transpose()) * 0.5;
        Ok(QuadraticSpec { a: SymMatrix::Dense(a), b, spectrum: Some(eigenvalues.to_vec()) })
    }

    /// Random ill-conditioned SPD instance: Haar-like orthogonal basis from
    /// the QR factor of a seeded Gaussian matrix, eigenvalues log-uniform in
    /// `[1e-6, 1]` with the two ends pinned exactly, and standard Gaussian `b`.
    pub fn random_ill_conditioned(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = g.qr().q();
        let (lo, hi) = (1e-6_f64.ln(), 0.0_f64);
        let mut spectrum: Vec<f64> = (0..dim).map(|_| (lo + (hi - lo) * rng.random::<f64>()).exp()).collect();
        spectrum[0] = 1e-6;
        if dim > 1 {
            spectrum[1] = 1.0;
        }
        let b = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        Self::from_spectrum(&spectrum, &q, b)
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    /// Eigenvalues of `A` when known by construction (unordered).
    pub fn spectrum(&self) -> Option<&[f64]> {
        self.spectrum.as_deref()
    }

    pub fn condition_number(&self) -> Option<f64> {
        let s = self.spectrum.as_ref()?;
        let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
        Some(max / min)
    }
}

/// Tridiagonal `2, -1` matrix with `b = 0`; the classic worst case for
/// first-order methods. Eigenvalues `4 sin²(kπ / (2(n+1)))`, `k = 1..n`.
pub fn nesterov_worst_case(n: usize) -> Result<QuadraticSpec> {
    if n < 2 {
        return Err(Error::invalid(format!("worst-case quadratic needs n >= 2, got {n}")));
    }
    let spectrum = (1..=n)
        .map(|k| {
            let s = (k as f64 * std::f64::consts::PI / (2.0 * (n as f64 + 1.0))).sin();
            4.0 * s * s
        })
        .collect();
    Ok(QuadraticSpec {
        a: SymMatrix::Tridiagonal { diag: vec![2.0; n], off: vec![-1.0; n - 1] },
        b: DVector::zeros(n),
        spectrum: Some(spectrum),
    })
}

#[derive(Debug, Clone)]
pub struct Quadratic {
    spec: QuadraticSpec,
}

pub fn quadratic(spec: QuadraticSpec) -> Quadratic {
    Quadratic { spec }
}

impl Quadratic {
    pub fn spec(&self) -> &QuadraticSpec {
        &self.spec
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        self.value_and_gradient(x).map(|(f, _)| f)
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.spec.a.mul_vec(x) + &self.spec.b)
    }

    fn value_and_gradient(&self, x: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        check_dim(self.dim(), x.len())?;
        let ax = self.spec.a.mul_vec(x);
        let f = 0.5 * x.dot(&ax) + self.spec.b.dot(x);
        Ok((f, ax + &self.spec.b))
    }

    fn hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(self.spec.a.to_dense())
    }
}
