use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::Objective;
use crate::error::{check_dim, Error, Result};

/// `f(x) = ½ Σ (xᵢ⁴ - 16xᵢ² + 5xᵢ)`. Separable with two minima per axis,
/// near -2.9035 (global) and 2.7468.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StyblinskiTang {
    dim: usize,
}

pub fn styblinski_tang(dim: usize) -> Result<StyblinskiTang> {
    if dim == 0 {
        return Err(Error::invalid("Styblinski-Tang needs dimension >= 1"));
    }
    Ok(StyblinskiTang { dim })
}

impl Objective for StyblinskiTang {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(0.5 * x.iter().map(|&xi| xi.powi(4) - 16.0 * xi * xi + 5.0 * xi).sum::<f64>())
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim, x.len())?;
        Ok(x.map(|xi| 2.0 * xi.powi(3) - 16.0 * xi + 2.5))
    }

    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        (x.len() == self.dim).then(|| DMatrix::from_diagonal(&x.map(|xi| 6.0 * xi * xi - 16.0)))
    }
}

pub const SHEKEL_BETA: [f64; 10] = [0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5];

/// Column `i` is the centre of the i-th well.
pub const SHEKEL_C: [[f64; 10]; 4] = [
    [4.0, 1.0, 8.0, 6.0, 3.0, 2.0, 5.0, 8.0, 6.0, 7.0],
    [4.0, 1.0, 8.0, 6.0, 7.0, 9.0, 3.0, 1.0, 2.0, 3.6],
    [4.0, 1.0, 8.0, 6.0, 3.0, 2.0, 5.0, 8.0, 6.0, 7.0],
    [4.0, 1.0, 8.0, 6.0, 7.0, 9.0, 3.0, 1.0, 2.0, 3.6],
];

#[derive(Debug, Clone, PartialEq)]
pub struct ShekelSpec {
    pub m: usize,
    pub beta: [f64; 10],
    pub c: [[f64; 10]; 4],
}

impl ShekelSpec {
    /// The standard instance with `m` wells, `m ∈ {5, 7, 10}`.
    pub fn new(m: usize) -> Result<Self> {
        if ![5, 7, 10].contains(&m) {
            return Err(Error::invalid(format!("Shekel m must be 5, 7 or 10, got {m}")));
        }
        Ok(ShekelSpec { m, beta: SHEKEL_BETA, c: SHEKEL_C })
    }

    fn centre(&self, i: usize) -> [f64; 4] {
        [self.c[0][i], self.c[1][i], self.c[2][i], self.c[3][i]]
    }
}

/// `f(x) = -Σᵢ (‖x - cᵢ‖² + βᵢ)⁻¹` on `R⁴`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shekel {
    spec: ShekelSpec,
}

pub fn shekel(spec: ShekelSpec) -> Shekel {
    Shekel { spec }
}

impl Shekel {
    fn terms(&self, x: &DVector<f64>) -> impl Iterator<Item = ([f64; 4], f64)> + '_ {
        let x = [x[0], x[1], x[2], x[3]];
        (0..self.spec.m).map(move |i| {
            let c = self.spec.centre(i);
            let d = [x[0] - c[0], x[1] - c[1], x[2] - c[2], x[3] - c[3]];
            let q: f64 = d.iter().map(|v| v * v).sum();
            (d, q + self.spec.beta[i])
        })
    }
}

impl Objective for Shekel {
    fn dim(&self) -> usize {
        4
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(4, x.len())?;
        Ok(-self.terms(x).map(|(_, den)| 1.0 / den).sum::<f64>())
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(4, x.len())?;
        let mut g = DVector::zeros(4);
        for (d, den) in self.terms(x) {
            let w = 2.0 / (den * den);
            for j in 0..4 {
                g[j] += w * d[j];
            }
        }
        Ok(g)
    }

    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        if x.len() != 4 {
            return None;
        }
        let mut h = DMatrix::zeros(4, 4);
        for (d, den) in self.terms(x) {
            let diag = 2.0 / (den * den);
            let outer = -8.0 / (den * den * den);
            for r in 0..4 {
                h[(r, r)] += diag;
                for c in 0..4 {
                    h[(r, c)] += outer * d[r] * d[c];
                }
            }
        }
        Some(h)
    }
}

/// Three cosine wells glued at 2π and 4π:
/// `2cos x` on `[0, 2π]`, `cos x + 1` on `[2π, 4π]`, `3cos x - 1` on `[4π, 6π]`.
///
/// Minima at π (-2), 3π (0) and 5π (-4). Evaluation outside `[0, 6π]` is an
/// error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PiecewiseCosine;

pub fn piecewise_cosine_1d() -> PiecewiseCosine {
    PiecewiseCosine
}

impl PiecewiseCosine {
    pub const DOMAIN: (f64, f64) = (0.0, 6.0 * PI);

    /// `(amplitude, offset)` of the branch containing `x`.
    fn branch(x: f64) -> Result<(f64, f64)> {
        if !(Self::DOMAIN.0..=Self::DOMAIN.1).contains(&x) {
            return Err(Error::OutOfDomain { x, domain: "[0, 6π]" });
        }
        Ok(if x <= 2.0 * PI {
            (2.0, 0.0)
        } else if x <= 4.0 * PI {
            (1.0, 1.0)
        } else {
            (3.0, -1.0)
        })
    }
}

impl Objective for PiecewiseCosine {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(1, x.len())?;
        let (a, c) = Self::branch(x[0])?;
        Ok(a * x[0].cos() + c)
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(1, x.len())?;
        let (a, _) = Self::branch(x[0])?;
        Ok(DVector::from_element(1, -a * x[0].sin()))
    }

    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let (a, _) = Self::branch(*x.get(0)?).ok()?;
        Some(DMatrix::from_element(1, 1, -a * x[0].cos()))
    }

    fn in_domain(&self, x: &DVector<f64>) -> bool {
        x.len() == 1 && Self::branch(x[0]).is_ok()
    }
}

/// `f(x) = ½[(x₁-4)² + (x₂-4)² + 8 sin(x₁ + 2x₂)]`, nominal domain `[0, 8]²`.
///
/// Evaluates everywhere; [`Objective::in_domain`] reports whether a point is
/// inside the nominal box.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SineBowl;

pub fn sine_bowl_2d() -> SineBowl {
    SineBowl
}

impl Objective for SineBowl {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(2, x.len())?;
        let (a, b) = (x[0] - 4.0, x[1] - 4.0);
        Ok(0.5 * (a * a + b * b + 8.0 * (x[0] + 2.0 * x[1]).sin()))
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(2, x.len())?;
        let c = (x[0] + 2.0 * x[1]).cos();
        Ok(DVector::from_column_slice(&[(x[0] - 4.0) + 4.0 * c, (x[1] - 4.0) + 8.0 * c]))
    }

    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        if x.len() != 2 {
            return None;
        }
        let s = (x[0] + 2.0 * x[1]).sin();
        Some(DMatrix::from_row_slice(2, 2, &[1.0 - 4.0 * s, -8.0 * s, -8.0 * s, 1.0 - 16.0 * s]))
    }

    fn in_domain(&self, x: &DVector<f64>) -> bool {
        x.len() == 2 && x.iter().all(|v| (0.0..=8.0).contains(v))
    }
}

/// `f(x) = cᵀx + offset`. Constant gradient, no minima.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    c: DVector<f64>,
    offset: f64,
}

impl Linear {
    pub fn new(c: DVector<f64>, offset: f64) -> Self {
        Linear { c, offset }
    }
}

impl Objective for Linear {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.c.len(), x.len())?;
        Ok(self.c.dot(x) + self.offset)
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.c.len(), x.len())?;
        Ok(self.c.clone())
    }
}
