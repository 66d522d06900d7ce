//! Linearized analysis of the symplectic Euler scheme on a quadratic.
//!
//! Around a minimum with Hessian `A` the scheme is the linear map
//! `(y, v) ↦ M (y, v)` with `M = [[I - h²A, hI], [-hA, I]]`. Rotating by the
//! eigenvectors of `A` splits `M` into independent 2×2 blocks
//! `T = [[1 - ω²h², h], [-ω²h, 1]]`, one per eigenfrequency `ω`. For
//! `0 < hω < 2` each block is a rotation in disguise with eigenvalues
//! `e^{±iθ}`, `cos θ = 1 - h²ω²/2`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};

/// Upper end of the window where the phase angles are used.
pub const PHASE_WINDOW: f64 = std::f64::consts::SQRT_2;
/// Largest `hω` accepted by [`approximate_phase`].
pub const SMALL_PHASE_LIMIT: f64 = 0.1;

fn symmetric(a: &DMatrix<f64>) -> bool {
    let scale = a.amax().max(1.0);
    a.is_square() && (a - a.transpose()).amax() <= 1e-12 * scale
}

/// The one-step map of the linearized scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub m: DMatrix<f64>,
    pub h: f64,
    pub a: DMatrix<f64>,
}

impl TransferMatrix {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `M (y, v)`.
    pub fn apply(&self, y: &DVector<f64>, v: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let n = self.dim();
        check_dim(n, y.len())?;
        check_dim(n, v.len())?;
        let mut z = DVector::zeros(2 * n);
        z.rows_mut(0, n).copy_from(y);
        z.rows_mut(n, n).copy_from(v);
        let out = &self.m * z;
        Ok((out.rows(0, n).into_owned(), out.rows(n, n).into_owned()))
    }

    pub fn determinant(&self) -> f64 {
        self.m.determinant()
    }
}

/// Builds `M` for Hessian `a` and step `h`.
pub fn build_transfer(a: &DMatrix<f64>, h: f64) -> Result<TransferMatrix> {
    if !symmetric(a) {
        return Err(Error::NotSymmetric);
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(format!("h must be positive, got {h}")));
    }
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&(&id - (h * h) * a));
    m.view_mut((0, n), (n, n)).copy_from(&(h * &id));
    m.view_mut((n, 0), (n, n)).copy_from(&(-h * a));
    m.view_mut((n, n), (n, n)).copy_from(&id);
    Ok(TransferMatrix { m, h, a: a.clone() })
}

/// One linearized symplectic Euler step `v' = v - hAy`, `y' = y + hv'`.
pub fn linearized_step(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> (DVector<f64>, DVector<f64>) {
    let v_next = v - h * (a * y);
    let y_next = y + h * &v_next;
    (y_next, v_next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAngles {
    pub theta: f64,
    pub phi: f64,
}

/// `θ = arccos(1 - h²ω²/2)` and `φ = arccos(hω/2)`, for `0 < hω < √2`.
///
/// Computed as `2 asin(hω/2)` and `acos(hω/2)`, which avoids the
/// cancellation in `1 - h²ω²/2` for small `hω`.
pub fn phase_angles(omega: f64, h: f64) -> Result<PhaseAngles> {
    let hw = h * omega;
    if !(hw > 0.0 && hw < PHASE_WINDOW) {
        return Err(Error::invalid(format!("phase angles need 0 < hω < √2, got hω = {hw}")));
    }
    Ok(PhaseAngles { theta: 2.0 * (0.5 * hw).asin(), phi: (0.5 * hw).acos() })
}

/// One eigenfrequency of `A` and its 2×2 block of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBlock {
    pub omega: f64,
    pub h: f64,
    /// `None` for drift modes (`ω = 0`) and outside the phase window.
    pub angles: Option<PhaseAngles>,
    pub t: Matrix2<f64>,
}

impl ModeBlock {
    pub fn new(omega: f64, h: f64) -> Result<Self> {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::invalid(format!("omega must be non-negative, got {omega}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::invalid(format!("h must be positive, got {h}")));
        }
        let w2 = omega * omega;
        let t = Matrix2::new(1.0 - w2 * h * h, h, -w2 * h, 1.0);
        Ok(ModeBlock { omega, h, angles: phase_angles(omega, h).ok(), t })
    }

    pub fn h_omega(&self) -> f64 {
        self.h * self.omega
    }

    /// Iterations until this mode's speed first peaks, `π / (2hω)`.
    pub fn first_reset_estimate(&self) -> f64 {
        FRAC_PI_2 / self.h_omega()
    }

    /// `T^k` by repeated multiplication.
    pub fn power_by_multiplication(&self, k: usize) -> Matrix2<f64> {
        let mut p = Matrix2::identity();
        for _ in 0..k {
            p *= self.t;
        }
        p
    }
}

/// Eigenvalues `1 - h²ω²/2 ± i hω √(1 - h²ω²/4)` of a block, `0 < hω < 2`.
pub fn block_eigenvalues(mb: &ModeBlock) -> Result<(Complex64, Complex64)> {
    let hw = mb.h_omega();
    if !(hw > 0.0 && hw < 2.0) {
        return Err(Error::invalid(format!("block eigenvalues need 0 < hω < 2, got {hw}")));
    }
    let re = 1.0 - 0.5 * hw * hw;
    let im = hw * (1.0 - 0.25 * hw * hw).sqrt();
    Ok((Complex64::new(re, im), Complex64::new(re, -im)))
}

/// Closed-form `T^k`.
///
/// For `0 < hω < √2` the entries are `-sin(kθ-φ)/sin φ`, `sin(kθ)/(ω sin φ)`,
/// `-ω sin(kθ)/sin φ`, `sin(kθ+φ)/sin φ`. A drift mode gives `[[1, kh], [0, 1]]`.
pub fn block_power_closed_form(mb: &ModeBlock, k: usize) -> Result<Matrix2<f64>> {
    if mb.omega == 0.0 {
        return Ok(Matrix2::new(1.0, k as f64 * mb.h, 0.0, 1.0));
    }
    let PhaseAngles { theta, phi } =
        mb.angles.ok_or_else(|| Error::invalid(format!("hω = {} is outside (0, √2)", mb.h_omega())))?;
    let kt = k as f64 * theta;
    let sp = phi.sin();
    let w = mb.omega;
    Ok(Matrix2::new(-(kt - phi).sin() / sp, kt.sin() / (w * sp), -w * kt.sin() / sp, (kt + phi).sin() / sp))
}

/// Splitting of `M` into mode blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonalization {
    /// Blocks in ascending order of `ω`.
    pub blocks: Vec<ModeBlock>,
    /// Orthogonal `U` with `UᵀMU = blockdiag(T_1, …, T_n)`. Columns `2i` and
    /// `2i+1` are the i-th eigenvector of `A` placed in the position and the
    /// velocity half respectively.
    pub u: DMatrix<f64>,
}

impl BlockDiagonalization {
    pub fn block_diagonal(&self) -> DMatrix<f64> {
        let n = self.blocks.len();
        let mut d = DMatrix::zeros(2 * n, 2 * n);
        for (i, b) in self.blocks.iter().enumerate() {
            d.view_mut((2 * i, 2 * i), (2, 2)).copy_from(&b.t);
        }
        d
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.omega).collect()
    }
}

/// Eigenvalues of a symmetric PSD matrix, ascending, with round-off
/// negatives clamped to zero, and the matching orthonormal eigenvectors.
pub fn psd_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if !symmetric(a) {
        return Err(Error::NotSymmetric);
    }
    let n = a.nrows();
    let eig = a.clone().try_symmetric_eigen(f64::EPSILON, 0).ok_or(Error::Eigen)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let scale = eig.eigenvalues.amax().max(1.0);
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut l = eig.eigenvalues[i];
        if l < 0.0 {
            if l.abs() >= 1e-12 * scale {
                return Err(Error::invalid(format!("matrix has negative eigenvalue {l}")));
            }
            l = 0.0;
        }
        values.push(l);
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors))
}

pub fn block_diagonalize(tm: &TransferMatrix) -> Result<BlockDiagonalization> {
    let n = tm.dim();
    let (values, u1) = psd_eigen(&tm.a)?;
    let mut u = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        u.view_mut((0, 2 * i), (n, 1)).copy_from(&u1.column(i));
        u.view_mut((n, 2 * i + 1), (n, 1)).copy_from(&u1.column(i));
    }
    let blocks = values.iter().map(|&l| ModeBlock::new(l.sqrt(), tm.h)).collect::<Result<_>>()?;
    Ok(BlockDiagonalization { blocks, u })
}

/// Small-`hω` approximation of a mode's evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseApproximation {
    /// `θ ≈ hω`.
    pub theta: f64,
    /// `φ ≈ π/2`.
    pub phi: f64,
    /// Bound on `|θ_exact - hω|`.
    pub error_bound: f64,
    omega: f64,
    h: f64,
}

impl PhaseApproximation {
    /// `[[cos(khω), sin(khω)/ω], [-ω sin(khω), -cos(khω)]]`, with the
    /// (2,2) sign as it is usually printed. This is not the identity at
    /// `k = 0`; see [`PhaseApproximation::evolution`].
    pub fn evolution_as_printed(&self, k: usize) -> Matrix2<f64> {
        let mut m = self.evolution(k);
        m[(1, 1)] = -m[(1, 1)];
        m
    }

    /// `[[cos(khω), sin(khω)/ω], [-ω sin(khω), cos(khω)]]`, the exact flow
    /// of the continuous oscillator over time `kh`.
    pub fn evolution(&self, k: usize) -> Matrix2<f64> {
        let a = k as f64 * self.h * self.omega;
        let (s, c) = a.sin_cos();
        Matrix2::new(c, s / self.omega, -self.omega * s, c)
    }
}

/// Phase approximation `θ ≈ hω`, `φ ≈ π/2` for `0 < hω < 0.1`.
pub fn approximate_phase(omega: f64, h: f64) -> Result<PhaseApproximation> {
    let hw = h * omega;
    if !(hw > 0.0 && hw < SMALL_PHASE_LIMIT) {
        return Err(Error::invalid(format!(
            "small-phase approximation needs 0 < hω < {SMALL_PHASE_LIMIT}, got {hw}"
        )));
    }
    // 2 asin(x/2) = x + x³/24 + 3x⁵/640 + …
    let error_bound = hw.powi(3) / 24.0 + hw.powi(5) / 100.0;
    Ok(PhaseApproximation { theta: hw, phi: FRAC_PI_2, error_bound, omega, h })
}

/// Per-step decay factor `exp(-tan(ξ) hω)` for `ξ ∈ (0, π/2)`.
pub fn decay_coefficient(xi: f64, omega: f64, h: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < FRAC_PI_2) {
        return Err(Error::invalid(format!("xi must lie in (0, π/2), got {xi}")));
    }
    let hw = h * omega;
    if !(hw >= 0.0) || !hw.is_finite() {
        return Err(Error::invalid(format!("hω must be non-negative, got {hw}")));
    }
    Ok((-xi.tan() * hw).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticMethod {
    Gradient,
    Momentum,
    Conservation,
}

/// Exact state of a continuous method on `f(x) = x²/200`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPoint {
    pub x: f64,
    pub v: f64,
    pub f: f64,
}

/// Time of the first speed maximum of the conservative flow on `x²/200`.
pub const CONSERVATION_STOP_TIME: f64 = 5.0 * PI;

/// Closed-form trajectories on `f(x) = x²/200` from `x(0) = x0`, `ẋ(0) = 0`:
///
/// * gradient flow `ẋ = -f'(x)`: `x0 e^{-t/100}`
/// * heavy ball `ẍ + ẋ/5 + f'(x) = 0`: `x0 (1 + t/10) e^{-t/10}`
/// * conservative `ẍ = -f'(x)`: `x0 cos(t/10)`
///
/// `v` is the exact time derivative of `x`.
pub fn analytic_demo_1d(method: AnalyticMethod, x0: f64, t: f64) -> AnalyticPoint {
    let (x, v) = match method {
        AnalyticMethod::Gradient => {
            let e = (-t / 100.0).exp();
            (x0 * e, -x0 / 100.0 * e)
        }
        AnalyticMethod::Momentum => {
            let e = (-t / 10.0).exp();
            (x0 * (1.0 + t / 10.0) * e, -x0 * t / 100.0 * e)
        }
        AnalyticMethod::Conservation => {
            let (s, c) = (t / 10.0).sin_cos();
            (x0 * c, -x0 / 10.0 * s)
        }
    };
    AnalyticPoint { x, v, f: x * x / 200.0 }
}
