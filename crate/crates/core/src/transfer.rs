//! 2×2 transfer-matrix algebra for the qubit chain.
//!
//! A unit cell is one qubit scattering event followed by free propagation
//! over the separation L. Every constructor here returns a unimodular
//! matrix, which lets powers be taken with the Chebyshev identity
//! `T^N = U_{N-1}(x) T - U_{N-2}(x) I`, `x = tr(T)/2`.

use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Result, SsrError};
use crate::params::{ChainParams, Phase};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerance on `|det - 1|` accepted by [`matrix_power`], relative to the
/// size of the products `a11·a22` and `a12·a21`.
pub const UNIMODULAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2c {
    pub a11: Complex64,
    pub a12: Complex64,
    pub a21: Complex64,
    pub a22: Complex64,
}

impl Mat2c {
    pub const fn new(a11: Complex64, a12: Complex64, a21: Complex64, a22: Complex64) -> Self {
        Mat2c { a11, a12, a21, a22 }
    }

    pub const fn identity() -> Self {
        Mat2c::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(d1: Complex64, d2: Complex64) -> Self {
        Mat2c::new(d1, ZERO, ZERO, d2)
    }

    pub fn det(&self) -> Complex64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> Complex64 {
        self.a11 + self.a22
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Mat2c::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.a11.norm_sqr() + self.a12.norm_sqr() + self.a21.norm_sqr() + self.a22.norm_sqr())
            .sqrt()
    }

    pub fn sub(&self, other: &Mat2c) -> Mat2c {
        Mat2c::new(
            self.a11 - other.a11,
            self.a12 - other.a12,
            self.a21 - other.a21,
            self.a22 - other.a22,
        )
    }
}

impl Mul for Mat2c {
    type Output = Mat2c;

    fn mul(self, b: Mat2c) -> Mat2c {
        Mat2c::new(
            self.a11 * b.a11 + self.a12 * b.a21,
            self.a11 * b.a12 + self.a12 * b.a22,
            self.a21 * b.a11 + self.a22 * b.a21,
            self.a21 * b.a12 + self.a22 * b.a22,
        )
    }
}

/// Single-qubit scattering matrix at complex detuning `delta`, with γ₀ = 1.
pub fn qubit_matrix(delta: Complex64) -> Result<Mat2c> {
    qubit_matrix_with_coupling(delta, 1.0)
}

/// Same as [`qubit_matrix`] with an explicit coupling; `gamma0 = 0` switches
/// the qubit off.
pub(crate) fn qubit_matrix_with_coupling(delta: Complex64, gamma0: f64) -> Result<Mat2c> {
    if delta == ZERO {
        return Err(SsrError::SingularDetuning);
    }
    let b = I * gamma0 / (delta * 2.0);
    Ok(Mat2c::new(ONE + b, b, -b, ONE - b))
}

/// Free propagation `diag(e^{-i·phase}, e^{i·phase})`.
pub fn propagation_matrix(phase: Complex64) -> Mat2c {
    propagation_from(&Phase::from_value(phase))
}

pub(crate) fn propagation_from(phase: &Phase) -> Mat2c {
    Mat2c::diag(phase.exp_neg(), phase.exp_pos())
}

/// Unit-cell transfer matrix `Q(Δ)·P(kL)` with the mode-dependent phase.
pub fn unit_cell(delta: Complex64, params: &ChainParams) -> Result<Mat2c> {
    let q = qubit_matrix(delta)?;
    Ok(q * propagation_from(&params.phase(delta)))
}

/// Chebyshev polynomials of the second kind `(U_{k-1}(x), U_{k-2}(x))`
/// with `U_{-1} = 0`, `U_0 = 1`.
pub(crate) fn chebyshev_u_pair(x: Complex64, k: usize) -> (Complex64, Complex64) {
    // returns (U_{k-1}, U_{k-2})
    let mut cur = ONE;
    let mut prev = ZERO;
    for _ in 1..k {
        let next = x * cur * 2.0 - prev;
        prev = cur;
        cur = next;
    }
    if k == 0 {
        (ZERO, -ONE)
    } else {
        (cur, prev)
    }
}

/// `T^n` for unimodular `T` via `T^n = U_{n-1}(x) T - U_{n-2}(x) I`.
pub fn matrix_power(t: &Mat2c, n: usize) -> Result<Mat2c> {
    if n == 0 {
        return Err(SsrError::Contract("matrix power requires N >= 1".into()));
    }
    let det = t.det();
    let scale = 1.0 + (t.a11 * t.a22).norm() + (t.a12 * t.a21).norm();
    if (det - ONE).norm() > UNIMODULAR_TOL * scale {
        return Err(SsrError::NonUnimodular { det });
    }
    let x = t.trace() * 0.5;
    let (u1, u2) = chebyshev_u_pair(x, n);
    Ok(Mat2c::new(
        t.a11 * u1 - u2,
        t.a12 * u1,
        t.a21 * u1,
        t.a22 * u1 - u2,
    ))
}

/// Transmission and reflection amplitudes for a photon incident from the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scattering {
    pub t: Complex64,
    pub r: Complex64,
}

impl Scattering {
    /// `|t|² + |r|²`, equal to 1 for lossless scattering.
    pub fn flux(&self) -> f64 {
        self.t.norm_sqr() + self.r.norm_sqr()
    }
}

/// On-shell scattering of the whole chain at real detuning `delta`.
pub fn scattering(delta: f64, params: &ChainParams) -> Result<Scattering> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(SsrError::SingularDetuning);
    }
    let cell = unit_cell(Complex64::new(delta, 0.0), params)?;
    let tn = matrix_power(&cell, params.n_qubits)?;
    if tn.a11 == ZERO {
        return Err(SsrError::OnResonancePole { delta });
    }
    let t = ONE / tn.a11;
    Ok(Scattering { t, r: tn.a21 * t })
}
