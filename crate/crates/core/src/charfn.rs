//! The characteristic function `f(Δ) = Δ^N (T^N)₁₁` whose zeros are the
//! collective poles, in all three phase modes.
//!
//! Multiplying by `Δ^N` is done symbolically: with `A = Δ·Q(Δ)·P` the product
//! `Δ^N T^N = A^N` is formed through the Cayley–Hamilton recurrence
//! `S_k = tr(A) S_{k-1} - det(A) S_{k-2}`, where `tr(A) = 2Δ cos φ + sin φ`
//! and `det(A) = Δ²` are both entire. No `1/Δ` ever appears, so the function
//! is evaluated directly at the origin.
//!
//! Under the superradiant condition `tr(A) = 2Δ·x(Δ)` with
//! `x = ±(cos ΔL + sin(ΔL)/(2Δ))`, giving `S_k = Δ^k U_k(x)` and
//! `f = Δ^{N-1} h(Δ)`. The deflated function `h` is evaluated from the
//! Chebyshev form and has no zero at the origin.

use num_complex::Complex64;

use crate::error::{Result, SsrError};
use crate::params::{ChainParams, Mode};
use crate::poly;
use crate::transfer::chebyshev_u_pair;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deflation {
    /// Plain `Δ^N (T^N)₁₁`.
    None,
    /// `Δ (T^N)₁₁`, i.e. the `N-1` zero modes at the origin divided out.
    /// Only valid under the superradiant condition.
    Origin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharFn {
    params: ChainParams,
    deflation: Deflation,
}

impl CharFn {
    pub fn new(params: ChainParams, deflation: Deflation) -> Result<Self> {
        params.validate()?;
        if deflation == Deflation::Origin && params.mode != Mode::SrCondition {
            return Err(SsrError::Contract(
                "origin deflation requires sr-condition mode".into(),
            ));
        }
        Ok(CharFn { params, deflation })
    }

    pub fn undeflated(params: ChainParams) -> Result<Self> {
        Self::new(params, Deflation::None)
    }

    pub fn deflated(params: ChainParams) -> Result<Self> {
        Self::new(params, Deflation::Origin)
    }

    /// The function the pole search should use for these parameters:
    /// deflated under the superradiant condition, plain otherwise.
    pub fn for_search(params: ChainParams) -> Result<Self> {
        match params.mode {
            Mode::SrCondition => Self::deflated(params),
            _ => Self::undeflated(params),
        }
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn deflation(&self) -> Deflation {
        self.deflation
    }

    pub fn deflation_order(&self) -> usize {
        match self.deflation {
            Deflation::None => 0,
            Deflation::Origin => self.params.n_qubits - 1,
        }
    }

    pub fn eval(&self, delta: Complex64) -> Complex64 {
        match self.deflation {
            Deflation::None => eval_full(&self.params, delta),
            Deflation::Origin => eval_deflated(&self.params, delta),
        }
    }
}

fn eval_full(params: &ChainParams, delta: Complex64) -> Complex64 {
    let n = params.n_qubits;
    let phase = params.phase(delta);
    let tr = delta * phase.cos() * 2.0 + phase.sin();
    let det = delta * delta;
    // S_{N-1}, S_{N-2}
    let mut cur = ONE;
    let mut prev = ZERO;
    for _ in 1..n {
        let next = tr * cur - det * prev;
        prev = cur;
        cur = next;
    }
    cur * (delta + I * 0.5) * phase.exp_neg() - det * prev
}

/// `sin(z)/z`, entire.
fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        ONE - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Chebyshev argument `x = tr(T)/2` under the superradiant condition; entire in Δ.
pub fn sr_chebyshev_arg(params: &ChainParams, delta: Complex64) -> Complex64 {
    let dl = delta * params.separation;
    (dl.cos() + sinc(dl) * (params.separation * 0.5)) * params.sr_sign()
}

fn eval_deflated(params: &ChainParams, delta: Complex64) -> Complex64 {
    let n = params.n_qubits;
    let x = sr_chebyshev_arg(params, delta);
    let (u1, u2) = chebyshev_u_pair(x, n);
    let phase = params.phase(delta);
    u1 * (delta + I * 0.5) * phase.exp_neg() - delta * u2
}

/// Coefficients (ascending, monic) of the degree-N Markovian characteristic
/// polynomial.
pub fn markovian_polynomial(params: &ChainParams) -> Result<Vec<Complex64>> {
    params.validate()?;
    if params.mode != Mode::Markovian {
        return Err(SsrError::Contract(
            "markovian_polynomial requires markovian mode".into(),
        ));
    }
    let n = params.n_qubits;
    let phase = params.phase(ZERO);
    let tr = [phase.sin(), phase.cos() * 2.0];
    let det = [ZERO, ZERO, ONE];
    let mut cur = vec![ONE];
    let mut prev: Vec<Complex64> = Vec::new();
    for _ in 1..n {
        let next = poly::sub(&poly::mul(&tr, &cur), &poly::mul(&det, &prev));
        prev = cur;
        cur = next;
    }
    let e = phase.exp_neg();
    let first = poly::mul(&cur, &[I * 0.5 * e, e]);
    let mut coeffs = poly::sub(&first, &poly::mul(&det, &prev));
    coeffs.truncate(n + 1);
    let lead = coeffs[n];
    if lead == ZERO {
        return Err(SsrError::Contract("degenerate Markovian polynomial".into()));
    }
    for c in coeffs.iter_mut() {
        *c /= lead;
    }
    Ok(coeffs)
}

/// All N Markovian poles (with multiplicity).
pub fn markovian_roots(params: &ChainParams) -> Result<Vec<Complex64>> {
    Ok(poly::roots(&markovian_polynomial(params)?))
}

/// Residuals of the closed-form pole system
/// `cos λ = cos(pL) + sin(pL)/(2p)` and
/// `(p + i/2) sin(λN) = e^{ipL} p sin(λ(N-1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormResidual {
    pub res_a: Complex64,
    pub res_b: Complex64,
    pub lambda: Complex64,
}

impl ClosedFormResidual {
    pub fn max_norm(&self) -> f64 {
        self.res_a.norm().max(self.res_b.norm())
    }
}

pub fn closed_form_residual(p: Complex64, params: &ChainParams) -> Result<ClosedFormResidual> {
    params.validate()?;
    if params.mode != Mode::SrCondition {
        return Err(SsrError::Contract(
            "closed-form residual is defined under the superradiant condition".into(),
        ));
    }
    if p == ZERO {
        return Err(SsrError::Domain("closed-form residual at p = 0".into()));
    }
    let l = params.separation;
    let nq = params.n_qubits as f64;
    let pl = p * l;
    let rhs_a = pl.cos() + pl.sin() / (p * 2.0);
    let principal = rhs_a.acos();
    let eval_b = |lambda: Complex64| {
        (p + I * 0.5) * (lambda * nq).sin() - (I * pl).exp() * p * (lambda * (nq - 1.0)).sin()
    };
    let (lambda, res_b) = [principal, -principal]
        .into_iter()
        .map(|lam| (lam, eval_b(lam)))
        .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .expect("two candidates");
    Ok(ClosedFormResidual {
        res_a: lambda.cos() - rhs_a,
        res_b,
        lambda,
    })
}
