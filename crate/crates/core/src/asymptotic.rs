//! Large-N asymptotics: the curve `g(α, β) = 0` in the plane of the scaling
//! coefficients `Γ_SSR = αN`, `L_c = βN⁻²`, its two branches, and the
//! critical pair where they meet.
//!
//! With `τ = ½√(β(4 + α²β))`,
//! `g(α, β) = 2ατ cosh τ − (2 + α²β) sinh τ`.
//! On the line `αβ = 4` one has `τ = √(β + 4)` and
//! `g = (2/β)(4τ cosh τ − (τ² + 4) sinh τ)`, so the critical pair follows
//! from a scalar root in τ.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsrError};

/// Above this τ the hyperbolic functions are not formed explicitly.
pub const TAU_OVERFLOW: f64 = 300.0;
pub const ALPHA_MAX: f64 = 50.0;
const ALPHA_MIN: f64 = 1e-4;
const GRID_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPair {
    pub alpha_c: f64,
    pub beta_c: f64,
    pub tau_c: f64,
    /// `|g(α_c, β_c)|`
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPair {
    pub beta: f64,
    pub alpha_small: Option<f64>,
    pub alpha_large: Option<f64>,
}

impl BranchPair {
    pub fn count(&self) -> usize {
        self.alpha_small.is_some() as usize + self.alpha_large.is_some() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Small,
    Critical,
    Large,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Small => "small",
            Branch::Critical => "critical",
            Branch::Large => "large",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    pub beta: f64,
    pub alpha: f64,
    pub branch: Branch,
}

pub fn tau(alpha: f64, beta: f64) -> f64 {
    0.5 * (beta * (4.0 + alpha * alpha * beta)).sqrt()
}

/// `g(α, β)`. For `τ > 300` only the sign survives and `±f64::MAX` is returned.
pub fn g_eval(alpha: f64, beta: f64) -> Result<f64> {
    if !(beta >= 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(SsrError::Domain(format!(
            "g is defined for finite alpha and beta >= 0, got ({alpha}, {beta})"
        )));
    }
    let t = tau(alpha, beta);
    let a = 2.0 * alpha * t;
    let b = 2.0 + alpha * alpha * beta;
    if t > TAU_OVERFLOW {
        // g ≈ e^τ/2 · (a - b)
        let lead = a - b;
        return Ok(if lead == 0.0 {
            0.0
        } else {
            lead.signum() * f64::MAX
        });
    }
    Ok(a * t.cosh() - b * t.sinh())
}

/// `e^{-τ} g(α, β)`, finite for all arguments.
fn g_scaled(alpha: f64, beta: f64) -> f64 {
    let t = tau(alpha, beta);
    let e = (-2.0 * t).exp();
    let a = 2.0 * alpha * t;
    let b = 2.0 + alpha * alpha * beta;
    0.5 * (a * (1.0 + e) - b * (1.0 - e))
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section maximum of `f` on `[lo, hi]`.
fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const R: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - R * (hi - lo);
    let mut x2 = lo + R * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - R * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + R * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Real roots of `g(·, β)` on `α ∈ (0, 50]`: sign changes on a log-spaced
/// grid refined by bisection, plus a search for near-tangent maxima that
/// the grid steps over. Two roots closer than 1e-6 count as one.
pub fn solve_branches(beta: f64) -> Result<BranchPair> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(SsrError::Domain(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let f = |a: f64| g_scaled(a, beta);
    let ratio = (ALPHA_MAX / ALPHA_MIN).ln() / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| ALPHA_MIN * (ratio * i as f64).exp())
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&a| f(a)).collect();
    let mut roots = Vec::new();
    for i in 1..GRID_POINTS {
        let (a0, a1) = (grid[i - 1], grid[i]);
        let (v0, v1) = (vals[i - 1], vals[i]);
        if v1 == 0.0 {
            roots.push(a1);
        } else if v0 != 0.0 && (v0 > 0.0) != (v1 > 0.0) {
            roots.push(bisect(&f, a0, a1, 1e-12 * a1));
        }
    }
    // tangent or nearly tangent maxima hidden between negative samples
    for i in 1..GRID_POINTS - 1 {
        if vals[i] < 0.0 && vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
            let (am, vm) = golden_max(&f, grid[i - 1], grid[i + 1], 1e-13 * grid[i]);
            // a maximum within rounding of zero is a double root
            let noise = 1e-13 * (2.0 * am * tau(am, beta) + 2.0 + am * am * beta);
            if vm >= -noise {
                if vm <= noise {
                    roots.push(am);
                } else {
                    roots.push(bisect(&f, grid[i - 1], am, 1e-12 * am));
                    roots.push(bisect(&f, am, grid[i + 1], 1e-12 * am));
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    let pair = match roots.as_slice() {
        [] => BranchPair {
            beta,
            alpha_small: None,
            alpha_large: None,
        },
        [r] => BranchPair {
            beta,
            alpha_small: Some(*r),
            alpha_large: None,
        },
        [s, .., l] => BranchPair {
            beta,
            alpha_small: Some(*s),
            alpha_large: Some(*l),
        },
    };
    Ok(pair)
}

/// `(4τ cosh τ − (τ² + 4) sinh τ) e^{-τ}`
fn reduced(t: f64) -> f64 {
    let e = (-2.0 * t).exp();
    0.5 * (4.0 * t * (1.0 + e) - (t * t + 4.0) * (1.0 - e))
}

/// The point where the two branches meet, on the line `αβ = 4`.
pub fn critical_pair() -> CriticalPair {
    let tau_c = bisect(&reduced, 0.1, 20.0, 0.0);
    let beta_c = tau_c * tau_c - 4.0;
    let alpha_c = 4.0 / beta_c;
    let residual = g_eval(alpha_c, beta_c)
        .map(f64::abs)
        .unwrap_or(f64::INFINITY);
    CriticalPair {
        alpha_c,
        beta_c,
        tau_c,
        residual,
    }
}

/// Points of `g = 0` for `steps` values of β across `beta_range`, ordered as
/// one polyline: the small branch by increasing β, the critical point (when
/// in range), then the large branch by decreasing β.
pub fn trace_contour(beta_range: (f64, f64), steps: usize) -> Result<Vec<ContourPoint>> {
    if steps < 2 {
        return Err(SsrError::Contract("contour needs at least 2 steps".into()));
    }
    let (lo, hi) = beta_range;
    if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
        return Err(SsrError::Domain(format!("invalid beta range ({lo}, {hi})")));
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    for i in 0..steps {
        let beta = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
        let pair = solve_branches(beta)?;
        if let Some(alpha) = pair.alpha_small {
            small.push(ContourPoint {
                beta,
                alpha,
                branch: Branch::Small,
            });
        }
        if let Some(alpha) = pair.alpha_large {
            large.push(ContourPoint {
                beta,
                alpha,
                branch: Branch::Large,
            });
        }
    }
    let mut points = small;
    let cp = critical_pair();
    if cp.beta_c >= lo && cp.beta_c <= hi {
        points.push(ContourPoint {
            beta: cp.beta_c,
            alpha: cp.alpha_c,
            branch: Branch::Critical,
        });
    }
    points.extend(large.into_iter().rev());
    Ok(points)
}
