//! Super-superradiance: the superradiant pole Γ_u, its maximum over the
//! separation, the pole collision at the maximizer, and scaling with N.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfn::CharFn;
use crate::error::{Result, SsrError};
use crate::params::{ChainParams, Mode};
use crate::rootfind::{find_collective_rates, Pole, PoleSearch, SearchWindow};

/// Scale of the critical separation, `L_c ≈ β̂ / N²`.
pub const BETA_HAT: f64 = 1.76;
const GOLDEN: f64 = 0.618_033_988_749_894_8;
/// Relative amount by which the collision refinement may undercut the
/// golden-section value and still be accepted.
pub const COALESCENCE_ACCEPT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsrResult {
    pub n_qubits: usize,
    /// Separation maximizing `Re Γ_u` [γ₀⁻¹].
    pub l_critical: f64,
    /// `Γ_u` at `l_critical` [γ₀].
    pub gamma_ssr: Complex64,
    /// Whether the maximizer was refined onto a two-pole collision.
    pub coalescence: bool,
    pub evaluations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n_qubits: usize,
    /// `|α N - Re Γ_SSR| / Re Γ_SSR`
    pub gamma_deviation: f64,
    /// `|β N⁻² - L_c| / L_c`
    pub l_deviation: f64,
    pub in_fit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_stderr: f64,
    pub beta_stderr: f64,
    pub n_min_fit: usize,
    pub points: Vec<FitPoint>,
}

fn require_sr(params: &ChainParams) -> Result<()> {
    if params.mode != Mode::SrCondition {
        return Err(SsrError::Contract("requires sr-condition mode".into()));
    }
    Ok(())
}

/// The nonzero pole nearest the origin under the superradiant condition, Γ_u.
pub fn superradiant_pole(params: &ChainParams) -> Result<Pole> {
    require_sr(params)?;
    let search = find_collective_rates(params, &SearchWindow::default_for(params.n_qubits))?;
    let pole = search.nonzero().next().copied();
    pole.ok_or(SsrError::WindowExhausted)
}

pub fn default_bracket(n_qubits: usize) -> (f64, f64) {
    if n_qubits < 4 {
        (0.05, 2.0)
    } else {
        let scale = BETA_HAT / (n_qubits * n_qubits) as f64;
        (0.2 * scale, 3.0 * scale)
    }
}

/// Imaginary part of the deflated characteristic function on the axis
/// `Δ = -iy`, where it is purely imaginary.
pub fn axis_function(n_qubits: usize, separation: f64, y: f64) -> Result<f64> {
    let p = ChainParams::sr(n_qubits, separation)?;
    Ok(CharFn::deflated(p)?.eval(Complex64::new(0.0, -y)).im)
}

/// Solve `H = 0`, `∂H/∂y = 0` for the collision of two poles on the axis
/// `Δ = -iy`, by Newton's method in `(y, L)` from `(y0, l0)`.
/// Returns `(y, L, relative residual)`.
pub fn coalescence_point(n_qubits: usize, y0: f64, l0: f64) -> Result<(f64, f64, f64)> {
    let eval = |y: f64, l: f64| -> Result<(f64, f64, f64)> {
        let dy = 1e-4 * y.abs().max(1e-3);
        let hm = axis_function(n_qubits, l, y - dy)?;
        let h0 = axis_function(n_qubits, l, y)?;
        let hp = axis_function(n_qubits, l, y + dy)?;
        Ok((h0, (hp - hm) / (2.0 * dy), (hp - 2.0 * h0 + hm) / (dy * dy)))
    };
    let (mut y, mut l) = (y0, l0);
    for _ in 0..50 {
        let (h, hy, hyy) = eval(y, l)?;
        let dl = 1e-6 * l;
        let (hp, hyp, _) = eval(y, l + dl)?;
        let (hm, hym, _) = eval(y, l - dl)?;
        let hl = (hp - hm) / (2.0 * dl);
        let hyl = (hyp - hym) / (2.0 * dl);
        let det = hy * hyl - hl * hyy;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let sy = (h * hyl - hl * hy) / det;
        let sl = (hy * hy - h * hyy) / det;
        // keep the iterate in a trust region around the seed
        let lam = 1.0_f64
            .min(0.2 * y.abs() / sy.abs().max(1e-300))
            .min(0.2 * l / sl.abs().max(1e-300));
        y -= lam * sy;
        l -= lam * sl;
        if !(l > 0.0) || !y.is_finite() {
            break;
        }
        if (lam * sy).abs() <= 1e-14 * y.abs() && (lam * sl).abs() <= 1e-14 * l {
            let scale = axis_scale(n_qubits, l, y)?;
            return Ok((y, l, h.abs() / scale));
        }
        if lam == 1.0 && sy.abs() <= 1e-7 * y.abs() && sl.abs() <= 1e-11 * l {
            // y is only determined to the rounding floor of the second difference
            let (h, _, _) = eval(y, l)?;
            let scale = axis_scale(n_qubits, l, y)?;
            return Ok((y, l, h.abs() / scale));
        }
    }
    Err(SsrError::RefinementFailure {
        best: Complex64::new(0.0, -y),
        residual: f64::INFINITY,
    })
}

/// Magnitude of the terms that cancel in the deflated function.
fn axis_scale(n_qubits: usize, separation: f64, y: f64) -> Result<f64> {
    let p = ChainParams::sr(n_qubits, separation)?;
    let d = Complex64::new(0.0, -y);
    let x = crate::charfn::sr_chebyshev_arg(&p, d);
    let (u1, u2) = crate::transfer::chebyshev_u_pair(x, n_qubits);
    Ok((u1.norm() + u2.norm()) * (1.0 + y.abs()))
}

/// Maximize `Re Γ_u` over the separation inside `bracket` (default from
/// [`default_bracket`]), then refine onto the pole collision.
pub fn maximize_over_separation(n_qubits: usize, bracket: Option<(f64, f64)>) -> Result<SsrResult> {
    if n_qubits < 2 {
        return Err(SsrError::Contract(
            "SSR requires at least two qubits".into(),
        ));
    }
    let (a, b) = bracket.unwrap_or_else(|| default_bracket(n_qubits));
    if !(a > 0.0) || !(b > a) || !b.is_finite() {
        return Err(SsrError::Domain(format!("invalid bracket ({a}, {b})")));
    }
    let mut evaluations = 0;
    let mut rate = |l: f64| -> Result<(f64, Pole)> {
        evaluations += 1;
        let pole = superradiant_pole(&ChainParams::sr(n_qubits, l)?)?;
        Ok((pole.gamma.re, pole))
    };

    // coarse unimodality check
    const COARSE: usize = 9;
    let xs: Vec<f64> = (0..COARSE)
        .map(|k| a + (b - a) * k as f64 / (COARSE - 1) as f64)
        .collect();
    let mut ys = Vec::with_capacity(COARSE);
    for &x in &xs {
        ys.push(rate(x)?.0);
    }
    let k = (0..COARSE)
        .max_by(|&i, &j| ys[i].total_cmp(&ys[j]))
        .expect("non-empty");
    if k == 0 || k == COARSE - 1 {
        return Err(SsrError::Bracket(format!(
            "maximum of Re Γ_u at the bracket end L = {}; scan a wider range",
            xs[k]
        )));
    }
    let left_ok = ys[..=k].windows(2).all(|w| w[1] >= w[0]);
    let right_ok = ys[k..].windows(2).all(|w| w[1] <= w[0]);
    if !left_ok && !right_ok {
        return Err(SsrError::Bracket(
            "Re Γ_u is not unimodal on the bracket; scan to locate the maximum".into(),
        ));
    }

    // golden section on the neighbourhood of the coarse maximum
    let (mut lo, mut hi) = (xs[k - 1], xs[k + 1]);
    let tol = 1e-10 * (b - a);
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = rate(x1)?;
    let mut f2 = rate(x2)?;
    while hi - lo > tol {
        if f1.0 >= f2.0 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = rate(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = rate(x2)?;
        }
    }
    let (l_gs, (g_gs, pole_gs)) = if f1.0 >= f2.0 { (x1, f1) } else { (x2, f2) };

    let mut result = SsrResult {
        n_qubits,
        l_critical: l_gs,
        gamma_ssr: pole_gs.gamma,
        coalescence: false,
        evaluations,
        residual: pole_gs.residual,
    };
    if let Ok((y, l, residual)) = coalescence_point(n_qubits, 0.5 * g_gs, l_gs) {
        // evaluations next to the double pole are biased upward by rounding
        if 2.0 * y >= g_gs * (1.0 - COALESCENCE_ACCEPT) && l > a && l < b {
            result.l_critical = l;
            result.gamma_ssr = Complex64::new(2.0 * y, 0.0);
            result.coalescence = true;
            result.residual = residual;
        }
    }
    Ok(result)
}

fn expand_nonzero(search: &PoleSearch) -> Vec<Pole> {
    search
        .nonzero()
        .flat_map(|p| std::iter::repeat(*p).take(p.multiplicity))
        .collect()
}

/// For each separation, the two nonzero poles nearest the origin under the
/// superradiant condition (a double pole is reported twice). The window is
/// enlarged when the default one holds fewer than two.
pub fn degenerate_pair_probe(n_qubits: usize, l_values: &[f64]) -> Result<Vec<(Pole, Pole)>> {
    let base = SearchWindow::default_for(n_qubits);
    l_values
        .iter()
        .map(|&l| {
            let params = ChainParams::sr(n_qubits, l)?;
            for scale in [1.0, 2.0, 4.0, 8.0] {
                let w = SearchWindow {
                    re_min: base.re_min * scale,
                    re_max: base.re_max * scale,
                    im_min: base.im_min * scale,
                    im_max: 0.0,
                };
                let poles = expand_nonzero(&find_collective_rates(&params, &w)?);
                if poles.len() >= 2 {
                    return Ok((poles[0], poles[1]));
                }
            }
            Err(SsrError::WindowExhausted)
        })
        .collect()
}

#[derive(Debug)]
pub struct SweepEntry {
    pub n_qubits: usize,
    pub outcome: Result<SsrResult>,
}

/// [`maximize_over_separation`] for every N with its default bracket, on a
/// pool of `jobs` workers. Output is ordered by N.
pub fn scaling_sweep(n_list: &[usize], jobs: usize) -> Result<Vec<SweepEntry>> {
    if n_list.is_empty() {
        return Err(SsrError::Contract("empty N list".into()));
    }
    if n_list.iter().any(|&n| n < 2) {
        return Err(SsrError::Contract(
            "SSR requires at least two qubits".into(),
        ));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SsrError::Contract(
            "N list must be strictly ascending".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SsrError::Contract(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        n_list
            .par_iter()
            .map(|&n| SweepEntry {
                n_qubits: n,
                outcome: maximize_over_separation(n, None),
            })
            .collect()
    }))
}

/// Least-squares fits `Re Γ_SSR = αN` and `L_c = βN⁻²` through the origin,
/// over the results with `N ≥ n_min_fit`. Deviations are reported for every
/// result.
pub fn fit_scaling(results: &[SsrResult], n_min_fit: usize) -> Result<ScalingFit> {
    let used: Vec<&SsrResult> = results.iter().filter(|r| r.n_qubits >= n_min_fit).collect();
    if used.len() < 3 {
        return Err(SsrError::Contract(format!(
            "need at least 3 results with N >= {n_min_fit}, got {}",
            used.len()
        )));
    }
    // Γ = αN
    let xs: Vec<f64> = used.iter().map(|r| r.n_qubits as f64).collect();
    let gs: Vec<f64> = used.iter().map(|r| r.gamma_ssr.re).collect();
    let (alpha, alpha_stderr) = fit_through_origin(&xs, &gs);
    // L = β N⁻²
    let us: Vec<f64> = used.iter().map(|r| (r.n_qubits as f64).powi(-2)).collect();
    let ls: Vec<f64> = used.iter().map(|r| r.l_critical).collect();
    let (beta, beta_stderr) = fit_through_origin(&us, &ls);

    let points = results
        .iter()
        .map(|r| {
            let n = r.n_qubits as f64;
            FitPoint {
                n_qubits: r.n_qubits,
                gamma_deviation: ((alpha * n - r.gamma_ssr.re) / r.gamma_ssr.re).abs(),
                l_deviation: ((beta / (n * n) - r.l_critical) / r.l_critical).abs(),
                in_fit: r.n_qubits >= n_min_fit,
            }
        })
        .collect();
    Ok(ScalingFit {
        alpha,
        beta,
        alpha_stderr,
        beta_stderr,
        n_min_fit,
        points,
    })
}

/// Slope and its standard error for `y = c·x`.
fn fit_through_origin(x: &[f64], y: &[f64]) -> (f64, f64) {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let c = sxy / sxx;
    let m = x.len() as f64;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - c * a).powi(2)).sum();
    (c, (rss / (m - 1.0) / sxx).sqrt())
}

/// Decay rates against separation at finite Ω, with the superradiant envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub separation: f64,
    /// `Re Γ_u` under the superradiant condition.
    pub envelope: f64,
    /// The N general-mode poles nearest the origin, by `Re Γ` descending.
    pub branches: Vec<Complex64>,
}

pub fn separation_profile(
    n_qubits: usize,
    omega: f64,
    l_values: &[f64],
) -> Result<Vec<ProfileRow>> {
    let window = SearchWindow::default_for(n_qubits);
    l_values
        .iter()
        .map(|&l| {
            let general = ChainParams::general(n_qubits, omega, l)?;
            let search = find_collective_rates(&general, &window)?;
            let mut branches: Vec<Complex64> = search
                .poles
                .iter()
                .flat_map(|p| std::iter::repeat(p.gamma).take(p.multiplicity))
                .take(n_qubits)
                .collect();
            branches.sort_by(|a, b| b.re.total_cmp(&a.re));
            let envelope = if l > 0.0 {
                superradiant_pole(&ChainParams::sr(n_qubits, l)?)?.gamma.re
            } else {
                n_qubits as f64
            };
            Ok(ProfileRow {
                separation: l,
                envelope,
                branches,
            })
        })
        .collect()
}
