//! Complex zero finding for analytic scalar functions.
//!
//! Zeros inside a rectangle are counted with the argument principle (the
//! phase of `f` is tracked around the boundary with adaptive refinement),
//! isolated by recursive quadrisection, and polished with Newton's method.
//! On top of that sit the collective-pole search for a chain and pole
//! continuation along a path of separations.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfn::{markovian_roots, CharFn};
use crate::error::{Result, SsrError};
use crate::params::{ChainParams, Mode};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Poles closer than this to the origin are zero modes.
pub const ZERO_MODE_RADIUS: f64 = 1e-6;
/// Poles closer than this (relative) are merged.
pub const MERGE_TOL: f64 = 1e-8;
/// Newton step tolerance used by the pole search.
pub const REFINE_TOL: f64 = 1e-13;
/// Largest scaled residual for an accepted pole.
pub const ACCEPT_RESIDUAL: f64 = 1e-9;
const JITTER_RETRIES: usize = 5;

/// Axis-aligned rectangle in the complex Δ plane [γ₀].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchWindow {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchWindow {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let all_finite = [re_min, re_max, im_min, im_max]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite || re_min >= re_max || im_min >= im_max {
            return Err(SsrError::Domain(format!(
                "invalid search window [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(SearchWindow {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// Default window for N qubits: `Re Δ ∈ [-1.5N, 1.5N]`, `Im Δ ∈ [-2.5N, 0]`.
    pub fn default_for(n_qubits: usize) -> Self {
        let n = n_qubits as f64;
        SearchWindow {
            re_min: -1.5 * n,
            re_max: 1.5 * n,
            im_min: -2.5 * n,
            im_max: 0.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn max_side(&self) -> f64 {
        self.width().max(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    pub fn contains(&self, z: Complex64, margin: f64) -> bool {
        z.re >= self.re_min - margin
            && z.re <= self.re_max + margin
            && z.im >= self.im_min - margin
            && z.im <= self.im_max + margin
    }

    pub fn expanded(&self, by: f64) -> Self {
        SearchWindow {
            re_min: self.re_min - by,
            re_max: self.re_max + by,
            im_min: self.im_min - by,
            im_max: self.im_max + by,
        }
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    /// Four sub-cells, split at fractions `fx`, `fy` of the sides.
    fn split(&self, fx: f64, fy: f64) -> [SearchWindow; 4] {
        let xm = self.re_min + fx * self.width();
        let ym = self.im_min + fy * self.height();
        let cell = |a, b, c, d| SearchWindow {
            re_min: a,
            re_max: b,
            im_min: c,
            im_max: d,
        };
        [
            cell(self.re_min, xm, self.im_min, ym),
            cell(xm, self.re_max, self.im_min, ym),
            cell(self.re_min, xm, ym, self.im_max),
            cell(xm, self.re_max, ym, self.im_max),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoleClass {
    ZeroMode,
    MarkovianLike,
    ExclusivelyNonMarkovian,
}

impl PoleClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PoleClass::ZeroMode => "zero-mode",
            PoleClass::MarkovianLike => "markovian-like",
            PoleClass::ExclusivelyNonMarkovian => "exclusively-non-markovian",
        }
    }
}

/// A zero of the characteristic function and its collective decay rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub delta: Complex64,
    /// `Γ = 2iΔ`; `Re Γ` is the decay rate, `Im Γ` the frequency shift.
    pub gamma: Complex64,
    /// Scaled residual `|f(Δ)| / (|f'(Δ)| (1 + |Δ|))`: the relative size of
    /// the next Newton correction.
    pub residual: f64,
    pub multiplicity: usize,
    pub classification: PoleClass,
}

impl Pole {
    pub fn new(
        delta: Complex64,
        residual: f64,
        multiplicity: usize,
        classification: PoleClass,
    ) -> Self {
        Pole {
            delta,
            gamma: gamma_of(delta),
            residual,
            multiplicity,
            classification,
        }
    }

    pub fn is_zero_mode(&self) -> bool {
        self.classification == PoleClass::ZeroMode
    }
}

/// Wick-like rotation `Γ = 2iΔ`.
pub fn gamma_of(delta: Complex64) -> Complex64 {
    I * delta * 2.0
}

/// Inverse rotation `Δ = Γ / 2i`.
pub fn delta_of(gamma: Complex64) -> Complex64 {
    -I * gamma * 0.5
}

// ---------------------------------------------------------------------------
// argument principle

#[derive(Debug)]
struct BoundaryZero;

/// Phase change of `f` along the segment `za → zb`, with adaptive splitting
/// until each piece turns by less than π/6 and is confirmed by its midpoint.
fn segment_phase<F: Fn(Complex64) -> Complex64>(
    f: &F,
    za: Complex64,
    fa: Complex64,
    zb: Complex64,
    fb: Complex64,
    depth: usize,
) -> std::result::Result<f64, BoundaryZero> {
    if fa == ZERO || fb == ZERO || !fa.is_finite() || !fb.is_finite() {
        return Err(BoundaryZero);
    }
    let zm = (za + zb) * 0.5;
    let fm = f(zm);
    if fm == ZERO || !fm.is_finite() {
        return Err(BoundaryZero);
    }
    let whole = (fb / fa).arg();
    let left = (fm / fa).arg();
    let right = (fb / fm).arg();
    let mag = (fb.norm() / fa.norm()).ln().abs();
    let limit = PI / 6.0;
    if left.abs() < limit && right.abs() < limit && (left + right - whole).abs() < 1e-9 && mag < 1.0
    {
        return Ok(whole);
    }
    if depth > 60 || (zb - za).norm() < 1e-12 * (1.0 + za.norm()) {
        return Err(BoundaryZero);
    }
    Ok(segment_phase(f, za, fa, zm, fm, depth + 1)? + segment_phase(f, zm, fm, zb, fb, depth + 1)?)
}

/// Winding number of `f` around the rectangle boundary.
fn winding<F: Fn(Complex64) -> Complex64>(
    f: &F,
    w: &SearchWindow,
) -> std::result::Result<usize, BoundaryZero> {
    const SAMPLES_PER_EDGE: usize = 16;
    let corners = w.corners();
    let mut total = 0.0;
    for e in 0..4 {
        let a = corners[e];
        let b = corners[(e + 1) % 4];
        let mut z0 = a;
        let mut f0 = f(z0);
        for k in 1..=SAMPLES_PER_EDGE {
            let z1 = a + (b - a) * (k as f64 / SAMPLES_PER_EDGE as f64);
            let f1 = f(z1);
            total += segment_phase(f, z0, f0, z1, f1, 0)?;
            z0 = z1;
            f0 = f1;
        }
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.05 || rounded < 0.0 {
        return Err(BoundaryZero);
    }
    Ok(rounded as usize)
}

/// Number of zeros (with multiplicity) of the analytic function `f` inside
/// `window`. A zero on or within ~1e-12 of the boundary triggers up to five
/// retries on slightly enlarged windows.
pub fn count_zeros<F: Fn(Complex64) -> Complex64>(f: &F, window: &SearchWindow) -> Result<usize> {
    if let Ok(n) = winding(f, window) {
        return Ok(n);
    }
    let scale = window.max_side();
    for k in 1..=JITTER_RETRIES {
        let jittered = window.expanded(scale * 3.7e-8 * k as f64);
        if let Ok(n) = winding(f, &jittered) {
            return Ok(n);
        }
    }
    Err(SsrError::BoundaryDegeneracy {
        retries: JITTER_RETRIES,
    })
}

/// A cell of the quadrisection holding one or more zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    pub center: Complex64,
    pub multiplicity: usize,
    pub cell: SearchWindow,
}

impl Seed {
    pub fn is_cluster(&self) -> bool {
        self.multiplicity > 1
    }
}

const SPLIT_FRACTIONS: [(f64, f64); 5] = [
    (0.5137, 0.4781),
    (0.4629, 0.5413),
    (0.5571, 0.4457),
    (0.4213, 0.5897),
    (0.6043, 0.3911),
];

/// Recursive quadrisection of `window` until every cell with zeros is no
/// larger than `max_cell`. The seed multiplicities add up to the window count.
pub fn localize_zeros<F: Fn(Complex64) -> Complex64>(
    f: &F,
    window: &SearchWindow,
    max_cell: f64,
) -> Result<Vec<Seed>> {
    let total = count_zeros(f, window)?;
    let mut seeds = Vec::new();
    let mut stack = vec![(*window, total)];
    while let Some((cell, count)) = stack.pop() {
        if count == 0 {
            continue;
        }
        if cell.max_side() <= max_cell || cell.max_side() < 1e-12 {
            seeds.push(Seed {
                center: cell.center(),
                multiplicity: count,
                cell,
            });
            continue;
        }
        let mut children = None;
        for (fx, fy) in SPLIT_FRACTIONS {
            let sub = cell.split(fx, fy);
            let counts: std::result::Result<Vec<usize>, BoundaryZero> =
                sub.iter().map(|c| winding(f, c)).collect();
            if let Ok(counts) = counts {
                if counts.iter().sum::<usize>() == count {
                    children = Some(sub.into_iter().zip(counts).collect::<Vec<_>>());
                    break;
                }
            }
        }
        match children {
            Some(ch) => stack.extend(ch.into_iter().rev()),
            None => seeds.push(Seed {
                center: cell.center(),
                multiplicity: count,
                cell,
            }),
        }
    }
    seeds.sort_by(|a, b| cmp_delta(&a.center, &b.center));
    Ok(seeds)
}

// ---------------------------------------------------------------------------
// Newton refinement

/// Central-difference derivative with step `1e-7 (|z| + 1)`.
pub fn numerical_derivative<F: Fn(Complex64) -> Complex64>(f: &F, z: Complex64) -> Complex64 {
    let h = 1e-7 * (z.norm() + 1.0);
    (f(z + h) - f(z - h)) / (2.0 * h)
}

/// Scaled residual `|f| / (|f'| (1 + |z|))`.
pub fn scaled_residual<F: Fn(Complex64) -> Complex64>(f: &F, z: Complex64) -> f64 {
    let fz = f(z);
    if fz == ZERO {
        return 0.0;
    }
    let d = numerical_derivative(f, z);
    let r = fz.norm() / (d.norm() * (1.0 + z.norm()));
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

fn newton<F: Fn(Complex64) -> Complex64>(
    f: &F,
    seed: Complex64,
    tol: f64,
    multiplicity: f64,
) -> Result<(Complex64, bool)> {
    let mut z = seed;
    let mut fz = f(z);
    if !fz.is_finite() {
        return Err(SsrError::RefinementFailure {
            best: z,
            residual: f64::INFINITY,
        });
    }
    for _ in 0..100 {
        if fz == ZERO {
            return Ok((z, true));
        }
        let d = numerical_derivative(f, z);
        let step = fz / d * multiplicity;
        if !step.is_finite() {
            break;
        }
        // backtracking on |f|
        let mut lam = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let zn = z - step * lam;
            let fnew = f(zn);
            if fnew.is_finite() && fnew.norm() < fz.norm() {
                accepted = Some((zn, fnew));
                break;
            }
            lam *= 0.5;
        }
        match accepted {
            Some((zn, fnew)) => {
                let moved = (zn - z).norm();
                z = zn;
                fz = fnew;
                if moved <= tol * (1.0 + z.norm()) {
                    return Ok((z, true));
                }
            }
            None => {
                // |f| is at its rounding floor; accept if the correction is small
                if step.norm() <= 1e-6 * (1.0 + z.norm()) {
                    return Ok((z, false));
                }
                break;
            }
        }
    }
    Err(SsrError::RefinementFailure {
        best: z,
        residual: scaled_residual(f, z),
    })
}

/// Newton polish of a zero from `seed`. Converged when the correction falls
/// below `tol·(1 + |z|)`; a backtracking line search on `|f|` guards against
/// divergent steps.
pub fn refine<F: Fn(Complex64) -> Complex64>(
    f: &F,
    seed: Complex64,
    tol: f64,
) -> Result<Complex64> {
    newton(f, seed, tol, 1.0).map(|(z, _)| z)
}

// ---------------------------------------------------------------------------
// collective poles

/// Total ordering for poles: by `|Δ|`, then `Re Δ` descending (`Im Γ ≥ 0`
/// first), then `Im Δ`.
pub fn cmp_delta(a: &Complex64, b: &Complex64) -> Ordering {
    a.norm()
        .total_cmp(&b.norm())
        .then(b.re.total_cmp(&a.re))
        .then(a.im.total_cmp(&b.im))
}

/// Sort poles by distance from the origin; members of a conjugate pair whose
/// moduli agree to rounding are ordered with `Im Γ ≥ 0` first.
pub fn sort_poles(poles: &mut [Pole]) {
    poles.sort_by(|a, b| cmp_delta(&a.delta, &b.delta));
    for i in 1..poles.len() {
        let (a, b) = (poles[i - 1].delta, poles[i].delta);
        let tie = (a.norm() - b.norm()).abs() <= 1e-9 * (1.0 + a.norm());
        if tie && a.re < b.re {
            poles.swap(i - 1, i);
        }
    }
}

/// Poles found in a window, plus the seeds whose refinement failed.
#[derive(Debug, Clone)]
pub struct PoleSearch {
    pub poles: Vec<Pole>,
    pub failures: Vec<SsrError>,
}

impl PoleSearch {
    pub fn nonzero(&self) -> impl Iterator<Item = &Pole> {
        self.poles.iter().filter(|p| !p.is_zero_mode())
    }
}

fn push_unique(found: &mut Vec<(Complex64, usize)>, z: Complex64, mult: usize) {
    if let Some(e) = found
        .iter_mut()
        .find(|(w, _)| (*w - z).norm() <= MERGE_TOL * (1.0 + z.norm()))
    {
        e.1 = e.1.max(mult);
    } else {
        found.push((z, mult));
    }
}

fn refine_seed<F: Fn(Complex64) -> Complex64>(
    f: &F,
    seed: &Seed,
    found: &mut Vec<(Complex64, usize)>,
    failures: &mut Vec<SsrError>,
) {
    if !seed.is_cluster() {
        match refine(f, seed.center, REFINE_TOL) {
            Ok(z) => push_unique(found, z, 1),
            Err(e) => failures.push(e),
        }
        return;
    }
    // several zeros in one small cell: distinct ones must converge tightly,
    // otherwise the cell is treated as a single multiple zero
    let m = seed.multiplicity;
    let r = seed.cell.max_side();
    let mut local: Vec<(Complex64, usize)> = Vec::new();
    let starts = std::iter::once(seed.center).chain((0..2 * m).map(|k| {
        seed.center + Complex64::from_polar(r, 2.0 * PI * (k as f64 + 0.3) / (2 * m) as f64)
    }));
    for s in starts {
        if let Ok((z, true)) = newton(f, s, REFINE_TOL, 1.0) {
            if seed.cell.expanded(r).contains(z, 0.0) {
                push_unique(&mut local, z, 1);
            }
        }
    }
    if local.len() == m {
        for (z, k) in local {
            push_unique(found, z, k);
        }
        return;
    }
    match newton(f, seed.center, REFINE_TOL, m as f64) {
        Ok((z, _)) => push_unique(found, z, m),
        // the count already confines the zeros to this cell
        Err(SsrError::RefinementFailure { best, .. })
            if seed.cell.expanded(r).contains(best, 0.0) =>
        {
            push_unique(found, best, m)
        }
        Err(_) => push_unique(found, seed.center, m),
    }
}

/// Distinct zeros as `(Δ, multiplicity)`.
pub type ZeroSet = Vec<(Complex64, usize)>;

/// Zeros of `f` in `window`, refined and merged, with the refinement failures.
pub fn find_zeros<F: Fn(Complex64) -> Complex64>(
    f: &F,
    window: &SearchWindow,
) -> Result<(ZeroSet, Vec<SsrError>)> {
    let max_cell = 1e-3 * window.max_side();
    let seeds = localize_zeros(f, window, max_cell)?;
    let mut found = Vec::new();
    let mut failures = Vec::new();
    for seed in &seeds {
        refine_seed(f, seed, &mut found, &mut failures);
    }
    let margin = 1e-6 * window.max_side();
    found.retain(|(z, _)| window.contains(*z, margin));
    found.sort_by(|a, b| cmp_delta(&a.0, &b.0));
    Ok((found, failures))
}

/// Assign classes: zero modes by radius, then the `N - (#zero modes)` nonzero
/// poles nearest the origin are Markovian-like and the rest are exclusively
/// non-Markovian. Expects `poles` sorted with [`sort_poles`].
fn classify(poles: &mut [Pole], n_qubits: usize, mode: Mode) {
    let mut zero_modes = 0;
    for p in poles.iter_mut() {
        if p.delta.norm() < ZERO_MODE_RADIUS {
            p.classification = PoleClass::ZeroMode;
            zero_modes += p.multiplicity;
        }
    }
    let mut budget = n_qubits.saturating_sub(zero_modes);
    for p in poles.iter_mut().filter(|p| !p.is_zero_mode()) {
        if mode == Mode::Markovian || budget > 0 {
            p.classification = PoleClass::MarkovianLike;
            budget = budget.saturating_sub(p.multiplicity);
        } else {
            p.classification = PoleClass::ExclusivelyNonMarkovian;
        }
    }
}

/// All collective poles of the chain inside `window`, sorted by `|Δ|`.
///
/// Under the superradiant condition (including general mode with `ΩL` on
/// a multiple of π) the search runs on the deflated function and the `N-1`
/// zero modes at the origin are added analytically.
/// In Markovian mode the poles are the polynomial roots.
pub fn find_collective_rates(params: &ChainParams, window: &SearchWindow) -> Result<PoleSearch> {
    params.validate()?;
    if let Some(sr) = params.sr_equivalent() {
        let mut search = find_collective_rates(&sr, window)?;
        classify(&mut search.poles, params.n_qubits, params.mode);
        return Ok(search);
    }
    let charfn = CharFn::for_search(*params)?;
    let f = |z: Complex64| charfn.eval(z);
    let mut failures = Vec::new();
    let mut poles: Vec<Pole> = match params.mode {
        Mode::Markovian => {
            let mut found: Vec<(Complex64, usize)> = Vec::new();
            for z in markovian_roots(params)? {
                let z = if z.norm() < ZERO_MODE_RADIUS {
                    z
                } else {
                    refine(&f, z, REFINE_TOL).unwrap_or(z)
                };
                if window.contains(z, 1e-9 * window.max_side()) {
                    let tol = if z.norm() < ZERO_MODE_RADIUS {
                        ZERO_MODE_RADIUS
                    } else {
                        MERGE_TOL
                    };
                    match found
                        .iter_mut()
                        .find(|(w, _)| (*w - z).norm() <= tol * (1.0 + z.norm()))
                    {
                        Some(e) => e.1 += 1,
                        None => found.push((z, 1)),
                    }
                }
            }
            found
                .into_iter()
                .map(|(z, m)| {
                    let res = if z.norm() < ZERO_MODE_RADIUS {
                        0.0
                    } else {
                        scaled_residual(&f, z)
                    };
                    Pole::new(z, res, m, PoleClass::MarkovianLike)
                })
                .collect()
        }
        _ => {
            let (found, fails) = find_zeros(&f, window)?;
            failures = fails;
            found
                .into_iter()
                .map(|(z, m)| {
                    let res = if m > 1 { 0.0 } else { scaled_residual(&f, z) };
                    Pole::new(z, res, m, PoleClass::MarkovianLike)
                })
                .collect()
        }
    };
    if params.mode == Mode::SrCondition && params.n_qubits > 1 {
        poles.push(Pole::new(
            ZERO,
            0.0,
            params.n_qubits - 1,
            PoleClass::ZeroMode,
        ));
    }
    sort_poles(&mut poles);
    classify(&mut poles, params.n_qubits, params.mode);
    Ok(PoleSearch { poles, failures })
}

// ---------------------------------------------------------------------------
// continuation

fn search_fn(params: &ChainParams) -> Result<impl Fn(Complex64) -> Complex64> {
    let charfn = CharFn::for_search(*params)?;
    Ok(move |z: Complex64| charfn.eval(z))
}

/// Distinct zeros near `center` at the given parameters, from a ring of starts.
fn zeros_near(params: &ChainParams, center: Complex64, radius: f64) -> Result<Vec<Complex64>> {
    let f = search_fn(params)?;
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for k in 0..8 {
        let s = center + Complex64::from_polar(radius, 2.0 * PI * (k as f64 + 0.125) / 8.0);
        if let Ok(z) = refine(&f, s, REFINE_TOL) {
            if (z - center).norm() <= 4.0 * radius {
                push_unique(&mut out, z, 1);
            }
        }
    }
    if let Ok(z) = refine(&f, center, REFINE_TOL) {
        push_unique(&mut out, z, 1);
    }
    Ok(out.into_iter().map(|(z, _)| z).collect())
}

/// Pick the continuation through a pole collision: an off-axis member with
/// `Im Γ ≥ 0` if there is one, otherwise the candidate nearest the origin.
fn pick_through_coalescence(cands: &[Complex64]) -> Option<Complex64> {
    let scale = cands.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let off_axis: Vec<Complex64> = cands
        .iter()
        .copied()
        .filter(|z| z.re.abs() > 1e-9 * scale)
        .collect();
    if !off_axis.is_empty() {
        return off_axis
            .into_iter()
            .filter(|z| z.re >= 0.0)
            .min_by(cmp_delta);
    }
    cands.iter().copied().min_by(cmp_delta)
}

/// Track `pole` along the separations in `l_path` (the first entry must be
/// `params.separation`). Sub-steps are halved on failure down to
/// `1e-6·max(L, 1e-3)`; passing through a two-pole collision follows the
/// member with `Im Γ ≥ 0`.
pub fn continue_pole(params: &ChainParams, pole: &Pole, l_path: &[f64]) -> Result<Vec<Pole>> {
    params.validate()?;
    let Some(&l0) = l_path.first() else {
        return Err(SsrError::Contract("empty separation path".into()));
    };
    if (l0 - params.separation).abs() > 1e-12 * (1.0 + l0.abs()) {
        return Err(SsrError::Contract(
            "separation path must start at params.separation".into(),
        ));
    }
    if l_path.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(SsrError::Domain(
            "separations must be finite and non-negative".into(),
        ));
    }
    let mut path = vec![*pole];
    if pole.is_zero_mode() && params.mode == Mode::SrCondition {
        for _ in 1..l_path.len() {
            path.push(*pole);
        }
        return Ok(path);
    }

    let mut l_cur = l0;
    let mut z_cur = pole.delta;
    let mut prev: Option<(f64, Complex64)> = None;
    for &l_target in &l_path[1..] {
        while l_cur != l_target {
            let min_step = 1e-6 * l_cur.abs().max(l_target.abs()).max(1e-3);
            let mut h = l_target - l_cur;
            loop {
                let l_next = if (l_cur + h - l_target).abs() < 1e-15 {
                    l_target
                } else {
                    l_cur + h
                };
                match continuation_step(params, l_cur, z_cur, prev, l_next) {
                    Some(z) => {
                        prev = Some((l_cur, z_cur));
                        l_cur = l_next;
                        z_cur = z;
                        break;
                    }
                    None if h.abs() * 0.5 >= min_step => h *= 0.5,
                    None => {
                        // try to pass a collision: look for a partner nearby
                        match coalescence_jump(params, z_cur, l_next) {
                            Some(z) => {
                                prev = None;
                                l_cur = l_next;
                                z_cur = z;
                                break;
                            }
                            None => {
                                return Err(SsrError::ContinuationBreakdown {
                                    at: l_cur,
                                    partial: path,
                                })
                            }
                        }
                    }
                }
            }
        }
        let p = params.with_separation(l_cur);
        let f = search_fn(&p)?;
        path.push(Pole::new(
            z_cur,
            scaled_residual(&f, z_cur),
            pole.multiplicity,
            pole.classification,
        ));
    }
    Ok(path)
}

fn continuation_step(
    params: &ChainParams,
    l_cur: f64,
    z_cur: Complex64,
    prev: Option<(f64, Complex64)>,
    l_next: f64,
) -> Option<Complex64> {
    let p = params.with_separation(l_next);
    let f = search_fn(&p).ok()?;
    let predicted = match prev {
        Some((lp, zp)) if lp != l_cur => z_cur + (z_cur - zp) * ((l_next - l_cur) / (l_cur - lp)),
        _ => z_cur,
    };
    let a = refine(&f, predicted, REFINE_TOL).ok()?;
    let b = refine(&f, z_cur, REFINE_TOL).ok()?;
    let scale = 1.0 + z_cur.norm();
    if (a - b).norm() > 1e-7 * scale {
        return None;
    }
    // reject jumps much larger than the predicted motion
    let motion = (predicted - z_cur).norm();
    if (a - predicted).norm() > (0.5 * motion).max(0.02 * scale) {
        return None;
    }
    Some(a)
}

fn coalescence_jump(params: &ChainParams, z_cur: Complex64, l_next: f64) -> Option<Complex64> {
    let here = params.with_separation(l_next);
    let radius = 1e-2 * (1.0 + z_cur.norm());
    let cands = zeros_near(&here, z_cur, radius).ok()?;
    if cands.len() < 2 {
        return None;
    }
    pick_through_coalescence(&cands)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn window_validation() {
        assert!(SearchWindow::new(1.0, 0.0, -1.0, 0.0).is_err());
        assert!(SearchWindow::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(SearchWindow::new(0.0, 1.0, -1.0, 0.0).is_ok());
    }

    #[test]
    fn counts_single_zero() {
        let f = |z: Complex64| z - c(0.3, -0.4);
        let w = SearchWindow::new(0.0, 1.0, -1.0, 0.0).unwrap();
        assert_eq!(count_zeros(&f, &w).unwrap(), 1);
    }

    #[test]
    fn counts_multiplicity() {
        let f = |z: Complex64| (z + c(0.0, 0.2)).powu(2);
        let w = SearchWindow::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(count_zeros(&f, &w).unwrap(), 2);
    }

    #[test]
    fn counts_zero_on_boundary_via_jitter() {
        let f = |z: Complex64| z - c(0.5, 0.0);
        let w = SearchWindow::new(0.0, 1.0, -1.0, 0.0).unwrap();
        assert_eq!(count_zeros(&f, &w).unwrap(), 1);
    }

    #[test]
    fn boundary_degeneracy_reported() {
        // a dense line of zeros along the top edge defeats every jitter
        let f = |z: Complex64| (z * 1e9).sin() * (z.im * 0.0 + 1.0);
        let w = SearchWindow::new(-1.0, 1.0, -1.0, 0.0).unwrap();
        assert!(matches!(
            count_zeros(&f, &w),
            Err(SsrError::BoundaryDegeneracy { .. })
        ));
    }

    #[test]
    fn localize_two_zeros() {
        let a = c(-0.5, -0.1);
        let b = c(0.5, -0.1);
        let f = |z: Complex64| (z - a) * (z - b);
        let w = SearchWindow::new(-1.0, 1.0, -1.0, 0.0).unwrap();
        let seeds = localize_zeros(&f, &w, 0.05).unwrap();
        assert_eq!(seeds.len(), 2);
        let total: usize = seeds.iter().map(|s| s.multiplicity).sum();
        assert_eq!(total, 2);
        for s in &seeds {
            let d = (s.center - a).norm().min((s.center - b).norm());
            assert!(d < 0.05, "seed {} too far", s.center);
        }
    }

    #[test]
    fn localize_empty_window() {
        let f = |z: Complex64| z - c(5.0, 5.0);
        let w = SearchWindow::new(-1.0, 1.0, -1.0, 0.0).unwrap();
        assert!(localize_zeros(&f, &w, 0.01).unwrap().is_empty());
    }

    #[test]
    fn localize_flags_clusters() {
        let f = |z: Complex64| (z - c(0.1, -0.3)).powu(3);
        let w = SearchWindow::new(-1.0, 1.0, -1.0, 0.0).unwrap();
        let seeds = localize_zeros(&f, &w, 1e-3).unwrap();
        assert_eq!(seeds.len(), 1);
        assert!(seeds[0].is_cluster());
        assert_eq!(seeds[0].multiplicity, 3);
    }

    #[test]
    fn refine_linear_in_one_step() {
        let f = |z: Complex64| z + c(0.0, 0.5);
        let z = refine(&f, c(-0.1, -0.4), 1e-14).unwrap();
        assert!((z - c(0.0, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn refine_fails_far_from_zero() {
        let p = ChainParams::sr(1, 0.3).unwrap();
        let cf = CharFn::deflated(p).unwrap();
        let f = |z: Complex64| cf.eval(z);
        assert!(matches!(
            refine(&f, c(100.0, -100.0), REFINE_TOL),
            Err(SsrError::RefinementFailure { .. })
        ));
    }

    #[test]
    fn rotation_round_trip() {
        let d = c(0.21, -2.3);
        assert!((delta_of(gamma_of(d)) - d).norm() < 1e-15);
        assert_eq!(gamma_of(c(0.0, -0.5)), c(1.0, 0.0));
    }

    #[test]
    fn conjugate_tie_prefers_positive_im_gamma() {
        let mut poles = vec![
            Pole::new(c(-0.2, -1.0), 0.0, 1, PoleClass::MarkovianLike),
            Pole::new(c(0.2, -1.0), 0.0, 1, PoleClass::MarkovianLike),
        ];
        sort_poles(&mut poles);
        assert!(poles[0].gamma.im > 0.0);
    }

    #[test]
    fn single_emitter_pole_is_exact() {
        for l in [0.1, 1.0, 10.0] {
            let p = ChainParams::sr(1, l).unwrap();
            let s = find_collective_rates(&p, &SearchWindow::default_for(1)).unwrap();
            assert_eq!(s.poles.len(), 1, "L = {l}");
            assert!((s.poles[0].gamma - c(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn continuation_of_length_one_returns_input() {
        let p = ChainParams::sr(2, 0.3).unwrap();
        let pole = Pole::new(c(0.0, -1.2), 0.0, 1, PoleClass::MarkovianLike);
        let path = continue_pole(&p, &pole, &[0.3]).unwrap();
        assert_eq!(path, vec![pole]);
        assert!(continue_pole(&p, &pole, &[0.4, 0.5]).is_err());
        assert!(continue_pole(&p, &pole, &[]).is_err());
    }
}
