//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the solver: the chain product is formed by explicit multiplication.

#![allow(dead_code)]

use num_complex::Complex64;
use ssrchain::rootfind::{find_collective_rates, SearchWindow};
use ssrchain::{ChainParams, Mode};

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub type M2 = [[Complex64; 2]; 2];

pub fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// `e^{ikL}` for the chain's phase mode, evaluated directly.
pub fn propagation_factor(p: &ChainParams, delta: Complex64) -> Complex64 {
    let l = p.separation;
    match p.mode {
        Mode::General => (I * (delta + p.omega) * l).exp(),
        Mode::SrCondition => {
            let sign = if p.sr_index.rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            };
            (I * delta * l).exp() * sign
        }
        Mode::Markovian => (I * p.omega * l).exp(),
    }
}

/// One qubit then one free segment.
pub fn cell(p: &ChainParams, delta: Complex64) -> M2 {
    let b = I / (delta * 2.0);
    let one = Complex64::new(1.0, 0.0);
    let q = [[one + b, b], [-b, one - b]];
    let e = propagation_factor(p, delta);
    let prop = [
        [one / e, Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), e],
    ];
    mul(&q, &prop)
}

pub fn repeated(m: &M2, n: usize) -> M2 {
    let mut acc = *m;
    for _ in 1..n {
        acc = mul(&acc, m);
    }
    acc
}

/// `Δ^N (T^N)_11` by N explicit multiplications.
pub fn brute_f(p: &ChainParams, delta: Complex64) -> Complex64 {
    let t = repeated(&cell(p, delta), p.n_qubits);
    delta.powu(p.n_qubits as u32) * t[0][0]
}

/// Plain Newton with a central-difference derivative; `None` if it stalls.
pub fn newton<F: Fn(Complex64) -> Complex64>(f: &F, mut z: Complex64) -> Option<Complex64> {
    for _ in 0..200 {
        let h = 1e-6 * (1.0 + z.norm());
        let d = (f(z + h) - f(z - h)) / (2.0 * h);
        if d.norm() == 0.0 {
            return None;
        }
        let step = f(z) / d;
        z -= step;
        if step.norm() <= 1e-14 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    // accept a noise-limited iterate
    let h = 1e-6 * (1.0 + z.norm());
    let d = (f(z + h) - f(z - h)) / (2.0 * h);
    ((f(z) / d).norm() < 1e-10 * (1.0 + z.norm())).then_some(z)
}

fn local_minima<F: Fn(Complex64) -> Complex64>(
    f: &F,
    re: (f64, f64),
    im: (f64, f64),
    nx: usize,
    ny: usize,
) -> Vec<Complex64> {
    let at = |i: usize, j: usize| {
        Complex64::new(
            re.0 + (re.1 - re.0) * i as f64 / (nx - 1) as f64,
            im.0 + (im.1 - im.0) * j as f64 / (ny - 1) as f64,
        )
    };
    let vals: Vec<Vec<f64>> = (0..nx)
        .map(|i| (0..ny).map(|j| f(at(i, j)).norm().ln()).collect())
        .collect();
    let mut out = Vec::new();
    for i in 1..nx - 1 {
        for j in 1..ny - 1 {
            let v = vals[i][j];
            let is_min = (i - 1..=i + 1)
                .all(|a| (j - 1..=j + 1).all(|b| (a, b) == (i, j) || v <= vals[a][b]));
            if is_min {
                out.push(at(i, j));
            }
        }
    }
    out
}

/// Zeros of `f` in the rectangle, found as local minima of `log|f|` on a
/// dense grid, rescanned finely around each minimum and polished by
/// Newton. Zeros within `exclude` of the origin are dropped.
pub fn grid_scan_zeros<F: Fn(Complex64) -> Complex64>(
    f: &F,
    re: (f64, f64),
    im: (f64, f64),
    nx: usize,
    ny: usize,
    exclude: f64,
) -> Vec<Complex64> {
    let dx = (re.1 - re.0) / (nx - 1) as f64;
    let dy = (im.1 - im.0) / (ny - 1) as f64;
    let mut out: Vec<Complex64> = Vec::new();
    for coarse in local_minima(f, re, im, nx, ny) {
        let box_re = (coarse.re - 2.0 * dx, coarse.re + 2.0 * dx);
        let box_im = (coarse.im - 2.0 * dy, coarse.im + 2.0 * dy);
        for fine in local_minima(f, box_re, box_im, 81, 81) {
            let Some(z) = newton(f, fine) else { continue };
            let close = (z.re - fine.re).abs() < 0.2 * dx && (z.im - fine.im).abs() < 0.2 * dy;
            if z.norm() > exclude && close && !out.iter().any(|w| (w - z).norm() < 1e-8) {
                out.push(z);
            }
        }
    }
    out
}

/// Largest distance between a solver pole and the nearest grid-scan zero,
/// in both directions, over the default window. Oracle zeros in a thin
/// band along the window edge are not required to be reported.
pub fn grid_oracle_mismatch(p: &ChainParams) -> f64 {
    let w = SearchWindow::default_for(p.n_qubits);
    let search = find_collective_rates(p, &w).unwrap();
    if !search.failures.is_empty() {
        return f64::INFINITY;
    }
    let solver: Vec<Complex64> = search.nonzero().map(|q| q.delta).collect();
    let f = |z: Complex64| brute_f(p, z);
    let scan = w.expanded(0.2);
    let oracle = grid_scan_zeros(
        &f,
        (scan.re_min, scan.re_max),
        (scan.im_min, scan.im_max),
        497,
        417,
        1e-3,
    );
    let nearest = |z: &Complex64, set: &[Complex64]| {
        set.iter()
            .map(|s| (s - z).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let missed = oracle
        .iter()
        .filter(|z| w.contains(**z, -0.05))
        .map(|z| nearest(z, &solver))
        .fold(0.0, f64::max);
    let unseen = solver
        .iter()
        .map(|z| nearest(z, &oracle))
        .fold(0.0, f64::max);
    missed.max(unseen)
}
