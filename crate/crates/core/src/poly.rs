//! Dense complex polynomials (ascending coefficients) and an Aberth–Ehrlich
//! root solver.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == ZERO {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(ZERO) - b.get(i).copied().unwrap_or(ZERO))
        .collect()
}

/// Horner evaluation, returning `(p(z), p'(z))`.
pub fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    eval_with_derivative(coeffs, z).0
}

/// All roots of the polynomial, with multiplicity.
///
/// Exactly vanishing low-order coefficients are split off as exact roots at
/// the origin; the rest goes through Aberth–Ehrlich iteration followed by a
/// Newton polish on the full polynomial.
pub fn roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|&x| x == ZERO) {
        c.pop();
    }
    if c.len() <= 1 {
        return Vec::new();
    }
    let zeros_at_origin = c.iter().take_while(|&&x| x == ZERO).count();
    let reduced = &c[zeros_at_origin..];
    let mut out = vec![ZERO; zeros_at_origin];
    let degree = reduced.len() - 1;
    match degree {
        0 => {}
        1 => out.push(-reduced[0] / reduced[1]),
        _ => {
            let mut r = aberth(reduced);
            for z in r.iter_mut() {
                *z = polish(reduced, *z);
            }
            out.extend(r);
        }
    }
    out
}

fn aberth(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lead = c[n];
    // Cauchy-type radius bound for the initial circle
    let radius = c[..n]
        .iter()
        .map(|x| (x / lead).norm())
        .fold(0.0_f64, f64::max)
        .max(1e-3)
        + 1.0;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(radius * 0.5, ang)
        })
        .collect();
    for _ in 0..500 {
        let mut max_step = 0.0_f64;
        for k in 0..n {
            let (p, dp) = eval_with_derivative(c, z[k]);
            if p == ZERO {
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| Complex64::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if w.is_finite() {
                z[k] -= w;
                max_step = max_step.max(w.norm() / (1.0 + z[k].norm()));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    z
}

fn polish(c: &[Complex64], mut z: Complex64) -> Complex64 {
    for _ in 0..5 {
        let (p, dp) = eval_with_derivative(c, z);
        if dp == ZERO || p == ZERO {
            break;
        }
        let step = p / dp;
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_roots(rs: &[Complex64]) -> Vec<Complex64> {
        rs.iter()
            .fold(vec![c(1.0, 0.0)], |acc, &r| mul(&acc, &[-r, c(1.0, 0.0)]))
    }

    #[test]
    fn recovers_distinct_roots() {
        let rs = [
            c(1.0, 2.0),
            c(-0.5, 0.1),
            c(3.0, -1.0),
            c(0.2, -0.7),
            c(-2.0, -2.0),
        ];
        let mut found = roots(&from_roots(&rs));
        assert_eq!(found.len(), rs.len());
        for r in rs {
            let (idx, d) = found
                .iter()
                .enumerate()
                .map(|(i, z)| (i, (z - r).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(d < 1e-12, "root {r} missed by {d}");
            found.remove(idx);
        }
    }

    #[test]
    fn exact_origin_roots_are_split_off() {
        let p = from_roots(&[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -2.0)]);
        let r = roots(&p);
        assert_eq!(r.iter().filter(|z| **z == ZERO).count(), 3);
        assert!(r.iter().any(|z| (z - c(0.0, -2.0)).norm() < 1e-15));
    }

    #[test]
    fn horner_derivative() {
        let p = [c(1.0, 0.0), c(0.0, 2.0), c(3.0, 0.0)];
        let (v, d) = eval_with_derivative(&p, c(0.5, -1.0));
        let z = c(0.5, -1.0);
        assert!((v - (p[0] + p[1] * z + p[2] * z * z)).norm() < 1e-14);
        assert!((d - (p[1] + p[2] * z * 2.0)).norm() < 1e-14);
    }
}
