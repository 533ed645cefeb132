//! Independent reference computations for the log-quadratic potential
//! `H(x) = x²/2 − (β/2)ln(1 + x²)`. Nothing here calls the library.

use std::f64::consts::PI;

pub fn h(beta: f64, x: f64) -> f64 {
    0.5 * x * x - 0.5 * beta * (1.0 + x * x).ln()
}

pub fn dh(beta: f64, x: f64) -> f64 {
    x - beta * x / (1.0 + x * x)
}

/// `(x*, σ*)`: the left spinodal point and the local maximum of `H'`, from
/// `(1 + u)² = β(1 − u)` with `u = x²`.
pub fn spinodal(beta: f64) -> (f64, f64) {
    let b = 2.0 + beta;
    let u = 0.5 * (-b + (b * b - 4.0 * (1.0 - beta)).sqrt());
    let x = -u.sqrt();
    (x, dh(beta, x))
}

/// Real roots of `H'(x) = σ`, i.e. of `x³ − σx² + (1 − β)x − σ = 0`,
/// ascending. Three roots strictly inside `(−σ*, σ*)`, one outside.
pub fn roots(beta: f64, sigma: f64) -> Vec<f64> {
    let (a, b, c) = (-sigma, 1.0 - beta, -sigma);
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = 4.0 * p * p * p + 27.0 * q * q;
    let mut r = if disc < 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let theta = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0).acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos() + shift)
            .collect()
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
    };
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    r
}

/// `(X₋(σ), X₀(σ), X₊(σ))` inside the bistable range.
pub fn branches(beta: f64, sigma: f64) -> (f64, f64, f64) {
    let r = roots(beta, sigma);
    assert_eq!(r.len(), 3, "σ = {sigma} is outside the bistable range");
    (r[0], r[1], r[2])
}

/// `h₋(σ) = H_σ(X₀) − H_σ(X₋)`
pub fn barrier_minus(beta: f64, sigma: f64) -> f64 {
    let (xm, x0, _) = branches(beta, sigma);
    (h(beta, x0) - sigma * x0) - (h(beta, xm) - sigma * xm)
}

/// `σ^#` with `h₋(σ^#) = h_#`, by bisection on `(0, σ*)` where `h₋` decreases.
pub fn sigma_upper_critical(beta: f64, h_sharp: f64) -> f64 {
    let (_, s_star) = spinodal(beta);
    let (mut lo, mut hi) = (0.0, s_star * (1.0 - 1e-12));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if barrier_minus(beta, mid) > h_sharp {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Limit trajectory of a monotone increasing control started in the left
/// well at `μ = −1`: `σ = H'(ℓ)` up to `ℓ = X₋(σ^#)`, then `σ = σ^#` with
/// `μ = (2ℓ − X₋ − X₊)/(X₊ − X₋)` until `ℓ = X₊(σ^#)`, then `σ = H'(ℓ)`.
pub fn monotone_ramp_limit(beta: f64, h_sharp: f64, ell: f64) -> (f64, f64) {
    let s = sigma_upper_critical(beta, h_sharp);
    let (xm, _, xp) = branches(beta, s);
    if ell <= xm {
        (dh(beta, ell), -1.0)
    } else if ell < xp {
        (s, (2.0 * ell - xm - xp) / (xp - xm))
    } else {
        (dh(beta, ell), 1.0)
    }
}

/// Poincaré constant of the weight `exp(−v)` on `[a, b]` as the inverse of the
/// first nonzero eigenvalue of its Neumann finite-volume Laplacian on `n`
/// cells, found by Sturm-sequence bisection.
pub fn rayleigh_poincare(v: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let dx = (b - a) / n as f64;
    let centers: Vec<f64> = (0..n).map(|i| a + (i as f64 + 0.5) * dx).collect();
    let vmin = centers.iter().map(|&x| v(x)).fold(f64::INFINITY, f64::min);
    let m: Vec<f64> = centers.iter().map(|&x| (vmin - v(x)).exp() * dx).collect();
    let w: Vec<f64> = (1..n).map(|i| (vmin - v(a + i as f64 * dx)).exp() / dx).collect();
    let mut diag = vec![0.0; n];
    for (i, wi) in w.iter().enumerate() {
        diag[i] += wi;
        diag[i + 1] += wi;
    }
    let d: Vec<f64> = diag.iter().zip(&m).map(|(k, mi)| k / mi).collect();
    let off: Vec<f64> = (0..n - 1).map(|i| -w[i] / (m[i] * m[i + 1]).sqrt()).collect();
    let below = |lambda: f64| {
        let mut count = 0;
        let mut q = d[0] - lambda;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let prev = if q == 0.0 { f64::MIN_POSITIVE } else { q };
            q = d[i] - lambda - off[i - 1] * off[i - 1] / prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let mut hi = (0..n)
        .map(|i| d[i] + if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 })
        .fold(0.0, f64::max);
    let mut lo = 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if below(mid) >= 2 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    1.0 / (0.5 * (lo + hi))
}
