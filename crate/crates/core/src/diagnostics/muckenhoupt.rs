//! One-sided Muckenhoupt constants of `γ = exp(−V)` and the resulting upper
//! bound `C_P ≤ 4·max(C_M⁻, C_M⁺)` for the Poincaré constant.

use crate::error::{Error, Result};
use crate::potential::{Branch, DoubleWellPotential};

/// Quadrature nodes per unit length (at least `MIN_NODES` in total).
pub const NODES_PER_UNIT: f64 = 4000.0;
const MIN_NODES: usize = 2001;

/// A (truncated) interval for the weight `γ_σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// `ℝ` truncated to `domain`.
    pub fn whole(domain: (f64, f64)) -> Result<Self> {
        Self::new(domain.0, domain.1)
    }

    /// `(−∞, X₀(σ))` truncated to `domain`.
    pub fn minus(pot: &DoubleWellPotential, sigma: f64, domain: (f64, f64)) -> Result<Self> {
        Self::new(domain.0, pot.branch(Branch::Zero, sigma)?)
    }

    /// `(X₀(σ), ∞)` truncated to `domain`.
    pub fn plus(pot: &DoubleWellPotential, sigma: f64, domain: (f64, f64)) -> Result<Self> {
        Self::new(pot.branch(Branch::Zero, sigma)?, domain.1)
    }
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `(C_M⁻, C_M⁺)` of `exp(−V)` on `[lo, hi]` around `x0`, by cumulative
/// trapezoidal sums kept in log-space on a uniform node set.
pub fn muckenhoupt_weight(v: impl Fn(f64) -> f64, interval: Interval, x0: f64, nodes: usize) -> Result<(f64, f64)> {
    if !(x0 > interval.lo && x0 < interval.hi) {
        return Err(Error::Domain(format!(
            "x0 = {x0} must lie strictly inside [{}, {}]",
            interval.lo, interval.hi
        )));
    }
    let nodes = nodes.max(MIN_NODES);
    let h = (interval.hi - interval.lo) / (nodes - 1) as f64;
    let xs: Vec<f64> = (0..nodes).map(|k| interval.lo + k as f64 * h).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| v(x)).collect();
    if let Some(k) = vs.iter().position(|x| !x.is_finite()) {
        return Err(Error::Numerical(format!(
            "log-weight not finite at x = {} while computing Muckenhoupt constants",
            xs[k]
        )));
    }
    // node index at or right of x0; the segment [x0, xs[k0]] is handled exactly
    let k0 = xs.partition_point(|&x| x < x0);
    let lnh2 = (0.5 * h).ln();
    let v0 = v(x0);

    // right side: A(x) = ∫_{x0}^{x} e^{V}, B(x) = ∫_{x}^{hi} e^{−V}
    let mut log_b = vec![f64::NEG_INFINITY; nodes];
    for k in (0..nodes - 1).rev() {
        log_b[k] = log_add_exp(log_b[k + 1], lnh2 + log_add_exp(-vs[k], -vs[k + 1]));
    }
    let mut best_plus = f64::NEG_INFINITY;
    let mut log_a = (0.5 * (xs[k0] - x0)).ln() + log_add_exp(v0, vs[k0]);
    if xs[k0] == x0 {
        log_a = f64::NEG_INFINITY;
    }
    for k in k0..nodes {
        if k > k0 {
            log_a = log_add_exp(log_a, lnh2 + log_add_exp(vs[k - 1], vs[k]));
        }
        best_plus = best_plus.max(log_a + log_b[k]);
    }

    // left side: A(x) = ∫_{x}^{x0} e^{V}, B(x) = ∫_{lo}^{x} e^{−V}
    let mut log_bl = vec![f64::NEG_INFINITY; nodes];
    for k in 1..nodes {
        log_bl[k] = log_add_exp(log_bl[k - 1], lnh2 + log_add_exp(-vs[k - 1], -vs[k]));
    }
    let mut best_minus = f64::NEG_INFINITY;
    if k0 > 0 {
        let j0 = k0 - 1;
        let mut log_al = (0.5 * (x0 - xs[j0])).ln() + log_add_exp(v0, vs[j0]);
        for k in (0..=j0).rev() {
            if k < j0 {
                log_al = log_add_exp(log_al, lnh2 + log_add_exp(vs[k], vs[k + 1]));
            }
            best_minus = best_minus.max(log_al + log_bl[k]);
        }
    }
    let (cm, cp) = (best_minus.exp(), best_plus.exp());
    if !(cm.is_finite() && cp.is_finite()) {
        return Err(Error::Numerical(
            "Muckenhoupt constant overflows double precision".into(),
        ));
    }
    Ok((cm, cp))
}

/// Median of the weight `exp(−V)` on `interval`, where the Muckenhoupt
/// split gives the sharp growth order of the Poincaré constant.
pub fn weight_median(v: impl Fn(f64) -> f64, interval: Interval, nodes: usize) -> Result<f64> {
    let nodes = nodes.max(MIN_NODES);
    let h = (interval.hi - interval.lo) / (nodes - 1) as f64;
    let xs: Vec<f64> = (0..nodes).map(|k| interval.lo + k as f64 * h).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| v(x)).collect();
    if vs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical(
            "log-weight not finite while locating the median".into(),
        ));
    }
    let vmin = vs.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut cum = vec![0.0; nodes];
    for k in 1..nodes {
        cum[k] = cum[k - 1] + 0.5 * h * ((vmin - vs[k - 1]).exp() + (vmin - vs[k]).exp());
    }
    let half = 0.5 * cum[nodes - 1];
    let k = cum.partition_point(|&c| c < half).clamp(1, nodes - 1);
    // linear interpolation inside the cell holding the half mass
    let frac = (half - cum[k - 1]) / (cum[k] - cum[k - 1]);
    Ok(xs[k - 1] + frac * h)
}

/// Median of `γ_σ` on `interval`.
pub fn gibbs_median(pot: &DoubleWellPotential, sigma: f64, nu: f64, interval: Interval) -> Result<f64> {
    let nu2 = nu * nu;
    weight_median(|x| pot.h_sigma(x, sigma) / nu2, interval, default_nodes(interval))
}

/// Default node count for an interval of the given length.
pub fn default_nodes(interval: Interval) -> usize {
    ((interval.hi - interval.lo) * NODES_PER_UNIT) as usize + 1
}

/// `(C_M⁻, C_M⁺)` of `γ_σ = exp(−H_σ/ν²)` restricted to `interval`.
pub fn muckenhoupt(pot: &DoubleWellPotential, sigma: f64, nu: f64, interval: Interval, x0: f64) -> Result<(f64, f64)> {
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("nu must be positive, got {nu}")));
    }
    let nu2 = nu * nu;
    muckenhoupt_weight(|x| pot.h_sigma(x, sigma) / nu2, interval, x0, default_nodes(interval))
}

/// `4·max(C_M⁻, C_M⁺)`
pub fn poincare_upper(pot: &DoubleWellPotential, sigma: f64, nu: f64, interval: Interval, x0: f64) -> Result<f64> {
    let (m, p) = muckenhoupt(pot, sigma, nu, interval, x0)?;
    Ok(4.0 * m.max(p))
}

/// Least-squares fit of `ln(C/ν²) = a/ν² + c`; returns `(a, c)`.
///
/// `a` estimates the exponential order of a constant growing like `ν²·exp(a/ν²)`.
pub fn exponential_order(nus: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    if nus.len() < 2 || nus.len() != values.len() {
        return Err(Error::Domain("need at least two (ν, C) pairs".into()));
    }
    let xs: Vec<f64> = nus.iter().map(|n| 1.0 / (n * n)).collect();
    let ys: Vec<f64> = nus.iter().zip(values).map(|(n, c)| (c / (n * n)).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("noise levels must be distinct".into()));
    }
    let a = sxy / sxx;
    Ok((a, my - a * mx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::default_potential;

    #[test]
    fn median_of_symmetric_and_shifted_weights() {
        let iv = Interval::new(-4.0, 6.0).unwrap();
        let m = weight_median(|x| (x - 1.0) * (x - 1.0) / 0.5, iv, 20001).unwrap();
        assert!((m - 1.0).abs() < 1e-6, "{m}");
        let pot = default_potential(2.0).unwrap();
        let m0 = gibbs_median(&pot, 0.0, 0.3, Interval::whole((-5.0, 5.0)).unwrap()).unwrap();
        assert!(m0.abs() < 1e-6);
        // tilting towards the right well moves the median into it
        let m1 = gibbs_median(&pot, 0.05, 0.3, Interval::whole((-5.0, 5.0)).unwrap()).unwrap();
        assert!(m1 > 0.5, "{m1}");
    }

    #[test]
    fn gaussian_half_line_bound() {
        // V = x²/(2ν²) on [0, L]: C_M⁺ ≤ sup x/V'(x) = ν²
        for nu in [0.2, 0.5, 1.0] {
            let iv = Interval::new(-1e-9, 8.0 * nu).unwrap();
            let (_, cp) = muckenhoupt_weight(|x| x * x / (2.0 * nu * nu), iv, 0.0, 20001).unwrap();
            assert!(cp <= nu * nu * (1.0 + 1e-6), "ν = {nu}: {cp}");
            assert!(cp > 0.3 * nu * nu);
        }
    }

    #[test]
    fn constant_weight_closed_form() {
        // γ ≡ 1 on [0, 1], x0 = 1/2: sup (x − ½)(1 − x) = 1/16
        let iv = Interval::new(0.0, 1.0).unwrap();
        let (cm, cp) = muckenhoupt_weight(|_| 0.0, iv, 0.5, 4001).unwrap();
        assert!((cp - 1.0 / 16.0).abs() < 1e-6);
        assert!((cm - 1.0 / 16.0).abs() < 1e-6);
    }

    #[test]
    fn scale_invariance() {
        let iv = Interval::new(-2.0, 3.0).unwrap();
        let a = muckenhoupt_weight(|x| x * x, iv, 0.3, 5001).unwrap();
        let b = muckenhoupt_weight(|x| x * x + 40.0, iv, 0.3, 5001).unwrap();
        assert!((a.0 / b.0 - 1.0).abs() < 1e-10 && (a.1 / b.1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_x0_on_boundary() {
        let iv = Interval::new(0.0, 1.0).unwrap();
        assert!(muckenhoupt_weight(|x| x, iv, 0.0, 100).is_err());
    }

    #[test]
    fn poincare_bound_is_four_times_max() {
        let pot = default_potential(2.0).unwrap();
        let iv = Interval::whole((-5.0, 5.0)).unwrap();
        let (m, p) = muckenhoupt(&pot, 0.0, 0.3, iv, 0.0).unwrap();
        // symmetric weight around x0 = 0
        assert!((m / p - 1.0).abs() < 1e-6);
        assert_eq!(poincare_upper(&pot, 0.0, 0.3, iv, 0.0).unwrap(), 4.0 * m.max(p));
    }

    #[test]
    fn exponential_order_recovers_synthetic_rate() {
        let nus = [0.3, 0.25, 0.2];
        let vals: Vec<f64> = nus.iter().map(|n: &f64| 3.0 * n * n * (0.19 / (n * n)).exp()).collect();
        let (a, c) = exponential_order(&nus, &vals).unwrap();
        assert!((a - 0.19).abs() < 1e-12);
        assert!((c - 3f64.ln()).abs() < 1e-10);
    }
}
