//! Double-well potentials, their landmarks, the inverse branches of `H'`,
//! energy barriers of the tilted potential `H_σ(x) = H(x) − σx`, and the
//! fast-reaction scaling law tying the relaxation time to the noise level.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::roots::{bisect, expand_bracket};

/// Default absolute tolerance for the inverse branches of `H'`.
pub const BRANCH_TOL: f64 = 1e-12;

/// Slack accepted when a multiplier sits on the boundary of a branch domain.
const DOMAIN_SLACK: f64 = 1e-12;

/// Analytic (or interpolated) potential together with its first three derivatives.
pub trait PotentialModel: Send + Sync + fmt::Debug {
    fn h(&self, x: f64) -> f64;
    fn dh(&self, x: f64) -> f64;
    fn d2h(&self, x: f64) -> f64;
    fn d3h(&self, x: f64) -> f64;

    /// Identifier used in run configurations.
    fn name(&self) -> &str;

    /// Limits of `H''` at `−∞` and `+∞`.
    fn asymptotic_curvature(&self) -> (f64, f64) {
        (self.d2h(-1e8), self.d2h(1e8))
    }
}

/// `H(x) = x²/2 − (β/2)·ln(1 + x²)`, a double well with asymptotically linear `H'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogQuadratic {
    pub beta: f64,
}

impl PotentialModel for LogQuadratic {
    fn h(&self, x: f64) -> f64 {
        0.5 * x * x - 0.5 * self.beta * (x * x).ln_1p()
    }

    fn dh(&self, x: f64) -> f64 {
        x * (1.0 - self.beta / (1.0 + x * x))
    }

    fn d2h(&self, x: f64) -> f64 {
        let q = 1.0 + x * x;
        1.0 - self.beta * (1.0 - x * x) / (q * q)
    }

    fn d3h(&self, x: f64) -> f64 {
        let q = 1.0 + x * x;
        2.0 * self.beta * x * (3.0 - x * x) / (q * q * q)
    }

    fn name(&self) -> &str {
        "log_quadratic"
    }

    fn asymptotic_curvature(&self) -> (f64, f64) {
        (1.0, 1.0)
    }
}

/// Potential given by tabulated `(x, H, H', H'')` samples.
///
/// `H` is the cubic Hermite interpolant of `(H, H')` and `H'` the cubic Hermite
/// interpolant of `(H', H'')`; beyond the table `H'` continues linearly with the
/// end-point curvature.
#[derive(Debug, Clone)]
pub struct Tabulated {
    xs: Vec<f64>,
    h: Vec<f64>,
    dh: Vec<f64>,
    d2h: Vec<f64>,
}

impl Tabulated {
    pub fn new(xs: Vec<f64>, h: Vec<f64>, dh: Vec<f64>, d2h: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 4 || h.len() != n || dh.len() != n || d2h.len() != n {
            return Err(Error::Parse(
                "tabulated potential needs at least 4 rows of equal length".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse("tabulated x values must be strictly increasing".into()));
        }
        if xs.iter().chain(&h).chain(&dh).chain(&d2h).any(|v| !v.is_finite()) {
            return Err(Error::Parse("tabulated potential contains non-finite values".into()));
        }
        Ok(Self { xs, h, dh, d2h })
    }

    /// Reads a CSV with columns `x,H,dH,d2H`; a non-numeric first line is treated as a header.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let (mut xs, mut h, mut dh, mut d2h) = (vec![], vec![], vec![], vec![]);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) if v.len() == 4 => {
                    xs.push(v[0]);
                    h.push(v[1]);
                    dh.push(v[2]);
                    d2h.push(v[3]);
                }
                Err(_) if xs.is_empty() && lineno == 0 => continue,
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: expected four numeric columns x,H,dH,d2H",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(xs, h, dh, d2h)
    }

    fn locate(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&v| v <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    /// Cubic Hermite interpolant of values `f` and slopes `df`: value, first and
    /// second derivative at `x` inside interval `i`.
    fn hermite(&self, f: &[f64], df: &[f64], i: usize, x: f64) -> (f64, f64, f64) {
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let w = x1 - x0;
        let t = (x - x0) / w;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * f[i] + h10 * w * df[i] + h01 * f[i + 1] + h11 * w * df[i + 1];
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        let dv = (d00 * f[i] + d01 * f[i + 1]) / w + d10 * df[i] + d11 * df[i + 1];
        let e00 = 12.0 * t - 6.0;
        let e10 = 6.0 * t - 4.0;
        let e11 = 6.0 * t - 2.0;
        let ddv = (e00 * (f[i] - f[i + 1])) / (w * w) + (e10 * df[i] + e11 * df[i + 1]) / w;
        (v, dv, ddv)
    }

    /// `Some(offset, index)` when `x` lies outside the table.
    fn outside(&self, x: f64) -> Option<(f64, usize)> {
        let last = self.xs.len() - 1;
        if x < self.xs[0] {
            Some((x - self.xs[0], 0))
        } else if x > self.xs[last] {
            Some((x - self.xs[last], last))
        } else {
            None
        }
    }
}

impl PotentialModel for Tabulated {
    fn h(&self, x: f64) -> f64 {
        if let Some((d, j)) = self.outside(x) {
            return self.h[j] + self.dh[j] * d + 0.5 * self.d2h[j] * d * d;
        }
        self.hermite(&self.h, &self.dh, self.locate(x), x).0
    }

    fn dh(&self, x: f64) -> f64 {
        if let Some((d, j)) = self.outside(x) {
            return self.dh[j] + self.d2h[j] * d;
        }
        self.hermite(&self.dh, &self.d2h, self.locate(x), x).0
    }

    fn d2h(&self, x: f64) -> f64 {
        if let Some((_, j)) = self.outside(x) {
            return self.d2h[j];
        }
        self.hermite(&self.dh, &self.d2h, self.locate(x), x).1
    }

    fn d3h(&self, x: f64) -> f64 {
        if self.outside(x).is_some() {
            return 0.0;
        }
        self.hermite(&self.dh, &self.d2h, self.locate(x), x).2
    }

    fn name(&self) -> &str {
        "tabulated"
    }

    fn asymptotic_curvature(&self) -> (f64, f64) {
        (self.d2h[0], self.d2h[self.d2h.len() - 1])
    }
}

/// The three monotone branches of the inverse of `H'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Left stable branch, `(−∞, σ*] → (−∞, x*]`.
    Minus,
    /// Spinodal branch, `[σ_*, σ*] → [x*, x_*]`.
    Zero,
    /// Right stable branch, `[σ_*, ∞) → [x_*, ∞)`.
    Plus,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Minus => "X-",
            Branch::Zero => "X0",
            Branch::Plus => "X+",
        })
    }
}

/// Landmark points of a double well, computed once at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Landmarks {
    /// `x*` < 0: left zero of `H''`.
    pub spinodal_left: f64,
    /// `x_*` > 0: right zero of `H''`.
    pub spinodal_right: f64,
    /// `σ* = H'(x*)`, the local maximum of `H'`.
    pub sigma_upper: f64,
    /// `σ_* = H'(x_*)`, the local minimum of `H'`.
    pub sigma_lower: f64,
    /// `x_** < x*` with `H'(x_**) = σ_*`.
    pub companion_left: f64,
    /// `x^** > x_*` with `H'(x^**) = σ*`.
    pub companion_right: f64,
    /// Positions of the two global minima.
    pub well_left: f64,
    pub well_right: f64,
    /// `h_thres = h±(0)`.
    pub h_thres: f64,
}

/// A double-well potential satisfying the structural assumptions (two spinodal
/// points, asymptotically linear `H'`), with cached landmarks.
#[derive(Debug, Clone)]
pub struct DoubleWellPotential {
    model: Arc<dyn PotentialModel>,
    landmarks: Landmarks,
    tol: f64,
}

/// The default log-quadratic double well with well-depth parameter `beta`.
pub fn default_potential(beta: f64) -> Result<DoubleWellPotential> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::Domain(format!(
            "beta must exceed 1 (got {beta}); otherwise H has no spinodal region"
        )));
    }
    DoubleWellPotential::new(Arc::new(LogQuadratic { beta }))
}

impl DoubleWellPotential {
    /// Validates the model and computes its landmarks.
    pub fn new(model: Arc<dyn PotentialModel>) -> Result<Self> {
        let m = model.as_ref();
        if m.dh(0.0).abs() > 1e-8 || !(m.d2h(0.0) < 0.0) {
            return Err(Error::Domain(
                "potential must have a local maximum at x = 0 (H'(0) = 0, H''(0) < 0)".into(),
            ));
        }
        let (c_minus, c_plus) = m.asymptotic_curvature();
        if !(c_minus > 0.0 && c_plus > 0.0) {
            return Err(Error::Domain(format!(
                "H'' must tend to positive constants at ±∞ (got {c_minus}, {c_plus})"
            )));
        }
        let d2 = |x: f64| m.d2h(x);
        let (lo, hi) = expand_bracket(&d2, 0.0, 1.0, 0.25)?;
        let spinodal_right = bisect(d2, lo, hi, 1e-15)?;
        let (lo, hi) = expand_bracket(&d2, 0.0, -1.0, 0.25)?;
        let spinodal_left = bisect(d2, lo, hi, 1e-15)?;
        let sigma_upper = m.dh(spinodal_left);
        let sigma_lower = m.dh(spinodal_right);
        if !(sigma_lower < 0.0 && 0.0 < sigma_upper) {
            return Err(Error::Domain(format!(
                "expected σ_* < 0 < σ*, got σ_* = {sigma_lower}, σ* = {sigma_upper}"
            )));
        }

        let mut pot = Self {
            model,
            landmarks: Landmarks {
                spinodal_left,
                spinodal_right,
                sigma_upper,
                sigma_lower,
                companion_left: f64::NAN,
                companion_right: f64::NAN,
                well_left: f64::NAN,
                well_right: f64::NAN,
                h_thres: f64::NAN,
            },
            tol: BRANCH_TOL,
        };
        pot.check_curvature_sign_pattern()?;

        let companion_left = pot.branch(Branch::Minus, sigma_lower)?;
        let companion_right = pot.branch(Branch::Plus, sigma_upper)?;
        let well_left = pot.branch(Branch::Minus, 0.0)?;
        let well_right = pot.branch(Branch::Plus, 0.0)?;
        let (h_left, h_right) = (pot.h(well_left), pot.h(well_right));
        if (h_left - h_right).abs() > 1e-6 * (1.0 + h_left.abs()) {
            return Err(Error::Domain(format!(
                "the two wells must be global minima of equal depth (H = {h_left}, {h_right})"
            )));
        }
        let h_thres = pot.h(0.0) - h_left.max(h_right);
        pot.landmarks.companion_left = companion_left;
        pot.landmarks.companion_right = companion_right;
        pot.landmarks.well_left = well_left;
        pot.landmarks.well_right = well_right;
        pot.landmarks.h_thres = h_thres;
        Ok(pot)
    }

    /// `H''` must be negative exactly between the two spinodal points.
    fn check_curvature_sign_pattern(&self) -> Result<()> {
        let lm = &self.landmarks;
        let span = 4.0 * (lm.spinodal_right - lm.spinodal_left).max(1.0);
        let n = 4000;
        let eps = 1e-9 * span;
        for k in 0..=n {
            let x = -span + 2.0 * span * k as f64 / n as f64;
            let c = self.d2h(x);
            let inside = x > lm.spinodal_left + eps && x < lm.spinodal_right - eps;
            let outside = x < lm.spinodal_left - eps || x > lm.spinodal_right + eps;
            if (inside && c >= 0.0) || (outside && c <= 0.0) {
                return Err(Error::Domain(format!(
                    "H'' has an extra sign change near x = {x:.6}; exactly two spinodal points are required"
                )));
            }
        }
        Ok(())
    }

    /// Same potential with a different branch tolerance.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn model(&self) -> &dyn PotentialModel {
        self.model.as_ref()
    }

    pub fn name(&self) -> &str {
        self.model.name()
    }

    pub fn landmarks(&self) -> &Landmarks {
        &self.landmarks
    }

    #[inline]
    pub fn h(&self, x: f64) -> f64 {
        self.model.h(x)
    }

    #[inline]
    pub fn dh(&self, x: f64) -> f64 {
        self.model.dh(x)
    }

    #[inline]
    pub fn d2h(&self, x: f64) -> f64 {
        self.model.d2h(x)
    }

    #[inline]
    pub fn d3h(&self, x: f64) -> f64 {
        self.model.d3h(x)
    }

    /// Effective potential `H_σ(x) = H(x) − σx`.
    #[inline]
    pub fn h_sigma(&self, x: f64, sigma: f64) -> f64 {
        self.model.h(x) - sigma * x
    }

    /// Admissible multiplier interval of a branch.
    pub fn branch_domain(&self, branch: Branch) -> (f64, f64) {
        let lm = &self.landmarks;
        match branch {
            Branch::Minus => (f64::NEG_INFINITY, lm.sigma_upper),
            Branch::Zero => (lm.sigma_lower, lm.sigma_upper),
            Branch::Plus => (lm.sigma_lower, f64::INFINITY),
        }
    }

    /// Solves `H'(x) = sigma` on the requested branch.
    pub fn branch(&self, branch: Branch, sigma: f64) -> Result<f64> {
        let (lo, hi) = self.branch_domain(branch);
        if !sigma.is_finite() || sigma < lo - DOMAIN_SLACK || sigma > hi + DOMAIN_SLACK {
            return Err(Error::Domain(format!(
                "multiplier {sigma} outside the domain [{lo}, {hi}] of branch {branch}"
            )));
        }
        let sigma = sigma.clamp(lo, hi);
        let lm = &self.landmarks;
        let f = |x: f64| self.model.dh(x) - sigma;
        match branch {
            Branch::Zero => {
                if sigma >= lm.sigma_upper {
                    return Ok(lm.spinodal_left);
                }
                if sigma <= lm.sigma_lower {
                    return Ok(lm.spinodal_right);
                }
                bisect(f, lm.spinodal_left, lm.spinodal_right, self.tol)
            }
            Branch::Minus => {
                if sigma >= lm.sigma_upper {
                    return Ok(lm.spinodal_left);
                }
                let (a, b) = expand_bracket(&f, lm.spinodal_left, -1.0, 1.0)?;
                bisect(f, a, b, self.tol)
            }
            Branch::Plus => {
                if sigma <= lm.sigma_lower {
                    return Ok(lm.spinodal_right);
                }
                let (a, b) = expand_bracket(&f, lm.spinodal_right, 1.0, 1.0)?;
                bisect(f, a, b, self.tol)
            }
        }
    }

    /// Energy barriers `(h₋(σ), h₊(σ))` of the tilted potential.
    pub fn barriers(&self, sigma: f64) -> Result<(f64, f64)> {
        let lm = &self.landmarks;
        if !(sigma >= lm.sigma_lower - DOMAIN_SLACK && sigma <= lm.sigma_upper + DOMAIN_SLACK) {
            return Err(Error::Domain(format!(
                "barriers need σ in [{}, {}] where H_σ is a double well; got {sigma}",
                lm.sigma_lower, lm.sigma_upper
            )));
        }
        let top = self.h_sigma(self.branch(Branch::Zero, sigma)?, sigma);
        let left = self.h_sigma(self.branch(Branch::Minus, sigma)?, sigma);
        let right = self.h_sigma(self.branch(Branch::Plus, sigma)?, sigma);
        Ok(((top - left).max(0.0), (top - right).max(0.0)))
    }

    pub fn h_thres(&self) -> f64 {
        self.landmarks.h_thres
    }
}

/// Fast-reaction parameter bundle `τ = exp(−h_#/ν²)` with critical multipliers
/// `σ_#` (where `h₊ = h_#`) and `σ^#` (where `h₋ = h_#`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRegime {
    pub nu: f64,
    pub h_sharp: f64,
    pub tau: f64,
    pub h_thres: f64,
    /// `σ_#`
    pub sigma_low: f64,
    /// `σ^#`
    pub sigma_high: f64,
    /// Transient time `t_* = ν²τ`.
    pub t_transient: f64,
    /// Set when `h_# ≥ h_thres`, in which case both critical values are 0.
    pub degenerate: bool,
}

impl ScalingRegime {
    pub fn new(pot: &DoubleWellPotential, nu: f64, h_sharp: f64) -> Result<Self> {
        scaling_regime(pot, nu, h_sharp)
    }
}

pub fn scaling_regime(pot: &DoubleWellPotential, nu: f64, h_sharp: f64) -> Result<ScalingRegime> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("nu must be positive, got {nu}")));
    }
    if !(h_sharp > 0.0 && h_sharp.is_finite()) {
        return Err(Error::Domain(format!("h_sharp must be positive, got {h_sharp}")));
    }
    let tau = (-h_sharp / (nu * nu)).exp();
    let h_thres = pot.h_thres();
    let lm = *pot.landmarks();
    let (sigma_low, sigma_high, degenerate) = if h_sharp >= h_thres {
        (0.0, 0.0, true)
    } else {
        let high = bisect(
            |s| pot.barriers(s).map(|b| b.0).unwrap_or(f64::NAN) - h_sharp,
            lm.sigma_lower,
            lm.sigma_upper,
            1e-14,
        )?;
        let low = bisect(
            |s| pot.barriers(s).map(|b| b.1).unwrap_or(f64::NAN) - h_sharp,
            lm.sigma_lower,
            lm.sigma_upper,
            1e-14,
        )?;
        (low, high, false)
    };
    Ok(ScalingRegime {
        nu,
        h_sharp,
        tau,
        h_thres,
        sigma_low,
        sigma_high,
        t_transient: nu * nu * tau,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn beta2() -> DoubleWellPotential {
        default_potential(2.0).unwrap()
    }

    #[test]
    fn rejects_beta_at_most_one() {
        for beta in [0.5, 1.0, f64::NAN] {
            let err = default_potential(beta).unwrap_err();
            assert!(err.to_string().contains("beta must exceed 1"), "{err}");
        }
    }

    #[test]
    fn beta2_wells_at_plus_minus_one() {
        let pot = beta2();
        let lm = pot.landmarks();
        assert_abs_diff_eq!(lm.well_left, -1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(lm.well_right, 1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(pot.d2h(1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pot.dh(-1.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn beta2_spinodal_landmarks() {
        // x_*² solves x⁴ + 4x² − 1 = 0
        let xs = (5f64.sqrt() - 2.0).sqrt();
        let sig = xs * (1.0 - 2.0 / (1.0 + xs * xs));
        let pot = beta2();
        let lm = pot.landmarks();
        assert_abs_diff_eq!(lm.spinodal_right, xs, epsilon = 1e-13);
        assert_abs_diff_eq!(lm.spinodal_left, -xs, epsilon = 1e-13);
        assert_abs_diff_eq!(lm.sigma_lower, sig, epsilon = 1e-13);
        assert_abs_diff_eq!(lm.sigma_upper, -sig, epsilon = 1e-13);
        assert_abs_diff_eq!(lm.spinodal_right, 0.4859, epsilon = 1e-4);
        assert_abs_diff_eq!(lm.sigma_lower, -0.3002, epsilon = 1e-4);
        assert!(lm.companion_left < lm.spinodal_left && lm.companion_right > lm.spinodal_right);
        assert_abs_diff_eq!(pot.dh(lm.companion_right), lm.sigma_upper, epsilon = 1e-12);
        assert_abs_diff_eq!(pot.dh(lm.companion_left), lm.sigma_lower, epsilon = 1e-12);
    }

    #[test]
    fn beta2_threshold_barrier() {
        let pot = beta2();
        assert_abs_diff_eq!(pot.h_thres(), 2f64.ln() - 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pot.h_thres(), 0.1931, epsilon = 1e-4);
    }

    #[test]
    fn curvature_tends_to_constants() {
        let pot = beta2();
        for x in [-1e4, 1e4] {
            assert!((pot.d2h(x) - 1.0).abs() < 1e-7);
            assert!(pot.d3h(x).abs() < 1e-7);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = LogQuadratic { beta: 2.7 };
        let e = 1e-5;
        for &x in &[-2.3, -0.7, 0.1, 0.9, 3.1] {
            assert_abs_diff_eq!((m.h(x + e) - m.h(x - e)) / (2.0 * e), m.dh(x), epsilon = 1e-8);
            assert_abs_diff_eq!((m.dh(x + e) - m.dh(x - e)) / (2.0 * e), m.d2h(x), epsilon = 1e-8);
            assert_abs_diff_eq!((m.d2h(x + e) - m.d2h(x - e)) / (2.0 * e), m.d3h(x), epsilon = 1e-8);
        }
    }

    #[test]
    fn branch_examples() {
        let pot = beta2();
        assert_abs_diff_eq!(pot.branch(Branch::Zero, 0.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pot.branch(Branch::Plus, 0.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pot.branch(Branch::Minus, 0.0).unwrap(), -1.0, epsilon = 1e-12);
        // x(1 − 2/(1+x²)) = 0.15 on [x_*, 10], solved independently
        let oracle = bisect(|x| x * (1.0 - 2.0 / (1.0 + x * x)) - 0.15, 0.4859, 10.0, 1e-15).unwrap();
        let x = pot.branch(Branch::Plus, 0.15).unwrap();
        assert_abs_diff_eq!(x, oracle, epsilon = 1e-12);
        // the root is 1.1413; H'(1.332) ≈ 0.372
        assert_abs_diff_eq!(x, 1.141326, epsilon = 1e-6);
    }

    #[test]
    fn branch_domain_errors_name_the_branch() {
        let pot = beta2();
        let err = pot.branch(Branch::Zero, 0.5).unwrap_err().to_string();
        assert!(err.contains("X0"), "{err}");
        assert!(pot.branch(Branch::Minus, 0.31).is_err());
        assert!(pot.branch(Branch::Plus, -0.31).is_err());
        assert!(pot.branch(Branch::Minus, -50.0).is_ok());
    }

    #[test]
    fn barrier_endpoints() {
        let pot = beta2();
        let lm = *pot.landmarks();
        let (hm, _) = pot.barriers(lm.sigma_upper).unwrap();
        assert_abs_diff_eq!(hm, 0.0, epsilon = 1e-12);
        let (_, hp) = pot.barriers(lm.sigma_lower).unwrap();
        assert_abs_diff_eq!(hp, 0.0, epsilon = 1e-12);
        let (hm, hp) = pot.barriers(0.0).unwrap();
        // H(0) − H(±1) directly
        let direct = pot.h(0.0) - pot.h(1.0);
        assert_abs_diff_eq!(hm, direct, epsilon = 1e-12);
        assert_abs_diff_eq!(hp, direct, epsilon = 1e-12);
        assert!(pot.barriers(0.31).is_err());
    }

    #[test]
    fn regime_tau_and_degenerate_case() {
        let pot = beta2();
        let r = scaling_regime(&pot, 0.3, 0.1).unwrap();
        assert_abs_diff_eq!(r.tau, (-0.1f64 / 0.09).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.tau, 0.3292, epsilon = 1e-4);
        assert_abs_diff_eq!(r.nu * r.nu * r.tau.ln(), -0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(r.t_transient, 0.09 * r.tau, epsilon = 1e-15);
        let d = scaling_regime(&pot, 0.25, pot.h_thres()).unwrap();
        assert!(d.degenerate);
        assert_eq!((d.sigma_low, d.sigma_high), (0.0, 0.0));
    }

    #[test]
    fn regime_critical_values_symmetric() {
        let pot = beta2();
        let r = scaling_regime(&pot, 0.25, 0.1).unwrap();
        let lm = pot.landmarks();
        assert!(lm.sigma_lower < r.sigma_low && r.sigma_low < 0.0);
        assert!(0.0 < r.sigma_high && r.sigma_high < lm.sigma_upper);
        assert_abs_diff_eq!(r.sigma_low, -r.sigma_high, epsilon = 1e-11);
        assert_abs_diff_eq!(pot.barriers(r.sigma_high).unwrap().0, 0.1, epsilon = 1e-11);
        assert_abs_diff_eq!(pot.barriers(r.sigma_low).unwrap().1, 0.1, epsilon = 1e-11);
    }

    #[test]
    fn tabulated_reproduces_analytic_potential() {
        let m = LogQuadratic { beta: 2.0 };
        let xs: Vec<f64> = (0..=800).map(|i| -8.0 + 16.0 * i as f64 / 800.0).collect();
        let mut csv = String::from("x,H,dH,d2H\n");
        for &x in &xs {
            csv.push_str(&format!("{x},{},{},{}\n", m.h(x), m.dh(x), m.d2h(x)));
        }
        let tab = Tabulated::from_csv_str(&csv).unwrap();
        let pot = DoubleWellPotential::new(Arc::new(tab)).unwrap();
        let reference = beta2();
        let (a, b) = (pot.landmarks(), reference.landmarks());
        assert_abs_diff_eq!(a.spinodal_right, b.spinodal_right, epsilon = 1e-6);
        assert_abs_diff_eq!(a.sigma_upper, b.sigma_upper, epsilon = 1e-7);
        assert_abs_diff_eq!(a.h_thres, b.h_thres, epsilon = 1e-8);
        assert_abs_diff_eq!(pot.dh(1.2345), m.dh(1.2345), epsilon = 1e-8);
    }

    #[test]
    fn tabulated_rejects_single_well() {
        let xs: Vec<f64> = (0..=40).map(|i| -4.0 + 0.2 * i as f64).collect();
        let tab = Tabulated::new(
            xs.clone(),
            xs.iter().map(|x| 0.5 * x * x).collect(),
            xs.clone(),
            vec![1.0; xs.len()],
        )
        .unwrap();
        assert!(DoubleWellPotential::new(Arc::new(tab)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn branches_invert_the_derivative(u in 0.0f64..1.0, which in 0usize..3) {
            let pot = beta2();
            let lm = *pot.landmarks();
            let (branch, sigma) = match which {
                0 => (Branch::Minus, lm.sigma_upper - 3.0 * u),
                1 => (Branch::Zero, lm.sigma_lower + (lm.sigma_upper - lm.sigma_lower) * u),
                _ => (Branch::Plus, lm.sigma_lower + 3.0 * u),
            };
            let x = pot.branch(branch, sigma).unwrap();
            prop_assert!((pot.dh(x) - sigma).abs() < 1e-11);
            match branch {
                Branch::Minus => prop_assert!(x <= lm.spinodal_left + 1e-12),
                Branch::Zero => prop_assert!(x >= lm.spinodal_left - 1e-12 && x <= lm.spinodal_right + 1e-12),
                Branch::Plus => prop_assert!(x >= lm.spinodal_right - 1e-12),
            }
        }
    }

    #[test]
    fn branches_monotone_and_separated() {
        let pot = beta2();
        let lm = *pot.landmarks();
        let n = 200;
        let sig: Vec<f64> = (0..=n)
            .map(|k| lm.sigma_lower + (lm.sigma_upper - lm.sigma_lower) * k as f64 / n as f64)
            .collect();
        let xm: Vec<f64> = sig.iter().map(|&s| pot.branch(Branch::Minus, s).unwrap()).collect();
        let x0: Vec<f64> = sig.iter().map(|&s| pot.branch(Branch::Zero, s).unwrap()).collect();
        let xp: Vec<f64> = sig.iter().map(|&s| pot.branch(Branch::Plus, s).unwrap()).collect();
        for k in 1..=n {
            assert!(xm[k] > xm[k - 1]);
            assert!(x0[k] < x0[k - 1]);
            assert!(xp[k] > xp[k - 1]);
        }
        let gap = (0..=n).map(|k| xp[k] - xm[k]).fold(f64::INFINITY, f64::min);
        assert!(gap > 1.0, "X+ − X- = {gap}");
    }

    #[test]
    fn barriers_strictly_monotone() {
        let pot = beta2();
        let lm = *pot.landmarks();
        let n = 100;
        let vals: Vec<(f64, f64)> = (0..=n)
            .map(|k| lm.sigma_lower + (lm.sigma_upper - lm.sigma_lower) * k as f64 / n as f64)
            .map(|s| pot.barriers(s).unwrap())
            .collect();
        for w in vals.windows(2) {
            assert!(w[1].0 < w[0].0);
            assert!(w[1].1 > w[0].1);
        }
    }
}
