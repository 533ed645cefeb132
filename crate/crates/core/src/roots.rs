//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Bisection for a sign change of `f` on `[lo, hi]`, stopping once the bracket is
/// narrower than `tol`. Returns the midpoint of the final bracket.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::Numerical(format!(
            "no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})"
        )));
    }
    // 200 halvings exhaust any finite double bracket
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Widens `[anchor, anchor + dir*step]` geometrically until `f` changes sign relative
/// to `f(anchor)`. Returns the bracket ordered as `(lo, hi)`.
pub fn expand_bracket<F>(f: &F, anchor: f64, dir: f64, mut step: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let f0 = f(anchor);
    let mut inner = anchor;
    for _ in 0..200 {
        let outer = anchor + dir * step;
        let fo = f(outer);
        if fo == 0.0 || fo.signum() != f0.signum() {
            return Ok(if dir > 0.0 { (inner, outer) } else { (outer, inner) });
        }
        inner = outer;
        step *= 2.0;
        if !step.is_finite() {
            break;
        }
    }
    Err(Error::Numerical(format!(
        "could not bracket a root starting from {anchor} in direction {dir}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_missing_sign_change() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn expand_bracket_grows_to_the_left() {
        let f = |x: f64| x + 37.0;
        let (lo, hi) = expand_bracket(&f, 0.0, -1.0, 1.0).unwrap();
        assert!(lo <= -37.0 && hi >= -37.0);
    }
}
