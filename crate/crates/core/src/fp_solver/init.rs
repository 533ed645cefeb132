use std::sync::Arc;

use crate::error::{Error, Result};
use crate::limit_model::ell_of;
use crate::potential::{Branch, DoubleWellPotential};

use super::grid::{Grid, GridDensity};

/// Allowed mismatch `|ℓ₀ − 𝓛(σ_ini, μ_ini)|`, in units of `ν`.
pub const CONSISTENCY_NU_FACTOR: f64 = 10.0;

/// Gaussian peak sampled at cell centers, normalized to unit discrete mass.
fn peak(grid: &Grid, center: f64, sd: f64) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = grid
        .centers()
        .iter()
        .map(|&x| (-(x - center).powi(2) / (2.0 * sd * sd)).exp())
        .collect();
    let m: f64 = v.iter().sum::<f64>() * grid.dx();
    if !(m > 0.0) {
        return Err(Error::Numerical(format!(
            "peak at {center} with width {sd} is not resolved by the grid"
        )));
    }
    v.iter_mut().for_each(|r| *r /= m);
    Ok(v)
}

fn moment(grid: &Grid, v: &[f64]) -> f64 {
    grid.centers().iter().zip(v).map(|(x, r)| x * r).sum::<f64>() * grid.dx()
}

/// Two local Gaussians at `X±(σ_ini)` with widths `ν/√H''(X±)` and masses
/// `(1 ∓ μ_ini)/2`, adjusted so that `∫xρ = ℓ₀` holds exactly: by moving mass
/// between the peaks, or by shifting the peak when `μ_ini = ±1`.
pub fn init_well_prepared(
    pot: &DoubleWellPotential,
    sigma_ini: f64,
    mu_ini: f64,
    nu: f64,
    grid: Arc<Grid>,
    ell0: f64,
) -> Result<GridDensity> {
    if !(-1.0..=1.0).contains(&mu_ini) {
        return Err(Error::Domain(format!("mu_ini must lie in [-1, 1], got {mu_ini}")));
    }
    if !(nu > 0.0) || !sigma_ini.is_finite() {
        return Err(Error::Domain("init needs nu > 0 and a finite sigma_ini".into()));
    }
    let lm = pot.landmarks();
    if sigma_ini <= lm.sigma_lower && mu_ini != -1.0 {
        return Err(Error::Domain(format!(
            "σ_ini = {sigma_ini} ≤ σ_* admits only the left peak; mu_ini must be -1"
        )));
    }
    if sigma_ini >= lm.sigma_upper && mu_ini != 1.0 {
        return Err(Error::Domain(format!(
            "σ_ini = {sigma_ini} ≥ σ* admits only the right peak; mu_ini must be 1"
        )));
    }
    let target = ell_of(pot, sigma_ini, mu_ini)?;
    let residual = ell0 - target;
    if residual.abs() > CONSISTENCY_NU_FACTOR * nu {
        return Err(Error::Domain(format!(
            "inconsistent initial data: ℓ₀ − 𝓛(σ_ini, μ_ini) = {residual:.6e} exceeds {}ν",
            CONSISTENCY_NU_FACTOR
        )));
    }

    let mut w_plus = 0.5 * (1.0 + mu_ini);
    let x_minus = (w_plus < 1.0)
        .then(|| pot.branch(Branch::Minus, sigma_ini))
        .transpose()?;
    let x_plus = (w_plus > 0.0)
        .then(|| pot.branch(Branch::Plus, sigma_ini))
        .transpose()?;
    let sd = |x: f64| nu / pot.d2h(x).sqrt();

    let build = |shift: f64, w_plus: f64| -> Result<Vec<f64>> {
        let mut v = vec![0.0; grid.n()];
        if let Some(x) = x_minus {
            let p = peak(&grid, x + shift, sd(x))?;
            v.iter_mut().zip(&p).for_each(|(r, q)| *r += (1.0 - w_plus) * q);
        }
        if let Some(x) = x_plus {
            let p = peak(&grid, x + shift, sd(x))?;
            v.iter_mut().zip(&p).for_each(|(r, q)| *r += w_plus * q);
        }
        Ok(v)
    };

    let mut shift = 0.0;
    if let (Some(xm), Some(xp)) = (x_minus, x_plus) {
        let mm = moment(&grid, &peak(&grid, xm, sd(xm))?);
        let mp = moment(&grid, &peak(&grid, xp, sd(xp))?);
        let w = (ell0 - mm) / (mp - mm);
        if (0.0..=1.0).contains(&w) {
            w_plus = w;
        }
    }
    let mut v = build(shift, w_plus)?;
    // Newton on a common shift when re-balancing is unavailable
    for _ in 0..8 {
        let err = ell0 - moment(&grid, &v);
        if err.abs() <= 1e-14 * (1.0 + ell0.abs()) {
            break;
        }
        shift += err;
        v = build(shift, w_plus)?;
    }
    GridDensity::from_unnormalized(grid, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::partial_masses;
    use crate::potential::default_potential;

    fn grid() -> Arc<Grid> {
        Arc::new(Grid::uniform(-5.0, 5.0, 2048).unwrap())
    }

    #[test]
    fn single_left_peak() {
        let pot = default_potential(2.0).unwrap();
        let rho = init_well_prepared(&pot, 0.0, -1.0, 0.25, grid(), -1.0).unwrap();
        let m = partial_masses(&rho, &pot);
        // Gaussian tail of width ν beyond the spinodal point, about 2%
        assert!(m.minus > 0.97 && m.plus < 1e-8);
        assert!((m.mu + 1.0).abs() < 0.06);
        assert!((rho.first_moment() + 1.0).abs() < 1e-13);
        assert!((rho.mass() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn symmetric_two_peaks() {
        let pot = default_potential(2.0).unwrap();
        let rho = init_well_prepared(&pot, 0.0, 0.0, 0.25, grid(), 0.0).unwrap();
        let m = partial_masses(&rho, &pot);
        assert!(rho.first_moment().abs() < 1e-14);
        assert!((m.minus - m.plus).abs() < 1e-12);
    }

    #[test]
    fn rebalances_to_exact_moment() {
        let pot = default_potential(2.0).unwrap();
        let rho = init_well_prepared(&pot, 0.05, 0.2, 0.25, grid(), 0.3).unwrap();
        assert!((rho.first_moment() - 0.3).abs() < 1e-13);
    }

    #[test]
    fn inconsistent_data_reports_residual() {
        let pot = default_potential(2.0).unwrap();
        let err = init_well_prepared(&pot, 0.0, -1.0, 0.05, grid(), 1.0)
            .unwrap_err()
            .to_string();
        assert!(err.contains("ℓ₀ − 𝓛"), "{err}");
        assert!(init_well_prepared(&pot, -0.5, 0.0, 0.25, grid(), -1.3).is_err());
        assert!(init_well_prepared(&pot, 0.0, 1.5, 0.25, grid(), 0.0).is_err());
    }

    #[test]
    fn single_peak_outside_spinodal_range() {
        let pot = default_potential(2.0).unwrap();
        let x = pot.branch(Branch::Plus, 0.5).unwrap();
        let rho = init_well_prepared(&pot, 0.5, 1.0, 0.25, grid(), x).unwrap();
        assert!((rho.first_moment() - x).abs() < 1e-13);
    }
}
