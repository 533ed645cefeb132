use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potential::DoubleWellPotential;

/// Smallest admissible number of cells.
pub const MIN_CELLS: usize = 64;

/// Uniform finite-volume grid on the truncated domain `[x_left, x_right]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    x_left: f64,
    x_right: f64,
    dx: f64,
    centers: Vec<f64>,
}

impl Grid {
    pub fn uniform(x_left: f64, x_right: f64, n: usize) -> Result<Self> {
        if !(x_left.is_finite() && x_right.is_finite() && x_left < x_right) {
            return Err(Error::Domain(format!(
                "grid bounds must satisfy xL < xR, got [{x_left}, {x_right}]"
            )));
        }
        if n < MIN_CELLS {
            return Err(Error::Domain(format!("grid needs N ≥ {MIN_CELLS} cells, got {n}")));
        }
        let dx = (x_right - x_left) / n as f64;
        let centers = (0..n).map(|i| x_left + (i as f64 + 0.5) * dx).collect();
        Ok(Self {
            x_left,
            x_right,
            dx,
            centers,
        })
    }

    pub fn n(&self) -> usize {
        self.centers.len()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Errors unless the domain extends `6ν/√c±` beyond the companion points.
    pub fn check_coverage(&self, pot: &DoubleWellPotential, nu: f64) -> Result<()> {
        let (lo, hi) = required_bounds(pot, nu);
        let mut problems = Vec::new();
        if self.x_left >= lo {
            problems.push(format!(
                "grid xL = {} must be below x_** − 6ν/√c₋ = {lo:.6}",
                self.x_left
            ));
        }
        if self.x_right <= hi {
            problems.push(format!(
                "grid xR = {} must exceed x^** + 6ν/√c₊ = {hi:.6}",
                self.x_right
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

/// Bounds the truncated domain has to strictly contain for noise level `nu`.
pub fn required_bounds(pot: &DoubleWellPotential, nu: f64) -> (f64, f64) {
    let lm = pot.landmarks();
    let (c_minus, c_plus) = pot.model().asymptotic_curvature();
    (
        lm.companion_left - 6.0 * nu / c_minus.sqrt(),
        lm.companion_right + 6.0 * nu / c_plus.sqrt(),
    )
}

/// Cell averages of a probability density on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

/// Tolerance on the discrete unit-mass invariant.
pub const MASS_TOL: f64 = 1e-12;

impl GridDensity {
    /// Wraps cell values, checking nonnegativity and unit mass.
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        let d = Self::new_unchecked(grid, values);
        d.validate()?;
        Ok(d)
    }

    /// Normalizes nonnegative cell weights to unit discrete mass.
    pub fn from_unnormalized(grid: Arc<Grid>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Domain(format!(
                "density has {} cells, grid has {}",
                values.len(),
                grid.n()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Numerical(
                "density weights must be finite and nonnegative".into(),
            ));
        }
        let mass: f64 = values.iter().sum::<f64>() * grid.dx();
        if !(mass > 0.0) {
            return Err(Error::Numerical(
                "density vanishes on every cell; refine the grid or increase ν".into(),
            ));
        }
        values.iter_mut().for_each(|v| *v /= mass);
        Ok(Self { grid, values })
    }

    pub(crate) fn new_unchecked(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        Self { grid, values }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.grid.n() {
            return Err(Error::Domain("density length does not match grid".into()));
        }
        if let Some(i) = self.values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Numerical(format!(
                "density value {} at cell {i} is negative or not finite",
                self.values[i]
            )));
        }
        let m = self.mass();
        if (m - 1.0).abs() > MASS_TOL {
            return Err(Error::Numerical(format!("density mass {m} differs from 1")));
        }
        Ok(())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Midpoint quadrature of `∫ f ρ`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = self
            .grid
            .centers()
            .iter()
            .zip(&self.values)
            .map(|(&x, &r)| f(x) * r)
            .sum();
        s * self.grid.dx()
    }

    pub fn first_moment(&self) -> f64 {
        self.integrate(|x| x)
    }

    pub fn second_moment(&self) -> f64 {
        self.integrate(|x| x * x)
    }

    /// `∫_{−∞}^{c} ρ`, splitting the cell that contains `c` proportionally.
    pub fn mass_below(&self, c: f64) -> f64 {
        let g = &self.grid;
        let s = (c - g.x_left()) / g.dx();
        if s <= 0.0 {
            return 0.0;
        }
        let n = g.n();
        if s >= n as f64 {
            return self.mass();
        }
        let k = s.floor() as usize;
        let full: f64 = self.values[..k].iter().sum();
        (full + (s - k as f64) * self.values[k]) * g.dx()
    }

    /// `∫_a^b ρ` with fractional end cells.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        self.mass_below(b) - self.mass_below(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::default_potential;

    #[test]
    fn uniform_grid_geometry() {
        let g = Grid::uniform(-5.0, 5.0, 100).unwrap();
        assert_eq!(g.n(), 100);
        assert!((g.dx() - 0.1).abs() < 1e-15);
        assert!((g.centers()[0] + 4.95).abs() < 1e-12);
        assert!((g.centers()[99] - 4.95).abs() < 1e-12);
        assert!(Grid::uniform(-5.0, 5.0, 63).is_err());
        assert!(Grid::uniform(1.0, -1.0, 100).is_err());
    }

    #[test]
    fn coverage_names_the_bound() {
        let pot = default_potential(2.0).unwrap();
        let (lo, hi) = required_bounds(&pot, 0.3);
        assert!((hi - (pot.landmarks().companion_right + 1.8)).abs() < 1e-12);
        assert!(lo < -3.0);
        Grid::uniform(-5.0, 5.0, 128)
            .unwrap()
            .check_coverage(&pot, 0.3)
            .unwrap();
        let err = Grid::uniform(-5.0, 2.5, 128)
            .unwrap()
            .check_coverage(&pot, 0.3)
            .unwrap_err()
            .to_string();
        assert!(err.contains("x^**"), "{err}");
    }

    #[test]
    fn fractional_masses_add_up() {
        let g = Arc::new(Grid::uniform(-1.0, 1.0, 64).unwrap());
        let d = GridDensity::from_unnormalized(g, vec![1.0; 64]).unwrap();
        assert!((d.mass() - 1.0).abs() < 1e-15);
        assert!((d.mass_below(0.0) - 0.5).abs() < 1e-15);
        assert!((d.mass_between(-0.3, 0.2) - 0.25).abs() < 1e-14);
        assert_eq!(d.mass_below(-2.0), 0.0);
        assert!((d.mass_below(7.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid_densities() {
        let g = Arc::new(Grid::uniform(-1.0, 1.0, 64).unwrap());
        assert!(GridDensity::new(g.clone(), vec![1.0; 64]).is_err());
        let mut v = vec![0.5; 64];
        v[3] = -0.1;
        assert!(GridDensity::from_unnormalized(g.clone(), v).is_err());
        assert!(GridDensity::from_unnormalized(g, vec![0.0; 64]).is_err());
    }
}
