use std::sync::Arc;

use crate::diagnostics::partial_masses;
use crate::error::{Error, Result};
use crate::fp_solver::{ControlSpec, Coupling, FpSolver, Grid, GridDensity};
use crate::langevin::{Ensemble, ParticleStepper};
use crate::potential::{DoubleWellPotential, ScalingRegime};

/// `m₊` of the particle and PDE runs at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub t: f64,
    pub m_plus_particles: f64,
    pub m_plus_pde: f64,
    /// `√(p(1 − p)/N)` with `p` the PDE value.
    pub binomial_sd: f64,
}

impl Checkpoint {
    /// Discrepancy in binomial standard deviations.
    pub fn z_score(&self) -> f64 {
        (self.m_plus_particles - self.m_plus_pde).abs() / self.binomial_sd
    }
}

/// Frozen-`σ` scenario started from a point mass at `x0`: the ensemble starts
/// with every particle at `x0`, the PDE with all mass in the cell holding `x0`.
#[derive(Debug, Clone)]
pub struct AgreementSetup {
    pub x0: f64,
    pub sigma: f64,
    pub particles: usize,
    pub seed: u64,
    pub grid: Arc<Grid>,
    pub dt_over_tau: f64,
    /// Checkpoint times in units of `τ`, increasing.
    pub checkpoints: Vec<f64>,
}

pub fn particle_pde_checkpoints(
    pot: &DoubleWellPotential,
    regime: &ScalingRegime,
    setup: &AgreementSetup,
) -> Result<Vec<Checkpoint>> {
    if setup.checkpoints.is_empty() || setup.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("checkpoints must be nonempty and increasing".into()));
    }
    let tau = regime.tau;
    let dt = setup.dt_over_tau * tau;
    let grid = &setup.grid;
    let cell = ((setup.x0 - grid.x_left()) / grid.dx()).floor();
    if !(cell >= 0.0 && (cell as usize) < grid.n()) {
        return Err(Error::Domain(format!("x0 = {} lies outside the grid", setup.x0)));
    }
    let mut values = vec![0.0; grid.n()];
    values[cell as usize] = 1.0 / grid.dx();
    let rho0 = GridDensity::new(grid.clone(), values)?;
    let control = ControlSpec::constant(setup.x0);
    let coupling = Coupling::Frozen(setup.sigma);
    let mut solver = FpSolver::new(pot.clone(), *regime, grid.clone(), control.clone(), coupling)?;
    let mut state = solver.state(0.0, rho0);
    let mut stepper = ParticleStepper::new(pot.clone(), *regime, control, coupling);
    let mut ens = Ensemble::at_point(setup.particles, setup.x0, setup.seed)?;
    ens.sigma = setup.sigma;

    let mut out = Vec::with_capacity(setup.checkpoints.len());
    let mut k = 0usize;
    for &c in &setup.checkpoints {
        let target = (c / setup.dt_over_tau).round() as usize;
        while k < target {
            solver.step(&mut state, dt)?;
            stepper.step(&mut ens, dt)?;
            k += 1;
        }
        let p = partial_masses(&state.rho, pot).plus;
        out.push(Checkpoint {
            t: k as f64 * dt,
            m_plus_particles: ens.partial_masses(pot).plus,
            m_plus_pde: p,
            binomial_sd: (p * (1.0 - p) / setup.particles as f64).sqrt(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{default_potential, scaling_regime};

    #[test]
    fn small_ensemble_agrees_loosely() {
        let pot = default_potential(2.0).unwrap();
        let regime = scaling_regime(&pot, 0.4, 0.1).unwrap();
        let setup = AgreementSetup {
            x0: -1.0,
            sigma: 0.0,
            particles: 4000,
            seed: 11,
            grid: Arc::new(Grid::uniform(-5.0, 5.0, 512).unwrap()),
            dt_over_tau: 0.05,
            checkpoints: vec![5.0, 10.0],
        };
        let cps = particle_pde_checkpoints(&pot, &regime, &setup).unwrap();
        assert_eq!(cps.len(), 2);
        for c in &cps {
            assert!(c.m_plus_pde > 0.0 && c.z_score() < 5.0, "{c:?}");
        }
    }
}
