use std::sync::Arc;

use rayon::prelude::*;

use crate::diagnostics::{kramers_rates, partial_masses};
use crate::error::{Error, Result};
use crate::fp_solver::{init_well_prepared, ControlSpec, Coupling, FpSolver, Grid};
use crate::potential::{scaling_regime, Branch, DoubleWellPotential};

use super::metrics::linear_fit;

/// Window `[5τ, 50τ]` of the exponential fit, in units of `τ`.
pub const FIT_WINDOW: (f64, f64) = (5.0, 50.0);

/// Measured against predicted relaxation of `μ` under frozen `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KramersRow {
    pub nu: f64,
    pub tau: f64,
    pub sigma: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    /// `−d/dt ln|μ − μ∞|` fitted on the window.
    pub measured_rate: f64,
    /// `F₋ + F₊`
    pub predicted_rate: f64,
    pub ratio: f64,
    /// Equilibrium `μ` of the discrete Gibbs state.
    pub mu_inf: f64,
    /// Whether both barriers exceed `4ν²`, the usual validity heuristic of
    /// the asymptotic formula.
    pub asymptotic: bool,
}

/// Grid and step used by [`run_kramers_validation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KramersSetup {
    pub domain: (f64, f64),
    pub cells: usize,
    pub dt_over_tau: f64,
}

impl Default for KramersSetup {
    fn default() -> Self {
        Self {
            domain: (-5.0, 5.0),
            cells: 2048,
            dt_over_tau: 0.05,
        }
    }
}

/// For each `ν`: start from a single peak in the left well, run the linear
/// Fokker–Planck equation with `σ` frozen, and fit the exponential relaxation
/// rate of `μ(t)` over [`FIT_WINDOW`].
pub fn run_kramers_validation(
    pot: &DoubleWellPotential,
    h_sharp: f64,
    nu_list: &[f64],
    sigma: f64,
    setup: KramersSetup,
) -> Result<Vec<KramersRow>> {
    let grid = Arc::new(Grid::uniform(setup.domain.0, setup.domain.1, setup.cells)?);
    nu_list
        .par_iter()
        .map(|&nu| kramers_member(pot, h_sharp, nu, sigma, setup, grid.clone()))
        .collect()
}

fn kramers_member(
    pot: &DoubleWellPotential,
    h_sharp: f64,
    nu: f64,
    sigma: f64,
    setup: KramersSetup,
    grid: Arc<Grid>,
) -> Result<KramersRow> {
    let regime = scaling_regime(pot, nu, h_sharp)?;
    grid.check_coverage(pot, nu)?;
    let rates = kramers_rates(pot, &regime, sigma)?;
    let nu2 = nu * nu;
    let x_minus = pot.branch(Branch::Minus, sigma)?;
    let mut solver = FpSolver::new(
        pot.clone(),
        regime,
        grid.clone(),
        ControlSpec::constant(x_minus),
        Coupling::Frozen(sigma),
    )?;
    let mu_inf = partial_masses(&solver.discretization().gibbs(sigma)?, pot).mu;
    let rho0 = init_well_prepared(pot, sigma, -1.0, nu, grid, x_minus)?;
    let mut state = solver.state(0.0, rho0);
    let dt = setup.dt_over_tau * regime.tau;
    let n_steps = (FIT_WINDOW.1 / setup.dt_over_tau).round() as usize;
    let (mut ts, mut ys) = (Vec::new(), Vec::new());
    for k in 1..=n_steps {
        solver.step(&mut state, dt)?;
        state.t = k as f64 * dt;
        if state.t >= FIT_WINDOW.0 * regime.tau * (1.0 - 1e-12) {
            let gap = (partial_masses(&state.rho, pot).mu - mu_inf).abs();
            ts.push(state.t);
            ys.push(gap.ln());
        }
    }
    if ys.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Numerical(format!(
            "relaxation of μ is not monotone on the fit window at ν = {nu}"
        )));
    }
    let (slope, _) = linear_fit(&ts, &ys).ok_or_else(|| Error::Numerical(format!("rate fit failed at ν = {nu}")))?;
    let measured = -slope;
    let predicted = rates.relaxation_rate();
    Ok(KramersRow {
        nu,
        tau: regime.tau,
        sigma,
        h_minus: rates.h_minus,
        h_plus: rates.h_plus,
        measured_rate: measured,
        predicted_rate: predicted,
        ratio: measured / predicted,
        mu_inf,
        asymptotic: rates.h_minus > 4.0 * nu2 && rates.h_plus > 4.0 * nu2,
    })
}
