use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fp_solver::{simulate_spec, ControlSpec, Coupling, Grid, GridDensity, InitialData, SimulationSpec};
use crate::limit_model::{integrate_limit, LimitOptions, LimitTrajectory};
use crate::potential::{default_potential, scaling_regime};
use crate::record::TrajectoryRecord;

use super::metrics::{plateau_estimates, Plateau};

/// Parameters of the hysteresis benchmark: `β = 2`, `h_# = 0.1`, and the
/// cosine ramp `ℓ(t) = −1.6 cos(πt/T)` from `−1.6` to `1.6`.
pub const BENCHMARK_BETA: f64 = 2.0;
pub const BENCHMARK_H_SHARP: f64 = 0.1;
pub const BENCHMARK_NU: f64 = 0.25;
pub const BENCHMARK_AMPLITUDE: f64 = 1.6;
/// Long enough that at `ν = 0.2` the micro run stays within 0.1 of the limit
/// in `σ`; shorter ramps leave the plateau exit visibly smoothed.
pub const BENCHMARK_DURATION: f64 = 64.0;
pub const BENCHMARK_DOMAIN: (f64, f64) = (-5.0, 5.0);
pub const BENCHMARK_CELLS: usize = 2048;
pub const BENCHMARK_DT_OVER_TAU: f64 = 1.0 / 50.0;

/// The hysteresis benchmark at noise `nu` and step `dt_over_tau·τ`, written
/// every `stride` steps.
pub fn hysteresis_benchmark(nu: f64, dt_over_tau: f64, stride: usize) -> Result<SimulationSpec> {
    let potential = default_potential(BENCHMARK_BETA)?;
    let regime = scaling_regime(&potential, nu, BENCHMARK_H_SHARP)?;
    let grid = Arc::new(Grid::uniform(BENCHMARK_DOMAIN.0, BENCHMARK_DOMAIN.1, BENCHMARK_CELLS)?);
    grid.check_coverage(&potential, nu)?;
    let sigma_ini = potential.dh(-BENCHMARK_AMPLITUDE);
    Ok(SimulationSpec {
        potential,
        regime,
        grid,
        control: ControlSpec::cosine_ramp(BENCHMARK_AMPLITUDE, BENCHMARK_DURATION),
        t_end: BENCHMARK_DURATION,
        dt: dt_over_tau * regime.tau,
        stride,
        coupling: Coupling::Implicit,
        init: InitialData::WellPrepared {
            sigma_ini,
            mu_ini: -1.0,
        },
        eta: 0.1,
        zeta_eps: 0.0,
    })
}

/// Width of the Gaussian start of [`relaxation_scenario`].
pub const RELAXATION_WIDTH: f64 = 0.5;

/// The benchmark over `[0, t_end]` started far from equilibrium, from a
/// Gaussian of width [`RELAXATION_WIDTH`] centred at `ℓ(0)`. The dissipation is
/// large initially, which is what the fault-injection check of the monitor
/// needs.
pub fn relaxation_scenario(nu: f64, t_end: f64) -> Result<SimulationSpec> {
    let mut spec = hysteresis_benchmark(nu, BENCHMARK_DT_OVER_TAU, 5)?;
    let x0 = spec.control.ell(0.0);
    let values = spec
        .grid
        .centers()
        .iter()
        .map(|x| (-0.5 * ((x - x0) / RELAXATION_WIDTH).powi(2)).exp())
        .collect();
    spec.init = InitialData::Density(GridDensity::from_unnormalized(spec.grid.clone(), values)?);
    spec.t_end = t_end;
    Ok(spec)
}

/// Micro run, limit run on the same output times, and the plateau summary.
#[derive(Debug, Clone)]
pub struct HysteresisRun {
    pub record: TrajectoryRecord,
    pub limit: LimitTrajectory,
    pub plateaus: Vec<Plateau>,
    pub dt_used: f64,
}

/// `(σ_ini, μ_ini)` of a spec with well-prepared data.
pub(crate) fn well_prepared_data(spec: &SimulationSpec) -> Result<(f64, f64)> {
    match spec.init {
        InitialData::WellPrepared { sigma_ini, mu_ini } => Ok((sigma_ini, mu_ini)),
        _ => Err(Error::Domain(
            "comparison with the limit model needs well-prepared initial data".into(),
        )),
    }
}

/// Limit trajectory evaluated at the record's output times.
pub(crate) fn limit_on_record(spec: &SimulationSpec, record: &TrajectoryRecord) -> Result<LimitTrajectory> {
    let (sigma0, mu0) = well_prepared_data(spec)?;
    integrate_limit(
        &spec.potential,
        &spec.regime,
        &spec.control,
        sigma0,
        mu0,
        spec.t_end,
        &LimitOptions::at_times(record.times()),
    )
}

pub fn run_hysteresis(spec: &SimulationSpec) -> Result<HysteresisRun> {
    well_prepared_data(spec)?;
    let sim = simulate_spec(spec)?;
    let limit = limit_on_record(spec, &sim.record)?;
    let plateaus = plateau_estimates(&sim.record, &spec.control);
    Ok(HysteresisRun {
        record: sim.record,
        limit,
        plateaus,
        dt_used: sim.dt_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_is_consistent() {
        let spec = hysteresis_benchmark(0.25, BENCHMARK_DT_OVER_TAU, 10).unwrap();
        let (s, mu) = well_prepared_data(&spec).unwrap();
        let ell0 = crate::limit_model::ell_of(&spec.potential, s, mu).unwrap();
        assert!((ell0 - spec.control.ell(0.0)).abs() < 1e-12);
        assert!((spec.control.ell(BENCHMARK_DURATION) - BENCHMARK_AMPLITUDE).abs() < 1e-12);
    }

    #[test]
    fn up_down_cycle_has_two_plateaus() {
        // coarse, fast-to-run version of the benchmark
        let mut spec = hysteresis_benchmark(0.3, 0.1, 1).unwrap();
        spec.grid = Arc::new(Grid::uniform(-5.0, 5.0, 512).unwrap());
        // up on [0, 24], back down on [24, 48]
        spec.control = ControlSpec::cosine_ramp(1.6, 24.0);
        spec.t_end = 48.0;
        let run = run_hysteresis(&spec).unwrap();
        let p = &run.plateaus;
        assert_eq!(p.len(), 2, "{p:?}");
        assert!(p[0].direction > 0.0 && p[0].sigma > 0.0);
        assert!(p[1].direction < 0.0 && p[1].sigma < 0.0);
        assert!((p[0].sigma + p[1].sigma).abs() < 0.02);
    }
}
