use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fp_solver::{simulate_spec, SimulationSpec};
use crate::limit_model::LimitTrajectory;
use crate::potential::scaling_regime;
use crate::record::TrajectoryRecord;

use super::metrics::sup_distance;
use super::scenarios::limit_on_record;

/// One member of a `ν`-sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub nu: f64,
    pub tau: f64,
    /// `sup_{t ≥ t₀} |σ_ν − σ₀|`
    pub sigma_distance: f64,
    /// `sup_{t ≥ t₀} |μ_ν − μ₀|`
    pub mu_distance: f64,
    pub max_zeta_over_nu2: f64,
    pub constraint_drift: f64,
    /// Wall-clock seconds; kept out of the deterministic CSV.
    pub runtime: f64,
    /// Failure message when the member could not be run; distances are NaN then.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepMember {
    pub row: SweepRow,
    pub record: Option<TrajectoryRecord>,
    pub limit: Option<LimitTrajectory>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub t0: f64,
    pub members: Vec<SweepMember>,
}

impl SweepResult {
    pub fn rows(&self) -> Vec<&SweepRow> {
        self.members.iter().map(|m| &m.row).collect()
    }
}

/// Runs `base` for every `ν` in `nu_list` (with `dt = dt_over_tau·τ(ν)`) and
/// compares against the limit model on the shared output times. Members run
/// concurrently and are reported in the order of `nu_list`; a failing member
/// is reported in its row without aborting the sweep.
pub fn run_convergence_study(base: &SimulationSpec, nu_list: &[f64], dt_over_tau: f64, t0: f64) -> Result<SweepResult> {
    if nu_list.is_empty() {
        return Err(Error::Domain("the ν-sweep needs at least one value".into()));
    }
    if nu_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("nu_list must be strictly decreasing".into()));
    }
    if !(t0 >= 0.0) || !(dt_over_tau > 0.0) {
        return Err(Error::Domain("need t0 ≥ 0 and dt_over_tau > 0".into()));
    }
    let members = nu_list
        .par_iter()
        .map(|&nu| {
            let start = Instant::now();
            match run_member(base, nu, dt_over_tau, t0) {
                Ok((mut row, record, limit)) => {
                    row.runtime = start.elapsed().as_secs_f64();
                    SweepMember {
                        row,
                        record: Some(record),
                        limit: Some(limit),
                    }
                }
                Err(e) => SweepMember {
                    row: SweepRow {
                        nu,
                        tau: (-base.regime.h_sharp / (nu * nu)).exp(),
                        sigma_distance: f64::NAN,
                        mu_distance: f64::NAN,
                        max_zeta_over_nu2: f64::NAN,
                        constraint_drift: f64::NAN,
                        runtime: start.elapsed().as_secs_f64(),
                        error: Some(e.to_string()),
                    },
                    record: None,
                    limit: None,
                },
            }
        })
        .collect();
    Ok(SweepResult { t0, members })
}

fn run_member(
    base: &SimulationSpec,
    nu: f64,
    dt_over_tau: f64,
    t0: f64,
) -> Result<(SweepRow, TrajectoryRecord, LimitTrajectory)> {
    let regime = scaling_regime(&base.potential, nu, base.regime.h_sharp)?;
    base.grid.check_coverage(&base.potential, nu)?;
    let spec = SimulationSpec {
        regime,
        dt: dt_over_tau * regime.tau,
        ..base.clone()
    };
    let sim = simulate_spec(&spec)?;
    let limit = limit_on_record(&spec, &sim.record)?;
    let times = sim.record.times();
    let sigma_nu = sim.record.column(|r| r.sigma);
    let mu_nu = sim.record.column(|r| r.mu);
    let sigma0: Vec<f64> = limit.nodes.iter().map(|n| n.sigma).collect();
    let mu0: Vec<f64> = limit.nodes.iter().map(|n| n.mu).collect();
    let nu2 = nu * nu;
    let row = SweepRow {
        nu,
        tau: regime.tau,
        sigma_distance: sup_distance(&times, &sigma_nu, &sigma0, t0),
        mu_distance: sup_distance(&times, &mu_nu, &mu0, t0),
        max_zeta_over_nu2: sim.record.column(|r| r.zeta).iter().fold(0.0, |m, z| m.max(z / nu2)),
        constraint_drift: sim.record.max_constraint_drift(),
        runtime: 0.0,
        error: None,
    };
    Ok((row, sim.record, limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp_solver::Grid;
    use crate::harness::scenarios::hysteresis_benchmark;
    use std::sync::Arc;

    fn small_base() -> SimulationSpec {
        let mut spec = hysteresis_benchmark(0.4, 0.1, 5).unwrap();
        spec.grid = Arc::new(Grid::uniform(-5.0, 5.0, 256).unwrap());
        spec.t_end = 8.0;
        spec.control = crate::fp_solver::ControlSpec::cosine_ramp(1.6, 8.0);
        spec
    }

    #[test]
    fn rejects_unsorted_lists() {
        assert!(run_convergence_study(&small_base(), &[0.3, 0.4], 0.1, 0.0).is_err());
        assert!(run_convergence_study(&small_base(), &[], 0.1, 0.0).is_err());
    }

    #[test]
    fn repeated_sweeps_are_identical() {
        let a = run_convergence_study(&small_base(), &[0.4, 0.35], 0.1, 0.0).unwrap();
        let b = run_convergence_study(&small_base(), &[0.4, 0.35], 0.1, 0.0).unwrap();
        for (x, y) in a.members.iter().zip(&b.members) {
            assert_eq!(x.row.sigma_distance, y.row.sigma_distance);
            assert_eq!(x.row.mu_distance, y.row.mu_distance);
            assert!(x.row.error.is_none());
        }
        assert_eq!(a.members[0].row.nu, 0.4);
    }

    #[test]
    fn failing_member_is_reported_not_fatal() {
        // the window is too narrow for ν = 0.4 but wide enough for ν = 0.3
        let mut base = small_base();
        base.grid = Arc::new(Grid::uniform(-3.6, 3.6, 256).unwrap());
        let r = run_convergence_study(&base, &[0.4, 0.3], 0.1, 0.0).unwrap();
        assert_eq!(r.members.len(), 2);
        assert!(r.members[0].row.error.is_some());
        assert!(r.members[0].row.sigma_distance.is_nan());
        assert!(r.members[1].row.error.is_none(), "{:?}", r.members[1].row.error);
    }
}
