//! Scenario orchestration: the hysteresis benchmark, `ν`-sweeps against the
//! limit model, Kramers-rate validation, particle cross-checks and monitoring
//! of the qualitative inequalities with frozen constants.

mod kramers;
mod metrics;
mod monitor;
mod particles;
mod scenarios;
mod sweep;

pub use kramers::{run_kramers_validation, KramersRow, KramersSetup, FIT_WINDOW};
pub use metrics::{
    conservation, constraint_drift, energy_residual, linear_fit, plateau_estimates, sup_distance, Plateau,
};
pub use monitor::{
    monitor_inequalities, simulate_monitored, InequalityReport, MonitorConstants, MonitorReport, MonitorSample,
    DISSIPATION_L1, FROZEN_CONSTANTS_TOML, MONOTONICITY, OUTSIDE_MASS, RECONSTRUCTION, SECOND_MOMENT, XI_DISSIPATION,
    ZETA,
};
pub use particles::{particle_pde_checkpoints, AgreementSetup, Checkpoint};
pub use scenarios::{
    hysteresis_benchmark, relaxation_scenario, run_hysteresis, HysteresisRun, BENCHMARK_AMPLITUDE, BENCHMARK_BETA,
    BENCHMARK_CELLS, BENCHMARK_DOMAIN, BENCHMARK_DT_OVER_TAU, BENCHMARK_DURATION, BENCHMARK_H_SHARP, BENCHMARK_NU,
    RELAXATION_WIDTH,
};
pub use sweep::{run_convergence_study, SweepMember, SweepResult, SweepRow};
