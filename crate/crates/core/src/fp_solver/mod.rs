//! Mass-conservative finite-volume solver for the constrained Fokker–Planck
//! equation with the mean-field multiplier closure `σ = ∫H'ρ + τℓ̇`.

mod control;
mod grid;
mod init;
mod scheme;
mod simulate;

pub use control::ControlSpec;
pub use grid::{required_bounds, Grid, GridDensity, MASS_TOL, MIN_CELLS};
pub use init::{init_well_prepared, CONSISTENCY_NU_FACTOR};
pub use scheme::{bernoulli, Discretization, Workspace};
pub use simulate::{
    prepare, run_solver, run_solver_observed, sigma_meanfield, simulate_spec, stationary_density, step_plan, Coupling,
    FpSolver, InitialData, SimState, Simulation, SimulationSpec,
};
