//! Run configuration, CSV output contracts and run metadata.

mod config;
mod csv;
mod meta;

pub use config::{coupling_name, parse_config, InitConfig, ParticleConfig, PotentialConfig, RunConfig, DEFAULTS};
pub use csv::{
    barrier_table, checkpoint_csv, fmt_f64, kramers_validation_csv, limit_csv, parse_limit_csv, parse_trajectory_csv,
    read_trajectory_csv, sweep_csv, sweep_runtimes, trajectory_csv, write_limit_csv, write_trajectory_csv,
    BARRIER_HEADER, CHECKPOINT_HEADER, KRAMERS_VALIDATION_HEADER, LIMIT_HEADER, SWEEP_HEADER,
};
pub use meta::{meta_path, write_with_meta, RunMeta};
