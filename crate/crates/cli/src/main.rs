//! `nlfp`: command-line driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 1 for I/O problems.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nlfp_core::fp_solver::simulate_spec;
use nlfp_core::harness::{plateau_estimates, run_convergence_study, run_kramers_validation, KramersSetup};
use nlfp_core::io::{
    barrier_table, kramers_validation_csv, limit_csv, parse_config, sweep_csv, sweep_runtimes, trajectory_csv,
    write_with_meta, InitConfig, RunConfig, RunMeta,
};
use nlfp_core::langevin::{simulate_particles, Ensemble, ParticleStepper};
use nlfp_core::limit_model::{integrate_limit, LimitOptions};
use nlfp_core::{Error, Result};

#[derive(Parser)]
#[command(name = "nlfp", version, about = "Constrained nonlocal Fokker-Planck lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Run configuration (TOML).
    config: PathBuf,
}

#[derive(Args)]
struct OutArg {
    /// Output file; defaults to `<output.dir>/<output.name>` plus a suffix.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a configuration and print it with every default filled in.
    Check(ConfigArg),
    /// Run the PDE solver and write the trajectory CSV.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the particle system; needs a [particles] section.
    Particles {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Integrate the limit model on the configured control.
    Limit {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        out: OutArg,
        /// Number of uniform output intervals (breakpoints are added).
        #[arg(long, default_value_t = 1000)]
        nodes: usize,
    },
    /// Compare PDE runs with the limit model over a decreasing ν list.
    Compare {
        #[command(flatten)]
        config: ConfigArg,
        /// Comma-separated, strictly decreasing; defaults to regime.nu.
        #[arg(long, value_delimiter = ',')]
        nu_list: Vec<f64>,
        /// Distances are taken over t ≥ t0.
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Barrier, Kramers-rate and Poincaré-bound table on a σ grid, or the
    /// measured-versus-predicted relaxation rates with --validate.
    Kramers {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        out: OutArg,
        /// Default: 0.9·σ_* (the lower critical multiplier of H').
        #[arg(long)]
        sigma_min: Option<f64>,
        /// Default: 0.9·σ*.
        #[arg(long)]
        sigma_max: Option<f64>,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long)]
        validate: bool,
        /// ν values of the validation; defaults to regime.nu.
        #[arg(long, value_delimiter = ',')]
        nu_list: Vec<f64>,
        /// Frozen multiplier of the validation.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::Domain(_) => 2,
        Error::Numerical(_) => 3,
        Error::Io { .. } => 1,
    }
}

fn load(arg: &ConfigArg) -> Result<RunConfig> {
    let text = std::fs::read_to_string(&arg.config).map_err(|e| Error::Io {
        path: arg.config.clone(),
        source: e,
    })?;
    parse_config(&text)
}

fn output_path(cfg: &RunConfig, out: &OutArg, suffix: &str) -> Result<PathBuf> {
    match &out.out {
        Some(p) => Ok(p.clone()),
        None => {
            create_dir(&cfg.output_dir)?;
            Ok(cfg.output_dir.join(format!("{}{suffix}", cfg.output_name)))
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn well_prepared(cfg: &RunConfig) -> Result<(f64, f64)> {
    match cfg.init {
        InitConfig::WellPrepared { sigma_ini, mu_ini } => Ok((sigma_ini, mu_ini)),
        InitConfig::Stationary { .. } => Err(Error::Config(vec![
            "this command needs init.kind = \"well_prepared\"".into()
        ])),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Check(arg) => {
            let cfg = load(&arg)?;
            print!("{}", cfg.canonical());
            println!("# sha256 {}", cfg.hash());
            Ok(())
        }
        Command::Simulate { config, out } => {
            let cfg = load(&config)?;
            let sim = simulate_spec(&cfg.simulation_spec()?)?;
            let path = output_path(&cfg, &out, ".csv")?;
            let meta = RunMeta::new("simulate", &cfg).with("dt_used", sim.dt_used);
            write_with_meta(&path, &trajectory_csv(&sim.record)?, &meta)?;
            for p in plateau_estimates(&sim.record, &cfg.control) {
                eprintln!(
                    "plateau: sigma = {:.6} on [{:.4}, {:.4}], mu {:.4} -> {:.4}",
                    p.sigma, p.t_start, p.t_end, p.mu_start, p.mu_end
                );
            }
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Command::Particles { config, out } => {
            let cfg = load(&config)?;
            let Some(pc) = cfg.particles else {
                return Err(Error::Config(vec![
                    "the particles command needs a [particles] section".into()
                ]));
            };
            let (sigma_ini, mu_ini) = well_prepared(&cfg)?;
            let ens = Ensemble::well_prepared(
                &cfg.potential,
                sigma_ini,
                mu_ini,
                cfg.regime.nu,
                pc.n,
                cfg.control.ell(0.0),
                pc.seed,
            )?;
            let stepper = ParticleStepper::new(cfg.potential.clone(), cfg.regime, cfg.control.clone(), cfg.coupling);
            let grid = cfg.grid()?;
            let run = simulate_particles(stepper, ens, &grid, cfg.t_end, cfg.dt(), cfg.stride, cfg.zeta_eps)?;
            let path = output_path(&cfg, &out, "_particles.csv")?;
            let meta = RunMeta::new("particles", &cfg).with("dt_used", run.dt_used);
            write_with_meta(&path, &trajectory_csv(&run.record)?, &meta)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Command::Limit { config, out, nodes } => {
            let cfg = load(&config)?;
            let (sigma0, mu0) = well_prepared(&cfg)?;
            let traj = integrate_limit(
                &cfg.potential,
                &cfg.regime,
                &cfg.control,
                sigma0,
                mu0,
                cfg.t_end,
                &LimitOptions::uniform(cfg.t_end, nodes),
            )?;
            let path = output_path(&cfg, &out, "_limit.csv")?;
            write_with_meta(&path, &limit_csv(&traj)?, &RunMeta::new("limit", &cfg))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Command::Compare {
            config,
            nu_list,
            t0,
            out_dir,
        } => {
            let cfg = load(&config)?;
            let nus = if nu_list.is_empty() {
                vec![cfg.regime.nu]
            } else {
                nu_list
            };
            let dir = out_dir.unwrap_or_else(|| cfg.output_dir.clone());
            create_dir(&dir)?;
            let base = cfg.simulation_spec()?;
            let result = run_convergence_study(&base, &nus, cfg.dt_over_tau, t0)?;
            let nu_text = nus.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
            let meta = RunMeta::new("compare", &cfg)
                .with("nu_list", &nu_text)
                .with("t0", t0)
                .with("dt_over_tau", cfg.dt_over_tau);
            write_with_meta(&dir.join("sweep.csv"), &sweep_csv(&result)?, &meta)?;
            let runtime_path = dir.join("sweep_runtime.csv");
            std::fs::write(&runtime_path, sweep_runtimes(&result)).map_err(|e| Error::Io {
                path: runtime_path,
                source: e,
            })?;
            let mut summary = String::new();
            for m in &result.members {
                let nu = m.row.nu;
                if let (Some(rec), Some(lim)) = (&m.record, &m.limit) {
                    let meta = meta.clone().with("nu", nu);
                    write_with_meta(&dir.join(format!("micro_nu{nu}.csv")), &trajectory_csv(rec)?, &meta)?;
                    write_with_meta(&dir.join(format!("limit_nu{nu}.csv")), &limit_csv(lim)?, &meta)?;
                    for p in plateau_estimates(rec, &cfg.control) {
                        summary.push_str(&format!(
                            "nu = {nu}: plateau sigma = {:.6} on [{:.4}, {:.4}], mu {:.4} -> {:.4}\n",
                            p.sigma, p.t_start, p.t_end, p.mu_start, p.mu_end
                        ));
                    }
                }
                match &m.row.error {
                    Some(e) => summary.push_str(&format!("nu = {nu}: failed: {e}\n")),
                    None => summary.push_str(&format!(
                        "nu = {nu}: sup|sigma - sigma0| = {:.6}, sup|mu - mu0| = {:.6}\n",
                        m.row.sigma_distance, m.row.mu_distance
                    )),
                }
            }
            let summary_path = dir.join("summary.txt");
            std::fs::write(&summary_path, &summary).map_err(|e| Error::Io {
                path: summary_path,
                source: e,
            })?;
            eprint!("{summary}");
            if result.members.iter().all(|m| m.row.error.is_some()) {
                return Err(Error::Numerical("every member of the sweep failed".into()));
            }
            Ok(())
        }
        Command::Kramers {
            config,
            out,
            sigma_min,
            sigma_max,
            points,
            validate,
            nu_list,
            sigma,
        } => {
            let cfg = load(&config)?;
            let domain = (cfg.grid.0, cfg.grid.1);
            let (text, meta) = if validate {
                let nus = if nu_list.is_empty() {
                    vec![cfg.regime.nu]
                } else {
                    nu_list
                };
                let setup = KramersSetup {
                    domain,
                    cells: cfg.grid.2,
                    ..KramersSetup::default()
                };
                let rows = run_kramers_validation(&cfg.potential, cfg.regime.h_sharp, &nus, sigma, setup)?;
                (
                    kramers_validation_csv(&rows)?,
                    RunMeta::new("kramers --validate", &cfg).with("sigma", sigma),
                )
            } else {
                let lm = cfg.potential.landmarks();
                let lo = sigma_min.unwrap_or(0.9 * lm.sigma_lower);
                let hi = sigma_max.unwrap_or(0.9 * lm.sigma_upper);
                if !(lo < hi) || points < 2 {
                    return Err(Error::Config(vec![format!(
                        "need sigma_min < sigma_max and at least two points, got [{lo}, {hi}] with {points}"
                    )]));
                }
                let sigmas: Vec<f64> = (0..points)
                    .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
                    .collect();
                (
                    barrier_table(&cfg.potential, &cfg.regime, &sigmas, domain)?,
                    RunMeta::new("kramers", &cfg),
                )
            };
            match out.out {
                Some(path) => {
                    write_with_meta(&path, &text, &meta)?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{text}"),
            }
            Ok(())
        }
    }
}
