//! Monitoring of the qualitative inequalities along a trajectory.
//!
//! The constants of these inequalities are not constructive. They are
//! calibrated once on the hysteresis benchmark (see the `calibrate` example),
//! frozen in `data/frozen_constants.toml`, and from then on act as regression
//! bounds.

use crate::diagnostics::{mass_outside_peaks, Peaks};
use crate::error::{Error, Result};
use crate::fp_solver::{prepare, run_solver_observed, SimulationSpec};
use crate::potential::{Branch, DoubleWellPotential, ScalingRegime};
use crate::record::{TrajectoryRecord, TrajectoryRow};

/// Frozen constants shipped with the crate.
pub const FROZEN_CONSTANTS_TOML: &str = include_str!("../../data/frozen_constants.toml");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConstants {
    /// `ξ ≤ D + C ν²`
    pub xi_dissipation: f64,
    /// `outside mass ≤ C τ^α (D/τ + 1)`
    pub outside_c: f64,
    pub outside_alpha: f64,
    /// Radius of the peak balls in units of `ν`.
    pub outside_eta_over_nu: f64,
    /// `|ℓ − m₋X₋(σ) − m₊X₊(σ)| ≤ C √(ξ + m₀)` while both branches exist
    pub reconstruction: f64,
    /// Slack `c·τ^p` of the monotonicity estimates for `m±`; the back-flow over
    /// the higher barrier is exponentially small in `1/ν²` but not zero.
    pub monotonicity_c: f64,
    pub monotonicity_tau_power: f64,
    /// `ε` of the supercritical stretches.
    pub monotonicity_eps: f64,
    /// `ζ ≤ C ν²` at times with `D ≤ τ^β`
    pub zeta: f64,
    pub zeta_beta: f64,
    /// Lipschitz constant `C₀` of the `σ`-modulus.
    pub sigma_lipschitz: f64,
    /// `∫D dt ≤ C τ`
    pub dissipation_l1: f64,
    /// `sup ∫x²ρ ≤ C`
    pub second_moment: f64,
    /// Bound on `max ζ/ν²` over the well-prepared sweep.
    pub sweep_zeta_over_nu2: f64,
}

fn get(table: &toml::Table, section: &str, key: &str) -> Result<f64> {
    let v = table
        .get(section)
        .and_then(|s| s.get(key))
        .ok_or_else(|| Error::Parse(format!("frozen constants: missing {section}.{key}")))?;
    v.as_float()
        .or_else(|| v.as_integer().map(|i| i as f64))
        .ok_or_else(|| Error::Parse(format!("frozen constants: {section}.{key} is not a number")))
}

impl MonitorConstants {
    pub fn parse(text: &str) -> Result<Self> {
        let t: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Parse(format!("frozen constants: {e}")))?;
        Ok(Self {
            xi_dissipation: get(&t, "xi_dissipation", "c")?,
            outside_c: get(&t, "outside_mass", "c")?,
            outside_alpha: get(&t, "outside_mass", "alpha")?,
            outside_eta_over_nu: get(&t, "outside_mass", "eta_over_nu")?,
            reconstruction: get(&t, "reconstruction", "c")?,
            monotonicity_c: get(&t, "monotonicity", "c")?,
            monotonicity_tau_power: get(&t, "monotonicity", "tau_power")?,
            monotonicity_eps: get(&t, "monotonicity", "eps")?,
            zeta: get(&t, "zeta", "c")?,
            zeta_beta: get(&t, "zeta", "beta")?,
            sigma_lipschitz: get(&t, "sigma_modulus", "c0")?,
            dissipation_l1: get(&t, "dissipation_l1", "c")?,
            second_moment: get(&t, "second_moment", "c")?,
            sweep_zeta_over_nu2: get(&t, "sweep", "zeta_over_nu2")?,
        })
    }

    /// The constants frozen with this build.
    pub fn frozen() -> Self {
        Self::parse(FROZEN_CONSTANTS_TOML).expect("shipped constants file is valid")
    }
}

/// Per-output quantities the inequalities need beyond the CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorSample {
    pub row: TrajectoryRow,
    pub outside_mass: f64,
    pub second_moment: f64,
}

/// Runs `spec` like `simulate_spec` and additionally collects monitor samples.
pub fn simulate_monitored(
    spec: &SimulationSpec,
    constants: &MonitorConstants,
) -> Result<(TrajectoryRecord, Vec<MonitorSample>)> {
    let (solver, rho0) = prepare(spec)?;
    let eta = constants.outside_eta_over_nu * spec.regime.nu;
    let mut samples = Vec::new();
    let sim = run_solver_observed(
        solver,
        rho0,
        spec.t_end,
        spec.dt,
        spec.stride,
        spec.eta,
        spec.zeta_eps,
        |state, row| {
            let peaks = peaks_for(&spec.regime, state.sigma);
            samples.push(MonitorSample {
                row: *row,
                outside_mass: mass_outside_peaks(&state.rho, &spec.potential, state.sigma, eta, peaks),
                second_moment: state.rho.second_moment(),
            });
        },
    )?;
    Ok((sim.record, samples))
}

/// Both stable peaks between the critical multipliers, otherwise the one
/// the dynamics drains into.
fn peaks_for(regime: &ScalingRegime, sigma: f64) -> Peaks {
    if sigma <= regime.sigma_low {
        Peaks::Minus
    } else if sigma >= regime.sigma_high {
        Peaks::Plus
    } else {
        Peaks::Both
    }
}

/// Outcome of one inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub name: &'static str,
    /// Largest `lhs − rhs`; negative when the bound holds everywhere.
    pub max_slack: f64,
    pub worst_time: f64,
    pub violations: usize,
    pub checked: usize,
}

impl InequalityReport {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            max_slack: f64::NEG_INFINITY,
            worst_time: f64::NAN,
            violations: 0,
            checked: 0,
        }
    }

    fn observe(&mut self, t: f64, lhs: f64, rhs: f64) {
        let slack = lhs - rhs;
        self.checked += 1;
        if slack > 0.0 {
            self.violations += 1;
        }
        if slack > self.max_slack {
            self.max_slack = slack;
            self.worst_time = t;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    pub inequalities: Vec<InequalityReport>,
    /// `max (|Δσ| − C₀Δt)₊` over consecutive samples, recorded for trend
    /// comparisons across `ν`.
    pub sigma_envelope: f64,
}

impl MonitorReport {
    pub fn total_violations(&self) -> usize {
        self.inequalities.iter().map(|r| r.violations).sum()
    }

    pub fn get(&self, name: &str) -> Option<&InequalityReport> {
        self.inequalities.iter().find(|r| r.name == name)
    }
}

pub const XI_DISSIPATION: &str = "xi-dissipation";
pub const OUTSIDE_MASS: &str = "outside-mass";
pub const RECONSTRUCTION: &str = "reconstruction";
pub const MONOTONICITY: &str = "monotonicity";
pub const ZETA: &str = "zeta";
pub const DISSIPATION_L1: &str = "dissipation-l1";
pub const SECOND_MOMENT: &str = "second-moment";

/// Evaluates every monitored inequality on `samples` with the given constants.
pub fn monitor_inequalities(
    samples: &[MonitorSample],
    pot: &DoubleWellPotential,
    regime: &ScalingRegime,
    c: &MonitorConstants,
) -> MonitorReport {
    let nu2 = regime.nu * regime.nu;
    let tau = regime.tau;
    let lm = pot.landmarks();
    let mut xi_d = InequalityReport::new(XI_DISSIPATION);
    let mut outside = InequalityReport::new(OUTSIDE_MASS);
    let mut recon = InequalityReport::new(RECONSTRUCTION);
    let mut mono = InequalityReport::new(MONOTONICITY);
    let mut zeta = InequalityReport::new(ZETA);
    let mut l1 = InequalityReport::new(DISSIPATION_L1);
    let mut m2 = InequalityReport::new(SECOND_MOMENT);

    for s in samples {
        let r = &s.row;
        xi_d.observe(r.t, r.xi, r.dissipation + c.xi_dissipation * nu2);
        outside.observe(
            r.t,
            s.outside_mass,
            c.outside_c * tau.powf(c.outside_alpha) * (r.dissipation / tau + 1.0),
        );
        if r.sigma > lm.sigma_lower && r.sigma < lm.sigma_upper {
            if let (Ok(xm), Ok(xp)) = (pot.branch(Branch::Minus, r.sigma), pot.branch(Branch::Plus, r.sigma)) {
                let lhs = (r.ell - r.m_minus * xm - r.m_plus * xp).abs();
                recon.observe(r.t, lhs, c.reconstruction * (r.xi + r.m_zero).sqrt());
            }
        }
        if r.dissipation <= tau.powf(c.zeta_beta) {
            zeta.observe(r.t, r.zeta, c.zeta * nu2);
        }
        m2.observe(r.t, s.second_moment, c.second_moment);
    }

    // monotonicity on maximal stretches beyond the critical multipliers
    let hi = regime.sigma_high + c.monotonicity_eps;
    let lo = regime.sigma_low - c.monotonicity_eps;
    let tol = c.monotonicity_c * tau.powf(c.monotonicity_tau_power);
    let mut k = 0;
    while k < samples.len() {
        let side = |r: &TrajectoryRow| {
            if r.sigma >= hi {
                1
            } else if r.sigma <= lo {
                -1
            } else {
                0
            }
        };
        let s0 = side(&samples[k].row);
        if s0 == 0 {
            k += 1;
            continue;
        }
        let start = samples[k].row;
        let mut j = k;
        while j < samples.len() && side(&samples[j].row) == s0 {
            let r = &samples[j].row;
            if s0 > 0 {
                mono.observe(r.t, r.m_minus, start.m_minus + start.m_zero + tol);
            } else {
                mono.observe(r.t, r.m_plus, start.m_plus + start.m_zero + tol);
            }
            j += 1;
        }
        k = j;
    }

    // L¹ norm of the dissipation by the trapezoidal rule
    let integral: f64 = samples
        .windows(2)
        .map(|w| 0.5 * (w[0].row.dissipation + w[1].row.dissipation) * (w[1].row.t - w[0].row.t))
        .sum();
    if let Some(last) = samples.last() {
        l1.observe(last.row.t, integral, c.dissipation_l1 * tau);
    }

    let sigma_envelope = samples
        .windows(2)
        .map(|w| ((w[1].row.sigma - w[0].row.sigma).abs() - c.sigma_lipschitz * (w[1].row.t - w[0].row.t)).max(0.0))
        .fold(0.0, f64::max);

    MonitorReport {
        inequalities: vec![xi_d, outside, recon, mono, zeta, l1, m2],
        sigma_envelope,
    }
}
