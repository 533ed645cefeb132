//! Run configuration: a TOML document walked by hand so that every problem
//! is reported at once and unknown keys are rejected.

use std::path::PathBuf;
use std::sync::Arc;

use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::fp_solver::{ControlSpec, Coupling, Grid, InitialData, SimulationSpec};
use crate::potential::{default_potential, scaling_regime, DoubleWellPotential, ScalingRegime, Tabulated};

/// Every default, in one place: `(key, value, meaning)`.
///
/// `init.sigma_ini` has no fixed default; it is `H'(ℓ(0))`, the multiplier of a
/// single peak sitting at the initial control value.
pub const DEFAULTS: &[(&str, &str, &str)] = &[
    (
        "potential.name",
        "\"log_quadratic\"",
        "H(x) = x²/2 − (β/2)ln(1 + x²), or \"tabulated\"",
    ),
    (
        "potential.beta",
        "2.0",
        "well-depth parameter of log_quadratic, must exceed 1",
    ),
    ("regime.h_sharp", "0.1", "barrier height fixing τ = exp(−h_sharp/ν²)"),
    ("grid.xL", "-5.0", "left end of the truncated domain"),
    ("grid.xR", "5.0", "right end of the truncated domain"),
    ("grid.N", "2048", "number of cells"),
    (
        "control.kind",
        "\"cosine_ramp\"",
        "constant | ramp | cosine_ramp | sinusoid | table",
    ),
    ("control.amplitude", "1.6", "cosine_ramp: ℓ(t) = −a·cos(πt/duration)"),
    (
        "control.duration",
        "time.T",
        "ramp and cosine_ramp: time to reach the end value",
    ),
    (
        "control.rate",
        "(to − from)/duration",
        "ramp slope, an alternative to control.to",
    ),
    ("control.offset", "0.0", "sinusoid offset"),
    ("control.phase", "0.0", "sinusoid phase"),
    (
        "time.dt_over_tau",
        "0.02",
        "step in units of τ, used unless time.dt is set",
    ),
    ("time.stride", "10", "steps between output rows"),
    ("init.kind", "\"well_prepared\"", "well_prepared | stationary"),
    ("init.mu_ini", "-1.0", "initial phase fraction of well-prepared data"),
    ("solver.coupling", "\"implicit\"", "implicit | explicit | frozen"),
    (
        "solver.eta",
        "0.1",
        "radius of the spinodal neighbourhood in the diagnostics",
    ),
    ("solver.zeta_eps", "0.0", "ε of the admissible-set distance ζ"),
    ("particles.seed", "0", "root seed of the particle noise"),
    ("output.dir", "\".\"", "directory for CSV and metadata files"),
    ("output.name", "\"run\"", "file stem of the outputs"),
];

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialConfig {
    LogQuadratic { beta: f64 },
    Tabulated { table: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitConfig {
    WellPrepared { sigma_ini: f64, mu_ini: f64 },
    Stationary { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleConfig {
    pub n: usize,
    pub seed: u64,
}

/// Validated run configuration with all defaults filled in.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential_config: PotentialConfig,
    pub potential: DoubleWellPotential,
    pub regime: ScalingRegime,
    pub grid: (f64, f64, usize),
    pub control: ControlSpec,
    pub t_end: f64,
    /// Explicit step; `dt_over_tau·τ` when absent.
    pub dt: Option<f64>,
    pub dt_over_tau: f64,
    pub stride: usize,
    pub init: InitConfig,
    pub coupling: Coupling,
    pub eta: f64,
    pub zeta_eps: f64,
    pub particles: Option<ParticleConfig>,
    pub output_dir: PathBuf,
    pub output_name: String,
    canonical: String,
}

impl RunConfig {
    /// The configuration with every default made explicit, as TOML.
    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical.as_bytes()))
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(self.dt_over_tau * self.regime.tau)
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::uniform(self.grid.0, self.grid.1, self.grid.2)?))
    }

    pub fn simulation_spec(&self) -> Result<SimulationSpec> {
        Ok(SimulationSpec {
            potential: self.potential.clone(),
            regime: self.regime,
            grid: self.grid()?,
            control: self.control.clone(),
            t_end: self.t_end,
            dt: self.dt(),
            stride: self.stride,
            coupling: self.coupling,
            init: match self.init {
                InitConfig::WellPrepared { sigma_ini, mu_ini } => InitialData::WellPrepared { sigma_ini, mu_ini },
                InitConfig::Stationary { sigma } => InitialData::Stationary { sigma },
            },
            eta: self.eta,
            zeta_eps: self.zeta_eps,
        })
    }
}

/// Section and key names accepted by the parser.
const SCHEMA: &[(&str, &[&str])] = &[
    ("potential", &["name", "beta", "table"]),
    ("regime", &["nu", "h_sharp"]),
    ("grid", &["xL", "xR", "N"]),
    (
        "control",
        &[
            "kind",
            "value",
            "from",
            "to",
            "rate",
            "amplitude",
            "duration",
            "offset",
            "omega",
            "phase",
            "times",
            "values",
        ],
    ),
    ("time", &["T", "dt", "dt_over_tau", "stride"]),
    ("init", &["kind", "sigma_ini", "mu_ini", "sigma"]),
    ("solver", &["coupling", "sigma", "eta", "zeta_eps"]),
    ("particles", &["N", "seed"]),
    ("output", &["dir", "name"]),
];

struct Walker<'a> {
    doc: &'a Table,
    errors: Vec<String>,
}

impl<'a> Walker<'a> {
    fn raw(&self, section: &str, key: &str) -> Option<&'a Value> {
        self.doc
            .get(section)
            .and_then(|s| s.as_table())
            .and_then(|t| t.get(key))
    }

    fn has_section(&self, section: &str) -> bool {
        self.doc.contains_key(section)
    }

    fn f64_opt(&mut self, section: &str, key: &str) -> Option<f64> {
        let v = self.raw(section, key)?;
        match v.as_float().or_else(|| v.as_integer().map(|i| i as f64)) {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.errors.push(format!("{section}.{key} must be a finite number"));
                None
            }
        }
    }

    fn f64_or(&mut self, section: &str, key: &str, default: f64) -> f64 {
        self.f64_opt(section, key).unwrap_or(default)
    }

    fn f64_req(&mut self, section: &str, key: &str) -> Option<f64> {
        if self.raw(section, key).is_none() {
            self.errors.push(format!("missing required key {section}.{key}"));
            return None;
        }
        self.f64_opt(section, key)
    }

    fn uint_opt(&mut self, section: &str, key: &str) -> Option<u64> {
        let v = self.raw(section, key)?;
        match v.as_integer() {
            Some(i) if i >= 0 => Some(i as u64),
            _ => {
                self.errors
                    .push(format!("{section}.{key} must be a nonnegative integer"));
                None
            }
        }
    }

    fn str_opt(&mut self, section: &str, key: &str) -> Option<&'a str> {
        let v = self.raw(section, key)?;
        match v.as_str() {
            Some(s) => Some(s),
            None => {
                self.errors.push(format!("{section}.{key} must be a string"));
                None
            }
        }
    }

    fn array_req(&mut self, section: &str, key: &str) -> Option<Vec<f64>> {
        let Some(v) = self.raw(section, key) else {
            self.errors.push(format!("missing required key {section}.{key}"));
            return None;
        };
        let parsed: Option<Vec<f64>> = v.as_array().and_then(|a| {
            a.iter()
                .map(|x| x.as_float().or_else(|| x.as_integer().map(|i| i as f64)))
                .collect()
        });
        if parsed.is_none() {
            self.errors.push(format!("{section}.{key} must be an array of numbers"));
        }
        parsed
    }

    fn check_unknown(&mut self) {
        for (section, value) in self.doc {
            let Some((_, keys)) = SCHEMA.iter().find(|(s, _)| s == section) else {
                self.errors.push(format!("unknown section [{section}]"));
                continue;
            };
            let Some(table) = value.as_table() else {
                self.errors.push(format!("{section} must be a table"));
                continue;
            };
            for key in table.keys() {
                if !keys.contains(&key.as_str()) {
                    self.errors.push(format!("unknown key {section}.{key}"));
                }
            }
        }
    }
}

/// Parses and validates a run configuration, listing every violation found.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![format!("not a valid TOML document: {}", e.message())]))?;
    let mut w = Walker {
        doc: &doc,
        errors: Vec::new(),
    };
    w.check_unknown();

    // potential
    let name = w.str_opt("potential", "name").unwrap_or("log_quadratic");
    let potential_config = match name {
        "log_quadratic" => Some(PotentialConfig::LogQuadratic {
            beta: w.f64_or("potential", "beta", 2.0),
        }),
        "tabulated" => match w.str_opt("potential", "table") {
            Some(p) => Some(PotentialConfig::Tabulated {
                table: PathBuf::from(p),
            }),
            None => {
                w.errors
                    .push("potential.table is required for a tabulated potential".into());
                None
            }
        },
        other => {
            w.errors.push(format!(
                "unknown potential.name \"{other}\" (log_quadratic | tabulated)"
            ));
            None
        }
    };
    let potential = potential_config.as_ref().and_then(|pc| {
        let built = match pc {
            PotentialConfig::LogQuadratic { beta } => default_potential(*beta),
            PotentialConfig::Tabulated { table } => {
                Tabulated::from_csv_path(table).and_then(|t| DoubleWellPotential::new(Arc::new(t)))
            }
        };
        built.map_err(|e| w.errors.push(plain(e))).ok()
    });

    // regime
    let nu = w.f64_req("regime", "nu");
    let h_sharp = w.f64_or("regime", "h_sharp", 0.1);
    let regime = match (&potential, nu) {
        (Some(p), Some(nu)) => scaling_regime(p, nu, h_sharp).map_err(|e| w.errors.push(plain(e))).ok(),
        _ => None,
    };

    // grid
    let xl = w.f64_or("grid", "xL", -5.0);
    let xr = w.f64_or("grid", "xR", 5.0);
    let cells = w.uint_opt("grid", "N").unwrap_or(2048) as usize;
    match Grid::uniform(xl, xr, cells) {
        Ok(g) => {
            if let (Some(p), Some(nu)) = (&potential, nu) {
                if let Err(e) = g.check_coverage(p, nu) {
                    w.errors.push(plain(e));
                }
            }
        }
        Err(e) => w.errors.push(plain(e)),
    }

    // time
    let t_end = w.f64_req("time", "T");
    if let Some(t) = t_end {
        if t < 0.0 {
            w.errors.push(format!("time.T must be nonnegative, got {t}"));
        }
    }
    let dt = w.f64_opt("time", "dt");
    let dt_over_tau = w.f64_or("time", "dt_over_tau", 0.02);
    if dt.is_some() && w.raw("time", "dt_over_tau").is_some() {
        w.errors.push("set at most one of time.dt and time.dt_over_tau".into());
    }
    if let Some(d) = dt {
        if d <= 0.0 {
            w.errors.push(format!("time.dt must be positive, got {d}"));
        }
    }
    if dt_over_tau <= 0.0 {
        w.errors
            .push(format!("time.dt_over_tau must be positive, got {dt_over_tau}"));
    }
    if let (Some(d), Some(r)) = (dt, regime) {
        if d > r.tau {
            w.errors.push(format!(
                "time.dt = {d} exceeds τ = {}; the fast dynamics would not be resolved",
                r.tau
            ));
        }
    }
    let stride = w.uint_opt("time", "stride").unwrap_or(10) as usize;
    if stride == 0 {
        w.errors.push("time.stride must be at least 1".into());
    }

    // control
    let duration = w.f64_opt("control", "duration").or(t_end).unwrap_or(1.0);
    let kind = w.str_opt("control", "kind").unwrap_or("cosine_ramp");
    let control = match kind {
        "constant" => w.f64_req("control", "value").map(ControlSpec::constant),
        "ramp" => {
            let from = w.f64_req("control", "from");
            match (from, w.f64_opt("control", "rate")) {
                (Some(ell0), Some(rate)) => {
                    if w.raw("control", "to").is_some() {
                        w.errors.push("set either control.to or control.rate, not both".into());
                    }
                    Some(ControlSpec::Affine { ell0, rate })
                }
                (from, None) => match (from, w.f64_req("control", "to")) {
                    (Some(a), Some(b)) if duration > 0.0 => Some(ControlSpec::ramp(a, b, duration)),
                    (Some(_), Some(_)) => {
                        w.errors.push("control.duration must be positive".into());
                        None
                    }
                    _ => None,
                },
                _ => None,
            }
        }
        "cosine_ramp" => {
            let a = w.f64_or("control", "amplitude", 1.6);
            if duration > 0.0 {
                Some(ControlSpec::cosine_ramp(a, duration))
            } else {
                w.errors.push("control.duration must be positive".into());
                None
            }
        }
        "sinusoid" => {
            let offset = w.f64_or("control", "offset", 0.0);
            let phase = w.f64_or("control", "phase", 0.0);
            match (w.f64_req("control", "amplitude"), w.f64_req("control", "omega")) {
                (Some(amplitude), Some(omega)) => Some(ControlSpec::Sinusoid {
                    offset,
                    amplitude,
                    omega,
                    phase,
                }),
                _ => None,
            }
        }
        "table" => match (w.array_req("control", "times"), w.array_req("control", "values")) {
            (Some(t), Some(v)) => ControlSpec::table(t, v).map_err(|e| w.errors.push(plain(e))).ok(),
            _ => None,
        },
        other => {
            w.errors.push(format!(
                "unknown control.kind \"{other}\" (constant | ramp | cosine_ramp | sinusoid | table)"
            ));
            None
        }
    };

    // init
    let init_kind = w.str_opt("init", "kind").unwrap_or("well_prepared");
    let init = match init_kind {
        "well_prepared" => {
            let mu_ini = w.f64_or("init", "mu_ini", -1.0);
            if !(-1.0..=1.0).contains(&mu_ini) {
                w.errors.push(format!("init.mu_ini must lie in [-1, 1], got {mu_ini}"));
            }
            let sigma_ini = w.f64_opt("init", "sigma_ini").or_else(|| {
                let p = potential.as_ref()?;
                Some(p.dh(control.as_ref()?.ell(0.0)))
            });
            sigma_ini.map(|sigma_ini| InitConfig::WellPrepared { sigma_ini, mu_ini })
        }
        "stationary" => w.f64_req("init", "sigma").map(|sigma| InitConfig::Stationary { sigma }),
        other => {
            w.errors
                .push(format!("unknown init.kind \"{other}\" (well_prepared | stationary)"));
            None
        }
    };
    if let (Some(InitConfig::WellPrepared { sigma_ini, mu_ini }), Some(p)) = (init, &potential) {
        // a peak of positive mass needs its stable branch at σ_ini
        let lm = p.landmarks();
        if mu_ini < 1.0 && sigma_ini >= lm.sigma_upper {
            w.errors.push(format!(
                "init.sigma_ini = {sigma_ini} leaves no left peak; it must be below σ* = {}",
                lm.sigma_upper
            ));
        }
        if mu_ini > -1.0 && sigma_ini <= lm.sigma_lower {
            w.errors.push(format!(
                "init.sigma_ini = {sigma_ini} leaves no right peak; it must exceed σ_* = {}",
                lm.sigma_lower
            ));
        }
    }

    // solver
    let coupling = match w.str_opt("solver", "coupling").unwrap_or("implicit") {
        "implicit" => Some(Coupling::Implicit),
        "explicit" => Some(Coupling::Explicit),
        "frozen" => w.f64_req("solver", "sigma").map(Coupling::Frozen),
        other => {
            w.errors.push(format!(
                "unknown solver.coupling \"{other}\" (implicit | explicit | frozen)"
            ));
            None
        }
    };
    if w.raw("solver", "sigma").is_some() && !matches!(coupling, Some(Coupling::Frozen(_))) {
        w.errors
            .push("solver.sigma is only used with solver.coupling = \"frozen\"".into());
    }
    let eta = w.f64_or("solver", "eta", 0.1);
    if eta <= 0.0 {
        w.errors.push(format!("solver.eta must be positive, got {eta}"));
    }
    let zeta_eps = w.f64_or("solver", "zeta_eps", 0.0);
    if zeta_eps < 0.0 {
        w.errors
            .push(format!("solver.zeta_eps must be nonnegative, got {zeta_eps}"));
    }

    // particles
    let particles = if w.has_section("particles") {
        let n = w.uint_opt("particles", "N");
        if n.is_none() && w.raw("particles", "N").is_none() {
            w.errors.push("missing required key particles.N".into());
        }
        let seed = w.uint_opt("particles", "seed").unwrap_or(0);
        match n {
            Some(n) if (n as usize) < crate::langevin::MIN_PARTICLES => {
                w.errors.push(format!(
                    "particles.N must be at least {}, got {n}",
                    crate::langevin::MIN_PARTICLES
                ));
                None
            }
            Some(n) => Some(ParticleConfig { n: n as usize, seed }),
            None => None,
        }
    } else {
        None
    };

    // output
    let output_dir = PathBuf::from(w.str_opt("output", "dir").unwrap_or("."));
    let output_name = w.str_opt("output", "name").unwrap_or("run").to_string();
    if output_name.is_empty() || output_name.contains(['/', '\\']) {
        w.errors
            .push(format!("output.name must be a plain file stem, got \"{output_name}\""));
    }

    if !w.errors.is_empty() {
        return Err(Error::Config(w.errors));
    }
    let (Some(potential_config), Some(potential), Some(regime), Some(t_end), Some(control), Some(init), Some(coupling)) =
        (potential_config, potential, regime, t_end, control, init, coupling)
    else {
        unreachable!("every missing piece has recorded an error");
    };
    let mut cfg = RunConfig {
        potential_config,
        potential,
        regime,
        grid: (xl, xr, cells),
        control,
        t_end,
        dt,
        dt_over_tau,
        stride,
        init,
        coupling,
        eta,
        zeta_eps,
        particles,
        output_dir,
        output_name,
        canonical: String::new(),
    };
    cfg.canonical = canonical_toml(&cfg);
    Ok(cfg)
}

/// Message of an error without the variant prefix, for the violation list.
fn plain(e: Error) -> String {
    match e {
        Error::Config(list) => list.join("; "),
        Error::Domain(m) | Error::Numerical(m) | Error::Parse(m) => m,
        other => other.to_string(),
    }
}

fn section(entries: Vec<(&str, Value)>) -> Value {
    Value::Table(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| Value::Float(*x)).collect())
}

fn canonical_toml(c: &RunConfig) -> String {
    let mut doc = Table::new();
    doc.insert(
        "potential".into(),
        match &c.potential_config {
            PotentialConfig::LogQuadratic { beta } => section(vec![
                ("name", Value::from("log_quadratic")),
                ("beta", Value::Float(*beta)),
            ]),
            PotentialConfig::Tabulated { table } => section(vec![
                ("name", Value::from("tabulated")),
                ("table", Value::from(table.to_string_lossy().into_owned())),
            ]),
        },
    );
    doc.insert(
        "regime".into(),
        section(vec![
            ("nu", Value::Float(c.regime.nu)),
            ("h_sharp", Value::Float(c.regime.h_sharp)),
        ]),
    );
    doc.insert(
        "grid".into(),
        section(vec![
            ("xL", Value::Float(c.grid.0)),
            ("xR", Value::Float(c.grid.1)),
            ("N", Value::Integer(c.grid.2 as i64)),
        ]),
    );
    let control = match &c.control {
        ControlSpec::Affine { ell0, rate } if *rate == 0.0 => {
            section(vec![("kind", Value::from("constant")), ("value", Value::Float(*ell0))])
        }
        ControlSpec::Affine { ell0, rate } => section(vec![
            ("kind", Value::from("ramp")),
            ("from", Value::Float(*ell0)),
            ("rate", Value::Float(*rate)),
        ]),
        ControlSpec::Sinusoid {
            offset,
            amplitude,
            omega,
            phase,
        } => section(vec![
            ("kind", Value::from("sinusoid")),
            ("offset", Value::Float(*offset)),
            ("amplitude", Value::Float(*amplitude)),
            ("omega", Value::Float(*omega)),
            ("phase", Value::Float(*phase)),
        ]),
        ControlSpec::Table { times, values } => section(vec![
            ("kind", Value::from("table")),
            ("times", floats(times)),
            ("values", floats(values)),
        ]),
    };
    doc.insert("control".into(), control);
    let mut time = vec![
        ("T", Value::Float(c.t_end)),
        ("stride", Value::Integer(c.stride as i64)),
    ];
    match c.dt {
        Some(dt) => time.push(("dt", Value::Float(dt))),
        None => time.push(("dt_over_tau", Value::Float(c.dt_over_tau))),
    }
    doc.insert("time".into(), section(time));
    doc.insert(
        "init".into(),
        match c.init {
            InitConfig::WellPrepared { sigma_ini, mu_ini } => section(vec![
                ("kind", Value::from("well_prepared")),
                ("sigma_ini", Value::Float(sigma_ini)),
                ("mu_ini", Value::Float(mu_ini)),
            ]),
            InitConfig::Stationary { sigma } => section(vec![
                ("kind", Value::from("stationary")),
                ("sigma", Value::Float(sigma)),
            ]),
        },
    );
    let mut solver = vec![("eta", Value::Float(c.eta)), ("zeta_eps", Value::Float(c.zeta_eps))];
    match c.coupling {
        Coupling::Implicit => solver.push(("coupling", Value::from("implicit"))),
        Coupling::Explicit => solver.push(("coupling", Value::from("explicit"))),
        Coupling::Frozen(s) => {
            solver.push(("coupling", Value::from("frozen")));
            solver.push(("sigma", Value::Float(s)));
        }
    }
    doc.insert("solver".into(), section(solver));
    if let Some(p) = c.particles {
        doc.insert(
            "particles".into(),
            section(vec![
                ("N", Value::Integer(p.n as i64)),
                ("seed", Value::Integer(p.seed as i64)),
            ]),
        );
    }
    doc.insert(
        "output".into(),
        section(vec![
            ("dir", Value::from(c.output_dir.to_string_lossy().into_owned())),
            ("name", Value::from(c.output_name.clone())),
        ]),
    );
    doc.to_string()
}

/// Name of a coupling as used in configuration files and metadata.
pub fn coupling_name(c: Coupling) -> String {
    match c {
        Coupling::Implicit => "implicit".into(),
        Coupling::Explicit => "explicit".into(),
        Coupling::Frozen(s) => format!("frozen({s})"),
    }
}
