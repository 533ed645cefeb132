//! CSV writers and readers for the output contracts. Floats carry 17
//! significant digits so a write-read round trip is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::{gibbs_median, kramers_rates, poincare_upper, Interval};
use crate::error::{Error, Result};
use crate::harness::{Checkpoint, KramersRow, SweepResult};
use crate::limit_model::{LimitNode, LimitTrajectory, SegmentLabel};
use crate::potential::{Branch, DoubleWellPotential, ScalingRegime};
use crate::record::{TrajectoryRecord, TrajectoryRow, SIMULATION_HEADER};

pub const LIMIT_HEADER: [&str; 5] = ["t", "sigma", "mu", "ell", "segment_label"];

pub const BARRIER_HEADER: [&str; 8] = [
    "sigma",
    "h_minus",
    "h_plus",
    "f_minus",
    "f_plus",
    "cp_upper",
    "cp_minus_upper",
    "cp_plus_upper",
];

pub const KRAMERS_VALIDATION_HEADER: [&str; 10] = [
    "nu",
    "tau",
    "sigma",
    "h_minus",
    "h_plus",
    "measured_rate",
    "predicted_rate",
    "ratio",
    "mu_inf",
    "asymptotic",
];

/// Runtime lives in a separate file so that `sweep.csv` is deterministic.
pub const SWEEP_HEADER: [&str; 7] = [
    "nu",
    "tau",
    "sigma_distance",
    "mu_distance",
    "max_zeta_over_nu2",
    "constraint_drift",
    "error",
];

pub const CHECKPOINT_HEADER: [&str; 5] = ["t", "m_plus_particles", "m_plus_pde", "binomial_sd", "z_score"];

/// `{:.16e}`: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn render(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Numerical(format!("CSV encoding failed: {e}"));
    w.write_record(header).map_err(csv_err)?;
    let mut any = false;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(&row).map_err(csv_err)?;
        any = true;
    }
    if !any {
        return Err(Error::Domain("refusing to write an empty table".into()));
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Numerical(format!("CSV encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is built from UTF-8 strings"))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a CSV document and checks its header against `header`.
fn parse_rows(text: &str, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let got = r
        .headers()
        .map_err(|e| Error::Parse(format!("unreadable CSV header: {e}")))?
        .clone();
    if got.iter().ne(header.iter().copied()) {
        let missing: Vec<&&str> = header.iter().filter(|h| !got.iter().any(|g| g == **h)).collect();
        return Err(Error::Parse(format!(
            "header mismatch: expected `{}`, got `{}` (missing {missing:?})",
            header.join(","),
            got.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.records()
        .map(|rec| rec.map_err(|e| Error::Parse(format!("malformed CSV: {e}"))))
        .collect()
}

fn num(field: &str, line: usize) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: `{field}` is not a number")))
}

pub fn trajectory_csv(record: &TrajectoryRecord) -> Result<String> {
    render(
        &SIMULATION_HEADER,
        record
            .rows
            .iter()
            .map(|r| r.values().iter().map(|v| fmt_f64(*v)).collect()),
    )
}

pub fn write_trajectory_csv(record: &TrajectoryRecord, path: &Path) -> Result<()> {
    write_file(path, &trajectory_csv(record)?)
}

/// Reads a simulation CSV. Mass and minimum density are not part of the
/// contract and come back as NaN.
pub fn parse_trajectory_csv(text: &str) -> Result<TrajectoryRecord> {
    let rows = parse_rows(text, &SIMULATION_HEADER)?;
    let mut record = TrajectoryRecord::default();
    for (i, fields) in rows.iter().enumerate() {
        let mut v = [0.0; 12];
        for (slot, f) in v.iter_mut().zip(fields.iter()) {
            *slot = num(f, i + 2)?;
        }
        record.rows.push(TrajectoryRow::from_values(v));
    }
    Ok(record)
}

pub fn read_trajectory_csv(path: &Path) -> Result<TrajectoryRecord> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory_csv(&text)
}

pub fn limit_csv(traj: &LimitTrajectory) -> Result<String> {
    render(
        &LIMIT_HEADER,
        traj.nodes.iter().map(|n| {
            vec![
                fmt_f64(n.t),
                fmt_f64(n.sigma),
                fmt_f64(n.mu),
                fmt_f64(n.ell),
                n.label.as_str().to_string(),
            ]
        }),
    )
}

pub fn write_limit_csv(traj: &LimitTrajectory, path: &Path) -> Result<()> {
    write_file(path, &limit_csv(traj)?)
}

/// Nodes of a limit CSV; segments and breakpoints are not stored.
pub fn parse_limit_csv(text: &str) -> Result<Vec<LimitNode>> {
    parse_rows(text, &LIMIT_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, f)| {
            Ok(LimitNode {
                t: num(&f[0], i + 2)?,
                sigma: num(&f[1], i + 2)?,
                mu: num(&f[2], i + 2)?,
                ell: num(&f[3], i + 2)?,
                label: SegmentLabel::parse(&f[4])
                    .ok_or_else(|| Error::Parse(format!("line {}: unknown segment label `{}`", i + 2, &f[4])))?,
            })
        })
        .collect()
}

/// Barrier and rate table on `sigmas`, with Poincaré upper bounds of the
/// full Gibbs weight (split at its median) and of its restrictions to either
/// well (split at the well) on `domain`.
pub fn barrier_table(
    pot: &DoubleWellPotential,
    regime: &ScalingRegime,
    sigmas: &[f64],
    domain: (f64, f64),
) -> Result<String> {
    let nu = regime.nu;
    let mut rows = Vec::with_capacity(sigmas.len());
    for &s in sigmas {
        let k = kramers_rates(pot, regime, s)?;
        let whole_iv = Interval::whole(domain)?;
        let whole = poincare_upper(pot, s, nu, whole_iv, gibbs_median(pot, s, nu, whole_iv)?)?;
        let minus = poincare_upper(
            pot,
            s,
            nu,
            Interval::minus(pot, s, domain)?,
            pot.branch(Branch::Minus, s)?,
        )?;
        let plus = poincare_upper(
            pot,
            s,
            nu,
            Interval::plus(pot, s, domain)?,
            pot.branch(Branch::Plus, s)?,
        )?;
        rows.push(
            [s, k.h_minus, k.h_plus, k.f_minus, k.f_plus, whole, minus, plus]
                .iter()
                .map(|v| fmt_f64(*v))
                .collect(),
        );
    }
    render(&BARRIER_HEADER, rows)
}

pub fn kramers_validation_csv(rows: &[KramersRow]) -> Result<String> {
    render(
        &KRAMERS_VALIDATION_HEADER,
        rows.iter().map(|r| {
            let mut v: Vec<String> = [
                r.nu,
                r.tau,
                r.sigma,
                r.h_minus,
                r.h_plus,
                r.measured_rate,
                r.predicted_rate,
                r.ratio,
                r.mu_inf,
            ]
            .iter()
            .map(|x| fmt_f64(*x))
            .collect();
            v.push(r.asymptotic.to_string());
            v
        }),
    )
}

/// `sweep.csv`; the error column is empty for members that ran.
pub fn sweep_csv(result: &SweepResult) -> Result<String> {
    render(
        &SWEEP_HEADER,
        result.members.iter().map(|m| {
            let r = &m.row;
            let mut v: Vec<String> = [
                r.nu,
                r.tau,
                r.sigma_distance,
                r.mu_distance,
                r.max_zeta_over_nu2,
                r.constraint_drift,
            ]
            .iter()
            .map(|x| fmt_f64(*x))
            .collect();
            v.push(r.error.clone().unwrap_or_default());
            v
        }),
    )
}

/// Wall-clock seconds per sweep member, kept apart from `sweep.csv`.
pub fn sweep_runtimes(result: &SweepResult) -> String {
    let mut out = String::from("nu,runtime_seconds\n");
    for m in &result.members {
        let _ = writeln!(out, "{},{:.3}", fmt_f64(m.row.nu), m.row.runtime);
    }
    out
}

pub fn checkpoint_csv(cps: &[Checkpoint]) -> Result<String> {
    render(
        &CHECKPOINT_HEADER,
        cps.iter().map(|c| {
            [c.t, c.m_plus_particles, c.m_plus_pde, c.binomial_sd, c.z_score()]
                .iter()
                .map(|v| fmt_f64(*v))
                .collect()
        }),
    )
}
