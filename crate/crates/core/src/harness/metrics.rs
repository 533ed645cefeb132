use crate::fp_solver::ControlSpec;
use crate::record::{TrajectoryRecord, TrajectoryRow};

/// Largest `|τ(Eₖ − Eₖ₋₁)/Δt + Dₖ − τσₖℓ̇(tₖ)|` over consecutive rows, and the
/// time where it is attained. Meaningful for records written every step.
pub fn energy_residual(record: &TrajectoryRecord, tau: f64, control: &ControlSpec) -> (f64, f64) {
    let mut worst = (0.0, f64::NAN);
    for w in record.rows.windows(2) {
        let dt = w[1].t - w[0].t;
        if dt <= 0.0 {
            continue;
        }
        let r = tau * (w[1].energy - w[0].energy) / dt + w[1].dissipation - tau * w[1].sigma * control.ell_dot(w[1].t);
        if r.abs() > worst.0 {
            worst = (r.abs(), w[1].t);
        }
    }
    worst
}

/// `sup |∫xρ − ℓ|` over the record.
pub fn constraint_drift(record: &TrajectoryRecord) -> f64 {
    record.max_constraint_drift()
}

/// Largest `|mass − 1|` and smallest density value over the record.
pub fn conservation(record: &TrajectoryRecord) -> (f64, f64) {
    record.rows.iter().fold((0.0f64, f64::INFINITY), |(m, lo), r| {
        (m.max((r.mass - 1.0).abs()), lo.min(r.min_density))
    })
}

/// Plateau found on one monotone piece of the control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    /// Median of `σ` over the rows where `|μ̇|` exceeds half its maximum.
    pub sigma: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub mu_start: f64,
    pub mu_end: f64,
    /// `μ` at the first and last row of the monotone piece.
    pub piece_mu_start: f64,
    pub piece_mu_end: f64,
    /// +1 on an increasing piece of `ℓ`, −1 on a decreasing one.
    pub direction: f64,
}

/// Splits the record at sign changes of `ℓ̇` and estimates one plateau per
/// piece on which `μ` moves at all.
pub fn plateau_estimates(record: &TrajectoryRecord, control: &ControlSpec) -> Vec<Plateau> {
    let rows = &record.rows;
    let mut pieces: Vec<(usize, usize, f64)> = Vec::new();
    let mut start = 0;
    let mut dir = 0.0;
    for (k, r) in rows.iter().enumerate() {
        let d = control.ell_dot(r.t);
        let s = if d > 0.0 {
            1.0
        } else if d < 0.0 {
            -1.0
        } else {
            0.0
        };
        if s == 0.0 {
            continue;
        }
        if dir == 0.0 {
            dir = s;
        } else if s != dir {
            pieces.push((start, k, dir));
            start = k;
            dir = s;
        }
    }
    if rows.len() > 1 {
        pieces.push((start, rows.len() - 1, dir));
    }
    pieces
        .into_iter()
        .filter_map(|(a, b, dir)| piece_plateau(&rows[a..=b], dir))
        .collect()
}

fn piece_plateau(rows: &[TrajectoryRow], direction: f64) -> Option<Plateau> {
    if rows.len() < 3 {
        return None;
    }
    let mu_dot: Vec<f64> = rows
        .windows(2)
        .map(|w| ((w[1].mu - w[0].mu) / (w[1].t - w[0].t)).abs())
        .collect();
    let max = mu_dot.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return None;
    }
    let active: Vec<usize> = (0..mu_dot.len()).filter(|&k| mu_dot[k] > 0.5 * max).collect();
    let mut sigmas: Vec<f64> = active.iter().map(|&k| rows[k + 1].sigma).collect();
    sigmas.sort_by(f64::total_cmp);
    let m = sigmas.len();
    let median = if m % 2 == 1 {
        sigmas[m / 2]
    } else {
        0.5 * (sigmas[m / 2 - 1] + sigmas[m / 2])
    };
    let (first, last) = (active[0], *active.last()?);
    Some(Plateau {
        sigma: median,
        t_start: rows[first].t,
        t_end: rows[last + 1].t,
        mu_start: rows[first].mu,
        mu_end: rows[last + 1].mu,
        piece_mu_start: rows[0].mu,
        piece_mu_end: rows[rows.len() - 1].mu,
        direction,
    })
}

/// `sup |a − b|` over pairs whose time is at least `t0`.
pub fn sup_distance(times: &[f64], a: &[f64], b: &[f64], t0: f64) -> f64 {
    times
        .iter()
        .zip(a.iter().zip(b))
        .filter(|(t, _)| **t >= t0)
        .map(|(_, (x, y))| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, sigma: f64, mu: f64) -> TrajectoryRow {
        TrajectoryRow::from_values([t, sigma, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, mu, 0.0, 0.0])
    }

    #[test]
    fn plateau_of_synthetic_ramp() {
        // μ moves only while σ = 0.1
        let rows: Vec<TrajectoryRow> = (0..=100)
            .map(|k| {
                let t = k as f64 / 10.0;
                let (s, mu) = if t < 3.0 {
                    (-0.2 + 0.1 * t, -1.0)
                } else if t <= 7.0 {
                    (0.1, -1.0 + 0.5 * (t - 3.0))
                } else {
                    (0.1 + 0.1 * (t - 7.0), 1.0)
                };
                row(t, s, mu)
            })
            .collect();
        let rec = TrajectoryRecord { rows };
        let p = plateau_estimates(&rec, &ControlSpec::ramp(-1.0, 1.0, 10.0));
        assert_eq!(p.len(), 1);
        assert!((p[0].sigma - 0.1).abs() < 1e-12);
        assert!((p[0].t_start - 3.0).abs() < 1e-9 && (p[0].t_end - 7.0).abs() < 1e-9);
        assert_eq!(p[0].direction, 1.0);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let (a, b) = linear_fit(&x, &y).unwrap();
        assert!((a + 0.5).abs() < 1e-14 && (b - 2.0).abs() < 1e-14);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn sup_distance_respects_window() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(sup_distance(&t, &[5.0, 1.0, 1.0], &[0.0, 0.5, 1.0], 0.5), 0.5);
    }
}
