//! Rate-independent limit model: the state `(ℓ, σ, μ)` lives on
//! `Ω = {ℓ = 𝓛(σ, μ), μ = −1 if σ < σ_#, μ = 1 if σ > σ^#}` and `μ` may only change
//! while `σ` sits at `σ^#` (growing) or `σ_#` (shrinking).
//!
//! Integration is event driven. `[0, T]` is cut at the sign changes of `ℓ̇`; on each
//! monotone piece the state is an explicit function of the current control value,
//! so every node is computed from `ℓ(t_node)` alone and rate independence is exact.

use std::fmt;

use crate::error::{Error, Result};
use crate::fp_solver::ControlSpec;
use crate::potential::{Branch, DoubleWellPotential, ScalingRegime};
use crate::roots::bisect;

/// Default cap on the number of sign changes of `ℓ̇`.
pub const DEFAULT_MAX_SIGN_CHANGES: usize = 64;
/// Samples of `ℓ̇` used to detect sign changes.
const SIGN_SAMPLES: usize = 4096;
/// Time tolerance for event and turning-point location.
pub const EVENT_TIME_TOL: f64 = 1e-12;
/// Admissibility tolerance for `ℓ(0) = 𝓛(σ₀, μ₀)`.
pub const INIT_TOL: f64 = 1e-10;
/// `σ` within this distance of a critical value counts as on the plateau.
const PLATEAU_TOL: f64 = 1e-12;

/// `𝓛(σ, μ) = (1 − μ)/2·X₋(σ) + (1 + μ)/2·X₊(σ)`
pub fn ell_of(pot: &DoubleWellPotential, sigma: f64, mu: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&mu) {
        return Err(Error::Domain(format!("phase fraction {mu} outside [-1, 1]")));
    }
    let wp = 0.5 * (1.0 + mu);
    let wm = 0.5 * (1.0 - mu);
    let xm = if wm > 0.0 {
        pot.branch(Branch::Minus, sigma)?
    } else {
        0.0
    };
    let xp = if wp > 0.0 {
        pot.branch(Branch::Plus, sigma)?
    } else {
        0.0
    };
    Ok(wm * xm + wp * xp)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitState {
    pub ell: f64,
    pub sigma: f64,
    pub mu: f64,
}

/// Distance of a state from `Ω`.
pub fn omega_residual(pot: &DoubleWellPotential, regime: &ScalingRegime, s: &LimitState) -> Result<f64> {
    let mut r = (s.ell - ell_of(pot, s.sigma, s.mu)?).abs();
    if s.sigma < regime.sigma_low - PLATEAU_TOL {
        r = r.max((s.mu + 1.0).abs());
    }
    if s.sigma > regime.sigma_high + PLATEAU_TOL {
        r = r.max((s.mu - 1.0).abs());
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentLabel {
    TransportMinus,
    TransportTwoPeak,
    TransportPlus,
    PlateauLow,
    PlateauHigh,
    Stuck,
}

impl SegmentLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            SegmentLabel::TransportMinus => "transport-minus",
            SegmentLabel::TransportTwoPeak => "transport-two-peak",
            SegmentLabel::TransportPlus => "transport-plus",
            SegmentLabel::PlateauLow => "plateau-low",
            SegmentLabel::PlateauHigh => "plateau-high",
            SegmentLabel::Stuck => "stuck",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            SegmentLabel::TransportMinus,
            SegmentLabel::TransportTwoPeak,
            SegmentLabel::TransportPlus,
            SegmentLabel::PlateauLow,
            SegmentLabel::PlateauHigh,
            SegmentLabel::Stuck,
        ]
        .into_iter()
        .find(|l| l.as_str() == s)
    }

    fn transport(mu: f64) -> Self {
        if mu <= -1.0 {
            SegmentLabel::TransportMinus
        } else if mu >= 1.0 {
            SegmentLabel::TransportPlus
        } else {
            SegmentLabel::TransportTwoPeak
        }
    }
}

impl fmt::Display for SegmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitNode {
    pub t: f64,
    pub ell: f64,
    pub sigma: f64,
    pub mu: f64,
    pub label: SegmentLabel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub label: SegmentLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitTrajectory {
    /// Output nodes (requested times plus breakpoints), sorted by time.
    pub nodes: Vec<LimitNode>,
    pub segments: Vec<Segment>,
    /// Times where the vector field switches (plateau entry/exit and turning points).
    pub breakpoints: Vec<f64>,
    /// Largest jump of `σ` or `μ` across an event (round-off of the root solves).
    pub continuity_defect: f64,
}

impl LimitTrajectory {
    pub fn node_at(&self, t: f64) -> Option<&LimitNode> {
        self.nodes.iter().find(|n| n.t == t)
    }
}

/// Options of [`integrate_limit`].
#[derive(Debug, Clone, PartialEq)]
pub struct LimitOptions {
    /// Requested output times within `[0, T]`.
    pub output_times: Vec<f64>,
    /// Include breakpoints as extra nodes.
    pub include_breakpoints: bool,
    pub max_sign_changes: usize,
}

impl LimitOptions {
    /// `n + 1` uniformly spaced output times on `[0, T]`.
    pub fn uniform(t_end: f64, n: usize) -> Self {
        let n = n.max(1);
        Self {
            output_times: (0..=n).map(|k| t_end * k as f64 / n as f64).collect(),
            include_breakpoints: true,
            max_sign_changes: DEFAULT_MAX_SIGN_CHANGES,
        }
    }

    pub fn at_times(times: Vec<f64>) -> Self {
        Self {
            output_times: times,
            include_breakpoints: false,
            max_sign_changes: DEFAULT_MAX_SIGN_CHANGES,
        }
    }
}

/// A monotone piece of the control.
#[derive(Debug, Clone, Copy)]
struct Piece {
    t0: f64,
    t1: f64,
    dir: i8,
    start: LimitState,
}

struct Model<'a> {
    pot: &'a DoubleWellPotential,
    regime: &'a ScalingRegime,
}

impl Model<'_> {
    /// `σ` with `𝓛(σ, μ̄) = ℓ`.
    fn transport_sigma(&self, ell: f64, mu_bar: f64) -> Result<f64> {
        if mu_bar <= -1.0 || mu_bar >= 1.0 {
            // single peak: X±(σ) = ℓ  ⇔  σ = H'(ℓ)
            return Ok(self.pot.dh(ell));
        }
        let lm = self.pot.landmarks();
        bisect(
            |s| ell_of(self.pot, s, mu_bar).unwrap_or(f64::NAN) - ell,
            lm.sigma_lower,
            lm.sigma_upper,
            0.0,
        )
        .map_err(|e| Error::Numerical(format!("transport solve for ℓ = {ell}, μ = {mu_bar}: {e}")))
    }

    /// Control values where the vector field switches on a piece: plateau entry and exit.
    fn thresholds(&self, start: &LimitState, dir: i8) -> Result<Option<(f64, f64)>> {
        let (crit, sat) = match dir {
            1 => (self.regime.sigma_high, 1.0),
            -1 => (self.regime.sigma_low, -1.0),
            _ => return Ok(None),
        };
        if start.mu == sat {
            return Ok(None);
        }
        let on_plateau = (start.sigma - crit).abs() <= PLATEAU_TOL
            || (dir == 1 && start.sigma > crit)
            || (dir == -1 && start.sigma < crit);
        let enter = if on_plateau {
            start.ell
        } else {
            ell_of(self.pot, crit, start.mu)?
        };
        let exit = ell_of(self.pot, crit, sat)?;
        Ok(Some((enter, exit)))
    }

    /// State at control value `ell` on a piece starting at `start`.
    fn state_at(&self, start: &LimitState, dir: i8, ell: f64) -> Result<(LimitState, SegmentLabel)> {
        if dir == 0 {
            return Ok((*start, SegmentLabel::Stuck));
        }
        let d = f64::from(dir);
        let sat = d;
        match self.thresholds(start, dir)? {
            None => {
                let sigma = self.transport_sigma(ell, start.mu)?;
                Ok((
                    LimitState {
                        ell,
                        sigma,
                        mu: start.mu,
                    },
                    SegmentLabel::transport(start.mu),
                ))
            }
            Some((enter, exit)) => {
                if d * (ell - enter) < 0.0 {
                    let sigma = self.transport_sigma(ell, start.mu)?;
                    return Ok((
                        LimitState {
                            ell,
                            sigma,
                            mu: start.mu,
                        },
                        SegmentLabel::transport(start.mu),
                    ));
                }
                let crit = if dir == 1 {
                    self.regime.sigma_high
                } else {
                    self.regime.sigma_low
                };
                if d * (ell - exit) < 0.0 {
                    let width = self.pot.branch(Branch::Plus, crit)? - self.pot.branch(Branch::Minus, crit)?;
                    let mu = (start.mu + 2.0 * (ell - enter) / width).clamp(-1.0, 1.0);
                    let label = if dir == 1 {
                        SegmentLabel::PlateauHigh
                    } else {
                        SegmentLabel::PlateauLow
                    };
                    return Ok((LimitState { ell, sigma: crit, mu }, label));
                }
                let sigma = self.transport_sigma(ell, sat)?;
                Ok((LimitState { ell, sigma, mu: sat }, SegmentLabel::transport(sat)))
            }
        }
    }
}

/// Piece boundaries: sign changes of `ℓ̇` (and kinks of tabulated controls).
fn piece_boundaries(control: &ControlSpec, t_end: f64, max_changes: usize) -> Result<Vec<f64>> {
    let mut cuts = vec![0.0];
    let kinks: Vec<f64> = control
        .kinks()
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < t_end)
        .collect();
    if !kinks.is_empty() {
        cuts.extend(kinks);
    } else {
        let ts: Vec<f64> = (0..=SIGN_SAMPLES)
            .map(|k| t_end * k as f64 / SIGN_SAMPLES as f64)
            .collect();
        let mut last: Option<(f64, f64)> = None;
        for &t in &ts {
            let v = control.ell_dot(t);
            if v == 0.0 {
                continue;
            }
            if let Some((tp, vp)) = last {
                if vp.signum() != v.signum() {
                    let root = bisect(|s| control.ell_dot(s), tp, t, EVENT_TIME_TOL)?;
                    cuts.push(root);
                }
            }
            last = Some((t, v));
        }
    }
    if cuts.len() - 1 > max_changes {
        return Err(Error::Numerical(format!(
            "control has {} sign changes of its derivative, more than the allowed {max_changes}",
            cuts.len() - 1
        )));
    }
    cuts.push(t_end);
    cuts.dedup();
    Ok(cuts)
}

/// Time in `[t0, t1]` where the monotone control reaches `target`.
fn locate(control: &ControlSpec, t0: f64, t1: f64, target: f64) -> Result<f64> {
    bisect(|t| control.ell(t) - target, t0, t1, EVENT_TIME_TOL)
}

/// Event-driven integration of the limit model on `[0, T]`.
pub fn integrate_limit(
    pot: &DoubleWellPotential,
    regime: &ScalingRegime,
    control: &ControlSpec,
    sigma0: f64,
    mu0: f64,
    t_end: f64,
    opts: &LimitOptions,
) -> Result<LimitTrajectory> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("horizon must be nonnegative, got {t_end}")));
    }
    let ell0 = control.ell(0.0);
    let start = LimitState {
        ell: ell0,
        sigma: sigma0,
        mu: mu0,
    };
    let residual = omega_residual(pot, regime, &start)?;
    if residual > INIT_TOL {
        return Err(Error::Domain(format!(
            "initial state (ℓ, σ, μ) = ({ell0}, {sigma0}, {mu0}) is not admissible (residual {residual:.3e})"
        )));
    }
    let model = Model { pot, regime };

    // monotone pieces with their start states
    let cuts = piece_boundaries(control, t_end, opts.max_sign_changes)?;
    let mut pieces = Vec::with_capacity(cuts.len());
    let mut state = start;
    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let (l0, l1) = (control.ell(t0), control.ell(t1));
        let dl = l1 - l0;
        let dir = if dl.abs() <= 1e-14 * (1.0 + l0.abs()) {
            0
        } else if dl > 0.0 {
            1
        } else {
            -1
        };
        state.ell = l0;
        pieces.push(Piece {
            t0,
            t1,
            dir,
            start: state,
        });
        if dir != 0 {
            state = model.state_at(&state, dir, l1)?.0;
        }
    }
    if pieces.is_empty() {
        pieces.push(Piece {
            t0: 0.0,
            t1: t_end,
            dir: 0,
            start,
        });
    }

    // events and segments
    let mut breakpoints = Vec::new();
    let mut segments: Vec<Segment> = Vec::new();
    let mut defect: f64 = 0.0;
    for (i, p) in pieces.iter().enumerate() {
        if i > 0 {
            breakpoints.push(p.t0);
        }
        let mut seg_start = p.t0;
        let mut label = model.state_at(&p.start, p.dir, p.start.ell)?.1;
        if let Some((enter, exit)) = model.thresholds(&p.start, p.dir)? {
            let d = f64::from(p.dir);
            let l1 = control.ell(p.t1);
            for (target, next_sigma) in [(enter, true), (exit, false)] {
                if d * (target - p.start.ell) > 0.0 && d * (l1 - target) > 0.0 {
                    let te = locate(control, p.t0, p.t1, target)?;
                    breakpoints.push(te);
                    segments.push(Segment {
                        t_start: seg_start,
                        t_end: te,
                        label,
                    });
                    seg_start = te;
                    label = model.state_at(&p.start, p.dir, target)?.1;
                    // σ from the transport side of the event
                    let crit = if p.dir == 1 {
                        regime.sigma_high
                    } else {
                        regime.sigma_low
                    };
                    let mu_side = if next_sigma { p.start.mu } else { d };
                    defect = defect.max((model.transport_sigma(target, mu_side)? - crit).abs());
                }
            }
        }
        segments.push(Segment {
            t_start: seg_start,
            t_end: p.t1,
            label,
        });
    }
    // merge neighbours with equal labels
    let mut merged: Vec<Segment> = Vec::new();
    for s in segments {
        match merged.last_mut() {
            Some(m) if m.label == s.label => m.t_end = s.t_end,
            _ => merged.push(s),
        }
    }

    let mut times: Vec<f64> = opts
        .output_times
        .iter()
        .copied()
        .filter(|&t| t >= 0.0 && t <= t_end)
        .collect();
    if opts.include_breakpoints {
        times.extend(breakpoints.iter().copied());
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut nodes = Vec::with_capacity(times.len());
    for &t in &times {
        let k = pieces.partition_point(|p| p.t1 <= t).min(pieces.len() - 1);
        let p = &pieces[k];
        let (s, label) = model.state_at(&p.start, p.dir, control.ell(t))?;
        nodes.push(LimitNode {
            t,
            ell: s.ell,
            sigma: s.sigma,
            mu: s.mu,
            label,
        });
    }
    Ok(LimitTrajectory {
        nodes,
        segments: merged,
        breakpoints,
        continuity_defect: defect,
    })
}

/// Outcome of [`flow_rule_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowRuleReport {
    pub max_residual: f64,
    /// Time of the node attaining the maximum.
    pub worst_time: f64,
    pub intervals_checked: usize,
}

/// Distance of `σ` from `∂𝓡(μ̇) + ∂𝓘(μ)`.
pub fn inclusion_distance(regime: &ScalingRegime, sigma: f64, mu_dot: f64, mu: f64, tol: f64) -> f64 {
    let (mut lo, mut hi) = if mu_dot > tol {
        (regime.sigma_high, regime.sigma_high)
    } else if mu_dot < -tol {
        (regime.sigma_low, regime.sigma_low)
    } else {
        (regime.sigma_low, regime.sigma_high)
    };
    // normal cone of [−1, 1]
    if mu >= 1.0 - tol {
        hi = f64::INFINITY;
    }
    if mu <= -1.0 + tol {
        lo = f64::NEG_INFINITY;
    }
    if sigma < lo {
        lo - sigma
    } else if sigma > hi {
        sigma - hi
    } else {
        0.0
    }
}

/// Checks `σ ∈ ∂𝓡(μ̇) + ∂𝓘(μ)` at both ends of every node interval, with `μ̇` from
/// forward differences.
pub fn flow_rule_residual(traj: &LimitTrajectory, regime: &ScalingRegime) -> FlowRuleReport {
    let mut report = FlowRuleReport {
        max_residual: 0.0,
        worst_time: f64::NAN,
        intervals_checked: 0,
    };
    for w in traj.nodes.windows(2) {
        let dt = w[1].t - w[0].t;
        if dt <= 0.0 {
            continue;
        }
        let dmu = w[1].mu - w[0].mu;
        let mu_dot = if dmu.abs() <= 1e-12 { 0.0 } else { dmu / dt };
        report.intervals_checked += 1;
        for n in w {
            let r = inclusion_distance(regime, n.sigma, mu_dot, n.mu, 1e-12);
            if r > report.max_residual {
                report.max_residual = r;
                report.worst_time = n.t;
            }
        }
    }
    report
}
