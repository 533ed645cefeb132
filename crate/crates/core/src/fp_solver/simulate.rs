use std::sync::Arc;

use crate::diagnostics::{self, DiagnosticsRow};
use crate::error::{Error, Result};
use crate::potential::{DoubleWellPotential, ScalingRegime};
use crate::record::{TrajectoryRecord, TrajectoryRow};

use super::control::ControlSpec;
use super::grid::{Grid, GridDensity, MASS_TOL};
use super::init::init_well_prepared;
use super::scheme::{Discretization, Workspace};

/// How the multiplier enters each implicit step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// `σₙ₊₁` solved together with the implicit step so that the discrete first
    /// moment advances by exactly `dt·ℓ̇(tₙ₊₁)`.
    Implicit,
    /// `σₙ = ∫H'ρₙ + τℓ̇(tₙ)` frozen during the step.
    Explicit,
    /// Constraint disabled, `σ` held at the given value.
    Frozen(f64),
}

/// Iteration cap of the implicit multiplier solve.
const MAX_SIGMA_ITERATIONS: usize = 30;

/// `σ = ∫H'ρ + τℓ̇`
pub fn sigma_meanfield(rho: &GridDensity, pot: &DoubleWellPotential, ell_dot: f64, tau: f64) -> f64 {
    rho.integrate(|x| pot.dh(x)) + tau * ell_dot
}

/// `γ_σ/z_σ` sampled at cell centers with unit discrete mass.
pub fn stationary_density(pot: &DoubleWellPotential, sigma: f64, nu: f64, grid: Arc<Grid>) -> Result<GridDensity> {
    Discretization::new(pot, grid, nu)?.gibbs(sigma)
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub rho: GridDensity,
    pub sigma: f64,
    pub diagnostics: Option<DiagnosticsRow>,
}

/// Initial density of a run.
#[derive(Debug, Clone)]
pub enum InitialData {
    WellPrepared { sigma_ini: f64, mu_ini: f64 },
    Stationary { sigma: f64 },
    Density(GridDensity),
}

/// Everything needed to run one PDE simulation.
#[derive(Debug, Clone)]
pub struct SimulationSpec {
    pub potential: DoubleWellPotential,
    pub regime: ScalingRegime,
    pub grid: Arc<Grid>,
    pub control: ControlSpec,
    pub t_end: f64,
    pub dt: f64,
    pub stride: usize,
    pub coupling: Coupling,
    pub init: InitialData,
    /// Half-width `η` of the spinodal neighbourhood for `m_η`.
    pub eta: f64,
    /// `ε` of the `ζ` ranges.
    pub zeta_eps: f64,
}

/// Time stepper for the nonlocal Fokker–Planck equation.
#[derive(Debug, Clone)]
pub struct FpSolver {
    pot: DoubleWellPotential,
    regime: ScalingRegime,
    disc: Discretization,
    control: ControlSpec,
    coupling: Coupling,
    ws: Workspace,
}

impl FpSolver {
    pub fn new(
        pot: DoubleWellPotential,
        regime: ScalingRegime,
        grid: Arc<Grid>,
        control: ControlSpec,
        coupling: Coupling,
    ) -> Result<Self> {
        let disc = Discretization::new(&pot, grid, regime.nu)?;
        Ok(Self {
            pot,
            regime,
            disc,
            control,
            coupling,
            ws: Workspace::default(),
        })
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn potential(&self) -> &DoubleWellPotential {
        &self.pot
    }

    pub fn regime(&self) -> &ScalingRegime {
        &self.regime
    }

    pub fn control(&self) -> &ControlSpec {
        &self.control
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    /// Multiplier recorded alongside a density at time `t`.
    pub fn sigma_at(&self, rho: &[f64], t: f64) -> f64 {
        match self.coupling {
            Coupling::Frozen(s) => s,
            _ => self.disc.mean_dh(rho) + self.regime.tau * self.control.ell_dot(t),
        }
    }

    /// Fresh state at time `t` with the recorded multiplier.
    pub fn state(&self, t: f64, rho: GridDensity) -> SimState {
        let sigma = self.sigma_at(rho.values(), t);
        SimState {
            t,
            rho,
            sigma,
            diagnostics: None,
        }
    }

    /// One implicit Euler step of length `dt`.
    pub fn step(&mut self, state: &mut SimState, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        let tau = self.regime.tau;
        let t_new = state.t + dt;
        let r = dt / tau;
        let mut out = Vec::with_capacity(state.rho.values().len());
        let rho = state.rho.values();
        let context = |e: Error| match e {
            Error::Numerical(m) => Error::Numerical(format!("step at t = {}: {m}", state.t)),
            other => other,
        };
        let mut solved = None;
        match self.coupling {
            Coupling::Frozen(s) => {
                self.disc
                    .implicit_step(rho, s, r, &mut self.ws, &mut out)
                    .map_err(context)?;
            }
            Coupling::Explicit => {
                let s = self.disc.mean_dh(rho) + tau * self.control.ell_dot(state.t);
                self.disc
                    .implicit_step(rho, s, r, &mut self.ws, &mut out)
                    .map_err(context)?;
            }
            Coupling::Implicit => {
                solved = Some(self.solve_multiplier(state, dt, &mut out).map_err(context)?);
            }
        }
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite density at cell {i}; last good time t = {}",
                state.t
            )));
        }
        let dx = state.rho.grid().dx();
        let mass = out.iter().sum::<f64>() * dx;
        let before = state.rho.mass();
        if (mass - before).abs() > MASS_TOL {
            return Err(Error::Numerical(format!(
                "step changed the mass from {before} to {mass} at t = {t_new}"
            )));
        }
        // the scheme conserves mass exactly; this only removes accumulated round-off
        out.iter_mut().for_each(|v| *v /= mass);
        let rho_new = GridDensity::new_unchecked(state.rho.grid().clone(), out);
        let sigma = solved.unwrap_or_else(|| self.sigma_at(rho_new.values(), t_new));
        if !sigma.is_finite() {
            return Err(Error::Numerical(format!(
                "multiplier became non-finite; last good time t = {}",
                state.t
            )));
        }
        state.t = t_new;
        state.rho = rho_new;
        state.sigma = sigma;
        state.diagnostics = None;
        Ok(())
    }

    /// Multiplier of the implicit step: the root of
    /// `g(s) = M(ρ'(s)) − M(ρ) − dt·ℓ̇(tₙ₊₁)`, with `M` the discrete first moment.
    /// Since `M(ρ') − M(ρ) = (dt/τ)·Σ J(ρ', s)Δx` holds exactly for the flux
    /// scheme, this is `σ = ∫H'ρ + τℓ̇` in the form the discretization conserves.
    fn solve_multiplier(&mut self, state: &SimState, dt: f64, out: &mut Vec<f64>) -> Result<f64> {
        let r = dt / self.regime.tau;
        let rho = state.rho.values();
        let xs = state.rho.grid().centers();
        let dx = state.rho.grid().dx();
        let moment = |v: &[f64]| xs.iter().zip(v).map(|(x, p)| x * p).sum::<f64>() * dx;
        let target = moment(rho) + dt * self.control.ell_dot(state.t + dt);
        let scale = 1.0 + target.abs();
        let disc = &self.disc;
        let ws = &mut self.ws;
        let mut residual = |s: f64, buf: &mut Vec<f64>| -> Result<f64> {
            disc.implicit_step(rho, s, r, ws, buf)?;
            Ok(moment(buf) - target)
        };
        // ∂g/∂s ≈ dt/τ for a unit-mass density
        let tol = 1e-15 * scale;
        let mut s0 = state.sigma;
        let mut g0 = residual(s0, out)?;
        if g0.abs() <= tol {
            return Ok(s0);
        }
        let mut best = (s0, g0.abs());
        let mut s1 = s0 - g0 / r;
        for _ in 0..MAX_SIGMA_ITERATIONS {
            let g1 = residual(s1, out)?;
            if g1.abs() <= tol || s1 == s0 {
                return Ok(s1);
            }
            if g1.abs() < best.1 {
                best = (s1, g1.abs());
            }
            let slope = (g1 - g0) / (s1 - s0);
            let next = if slope.is_finite() && slope > 0.0 {
                s1 - g1 / slope
            } else {
                s1 - g1 / r
            };
            s0 = s1;
            g0 = g1;
            s1 = next;
        }
        // the moment sum has round-off of a few ulps; accept a stalled iterate there
        if best.1 <= 1e-12 * scale {
            residual(best.0, out)?;
            return Ok(best.0);
        }
        Err(Error::Numerical(format!(
            "implicit multiplier iteration did not converge at t = {} (moment residual {:.3e})",
            state.t, best.1
        )))
    }

    /// Diagnostics of `state`, cached on it.
    pub fn diagnose(&self, state: &mut SimState, eta: f64, zeta_eps: f64) -> DiagnosticsRow {
        if let Some(d) = state.diagnostics {
            return d;
        }
        let d_scheme = self.disc.dissipation_discrete(state.rho.values(), state.sigma);
        let d = diagnostics::evaluate(
            &state.rho,
            state.sigma,
            &self.pot,
            &self.regime,
            d_scheme,
            eta,
            zeta_eps,
        );
        state.diagnostics = Some(d);
        d
    }

    pub fn row(&self, state: &mut SimState, eta: f64, zeta_eps: f64) -> TrajectoryRow {
        let d = self.diagnose(state, eta, zeta_eps);
        TrajectoryRow {
            t: state.t,
            sigma: state.sigma,
            ell: self.control.ell(state.t),
            energy: d.energy,
            dissipation: d.dissipation,
            xi: d.xi,
            m_minus: d.masses.minus,
            m_zero: d.masses.zero,
            m_plus: d.masses.plus,
            mu: d.masses.mu,
            zeta: d.zeta,
            first_moment: d.first_moment,
            mass: state.rho.mass(),
            min_density: state.rho.min_value(),
        }
    }
}

/// Number of steps and the uniform step actually used to reach `t_end`.
pub fn step_plan(t_end: f64, dt: f64) -> (usize, f64) {
    if t_end <= 0.0 {
        return (0, dt);
    }
    let n = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    (n, t_end / n as f64)
}

/// Result of [`simulate_spec`].
#[derive(Debug, Clone)]
pub struct Simulation {
    pub record: TrajectoryRecord,
    pub final_state: SimState,
    pub dt_used: f64,
}

pub fn simulate_spec(spec: &SimulationSpec) -> Result<Simulation> {
    let (solver, rho0) = prepare(spec)?;
    run_solver(solver, rho0, spec.t_end, spec.dt, spec.stride, spec.eta, spec.zeta_eps)
}

/// Solver and initial density described by `spec`.
pub fn prepare(spec: &SimulationSpec) -> Result<(FpSolver, GridDensity)> {
    if !(spec.t_end >= 0.0 && spec.dt > 0.0 && spec.stride > 0) {
        return Err(Error::Domain("need T ≥ 0, dt > 0 and stride ≥ 1".into()));
    }
    let solver = FpSolver::new(
        spec.potential.clone(),
        spec.regime,
        spec.grid.clone(),
        spec.control.clone(),
        spec.coupling,
    )?;
    let rho0 = match &spec.init {
        InitialData::WellPrepared { sigma_ini, mu_ini } => init_well_prepared(
            &spec.potential,
            *sigma_ini,
            *mu_ini,
            spec.regime.nu,
            spec.grid.clone(),
            spec.control.ell(0.0),
        )?,
        InitialData::Stationary { sigma } => solver.discretization().gibbs(*sigma)?,
        InitialData::Density(d) => {
            d.validate()?;
            d.clone()
        }
    };
    Ok((solver, rho0))
}

/// Runs an already configured solver from `rho0` to `t_end`.
pub fn run_solver(
    solver: FpSolver,
    rho0: GridDensity,
    t_end: f64,
    dt: f64,
    stride: usize,
    eta: f64,
    zeta_eps: f64,
) -> Result<Simulation> {
    run_solver_observed(solver, rho0, t_end, dt, stride, eta, zeta_eps, |_, _| {})
}

/// Like [`run_solver`], calling `observe` on every recorded state.
#[allow(clippy::too_many_arguments)]
pub fn run_solver_observed(
    mut solver: FpSolver,
    rho0: GridDensity,
    t_end: f64,
    dt: f64,
    stride: usize,
    eta: f64,
    zeta_eps: f64,
    mut observe: impl FnMut(&SimState, &TrajectoryRow),
) -> Result<Simulation> {
    let (n_steps, dt_used) = step_plan(t_end, dt);
    let mut state = solver.state(0.0, rho0);
    let mut record = TrajectoryRecord::default();
    let row = solver.row(&mut state, eta, zeta_eps);
    observe(&state, &row);
    record.rows.push(row);
    for k in 1..=n_steps {
        solver.step(&mut state, dt_used)?;
        // keep the time grid exact
        state.t = k as f64 * dt_used;
        if k % stride == 0 || k == n_steps {
            let row = solver.row(&mut state, eta, zeta_eps);
            observe(&state, &row);
            record.rows.push(row);
        }
    }
    Ok(Simulation {
        record,
        final_state: state,
        dt_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{default_potential, scaling_regime};

    fn solver(nu: f64, control: ControlSpec, coupling: Coupling) -> FpSolver {
        let pot = default_potential(2.0).unwrap();
        let regime = scaling_regime(&pot, nu, 0.1).unwrap();
        let grid = Arc::new(Grid::uniform(-5.0, 5.0, 512).unwrap());
        FpSolver::new(pot, regime, grid, control, coupling).unwrap()
    }

    #[test]
    fn meanfield_of_symmetric_density() {
        let pot = default_potential(2.0).unwrap();
        let grid = Arc::new(Grid::uniform(-5.0, 5.0, 1024).unwrap());
        let rho = stationary_density(&pot, 0.0, 0.3, grid).unwrap();
        assert!(sigma_meanfield(&rho, &pot, 0.0, 0.329).abs() < 1e-14);
        let s = sigma_meanfield(&rho, &pot, 0.5, 0.329);
        assert!((s - 0.1645).abs() < 1e-13);
    }

    #[test]
    fn zero_horizon_gives_single_row() {
        let pot = default_potential(2.0).unwrap();
        let regime = scaling_regime(&pot, 0.3, 0.1).unwrap();
        let spec = SimulationSpec {
            potential: pot,
            regime,
            grid: Arc::new(Grid::uniform(-5.0, 5.0, 256).unwrap()),
            control: ControlSpec::constant(-1.0),
            t_end: 0.0,
            dt: 0.01,
            stride: 1,
            coupling: Coupling::Implicit,
            init: InitialData::WellPrepared {
                sigma_ini: 0.0,
                mu_ini: -1.0,
            },
            eta: 0.1,
            zeta_eps: 0.0,
        };
        let sim = simulate_spec(&spec).unwrap();
        assert_eq!(sim.record.len(), 1);
        assert_eq!(sim.record.rows[0].t, 0.0);
    }

    #[test]
    fn implicit_step_advances_moment_by_control_increment() {
        let mut s = solver(0.3, ControlSpec::ramp(-1.0, 1.0, 4.0), Coupling::Implicit);
        let grid = s.discretization().grid().clone();
        let rho = init_well_prepared(s.potential(), 0.0, -1.0, 0.3, grid, -1.0).unwrap();
        let mut st = s.state(0.0, rho);
        for _ in 0..20 {
            let m0 = st.rho.first_moment();
            s.step(&mut st, 0.01).unwrap();
            assert!((st.rho.first_moment() - m0 - 0.01 * 0.5).abs() < 1e-14);
            // agrees with the mean-field expression up to quadrature error
            let mf = sigma_meanfield(&st.rho, s.potential(), s.control().ell_dot(st.t), s.regime().tau);
            assert!((mf - st.sigma).abs() < 1e-3, "{mf} vs {}", st.sigma);
        }
    }

    #[test]
    fn frozen_step_keeps_gibbs_state() {
        let mut s = solver(0.3, ControlSpec::constant(0.0), Coupling::Frozen(0.1));
        let g = s.discretization().gibbs(0.1).unwrap();
        let mut st = s.state(0.0, g.clone());
        for _ in 0..50 {
            s.step(&mut st, 0.02).unwrap();
        }
        let drift = g
            .values()
            .iter()
            .zip(st.rho.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-12, "{drift}");
    }

    #[test]
    fn step_plan_hits_horizon() {
        let (n, dt) = step_plan(1.0, 0.3);
        assert_eq!(n, 4);
        assert!((dt - 0.25).abs() < 1e-15);
        assert_eq!(step_plan(1.0, 0.25).0, 4);
        assert_eq!(step_plan(0.0, 0.25).0, 0);
    }
}
