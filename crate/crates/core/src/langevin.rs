//! Interacting-particle simulator `τ dxᵢ = (σ − H'(xᵢ)) dt + √2 ν dWᵢ` with the
//! empirical mean-field closure `σ = (1/N)ΣH'(xᵢ) + τℓ̇`.
//!
//! Noise for step `k` and chunk `c` is drawn from a ChaCha8 stream keyed by
//! `(seed, k, c)`, and chunks have a fixed size, so trajectories are bitwise
//! reproducible regardless of the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::diagnostics::{zeta_from_parts, PartialMasses};
use crate::error::{Error, Result};
use crate::fp_solver::{step_plan, ControlSpec, Coupling, Grid};
use crate::potential::{DoubleWellPotential, ScalingRegime};
use crate::record::{TrajectoryRecord, TrajectoryRow};

/// Smallest admissible ensemble.
pub const MIN_PARTICLES: usize = 1000;
/// Particles per RNG stream and per parallel task.
pub const CHUNK: usize = 4096;
/// Generator and normal sampler, recorded in run metadata.
pub const RNG_DESCRIPTION: &str = "chacha8 keyed by (seed, step, chunk); ziggurat standard normal";

#[derive(Debug, Clone)]
pub struct Ensemble {
    positions: Vec<f64>,
    seed: u64,
    steps_taken: u64,
    pub t: f64,
    pub sigma: f64,
}

impl Ensemble {
    /// All particles at `x0`.
    pub fn at_point(n: usize, x0: f64, seed: u64) -> Result<Self> {
        Self::from_positions(vec![x0; n], seed)
    }

    pub fn from_positions(positions: Vec<f64>, seed: u64) -> Result<Self> {
        if positions.len() < MIN_PARTICLES {
            return Err(Error::Domain(format!(
                "ensemble needs at least {MIN_PARTICLES} particles, got {}",
                positions.len()
            )));
        }
        if let Some(x) = positions.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite particle position {x}")));
        }
        Ok(Self {
            positions,
            seed,
            steps_taken: 0,
            t: 0.0,
            sigma: 0.0,
        })
    }

    /// Two-peak sample of well-prepared data: particles are split
    /// deterministically between `X±(σ_ini)` and spread with the local
    /// Gaussian widths, then shifted so the empirical mean equals `ell0`.
    pub fn well_prepared(
        pot: &DoubleWellPotential,
        sigma_ini: f64,
        mu_ini: f64,
        nu: f64,
        n: usize,
        ell0: f64,
        seed: u64,
    ) -> Result<Self> {
        use crate::potential::Branch;
        if !(-1.0..=1.0).contains(&mu_ini) {
            return Err(Error::Domain(format!("mu_ini must lie in [-1, 1], got {mu_ini}")));
        }
        let n_plus = ((0.5 * (1.0 + mu_ini)) * n as f64).round() as usize;
        let mut positions = Vec::with_capacity(n);
        // stream u64::MAX is reserved for the initial sample
        let mut rng = chunk_rng(seed, u64::MAX, 0);
        for i in 0..n {
            let branch = if i < n_plus { Branch::Plus } else { Branch::Minus };
            let x = pot.branch(branch, sigma_ini)?;
            let sd = nu / pot.d2h(x).sqrt();
            let z: f64 = StandardNormal.sample(&mut rng);
            positions.push(x + sd * z);
        }
        let shift = ell0 - positions.iter().sum::<f64>() / n as f64;
        positions.iter_mut().for_each(|x| *x += shift);
        Self::from_positions(positions, seed)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.positions.iter().sum::<f64>() / self.len() as f64
    }

    pub fn mean_dh(&self, pot: &DoubleWellPotential) -> f64 {
        self.positions.iter().map(|&x| pot.dh(x)).sum::<f64>() / self.len() as f64
    }

    /// Fractions left of `x*`, between the spinodal points and right of `x_*`.
    pub fn partial_masses(&self, pot: &DoubleWellPotential) -> PartialMasses {
        let lm = pot.landmarks();
        let n = self.len() as f64;
        let minus = self.positions.iter().filter(|&&x| x < lm.spinodal_left).count() as f64 / n;
        let plus = self.positions.iter().filter(|&&x| x > lm.spinodal_right).count() as f64 / n;
        let zero = 1.0 - minus - plus;
        PartialMasses {
            minus,
            zero,
            plus,
            mu: plus - minus,
        }
    }
}

fn chunk_rng(seed: u64, step: u64, chunk: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&step.to_le_bytes());
    key[16..24].copy_from_slice(&chunk.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Euler–Maruyama stepper sharing the PDE solver's coupling modes.
///
/// `Explicit` evaluates `σ` from the ensemble before the step. `Implicit` picks
/// `σ` so the empirical mean advances by exactly `dt·ℓ̇(tₙ₊₁)`, the particle
/// counterpart of the PDE solver's default. `Frozen(σ)` disables the constraint.
#[derive(Debug, Clone)]
pub struct ParticleStepper {
    pot: DoubleWellPotential,
    regime: ScalingRegime,
    control: ControlSpec,
    coupling: Coupling,
    noise: Vec<f64>,
}

impl ParticleStepper {
    pub fn new(pot: DoubleWellPotential, regime: ScalingRegime, control: ControlSpec, coupling: Coupling) -> Self {
        Self {
            pot,
            regime,
            control,
            coupling,
            noise: Vec::new(),
        }
    }

    /// Multiplier recorded with the ensemble at its current time.
    pub fn sigma_at(&self, ens: &Ensemble) -> f64 {
        match self.coupling {
            Coupling::Frozen(s) => s,
            _ => ens.mean_dh(&self.pot) + self.regime.tau * self.control.ell_dot(ens.t),
        }
    }

    pub fn step(&mut self, ens: &mut Ensemble, dt: f64) -> Result<()> {
        let tau = self.regime.tau;
        if !(dt > 0.0 && dt <= tau / 10.0 * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!(
                "particle step needs 0 < dt ≤ τ/10 = {}, got {dt}",
                tau / 10.0
            )));
        }
        let r = dt / tau;
        let amp = (2.0 * self.regime.nu * self.regime.nu * r).sqrt();
        let n = ens.len();
        let (seed, k) = (ens.seed, ens.steps_taken);
        self.noise.resize(n, 0.0);
        self.noise.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let mut rng = chunk_rng(seed, k, c as u64);
            for z in chunk {
                let v: f64 = StandardNormal.sample(&mut rng);
                *z = amp * v;
            }
        });
        let pot = &self.pot;
        let sigma = match self.coupling {
            Coupling::Frozen(s) => s,
            Coupling::Explicit => ens.mean_dh(pot) + tau * self.control.ell_dot(ens.t),
            Coupling::Implicit => {
                // mean(x') = mean(x) + r(σ − mean H') + mean(noise)
                let noise_mean = chunked_sum(&self.noise) / n as f64;
                ens.mean_dh(pot) + (dt * self.control.ell_dot(ens.t + dt) - noise_mean) / r
            }
        };
        let noise = &self.noise;
        ens.positions
            .par_chunks_mut(CHUNK)
            .zip(noise.par_chunks(CHUNK))
            .for_each(|(xs, zs)| {
                for (x, z) in xs.iter_mut().zip(zs) {
                    *x += (sigma - pot.dh(*x)) * r + z;
                }
            });
        if let Some(i) = ens.positions.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!(
                "particle {i} became non-finite; last good time t = {}",
                ens.t
            )));
        }
        ens.steps_taken += 1;
        ens.t += dt;
        ens.sigma = match self.coupling {
            Coupling::Implicit => sigma,
            _ => self.sigma_at(ens),
        };
        Ok(())
    }

    /// Diagnostics row of the empirical measure. The entropy part of the
    /// energy uses a histogram on `grid`; the dissipation of an empirical
    /// measure is undefined and reported as NaN.
    pub fn row(&self, ens: &Ensemble, grid: &Grid, zeta_eps: f64) -> TrajectoryRow {
        let n = ens.len() as f64;
        let sigma = ens.sigma;
        let masses = ens.partial_masses(&self.pot);
        let xi = ens
            .positions
            .iter()
            .map(|&x| (self.pot.dh(x) - sigma).powi(2))
            .sum::<f64>()
            / n;
        let mean_h = ens.positions.iter().map(|&x| self.pot.h(x)).sum::<f64>() / n;
        let first_moment = ens.mean();
        TrajectoryRow {
            t: ens.t,
            sigma,
            ell: self.control.ell(ens.t),
            energy: self.regime.nu * self.regime.nu * histogram_entropy(ens.positions(), grid) + mean_h,
            dissipation: f64::NAN,
            xi,
            m_minus: masses.minus,
            m_zero: masses.zero,
            m_plus: masses.plus,
            mu: masses.mu,
            zeta: zeta_from_parts(xi, &masses, sigma, &self.regime, zeta_eps),
            first_moment,
            mass: 1.0,
            min_density: 0.0,
        }
    }
}

/// Sum in fixed chunk order, independent of the thread count.
fn chunked_sum(v: &[f64]) -> f64 {
    let partial: Vec<f64> = v.par_chunks(CHUNK).map(|c| c.iter().sum::<f64>()).collect();
    partial.iter().sum()
}

/// `∫ρ ln ρ` of the histogram density on `grid`; particles beyond the grid
/// are counted in the end cells.
pub fn histogram_entropy(xs: &[f64], grid: &Grid) -> f64 {
    let mut counts = vec![0usize; grid.n()];
    for &x in xs {
        let i = ((x - grid.x_left()) / grid.dx()).floor();
        let i = i.clamp(0.0, (grid.n() - 1) as f64) as usize;
        counts[i] += 1;
    }
    let n = xs.len() as f64;
    let dx = grid.dx();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let rho = c as f64 / (n * dx);
            rho * rho.ln() * dx
        })
        .sum()
}

/// Result of [`simulate_particles`].
#[derive(Debug, Clone)]
pub struct ParticleRun {
    pub record: TrajectoryRecord,
    pub ensemble: Ensemble,
    pub dt_used: f64,
}

/// Runs an ensemble to `t_end`, recording every `stride` steps.
#[allow(clippy::too_many_arguments)]
pub fn simulate_particles(
    mut stepper: ParticleStepper,
    mut ens: Ensemble,
    grid: &Grid,
    t_end: f64,
    dt: f64,
    stride: usize,
    zeta_eps: f64,
) -> Result<ParticleRun> {
    if !(t_end >= 0.0 && dt > 0.0 && stride > 0) {
        return Err(Error::Domain("need T ≥ 0, dt > 0 and stride ≥ 1".into()));
    }
    let (n_steps, dt_used) = step_plan(t_end, dt);
    ens.t = 0.0;
    ens.sigma = stepper.sigma_at(&ens);
    let mut record = TrajectoryRecord::default();
    record.rows.push(stepper.row(&ens, grid, zeta_eps));
    for k in 1..=n_steps {
        stepper.step(&mut ens, dt_used)?;
        ens.t = k as f64 * dt_used;
        if k % stride == 0 || k == n_steps {
            record.rows.push(stepper.row(&ens, grid, zeta_eps));
        }
    }
    Ok(ParticleRun {
        record,
        ensemble: ens,
        dt_used,
    })
}
