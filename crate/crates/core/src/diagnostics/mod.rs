//! Functionals of densities (energy, dissipation, moments, partial masses),
//! Kramers rates, and Muckenhoupt/Poincaré constants of the Gibbs weights.

mod functionals;
mod kramers;
mod muckenhoupt;

pub use functionals::{
    dissipation, dissipation_w_form, energy, mass_near_spinodal, mass_outside_peaks, moment_xi, partial_masses,
    relative_energy, zeta, zeta_from_parts, PartialMasses, Peaks, DENSITY_FLOOR,
};
pub use kramers::{kramers_rates, KramersRates};
pub use muckenhoupt::{
    default_nodes, exponential_order, gibbs_median, muckenhoupt, muckenhoupt_weight, poincare_upper, weight_median,
    Interval,
};

use crate::fp_solver::GridDensity;
use crate::potential::{DoubleWellPotential, ScalingRegime};

/// All density functionals at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub energy: f64,
    pub relative_energy: f64,
    pub dissipation: f64,
    pub xi: f64,
    pub masses: PartialMasses,
    pub zeta: f64,
    pub m_eta: f64,
    pub first_moment: f64,
}

/// Evaluates every functional; `dissipation` is supplied by the caller so the
/// solver can pass its scheme-consistent value.
pub fn evaluate(
    rho: &GridDensity,
    sigma: f64,
    pot: &DoubleWellPotential,
    regime: &ScalingRegime,
    dissipation: f64,
    eta: f64,
    zeta_eps: f64,
) -> DiagnosticsRow {
    let e = energy(rho, pot, regime.nu);
    let m1 = rho.first_moment();
    let xi = moment_xi(rho, sigma, pot);
    let masses = partial_masses(rho, pot);
    DiagnosticsRow {
        energy: e,
        relative_energy: e - sigma * m1,
        dissipation,
        xi,
        masses,
        zeta: zeta_from_parts(xi, &masses, sigma, regime, zeta_eps),
        m_eta: mass_near_spinodal(rho, pot, eta),
        first_moment: m1,
    }
}
