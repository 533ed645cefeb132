use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::potential::{Branch, DoubleWellPotential, ScalingRegime};

/// Kramers transition rates of the tilted double well `H_σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KramersRates {
    pub sigma: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    /// Eyring–Kramers prefactors `√(H''(X±)·|H''(X₀)|)/(2π)`.
    pub c_minus: f64,
    pub c_plus: f64,
    /// Escape rate out of the left well.
    pub f_minus: f64,
    /// Escape rate out of the right well.
    pub f_plus: f64,
}

impl KramersRates {
    /// Relaxation rate of `μ` under frozen `σ`.
    pub fn relaxation_rate(&self) -> f64 {
        self.f_minus + self.f_plus
    }

    /// Equilibrium phase fraction `(F₋ − F₊)/(F₋ + F₊)` of the two-state reduction.
    pub fn mu_equilibrium(&self) -> f64 {
        (self.f_minus - self.f_plus) / (self.f_minus + self.f_plus)
    }
}

/// `τF± = C±(σ)·exp(−h±(σ)/ν²)`.
pub fn kramers_rates(pot: &DoubleWellPotential, regime: &ScalingRegime, sigma: f64) -> Result<KramersRates> {
    let lm = pot.landmarks();
    if !(sigma > lm.sigma_lower && sigma < lm.sigma_upper) {
        return Err(Error::Domain(format!(
            "Kramers rates need σ strictly inside ({}, {}); got {sigma}",
            lm.sigma_lower, lm.sigma_upper
        )));
    }
    let (h_minus, h_plus) = pot.barriers(sigma)?;
    let top = pot.d2h(pot.branch(Branch::Zero, sigma)?).abs();
    let c_minus = (pot.d2h(pot.branch(Branch::Minus, sigma)?) * top).sqrt() / (2.0 * PI);
    let c_plus = (pot.d2h(pot.branch(Branch::Plus, sigma)?) * top).sqrt() / (2.0 * PI);
    let nu2 = regime.nu * regime.nu;
    Ok(KramersRates {
        sigma,
        h_minus,
        h_plus,
        c_minus,
        c_plus,
        f_minus: c_minus / regime.tau * (-h_minus / nu2).exp(),
        f_plus: c_plus / regime.tau * (-h_plus / nu2).exp(),
    })
}
