use crate::fp_solver::GridDensity;
use crate::potential::{Branch, DoubleWellPotential, ScalingRegime};

/// Cells with density at or below this value are skipped in log-type integrands.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// `E(ρ) = ν²∫ρ ln ρ + ∫Hρ`, with `0·ln 0 = 0`.
pub fn energy(rho: &GridDensity, pot: &DoubleWellPotential, nu: f64) -> f64 {
    let dx = rho.grid().dx();
    let mut entropy = 0.0;
    let mut potential = 0.0;
    for (&x, &r) in rho.grid().centers().iter().zip(rho.values()) {
        if r > 0.0 {
            entropy += r * r.ln();
        }
        potential += pot.h(x) * r;
    }
    (nu * nu * entropy + potential) * dx
}

/// `E_σ(ρ) = ν²∫ρ ln ρ + ∫H_σρ = E(ρ) − σ∫xρ`.
pub fn relative_energy(rho: &GridDensity, pot: &DoubleWellPotential, nu: f64, sigma: f64) -> f64 {
    energy(rho, pot, nu) - sigma * rho.first_moment()
}

/// `D = ∫(ν²∂ₓρ + (H' − σ)ρ)²/ρ` with centered differences for `∂ₓρ`
/// (one-sided at the boundary cells).
pub fn dissipation(rho: &GridDensity, sigma: f64, pot: &DoubleWellPotential, nu: f64) -> f64 {
    let v = rho.values();
    let xs = rho.grid().centers();
    let dx = rho.grid().dx();
    let n = v.len();
    let nu2 = nu * nu;
    let mut d = 0.0;
    for i in 0..n {
        let r = v[i];
        if r <= DENSITY_FLOOR {
            continue;
        }
        let grad = if i == 0 {
            (v[1] - v[0]) / dx
        } else if i == n - 1 {
            (v[n - 1] - v[n - 2]) / dx
        } else {
            (v[i + 1] - v[i - 1]) / (2.0 * dx)
        };
        let flux = nu2 * grad + (pot.dh(xs[i]) - sigma) * r;
        d += flux * flux / r;
    }
    d * dx
}

/// The same dissipation in the form `4ν⁴∫(∂ₓw)²γ_σ` with `w = √(ρ/γ_σ)`.
pub fn dissipation_w_form(rho: &GridDensity, sigma: f64, pot: &DoubleWellPotential, nu: f64) -> f64 {
    let v = rho.values();
    let xs = rho.grid().centers();
    let dx = rho.grid().dx();
    let n = v.len();
    let nu2 = nu * nu;
    let pot_v: Vec<f64> = xs.iter().map(|&x| pot.h_sigma(x, sigma) / nu2).collect();
    // √γᵢ·wⱼ = √ρⱼ·exp((Vⱼ − Vᵢ)/2)
    let scaled = |i: usize, j: usize| v[j].sqrt() * (0.5 * (pot_v[j] - pot_v[i])).exp();
    let mut d = 0.0;
    for i in 0..n {
        let g = if i == 0 {
            (scaled(0, 1) - scaled(0, 0)) / dx
        } else if i == n - 1 {
            (scaled(i, i) - scaled(i, i - 1)) / dx
        } else {
            (scaled(i, i + 1) - scaled(i, i - 1)) / (2.0 * dx)
        };
        if g.is_finite() {
            d += g * g;
        }
    }
    4.0 * nu2 * nu2 * d * dx
}

/// `ξ = ∫(H' − σ)²ρ`
pub fn moment_xi(rho: &GridDensity, sigma: f64, pot: &DoubleWellPotential) -> f64 {
    rho.integrate(|x| {
        let d = pot.dh(x) - sigma;
        d * d
    })
}

/// Masses left of `x*`, between the spinodal points, right of `x_*`, and `μ = m₊ − m₋`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialMasses {
    pub minus: f64,
    pub zero: f64,
    pub plus: f64,
    pub mu: f64,
}

pub fn partial_masses(rho: &GridDensity, pot: &DoubleWellPotential) -> PartialMasses {
    let lm = pot.landmarks();
    let total = rho.mass();
    let minus = rho.mass_below(lm.spinodal_left) / total;
    let plus = 1.0 - rho.mass_below(lm.spinodal_right) / total;
    let zero = 1.0 - minus - plus;
    PartialMasses {
        minus,
        zero,
        plus,
        mu: plus - minus,
    }
}

/// `m_η = ∫_{x*−η}^{x_*+η} ρ`
pub fn mass_near_spinodal(rho: &GridDensity, pot: &DoubleWellPotential, eta: f64) -> f64 {
    let lm = pot.landmarks();
    rho.mass_between(lm.spinodal_left - eta, lm.spinodal_right + eta)
}

/// `ζ = ξ + m₀ + {m₊, 0, m₋}` according to whether `σ ≤ σ_# − ε`, lies strictly
/// between `σ_# − ε` and `σ^# + ε`, or `σ ≥ σ^# + ε`.
pub fn zeta_from_parts(xi: f64, masses: &PartialMasses, sigma: f64, regime: &ScalingRegime, eps: f64) -> f64 {
    let extra = if sigma <= regime.sigma_low - eps {
        masses.plus
    } else if sigma >= regime.sigma_high + eps {
        masses.minus
    } else {
        0.0
    };
    xi + masses.zero + extra
}

pub fn zeta(rho: &GridDensity, sigma: f64, pot: &DoubleWellPotential, regime: &ScalingRegime, eps: f64) -> f64 {
    let xi = moment_xi(rho, sigma, pot);
    zeta_from_parts(xi, &partial_masses(rho, pot), sigma, regime, eps)
}

/// Which stable peaks are excluded when measuring the outside mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Peaks {
    Both,
    Minus,
    Plus,
}

/// Mass outside the `η`-balls around the selected stable peak positions `X±(σ)`.
/// A peak whose branch does not exist at `σ` contributes no ball.
pub fn mass_outside_peaks(rho: &GridDensity, pot: &DoubleWellPotential, sigma: f64, eta: f64, peaks: Peaks) -> f64 {
    let mut balls: Vec<(f64, f64)> = Vec::new();
    if matches!(peaks, Peaks::Both | Peaks::Minus) {
        if let Ok(x) = pot.branch(Branch::Minus, sigma) {
            balls.push((x - eta, x + eta));
        }
    }
    if matches!(peaks, Peaks::Both | Peaks::Plus) {
        if let Ok(x) = pot.branch(Branch::Plus, sigma) {
            balls.push((x - eta, x + eta));
        }
    }
    balls.sort_by(|a, b| a.0.total_cmp(&b.0));
    if balls.len() == 2 && balls[1].0 <= balls[0].1 {
        balls = vec![(balls[0].0, balls[0].1.max(balls[1].1))];
    }
    let inside: f64 = balls.iter().map(|&(a, b)| rho.mass_between(a, b)).sum();
    (rho.mass() - inside).max(0.0)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fp_solver::Grid;
    use crate::potential::{default_potential, scaling_regime};

    fn grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::uniform(-5.0, 5.0, n).unwrap())
    }

    fn gauss(g: &Arc<Grid>, c: f64, s: f64) -> GridDensity {
        let v = g
            .centers()
            .iter()
            .map(|x| (-(x - c).powi(2) / (2.0 * s * s)).exp())
            .collect();
        GridDensity::from_unnormalized(g.clone(), v).unwrap()
    }

    #[test]
    fn uniform_entropy() {
        // H ≡ 0 contribution isolated by subtracting ∫Hρ
        let pot = default_potential(2.0).unwrap();
        let g = grid(1000);
        let a = 1.5;
        let v = g
            .centers()
            .iter()
            .map(|&x| if x.abs() < a { 1.0 } else { 0.0 })
            .collect();
        let rho = GridDensity::from_unnormalized(g, v).unwrap();
        let nu = 0.3;
        let ent = energy(&rho, &pot, nu) - rho.integrate(|x| pot.h(x));
        assert!((ent + nu * nu * (2.0 * a).ln()).abs() < 1e-12);
    }

    #[test]
    fn uniform_on_spinodal_region() {
        let pot = default_potential(2.0).unwrap();
        let lm = *pot.landmarks();
        let g = grid(4000);
        let v = g
            .centers()
            .iter()
            .map(|&x| {
                if x > lm.spinodal_left && x < lm.spinodal_right {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let rho = GridDensity::from_unnormalized(g, v).unwrap();
        let m = partial_masses(&rho, &pot);
        assert!((m.zero - 1.0).abs() < 1e-12);
        assert!(m.mu.abs() < 1e-12);
    }

    #[test]
    fn narrow_peak_has_small_xi() {
        let pot = default_potential(2.0).unwrap();
        let g = grid(8192);
        let x = pot.branch(Branch::Plus, 0.1).unwrap();
        let wide = moment_xi(&gauss(&g, x, 0.05), 0.1, &pot);
        let narrow = moment_xi(&gauss(&g, x, 0.01), 0.1, &pot);
        assert!(narrow < wide / 20.0);
        let m = partial_masses(&gauss(&g, x, 0.01), &pot);
        assert!((m.mu - 1.0).abs() < 1e-12);
    }

    #[test]
    fn masses_sum_to_one() {
        let pot = default_potential(2.0).unwrap();
        let rho = gauss(&grid(2048), 0.2, 0.7);
        let m = partial_masses(&rho, &pot);
        assert!((m.minus + m.zero + m.plus - 1.0).abs() < 1e-15);
        assert!(m.zero > 0.1 && m.minus > 0.05);
    }

    #[test]
    fn zeta_switches_by_range() {
        let pot = default_potential(2.0).unwrap();
        let r = scaling_regime(&pot, 0.25, 0.1).unwrap();
        let m = PartialMasses {
            minus: 0.3,
            zero: 0.1,
            plus: 0.6,
            mu: 0.3,
        };
        assert_eq!(zeta_from_parts(0.01, &m, r.sigma_low - 0.01, &r, 0.0), 0.01 + 0.1 + 0.6);
        assert_eq!(zeta_from_parts(0.01, &m, 0.0, &r, 0.0), 0.01 + 0.1);
        assert_eq!(zeta_from_parts(0.01, &m, r.sigma_high, &r, 0.0), 0.01 + 0.1 + 0.3);
        assert_eq!(zeta_from_parts(0.01, &m, r.sigma_high, &r, 0.05), 0.01 + 0.1);
    }

    #[test]
    fn outside_mass_of_contained_uniform_is_zero() {
        let pot = default_potential(2.0).unwrap();
        let g = grid(4096);
        let v = g
            .centers()
            .iter()
            .map(|&x| if (x - 1.0).abs() < 0.2 { 1.0 } else { 0.0 })
            .collect();
        let rho = GridDensity::from_unnormalized(g, v).unwrap();
        assert!(mass_outside_peaks(&rho, &pot, 0.0, 0.3, Peaks::Both) < 1e-14);
        assert!(mass_outside_peaks(&rho, &pot, 0.0, 0.3, Peaks::Minus) > 0.999);
    }
}
