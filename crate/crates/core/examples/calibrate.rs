//! Prints the raw ratios the frozen monitor constants were chosen from.
//!
//! `cargo run --release -p nlfp-core --example calibrate [nu ...]`

use nlfp_core::harness::{
    hysteresis_benchmark, monitor_inequalities, relaxation_scenario, simulate_monitored, MonitorConstants,
    BENCHMARK_NU, MONOTONICITY,
};
use nlfp_core::potential::Branch;

fn main() -> nlfp_core::Result<()> {
    let nus: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("nu")).collect();
    let nus = if nus.is_empty() { vec![BENCHMARK_NU] } else { nus };
    let c = MonitorConstants::frozen();
    let specs = nus.iter().flat_map(|&nu| {
        [
            ("ramp", hysteresis_benchmark(nu, 1.0 / 50.0, 10)),
            ("relax", relaxation_scenario(nu, 4.0)),
        ]
    });
    for (label, spec) in specs {
        let spec = spec?;
        let nu = spec.regime.nu;
        let (_, samples) = simulate_monitored(&spec, &c)?;
        let (pot, reg) = (&spec.potential, &spec.regime);
        let (nu2, tau) = (nu * nu, reg.tau);
        let lm = pot.landmarks();
        let mut xi_d: f64 = 0.0;
        let mut xi_only: f64 = 0.0;
        let mut outside: f64 = 0.0;
        let mut recon: f64 = 0.0;
        let mut zeta: f64 = 0.0;
        let mut m2: f64 = 0.0;
        let mut l1 = 0.0;
        let mut lip: f64 = 0.0;
        for (k, s) in samples.iter().enumerate() {
            let r = &s.row;
            xi_d = xi_d.max((r.xi - r.dissipation) / nu2);
            xi_only = xi_only.max(r.xi / nu2);
            outside = outside.max(s.outside_mass / (tau.powf(c.outside_alpha) * (r.dissipation / tau + 1.0)));
            if r.sigma > lm.sigma_lower && r.sigma < lm.sigma_upper {
                let xm = pot.branch(Branch::Minus, r.sigma)?;
                let xp = pot.branch(Branch::Plus, r.sigma)?;
                let lhs = (r.ell - r.m_minus * xm - r.m_plus * xp).abs();
                recon = recon.max(lhs / (r.xi + r.m_zero).sqrt());
            }
            if r.dissipation <= tau.powf(c.zeta_beta) {
                zeta = zeta.max(r.zeta / nu2);
            }
            m2 = m2.max(s.second_moment);
            if k > 0 {
                let p = &samples[k - 1].row;
                l1 += 0.5 * (p.dissipation + r.dissipation) * (r.t - p.t);
                lip = lip.max((r.sigma - p.sigma).abs() / (r.t - p.t));
            }
        }
        println!(
            "{label} nu={nu} (xi-D)/nu2={xi_d:.4} xi/nu2={xi_only:.4} outside={outside:.4} recon={recon:.4} \
             zeta/nu2={zeta:.4} intD/tau={:.4} m2={m2:.4} |dsigma/dt|={lip:.4}",
            l1 / tau
        );
        let report = monitor_inequalities(&samples, pot, reg, &c);
        let mono = report.get(MONOTONICITY).expect("monotonicity is monitored");
        println!(
            "    monotonicity increase over tau^p {:.3e} in {} samples, sigma envelope {:.3e}, violations {}",
            (mono.max_slack + c.monotonicity_c * tau.powf(c.monotonicity_tau_power))
                / tau.powf(c.monotonicity_tau_power),
            mono.checked,
            report.sigma_envelope,
            report.total_violations()
        );
    }
    Ok(())
}
