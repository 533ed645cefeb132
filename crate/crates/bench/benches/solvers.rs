use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use nlfp_core::fp_solver::{init_well_prepared, FpSolver};
use nlfp_core::langevin::{Ensemble, ParticleStepper};
use nlfp_core::limit_model::{integrate_limit, LimitOptions};
use nlfp_core::{default_potential, scaling_regime, ControlSpec, Coupling, Grid};

fn pde_step(c: &mut Criterion) {
    let pot = default_potential(2.0).unwrap();
    let regime = scaling_regime(&pot, 0.25, 0.1).unwrap();
    let control = ControlSpec::cosine_ramp(1.6, 64.0);
    for (name, coupling) in [("implicit", Coupling::Implicit), ("explicit", Coupling::Explicit)] {
        let grid = Arc::new(Grid::uniform(-5.0, 5.0, 2048).unwrap());
        let rho = init_well_prepared(&pot, pot.dh(-1.6), -1.0, 0.25, grid.clone(), -1.6).unwrap();
        let mut solver = FpSolver::new(pot.clone(), regime, grid, control.clone(), coupling).unwrap();
        let mut state = solver.state(0.0, rho);
        let dt = regime.tau / 50.0;
        c.bench_function(&format!("pde_step_{name}_n2048"), |b| {
            b.iter(|| solver.step(black_box(&mut state), dt).unwrap())
        });
    }
}

fn limit_integration(c: &mut Criterion) {
    let pot = default_potential(2.0).unwrap();
    let regime = scaling_regime(&pot, 0.25, 0.1).unwrap();
    let control = ControlSpec::Sinusoid {
        offset: 0.0,
        amplitude: 1.6,
        omega: std::f64::consts::PI / 16.0,
        phase: -std::f64::consts::FRAC_PI_2,
    };
    let opts = LimitOptions::uniform(64.0, 1000);
    c.bench_function("limit_two_cycles_1000_nodes", |b| {
        b.iter(|| integrate_limit(&pot, &regime, &control, pot.dh(-1.6), -1.0, 64.0, black_box(&opts)).unwrap())
    });
}

fn particle_step(c: &mut Criterion) {
    let pot = default_potential(2.0).unwrap();
    let regime = scaling_regime(&pot, 0.3, 0.1).unwrap();
    let mut ens = Ensemble::at_point(100_000, -1.0, 7).unwrap();
    let mut stepper = ParticleStepper::new(pot, regime, ControlSpec::constant(-1.0), Coupling::Frozen(0.0));
    let dt = regime.tau / 100.0;
    c.bench_function("particle_step_1e5", |b| {
        b.iter(|| stepper.step(black_box(&mut ens), dt).unwrap())
    });
}

criterion_group!(benches, pde_step, limit_integration, particle_step);
criterion_main!(benches);
