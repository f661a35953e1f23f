use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use invsteer::controllers::{run_impulsive, Control, ImpulseMap, ImpulseSchedule, RunOptions};
use invsteer::dynamics::{integrate_segment, StateVector};
use invsteer::systems::{CoupledLorenz, Lorenz};
use nalgebra::DVector;

fn lorenz_segment(c: &mut Criterion) {
    let lz = Lorenz::default();
    let start = StateVector::from_slice(0.0, &Lorenz::DEFAULT_X0);
    c.bench_function("lorenz 1000 rk4 steps", |b| {
        b.iter(|| integrate_segment(&lz, black_box(&start), 1.0, 1e-3, 100).unwrap())
    });
}

fn controlled_runs(c: &mut Criterion) {
    let lz = Lorenz::default();
    let ds = (-11.0 + 1201f64.sqrt()) / 2.0;
    let radial = Control {
        schedule: ImpulseSchedule::geometric(0.0, 0.01, 3.0 / ds).unwrap(),
        map: ImpulseMap::RadialRescale { alpha: 5.0 },
    };
    let x0 = DVector::from_column_slice(&Lorenz::DEFAULT_X0);
    c.bench_function("lorenz origin, kappa 3", |b| {
        b.iter(|| run_impulsive(&lz, Some(&radial), black_box(&x0), &RunOptions::default(), |_, _| {}).unwrap())
    });

    let pair = CoupledLorenz::with_coupling(5.0);
    let sync = Control {
        schedule: ImpulseSchedule::fixed(0.0, 0.1, 0.1).unwrap(),
        map: ImpulseMap::SyncRescale {
            alpha: 0.4,
            target: 0..3,
            partner: 3..6,
            convention: Default::default(),
        },
    };
    let y0 = DVector::from_column_slice(&CoupledLorenz::DEFAULT_X0);
    let opts = RunOptions {
        t_max: 5.0,
        ..RunOptions::default()
    };
    c.bench_function("lorenz sync, 5 time units", |b| {
        b.iter(|| run_impulsive(&pair, Some(&sync), black_box(&y0), &opts, |_, _| {}).unwrap())
    });
}

criterion_group!(benches, lorenz_segment, controlled_runs);
criterion_main!(benches);
