use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use invsteer::linalg::{jacobi_eigenvalues, max_real_eigenvalue_small, symmetric_max_eigenvalue};
use invsteer::stability::{estimate_ds_seeded, DsSettings};
use invsteer::systems::CoupledLorenz;
use nalgebra::{DMatrix, DVector};

fn eigen(c: &mut Criterion) {
    let l = DMatrix::from_row_slice(3, 3, &[-10.0, 10.0, 0.0, 28.0, -1.0, -3.0, 0.0, 3.0, -8.0 / 3.0]);
    let h = (&l + l.transpose()) * 0.5;
    c.bench_function("closed-form max real eigenvalue 3x3", |b| {
        b.iter(|| max_real_eigenvalue_small(black_box(&l)))
    });
    c.bench_function("symmetric max eigenvalue 3x3", |b| b.iter(|| symmetric_max_eigenvalue(black_box(&h))));
    let mut group = c.benchmark_group("jacobi");
    for n in [4usize, 8, 16] {
        let m = DMatrix::from_fn(n, n, |i, j| 1.0 / (1 + i + j) as f64);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| jacobi_eigenvalues(m, 1e-12)));
    }
    group.finish();
}

fn ds_estimate(c: &mut Criterion) {
    let sys = CoupledLorenz::with_coupling(5.0);
    let j0 = DVector::from_column_slice(&[10.0, 10.0, 10.0]);
    let settings = DsSettings {
        horizon: 10.0,
        ..DsSettings::default()
    };
    let mut group = c.benchmark_group("stability exponent");
    group.sample_size(20);
    group.bench_function("coupled lorenz, T = 10", |b| {
        b.iter(|| estimate_ds_seeded(&sys, black_box(&j0), &settings).unwrap())
    });
    group.finish();
}

criterion_group!(benches, eigen, ds_estimate);
criterion_main!(benches);
