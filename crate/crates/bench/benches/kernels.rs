use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qtrunc::bounds::{refined_dimension_oscillator, refined_dimension_rotor};
use qtrunc::optimize::{optimize_monotonic, OptimizerConfig};
use qtrunc::propagate::{propagate, StateVector};
use qtrunc::ControlField;
use qtrunc_bench::{bench_field, rotor, step_matrix};

fn bench_eigendecomposition(c: &mut Criterion) {
    let mut group = c.benchmark_group("tridiag_eigendecomposition");
    for &dim in &[14usize, 50, 200] {
        let h = step_matrix(dim, 1.3);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &h, |b, h| {
            b.iter(|| black_box(h.eigendecomposition().unwrap()))
        });
    }
    group.finish();
}

fn bench_propagation(c: &mut Criterion) {
    let system = rotor();
    let field = bench_field(1000, 3.0);
    let psi0 = StateVector::basis_state(50, 0);
    c.bench_function("propagate_rotor_n50_1000steps", |b| {
        b.iter(|| black_box(propagate(&system, 50, &field, &psi0, usize::MAX).unwrap()))
    });
}

fn bench_refined_dimensions(c: &mut Criterion) {
    c.bench_function("refined_dimension_rotor_worked_point", |b| {
        b.iter(|| black_box(refined_dimension_rotor(black_box(3.0), black_box(1e-4)).unwrap()))
    });
    c.bench_function("refined_dimension_oscillator_worked_point", |b| {
        b.iter(|| {
            black_box(refined_dimension_oscillator(black_box(3.0), black_box(1e-4)).unwrap())
        })
    });
}

fn bench_optimizer_iteration(c: &mut Criterion) {
    let system = rotor();
    let psi0 = StateVector::basis_state(20, 0);
    let psif = StateVector::basis_state(20, 1);
    let config = OptimizerConfig {
        penalty_lambda: 0.01,
        max_iterations: 1,
        fidelity_goal: 1.0 - 1e-12,
        initial_field: ControlField::constant(0.1, std::f64::consts::PI / 500.0, 500).unwrap(),
    };
    c.bench_function("optimizer_single_sweep_n20_500steps", |b| {
        b.iter(|| black_box(optimize_monotonic(&system, 20, &psi0, &psif, &config).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_eigendecomposition,
    bench_propagation,
    bench_refined_dimensions,
    bench_optimizer_iteration
);
criterion_main!(benches);
