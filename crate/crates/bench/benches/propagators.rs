use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use zenosim_core::antizeno::{solve_steering, SteeredMeasurement};
use zenosim_core::chain::{chain_operator, HistoryOutcome, MeasurementSchedule};
use zenosim_core::continuum::{dyson_series, DysonTruncation, OdeConfig};
use zenosim_core::family::RotationFactor;
use zenosim_core::random;
use zenosim_core::scenarios::{spin_family, SpinFamilyParams};
use zenosim_core::{mat_exp, Branch, HeisenbergFamily, ProjectorFamily, ScalarPath, UnitaryFamily};

fn steered(dim: usize) -> SteeredMeasurement {
    let mut rng = random::rng_from_seed(1);
    let e = random::random_projector_with(&mut rng, dim, dim / 2).unwrap();
    let k1 = random::random_hermitian_with(&mut rng, dim).unwrap();
    let k2 = random::random_hermitian_with(&mut rng, dim).unwrap();
    let h = random::random_hermitian_with(&mut rng, dim).unwrap();
    let rho = random::random_density_in_range(&mut rng, &e).unwrap();
    let u = UnitaryFamily::rotations(vec![
        RotationFactor::new(k1, ScalarPath::linear(1.0)),
        RotationFactor::new(k2, ScalarPath::Polynomial(vec![0.0, 0.0, 0.75])),
    ])
    .unwrap();
    SteeredMeasurement::new(e, u, h, rho, 1.0).unwrap()
}

fn bench_mat_exp(c: &mut Criterion) {
    let mut group = c.benchmark_group("mat_exp");
    for dim in [4usize, 16, 64] {
        let a = random::random_hermitian(dim, 3)
            .unwrap()
            .matrix()
            .map(|z| z * zenosim_core::linalg::c(0.0, -1.0));
        group.bench_with_input(BenchmarkId::from_parameter(dim), &a, |b, a| {
            b.iter(|| mat_exp(black_box(a)))
        });
    }
    group.finish();
}

fn bench_chain(c: &mut Criterion) {
    let mut group = c.benchmark_group("chain_n1024");
    for dim in [4usize, 16] {
        let m = steered(dim);
        let fam = ProjectorFamily::steered(m.projector().clone(), m.unitary().clone(), 0.0, 1.0).unwrap();
        let sched = MeasurementSchedule::new(0.0, 1.0, 1024).unwrap();
        let outcome = HistoryOutcome::all_measured(1024);
        group.bench_function(BenchmarkId::from_parameter(dim), |b| {
            b.iter(|| chain_operator(&fam, m.hamiltonian(), &sched, &outcome).unwrap())
        });
    }
    group.finish();
}

fn bench_steering(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_steering_1000");
    for dim in [4usize, 16] {
        let m = steered(dim);
        let cfg = OdeConfig::with_steps(1000);
        group.bench_function(BenchmarkId::from_parameter(dim), |b| {
            b.iter(|| solve_steering(&m, 0.0, 1.0, &cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_dyson(c: &mut Criterion) {
    let params = SpinFamilyParams::new(0.4, ScalarPath::linear(1.3), 1.0).unwrap();
    let fam = HeisenbergFamily::new(
        spin_family(&params).unwrap(),
        zenosim_core::scenarios::spin_hamiltonian(0.4),
    )
    .unwrap();
    let mut group = c.benchmark_group("dyson_series");
    for order in [2usize, 4] {
        let trunc = DysonTruncation::new(order);
        group.bench_function(BenchmarkId::from_parameter(order), |b| {
            b.iter(|| dyson_series(&fam, Branch::Complement, 0.0, 0.3, &trunc).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_mat_exp, bench_chain, bench_steering, bench_dyson);
criterion_main!(benches);
