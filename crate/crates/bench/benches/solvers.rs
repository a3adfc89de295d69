use criterion::{black_box, criterion_group, criterion_main, Criterion};

use mpa_bench::{paper, profitable};
use mpa_core::{
    calibrate_r, integrate, patches_equilibrium, patches_open_stationary, ControlSchedule,
    DiffusionSpec, ModelVariant,
};

fn equilibria(c: &mut Criterion) {
    let (bio, econ, _) = profitable();
    c.bench_function("patches_equilibrium", |b| {
        b.iter(|| patches_equilibrium(black_box(&bio), black_box(&econ)).unwrap())
    });
}

fn open_access(c: &mut Criterion) {
    let s = paper();
    let mut group = c.benchmark_group("open_access");
    group.sample_size(20);
    group.bench_function("stationary_multistart", |b| {
        b.iter(|| patches_open_stationary(&s.bio, &s.econ, s.diffusion).unwrap())
    });
    group.bench_function("calibrate_r", |b| {
        b.iter(|| calibrate_r(&s.bio, &s.econ, s.diffusion).unwrap())
    });
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let (bio, econ, _) = profitable();
    let eq = patches_equilibrium(&bio, &econ).unwrap();
    let spec = DiffusionSpec::Constant {
        lambda: eq.lambda_star.unwrap(),
    };
    let schedule = ControlSchedule::constant(eq.e_star);
    let mut group = c.benchmark_group("simulation");
    group.sample_size(20);
    group.bench_function("rk4_horizon_100", |b| {
        b.iter(|| {
            integrate(
                ModelVariant::PatchesReserve,
                eq.state(),
                &schedule,
                &bio,
                &econ,
                spec,
                100.0,
                0.01,
            )
            .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, equilibria, open_access, simulation);
criterion_main!(benches);
