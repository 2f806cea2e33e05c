use criterion::{black_box, criterion_group, criterion_main, Criterion};
use delaunay_core::periodic::{center_branch_orbit, mountain_pass_initialize, shoot, ShootingOptions};
use delaunay_core::{integrate, ModelConstants, PhaseState};

fn integrator(cr: &mut Criterion) {
    let c = ModelConstants::new(5).unwrap();
    let start = c.bubble_state(-5.0);
    cr.bench_function("integrate bubble span 10", |b| {
        b.iter(|| integrate(black_box(start), 5.0, 1e-10, 1e-12, &c).unwrap())
    });
    let near = PhaseState::new(0.0, c.l + 0.01, 0.0, 0.0, 0.0);
    cr.bench_function("integrate near constant span 1", |b| {
        b.iter(|| integrate(black_box(near), 1.0, 1e-10, 1e-12, &c).unwrap())
    });
}

fn periodic(cr: &mut Criterion) {
    let c = ModelConstants::new(5).unwrap();
    let orbit = center_branch_orbit(&c, 6.0, &ShootingOptions::default()).unwrap();
    cr.bench_function("single shot T=6", |b| b.iter(|| shoot(black_box(orbit.a), orbit.b, &c, 6.0, 1e-10).unwrap()));

    let mut group = cr.benchmark_group("orbit solves");
    group.sample_size(10);
    group.bench_function("center branch T=6", |b| {
        b.iter(|| center_branch_orbit(&c, black_box(6.0), &ShootingOptions::default()).unwrap())
    });
    group
        .bench_function("mountain pass T=6", |b| b.iter(|| mountain_pass_initialize(&c, black_box(6.0), 129).unwrap()));
    group.finish();
}

criterion_group!(benches, integrator, periodic);
criterion_main!(benches);
