use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use splitmor_bench::msd_with_last_state;
use splitmor_core::gramians::{gramian_factors, hankel_spectrum};
use splitmor_core::linalg::{matrix_exponential, solve_lyapunov};
use splitmor_core::simulation::default_horizon;
use splitmor_core::{simulate, InputSignal, Realization, Vector};

fn lyapunov(c: &mut Criterion) {
    let mut g = c.benchmark_group("lyapunov");
    g.sample_size(10);
    for masses in [25, 75, 150] {
        let (m, _) = msd_with_last_state(masses);
        let q = m.b() * m.b().transpose();
        g.bench_with_input(BenchmarkId::from_parameter(2 * masses), &m, |b, m| {
            b.iter(|| solve_lyapunov(m.a(), &q).unwrap())
        });
    }
    g.finish();
}

fn gramians(c: &mut Criterion) {
    let mut g = c.benchmark_group("gramians+hsv");
    g.sample_size(10);
    for masses in [25, 75, 150] {
        let (m, _) = msd_with_last_state(masses);
        g.bench_with_input(BenchmarkId::from_parameter(2 * masses), &m, |b, m| {
            b.iter(|| hankel_spectrum(&gramian_factors(m).unwrap()))
        });
    }
    g.finish();
}

fn expm(c: &mut Criterion) {
    let (m, _) = msd_with_last_state(150);
    c.bench_function("expm/300", |b| b.iter(|| matrix_exponential(m.a(), 0.1).unwrap()));
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    for masses in [25, 150] {
        let (m, _) = msd_with_last_state(masses);
        let (t_f, dt) = default_horizon(&m, Some(0.05));
        let u = InputSignal::decaying(Vector::from_element(m.inputs(), 1.0), 0.05);
        let x0 = Vector::zeros(m.order());
        g.bench_with_input(BenchmarkId::from_parameter(2 * masses), &m, |b, m| {
            b.iter(|| simulate(m, &u, &x0, t_f, dt).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, lyapunov, gramians, expm, simulation);
criterion_main!(benches);
