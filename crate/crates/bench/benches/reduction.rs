use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use splitmor_bench::msd_with_last_state;
use splitmor_core::{
    abt_reduce, bt_reduce, irka_reduce, split_reduce, AbtOptions, IrkaOptions, OrderSelection, X0Method,
};

const TOL: OrderSelection = OrderSelection::Tolerance(1e-2);

fn balanced(c: &mut Criterion) {
    let mut g = c.benchmark_group("bt");
    g.sample_size(10);
    for masses in [25, 75, 150] {
        let (m, basis) = msd_with_last_state(masses);
        g.bench_with_input(BenchmarkId::new("plain", 2 * masses), &m, |b, m| {
            b.iter(|| bt_reduce(m, TOL).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("augmented", 2 * masses), &m, |b, m| {
            b.iter(|| abt_reduce(m, &basis, TOL, AbtOptions::default()).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("split", 2 * masses), &m, |b, m| {
            b.iter(|| split_reduce(m, &basis, TOL, TOL, X0Method::Bt).unwrap())
        });
    }
    g.finish();
}

fn irka(c: &mut Criterion) {
    let mut g = c.benchmark_group("irka");
    g.sample_size(10);
    let (m, _) = msd_with_last_state(75);
    for r in [2, 8, 16] {
        g.bench_with_input(BenchmarkId::from_parameter(r), &r, |b, &r| {
            b.iter(|| irka_reduce(&m, r, IrkaOptions::default()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, balanced, irka);
criterion_main!(benches);
