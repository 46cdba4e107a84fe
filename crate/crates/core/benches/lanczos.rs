use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hankel_spectra::eigensolve::{lanczos_extremes, LanczosParams};
use hankel_spectra::hankel::build_discrete;
use hankel_spectra::{DiscreteSymbolSpec, Parallelism};

fn lanczos(c: &mut Criterion) {
    let spec = DiscreteSymbolSpec::new(1.0)
        .with_b_plus1(1.0)
        .with_oscillation(1.0, 0.0, 1.0);
    let mut group = c.benchmark_group("lanczos");
    group.sample_size(10);
    for n in [1usize << 12, 1 << 15] {
        let h = build_discrete(&spec, n).unwrap();
        for (label, mode) in [("seq", Parallelism::Sequential), ("rayon", Parallelism::Rayon)] {
            let params = LanczosParams {
                k: 32,
                mode,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(label, n), &n, |b, _| {
                b.iter(|| lanczos_extremes(&h, &params).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, lanczos);
criterion_main!(benches);
