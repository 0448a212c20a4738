use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use partorbit::{
    alpha_homogeneity, delta, ensemble, generate, kmeans, multi_start_mean, Dataset, GeneratorConfig, GeneratorKind,
    KMeansConfig, MeanOptions,
};

fn g4(m_c: usize) -> Dataset {
    generate(&GeneratorConfig {
        sigma: 0.3,
        m_c,
        seed: 1,
        ..GeneratorConfig::new(GeneratorKind::G4)
    })
    .unwrap()
}

fn bench_delta(c: &mut Criterion) {
    let data = g4(250);
    let mut group = c.benchmark_group("delta");
    for k in [4, 10, 30] {
        let s = ensemble(&data, &KMeansConfig::new(k, 3), 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(k), &s, |b, s| {
            b.iter(|| delta(black_box(s.get(0)), black_box(s.get(1))).unwrap())
        });
    }
    group.finish();
}

fn bench_homogeneity(c: &mut Criterion) {
    let data = g4(50);
    let mut group = c.benchmark_group("alpha_homogeneity");
    group.sample_size(20);
    for n in [20, 50, 100] {
        let s = ensemble(&data, &KMeansConfig::new(4, 5), n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| alpha_homogeneity(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn bench_mean(c: &mut Criterion) {
    let data = g4(50);
    let s = ensemble(&data, &KMeansConfig::new(5, 7), 30).unwrap();
    let mut group = c.benchmark_group("mean");
    group.sample_size(20);
    group.bench_function("multi_start_n30_k5", |b| {
        b.iter(|| multi_start_mean(black_box(&s), &MeanOptions::default()).unwrap())
    });
    group.finish();
}

fn bench_kmeans(c: &mut Criterion) {
    let mut group = c.benchmark_group("kmeans");
    for m_c in [50, 500] {
        let data = g4(m_c);
        group.bench_with_input(BenchmarkId::from_parameter(4 * m_c), &data, |b, data| {
            b.iter(|| kmeans(black_box(data), &KMeansConfig::new(4, 9)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_delta, bench_homogeneity, bench_mean, bench_kmeans);
criterion_main!(benches);
