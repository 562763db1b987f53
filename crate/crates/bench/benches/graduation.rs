use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, Criterion};
use gradkit::{
    cv_statistic, factors_for, graduate, read_table, select_bandwidth, smoother_matrix, BandwidthMode,
    BandwidthSpec, CvConfig, MortalityTable, ResidualKind,
};

fn table() -> MortalityTable {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic_male.csv");
    read_table(path, Some(85)).unwrap()
}

fn kernels(c: &mut Criterion) {
    let per_age = vec![0.001; 86];
    c.bench_function("smoother_matrix omega=85", |b| {
        b.iter(|| smoother_matrix(black_box(&per_age), 85).unwrap())
    });
    let wide = vec![0.001; 501];
    c.bench_function("smoother_matrix omega=500", |b| {
        b.iter(|| smoother_matrix(black_box(&wide), 500).unwrap())
    });
}

fn cross_validation(c: &mut Criterion) {
    let t = table();
    let fx = BandwidthSpec::fixed(0.0004, 85).unwrap();
    let vc = BandwidthSpec::adaptive(
        0.001,
        0.3,
        &factors_for(&t, BandwidthMode::VariationCoefficient)
            .unwrap()
            .unwrap(),
    )
    .unwrap();
    c.bench_function("cv_statistic FX propres", |b| {
        b.iter(|| cv_statistic(&t, black_box(&fx), false, ResidualKind::Proportional).unwrap())
    });
    c.bench_function("cv_statistic VC logit", |b| {
        b.iter(|| cv_statistic(&t, black_box(&vc), true, ResidualKind::Proportional).unwrap())
    });
    c.bench_function("graduate VC logit + CI", |b| {
        b.iter(|| {
            graduate(&t, black_box(&vc), true)
                .unwrap()
                .with_confidence_intervals(&t, 0.05)
                .unwrap()
        })
    });

    let mut group = c.benchmark_group("select_bandwidth");
    group.sample_size(20);
    group.bench_function("FX propres", |b| {
        b.iter(|| select_bandwidth(&t, BandwidthMode::Fixed, false, &CvConfig::default(), None).unwrap())
    });
    let joint = CvConfig {
        optimize_s: true,
        ..CvConfig::default()
    };
    group.bench_function("VC logit joint", |b| {
        b.iter(|| select_bandwidth(&t, BandwidthMode::VariationCoefficient, true, &joint, None).unwrap())
    });
    group.finish();
}

criterion_group!(benches, kernels, cross_validation);
criterion_main!(benches);
