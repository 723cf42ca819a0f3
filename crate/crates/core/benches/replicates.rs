//! Parallel vs sequential replicate sampling and gamma estimation.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use poisson_stein::exec;
use poisson_stein::functionals::registry::FunctionalConfig;
use poisson_stein::point_process::{MarkMeasure, Window};
use poisson_stein::stein_bounds::{estimate_gammas, GammaPlan};
use poisson_stein::variance::{sample_values, Standardization};
use poisson_stein::RngStream;

fn knn_member(t: f64) -> (poisson_stein::functionals::FunctionalSpec, poisson_stein::point_process::IntensityModel) {
    let cfg = FunctionalConfig::Knn {
        k: 1,
        alpha: 1.0,
        scale_exponent: None,
    };
    cfg.build(t, &Window::unit(2).unwrap(), &MarkMeasure::None).unwrap()
}

fn modes() -> [(&'static str, bool); 2] {
    [("sequential", true), ("parallel", false)]
}

fn sample_knn(c: &mut Criterion) {
    let (f, model) = knn_member(200.0);
    let mut group = c.benchmark_group("knn_replicates");
    group.sample_size(10);
    for (name, sequential) in modes() {
        group.bench_function(BenchmarkId::new(name, 500), |b| {
            exec::set_sequential(sequential);
            b.iter(|| sample_values(&f, &model, 500, &RngStream::new(1, 0)).unwrap());
        });
    }
    exec::set_sequential(false);
    group.finish();
}

fn gammas_knn(c: &mut Criterion) {
    let (f, model) = knn_member(50.0);
    let std = Standardization::pilot(&f, &model, 500, &RngStream::new(2, 0)).unwrap();
    let mut group = c.benchmark_group("knn_gammas");
    group.sample_size(10);
    for (name, sequential) in modes() {
        group.bench_function(BenchmarkId::new(name, "40x8"), |b| {
            exec::set_sequential(sequential);
            b.iter(|| estimate_gammas(&f, &model, &std, &GammaPlan::new(40, 8, RngStream::new(3, 0))).unwrap());
        });
    }
    exec::set_sequential(false);
    group.finish();
}

criterion_group!(benches, sample_knn, gammas_knn);
criterion_main!(benches);
