use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use almab_bench::{response, unit_square_points};
use almab_core::acquisition::{select_batch_pooled, AcquisitionSpec, BatchSpec};
use almab_core::bandit::{run_bernoulli_bandit, BanditPolicy, DelaySpec};
use almab_core::benchmarks::{CaseId, DesignStrategy};
use almab_core::harness::{run_replicate, ExperimentConfig};
use almab_core::surrogate::{GpDataset, GpPosterior, KernelSpec, PooledPosterior};

fn dataset(n: usize) -> GpDataset {
    let pts = unit_square_points(n, 7);
    let ys = pts.iter().map(|p| response(p)).collect();
    GpDataset::new(pts, ys, 0.1).unwrap()
}

fn gp(c: &mut Criterion) {
    let kernel = KernelSpec::matern32(0.35, 1.0).unwrap();
    let mut g = c.benchmark_group("gp");
    for n in [10, 30, 60] {
        let data = dataset(n);
        g.bench_with_input(BenchmarkId::new("fit", n), &data, |b, d| {
            b.iter(|| GpPosterior::fit(d.clone(), kernel, 0.0).unwrap())
        });
        let post = GpPosterior::fit(data, kernel, 0.0).unwrap();
        g.bench_with_input(BenchmarkId::new("predict", n), &post, |b, p| {
            b.iter(|| p.predict(black_box(&[0.4, 0.6])).unwrap())
        });
    }
    g.finish();
}

fn pool(c: &mut Criterion) {
    let kernel = KernelSpec::matern32(0.35, 1.0).unwrap();
    let post = GpPosterior::fit(dataset(20), kernel, 0.0).unwrap();
    let cands = unit_square_points(64, 11);
    let base = PooledPosterior::new(post, cands).unwrap();
    c.bench_function("pool/observe", |b| {
        b.iter_batched(|| base.clone(), |mut p| p.observe(5, 0.3).unwrap(), criterion::BatchSize::SmallInput)
    });
    let acq = AcquisitionSpec::ucb(2.0);
    c.bench_function("pool/batch8", |b| {
        b.iter_batched(
            || base.clone(),
            |mut p| select_batch_pooled(&mut p, &acq, &BatchSpec::new(8), 0.0).unwrap(),
            criterion::BatchSize::SmallInput,
        )
    });
}

fn bandit(c: &mut Criterion) {
    let means = [0.9, 0.7, 0.5, 0.3, 0.1];
    c.bench_function("bandit/ucb1_t1000", |b| {
        b.iter(|| run_bernoulli_bandit(&means, 1000, BanditPolicy::Ucb1 { c: 2.0 }, &DelaySpec::NONE, 3).unwrap())
    });
}

fn replicate(c: &mut Criterion) {
    let mut g = c.benchmark_group("replicate");
    g.sample_size(20);
    for (case, k) in [(CaseId::Case4, 1), (CaseId::Case4, 4), (CaseId::Case5, 1)] {
        let cfg = ExperimentConfig::new(case, vec![DesignStrategy::AlmabUcb], vec![k]);
        g.bench_function(format!("{}_k{k}", case.name()), |b| {
            b.iter(|| run_replicate(&cfg, DesignStrategy::AlmabUcb, k, 0).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, gp, pool, bandit, replicate);
criterion_main!(benches);
