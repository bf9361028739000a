//! Data-parallel core against the sequential fallback.
//!
//! With the default `parallel` feature the same workload is timed on a
//! one-thread pool and on the default pool; building with
//! `--no-default-features` times the rayon-free code path.

use criterion::{criterion_group, criterion_main, Criterion};
use shardlat::elements::CoxType;
use shardlat::lattice::shard_poset;
use shardlat::shelling::Shelling;

fn bench_poset_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("shard_poset_A6");
    group.sample_size(10);
    group.bench_function("jobs=1", |b| {
        b.iter(|| shardlat::run_with_jobs(Some(1), || shard_poset(CoxType::A, 6).unwrap().len()))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("jobs=default", |b| {
        b.iter(|| shardlat::run_with_jobs(None, || shard_poset(CoxType::A, 6).unwrap().len()))
    });
    group.finish();
}

fn bench_el_verification(c: &mut Criterion) {
    let poset = shard_poset(CoxType::B, 3).unwrap();
    let mut group = c.benchmark_group("verify_el_B3");
    group.sample_size(10);
    group.bench_function("jobs=1", |b| {
        b.iter(|| {
            shardlat::run_with_jobs(Some(1), || {
                Shelling::new(&poset).unwrap().verify().intervals
            })
        })
    });
    #[cfg(feature = "parallel")]
    group.bench_function("jobs=default", |b| {
        b.iter(|| {
            shardlat::run_with_jobs(None, || Shelling::new(&poset).unwrap().verify().intervals)
        })
    });
    group.finish();
}

criterion_group!(benches, bench_poset_build, bench_el_verification);
criterion_main!(benches);
