//! Benchmarks for the data-parallel stages and the engines.
//!
//! Built with the default `parallel` feature, every group benches the rayon
//! path on the ambient pool plus the same code pinned to a single-thread
//! pool. Building with `--no-default-features` benches the sequential
//! fallback under the same ids, so `cargo bench` vs
//! `cargo bench --no-default-features` compare directly through criterion's
//! saved baselines.

use criterion::{criterion_group, criterion_main, Criterion};

use rphc_core::oracle::{brute_slc, FullDistanceMatrix};
use rphc_core::partition::{perturb_multi_partition, PartitionConfig};
use rphc_core::slc::{rp_slc, rp_slc_parameter_free, DEFAULT_FREQUENCY_THRESHOLD};
use rphc_core::synthetic::gaussian_blobs_sized;
use rphc_core::{eval, Dataset};

fn fixed_size_blobs(n: usize, d: usize, seed: u64) -> Dataset {
    gaussian_blobs_sized(&vec![32; n / 32], d, 1.0, 25.0, seed)
        .unwrap()
        .0
}

fn fixed_cfg(n: usize, seed: u64) -> PartitionConfig {
    PartitionConfig {
        min_pts: 14,
        rounds: PartitionConfig::rounds_for(n, 20.0),
        lines_per_round: PartitionConfig::lines_for(n),
        l_per: 0.0,
        master_seed: seed,
    }
}

fn bench_partitioning(c: &mut Criterion) {
    let ds = fixed_size_blobs(2048, 32, 1);
    let cfg = fixed_cfg(2048, 1);
    let mut group = c.benchmark_group("perturb_multi_partition/n2048_d32");
    group.sample_size(10);
    #[cfg(feature = "parallel")]
    {
        group.bench_function("rayon", |b| {
            b.iter(|| perturb_multi_partition(&ds, &cfg).unwrap())
        });
        group.bench_function("one_thread", |b| {
            b.iter(|| {
                rphc_core::exec::with_threads(1, || perturb_multi_partition(&ds, &cfg).unwrap())
            })
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| {
        b.iter(|| perturb_multi_partition(&ds, &cfg).unwrap())
    });
    group.finish();
}

fn bench_single_linkage(c: &mut Criterion) {
    let n = 1024;
    let ds = fixed_size_blobs(n, 32, 2);
    let cfg = fixed_cfg(n, 2);
    let mut group = c.benchmark_group("single_linkage/n1024_d32");
    group.sample_size(10);
    group.bench_function("rp_fixed", |b| b.iter(|| rp_slc(&ds, &cfg).unwrap()));
    group.bench_function("rp_parameter_free", |b| {
        let start = PartitionConfig::parameter_free_start(n, 2);
        b.iter(|| rp_slc_parameter_free(&ds, &start, DEFAULT_FREQUENCY_THRESHOLD).unwrap())
    });
    group.bench_function("exact_baseline", |b| b.iter(|| brute_slc(&ds)));
    group.finish();
}

fn bench_distance_matrix(c: &mut Criterion) {
    let ds = fixed_size_blobs(2048, 32, 3);
    let mut group = c.benchmark_group("full_distance_matrix/n2048_d32");
    group.sample_size(10);
    #[cfg(feature = "parallel")]
    {
        group.bench_function("rayon", |b| {
            b.iter(|| FullDistanceMatrix::compute(&ds, false))
        });
        group.bench_function("one_thread", |b| {
            b.iter(|| {
                rphc_core::exec::with_threads(1, || FullDistanceMatrix::compute(&ds, false))
            })
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| {
        b.iter(|| FullDistanceMatrix::compute(&ds, false))
    });
    group.finish();
}

fn bench_preservation(c: &mut Criterion) {
    let ds = fixed_size_blobs(512, 16, 4);
    let a = brute_slc(&ds);
    let b_hc = rphc_core::oracle::brute_alc(&ds);
    let mut group = c.benchmark_group("preservation/n512");
    group.sample_size(10);
    #[cfg(feature = "parallel")]
    {
        group.bench_function("rayon", |bch| {
            bch.iter(|| eval::preservation(&a, &b_hc).unwrap())
        });
        group.bench_function("one_thread", |bch| {
            bch.iter(|| {
                rphc_core::exec::with_threads(1, || eval::preservation(&a, &b_hc).unwrap())
            })
        });
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |bch| {
        bch.iter(|| eval::preservation(&a, &b_hc).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_partitioning,
    bench_single_linkage,
    bench_distance_matrix,
    bench_preservation
);
criterion_main!(benches);
