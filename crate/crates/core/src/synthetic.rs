//! Synthetic dataset generators used by tests, benchmarks and the CLI.

use crate::error::{Error, Result};
use crate::geometry::Dataset;
use crate::rng::RngStream;

const STREAM_CENTERS: u64 = 100;
const STREAM_POINTS: u64 = 101;
const STREAM_UNIFORM: u64 = 102;

/// Isotropic Gaussian blobs with per-cluster sizes, around centers whose
/// pairwise distances are at least `separation`. Returns the dataset and the
/// generating cluster label of every point.
pub fn gaussian_blobs_sized(
    sizes: &[usize],
    d: usize,
    spread: f64,
    separation: f64,
    seed: u64,
) -> Result<(Dataset, Vec<u32>)> {
    if d == 0 {
        return Err(Error::InvalidDimension);
    }
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::GenerationFailed(
            "every cluster needs at least one point".into(),
        ));
    }
    let valid = |x: f64| x.is_finite() && x >= 0.0;
    if !valid(spread) || !valid(separation) {
        return Err(Error::GenerationFailed(
            "spread and separation must be non-negative".into(),
        ));
    }
    let k = sizes.len();
    let centers = draw_centers(k, d, separation, seed)?;
    let mut rng = RngStream::new(seed, &[STREAM_POINTS]);
    let mut rows = Vec::with_capacity(sizes.iter().sum());
    let mut labels = Vec::with_capacity(rows.capacity());
    for (c, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            let row: Vec<f64> = centers[c]
                .iter()
                .map(|&x| x + spread * rng.standard_normal())
                .collect();
            rows.push(row);
            labels.push(c as u32);
        }
    }
    Ok((Dataset::from_rows(rows)?, labels))
}

/// Equal-sized Gaussian blobs; see [`gaussian_blobs_sized`].
pub fn gaussian_blobs(
    n_clusters: usize,
    points_per_cluster: usize,
    d: usize,
    spread: f64,
    separation: f64,
    seed: u64,
) -> Result<(Dataset, Vec<u32>)> {
    gaussian_blobs_sized(
        &vec![points_per_cluster; n_clusters],
        d,
        spread,
        separation,
        seed,
    )
}

/// Splits `total` points into `clusters` sizes differing by at most one.
pub fn blob_sizes(total: usize, clusters: usize) -> Vec<usize> {
    let clusters = clusters.max(1);
    let base = total / clusters;
    let extra = total % clusters;
    (0..clusters)
        .map(|c| base + usize::from(c < extra))
        .filter(|&s| s > 0)
        .collect()
}

fn draw_centers(k: usize, d: usize, separation: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = RngStream::new(seed, &[STREAM_CENTERS]);
    let side = (separation * (k.max(4) as f64)).max(1.0);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut attempts = 0usize;
    let budget = 200 * k.max(1);
    while centers.len() < k {
        if attempts >= budget {
            return Err(Error::GenerationFailed(format!(
                "could not place {k} centers with pairwise separation {separation} \
                 after {budget} attempts"
            )));
        }
        attempts += 1;
        let cand: Vec<f64> = (0..d).map(|_| rng.unit_f64() * side).collect();
        let ok = centers.iter().all(|c| {
            let dist_sq: f64 = c
                .iter()
                .zip(&cand)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dist_sq >= separation * separation
        });
        if ok {
            centers.push(cand);
        }
    }
    Ok(centers)
}

/// `n` points uniform in the cube `[0, side)^d`.
pub fn uniform_points(n: usize, d: usize, side: f64, seed: u64) -> Result<Dataset> {
    if d == 0 {
        return Err(Error::InvalidDimension);
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut rng = RngStream::new(seed, &[STREAM_UNIFORM]);
    let rows = (0..n)
        .map(|_| (0..d).map(|_| rng.unit_f64() * side).collect())
        .collect();
    Dataset::from_rows(rows)
}
