//! Dendrogram evaluation: cutting to flat labels, preservation scoring via
//! per-level Fowlkes-Mallows agreement, and the neighborhood / projection
//! diagnostics behind the adaptive work analysis.

use std::collections::HashMap;

use crate::dendrogram::{require_complete, MergeSequence};
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{dot, sample_unit_vector, Dataset};
use crate::rng::RngStream;

/// Flat cluster labels obtained by cutting a dendrogram at `k` clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct CutLabels {
    pub k: usize,
    /// Per point: cluster index in `0..k`, numbered by first occurrence.
    pub labels: Vec<u32>,
}

/// Labels induced by applying the first `n - k` merges.
pub fn cut(hc: &MergeSequence, k: usize) -> Result<CutLabels> {
    require_complete(hc)?;
    let n = hc.point_count();
    if k < 1 || k > n {
        return Err(Error::CutLevelOutOfRange { k, n });
    }
    let mut uf = hc.replay(n - k);
    let mut remap: HashMap<u32, u32> = HashMap::with_capacity(k);
    let mut labels = Vec::with_capacity(n);
    for p in 0..n as u32 {
        let root = uf.find(p);
        let next = remap.len() as u32;
        labels.push(*remap.entry(root).or_insert(next));
    }
    debug_assert_eq!(remap.len(), k);
    Ok(CutLabels { k, labels })
}

/// Per-level agreement between two dendrograms and its average.
#[derive(Debug, Clone, PartialEq)]
pub struct PreservationScore {
    /// Fowlkes-Mallows index at each level `k = 2..=n-1`.
    pub per_level: Vec<f64>,
    /// Arithmetic mean of the per-level scores (1.0 when no levels exist).
    pub average: f64,
}

/// Fowlkes-Mallows index of two flat labelings, from their confusion matrix.
pub fn fowlkes_mallows(x: &CutLabels, y: &CutLabels) -> Result<f64> {
    if x.labels.len() != y.labels.len() {
        return Err(Error::PointCountMismatch {
            left: x.labels.len(),
            right: y.labels.len(),
        });
    }
    let n = x.labels.len() as u64;
    let mut cells: HashMap<(u32, u32), u64> = HashMap::new();
    let mut rows: HashMap<u32, u64> = HashMap::new();
    let mut cols: HashMap<u32, u64> = HashMap::new();
    for (&a, &b) in x.labels.iter().zip(&y.labels) {
        *cells.entry((a, b)).or_insert(0) += 1;
        *rows.entry(a).or_insert(0) += 1;
        *cols.entry(b).or_insert(0) += 1;
    }
    let sq = |m: &HashMap<u32, u64>| m.values().map(|&v| v * v).sum::<u64>();
    let tk = cells.values().map(|&v| v * v).sum::<u64>() - n;
    let pk = sq(&rows) - n;
    let qk = sq(&cols) - n;
    if pk == 0 || qk == 0 {
        // One side is all singletons; agreement is only exact if both are.
        return Ok(if pk == qk { 1.0 } else { 0.0 });
    }
    Ok(tk as f64 / (pk as f64 * qk as f64).sqrt())
}

/// Averages the Fowlkes-Mallows agreement of the two dendrograms over every
/// cut level `k = 2..=n-1` (the two degenerate levels score 1 by
/// construction and are excluded).
pub fn preservation(a: &MergeSequence, b: &MergeSequence) -> Result<PreservationScore> {
    require_complete(a)?;
    require_complete(b)?;
    if a.point_count() != b.point_count() {
        return Err(Error::PointCountMismatch {
            left: a.point_count(),
            right: b.point_count(),
        });
    }
    let n = a.point_count();
    if n < 3 {
        return Ok(PreservationScore {
            per_level: Vec::new(),
            average: 1.0,
        });
    }
    let levels: Vec<Result<f64>> = exec::map_indexed(n - 2, |i| {
        let k = i + 2;
        fowlkes_mallows(&cut(a, k)?, &cut(b, k)?)
    });
    let mut per_level = Vec::with_capacity(levels.len());
    for level in levels {
        per_level.push(level?);
    }
    let average = per_level.iter().sum::<f64>() / per_level.len() as f64;
    Ok(PreservationScore { per_level, average })
}

/// Neighborhood sizes behind the adaptive work analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSizes {
    /// Per point: how many points (itself included) lie within `scale`
    /// times its longest adjacent merge edge.
    pub per_point: Vec<usize>,
    /// The maximum over all points.
    pub max: usize,
}

/// For each point, counts the points within `scale` times the longest
/// dendrogram edge adjacent to it.
pub fn linkage_ball_sizes(ds: &Dataset, hc: &MergeSequence, scale: f64) -> Result<BallSizes> {
    require_complete(hc)?;
    if hc.point_count() != ds.len() {
        return Err(Error::PointCountMismatch {
            left: hc.point_count(),
            right: ds.len(),
        });
    }
    if !scale.is_finite() || scale < 0.0 {
        return Err(Error::InvalidLength(scale));
    }
    let n = ds.len();
    let mut longest_edge = vec![0.0f64; n];
    for m in hc.merges() {
        longest_edge[m.a as usize] = longest_edge[m.a as usize].max(m.distance);
        longest_edge[m.b as usize] = longest_edge[m.b as usize].max(m.distance);
    }
    let per_point = exec::map_indexed(n, |p| {
        let radius = scale * longest_edge[p];
        (0..n).filter(|&q| ds.distance(p, q) <= radius).count()
    });
    let max = per_point.iter().copied().max().unwrap_or(0);
    Ok(BallSizes { per_point, max })
}

/// Hypothesis bound for [`projection_between_frequency`]: the gap must not
/// exceed `2 sin(1)` times the distance from either endpoint to the third
/// point.
pub fn projection_hypothesis_holds(p: &[f64], r: &[f64], t: &[f64]) -> bool {
    let d_pt = euclid(p, t);
    let d_pr = euclid(p, r);
    let d_tr = euclid(t, r);
    d_pt <= 2.0 * 1.0f64.sin() * d_pr.min(d_tr)
}

/// The analytic bound `D(P,T) / (pi * D(P,R))` checked by the Monte-Carlo
/// harness.
pub fn projection_between_bound(p: &[f64], r: &[f64], t: &[f64]) -> f64 {
    euclid(p, t) / (std::f64::consts::PI * euclid(p, r))
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Samples `trials` random lines and returns the frequency with which the
/// projection of `r` falls (weakly) between the projections of `p` and `t`.
///
/// Requires the hypothesis of [`projection_hypothesis_holds`]; the exact
/// probability is the angle subtended at `r` divided by pi.
pub fn projection_between_frequency(
    p: &[f64],
    r: &[f64],
    t: &[f64],
    trials: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    let d = p.len();
    if d == 0 {
        return Err(Error::InvalidDimension);
    }
    if r.len() != d || t.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: r.len().max(t.len()),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    if !projection_hypothesis_holds(p, r, t) {
        return Err(Error::HypothesisViolated(format!(
            "D(P,T) = {} exceeds 2 sin(1) * min(D(P,R), D(T,R)) = {}",
            euclid(p, t),
            2.0 * 1.0f64.sin() * euclid(p, r).min(euclid(t, r))
        )));
    }
    let mut hits = 0u64;
    for _ in 0..trials {
        let line = sample_unit_vector(d, rng)?;
        let lp = dot(p, line.direction());
        let lr = dot(r, line.direction());
        let lt = dot(t, line.direction());
        if (lp <= lr && lr <= lt) || (lp >= lr && lr >= lt) {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}
