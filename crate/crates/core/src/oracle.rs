//! Exact quadratic-time baselines used as ground truth and as the runtime
//! comparison point for the randomized engines.
//!
//! `brute_slc` is Kruskal's scan over the fully sorted pairwise distance
//! list. `brute_alc` iteratively merges the cluster pair with minimum average
//! squared inter-cluster distance, recomputing every centroid and variance
//! from explicit member lists so that it shares no state-update code with the
//! incremental engine it is checking.

use crate::dendrogram::{MergeRecorder, MergeSequence};
use crate::exec;
use crate::geometry::Dataset;

/// Symmetric pairwise distance matrix (condensed upper-triangle storage).
#[derive(Debug, Clone)]
pub struct FullDistanceMatrix {
    n: usize,
    squared: bool,
    data: Vec<f64>,
}

impl FullDistanceMatrix {
    /// Computes all `n(n-1)/2` pairwise distances (squared when `squared`).
    pub fn compute(ds: &Dataset, squared: bool) -> Self {
        let n = ds.len();
        let rows = exec::map_indexed(n, |i| {
            ((i + 1)..n)
                .map(|j| {
                    if squared {
                        ds.distance_sq(i, j)
                    } else {
                        ds.distance(i, j)
                    }
                })
                .collect::<Vec<f64>>()
        });
        let mut data = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
        for row in rows {
            data.extend(row);
        }
        Self { n, squared, data }
    }

    #[inline]
    fn condensed(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Distance between points `i` and `j` (zero on the diagonal).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.data[self.condensed(i, j)],
            std::cmp::Ordering::Greater => self.data[self.condensed(j, i)],
        }
    }

    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn is_squared(&self) -> bool {
        self.squared
    }

    /// Number of distance evaluations performed (`n(n-1)/2`).
    pub fn distance_computations(&self) -> u64 {
        self.data.len() as u64
    }
}

/// Exact single-linkage merge sequence: Kruskal's scan over all pairs sorted
/// ascending, ties broken by lexicographic id pair.
pub fn brute_slc(ds: &Dataset) -> MergeSequence {
    let n = ds.len();
    let matrix = FullDistanceMatrix::compute(ds, false);
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(matrix.data.len());
    for i in 0..n as u32 {
        for j in (i + 1)..n as u32 {
            pairs.push((i, j));
        }
    }
    let mut order: Vec<u32> = (0..pairs.len() as u32).collect();
    order.sort_unstable_by(|&x, &y| {
        matrix.data[x as usize]
            .total_cmp(&matrix.data[y as usize])
            .then_with(|| pairs[x as usize].cmp(&pairs[y as usize]))
    });
    let mut rec = MergeRecorder::new(n);
    for &idx in &order {
        if rec.clusters() == 1 {
            break;
        }
        let (a, b) = pairs[idx as usize];
        rec.merge(a, b, matrix.data[idx as usize]);
    }
    rec.finish()
}

fn direct_stats(ds: &Dataset, members: &[u32]) -> (Vec<f64>, f64) {
    let d = ds.dim();
    let mut centroid = vec![0.0; d];
    for &m in members {
        for (c, x) in centroid.iter_mut().zip(ds.coords(m as usize)) {
            *c += x;
        }
    }
    let inv = 1.0 / members.len() as f64;
    for c in centroid.iter_mut() {
        *c *= inv;
    }
    let mut variance = 0.0;
    for &m in members {
        let p = ds.coords(m as usize);
        let mut acc = 0.0;
        for i in 0..d {
            let diff = p[i] - centroid[i];
            acc += diff * diff;
        }
        variance += acc;
    }
    (centroid, variance * inv)
}

#[inline]
fn centroid_distance_sq(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        let diff = a[i] - b[i];
        acc += diff * diff;
    }
    acc
}

/// Exact average-linkage merge sequence on the squared-distance scale.
///
/// Every merge recomputes the new cluster's centroid and variance directly
/// from its member list; the average inter-cluster distance is the squared
/// centroid distance plus both variances. Merge events carry the smallest
/// original point id of each merging cluster.
pub fn brute_alc(ds: &Dataset) -> MergeSequence {
    let n = ds.len();
    let mut rec = MergeRecorder::new(n);
    if n < 2 {
        return rec.finish();
    }
    let mut members: Vec<Vec<u32>> = (0..n as u32).map(|i| vec![i]).collect();
    let mut centroid: Vec<Vec<f64>> = (0..n).map(|i| ds.coords(i).to_vec()).collect();
    let mut variance: Vec<f64> = vec![0.0; n];
    let mut min_id: Vec<u32> = (0..n as u32).collect();
    let mut alive: Vec<bool> = vec![true; n];

    // Slot-to-slot ALC distances, row-major full matrix.
    let mut dist: Vec<f64> = {
        let rows = exec::map_indexed(n, |i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { ds.distance_sq(i, j) })
                .collect::<Vec<f64>>()
        });
        rows.concat()
    };

    // Tie-break on the lexicographic pair of cluster min ids.
    let pair_key = |min_id: &[u32], i: usize, j: usize| -> (u32, u32) {
        let (a, b) = (min_id[i], min_id[j]);
        (a.min(b), a.max(b))
    };

    let recompute_row_min = |dist: &[f64],
                             alive: &[bool],
                             min_id: &[u32],
                             i: usize|
     -> Option<(f64, u32)> {
        let mut best: Option<(f64, (u32, u32), u32)> = None;
        for j in 0..n {
            if j == i || !alive[j] {
                continue;
            }
            let d = dist[i * n + j];
            let key = pair_key(min_id, i, j);
            match &best {
                Some((bd, bk, _)) if (d, key) >= (*bd, *bk) => {}
                _ => best = Some((d, key, j as u32)),
            }
        }
        best.map(|(d, _, j)| (d, j))
    };

    let mut row_min: Vec<Option<(f64, u32)>> = (0..n)
        .map(|i| recompute_row_min(&dist, &alive, &min_id, i))
        .collect();

    for _ in 0..n - 1 {
        // Global minimum over cached row minima.
        let mut best: Option<(f64, (u32, u32), usize, usize)> = None;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            if let Some((d, j)) = row_min[i] {
                let key = pair_key(&min_id, i, j as usize);
                match &best {
                    Some((bd, bk, _, _)) if (d, key) >= (*bd, *bk) => {}
                    _ => best = Some((d, key, i, j as usize)),
                }
            }
        }
        let (d, _, i, j) = best.expect("at least two clusters remain");
        let (keep, drop) = (i.min(j), i.max(j));
        let (ida, idb) = (min_id[keep].min(min_id[drop]), min_id[keep].max(min_id[drop]));
        rec.merge(ida, idb, d);

        let moved = std::mem::take(&mut members[drop]);
        members[keep].extend(moved);
        let (c, v) = direct_stats(ds, &members[keep]);
        centroid[keep] = c;
        variance[keep] = v;
        min_id[keep] = ida;
        alive[drop] = false;

        for l in 0..n {
            if !alive[l] || l == keep {
                continue;
            }
            let dl = centroid_distance_sq(&centroid[l], &centroid[keep])
                + variance[l]
                + variance[keep];
            dist[l * n + keep] = dl;
            dist[keep * n + l] = dl;
            match row_min[l] {
                Some((cur, partner)) => {
                    let partner = partner as usize;
                    if partner == keep || partner == drop {
                        row_min[l] = recompute_row_min(&dist, &alive, &min_id, l);
                    } else {
                        let key_new = pair_key(&min_id, l, keep);
                        let key_cur = pair_key(&min_id, l, partner);
                        if (dl, key_new) < (cur, key_cur) {
                            row_min[l] = Some((dl, keep as u32));
                        }
                    }
                }
                None => row_min[l] = recompute_row_min(&dist, &alive, &min_id, l),
            }
        }
        row_min[keep] = recompute_row_min(&dist, &alive, &min_id, keep);
    }
    rec.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{gaussian_blobs, uniform_points};
    use approx::assert_relative_eq;

    /// Independent Prim implementation: total MST weight only.
    fn prim_total_weight(ds: &Dataset) -> f64 {
        let n = ds.len();
        let mut in_tree = vec![false; n];
        let mut best = vec![f64::INFINITY; n];
        best[0] = 0.0;
        let mut total = 0.0;
        for _ in 0..n {
            let mut u = usize::MAX;
            for v in 0..n {
                if !in_tree[v] && (u == usize::MAX || best[v] < best[u]) {
                    u = v;
                }
            }
            in_tree[u] = true;
            total += best[u];
            for v in 0..n {
                if !in_tree[v] {
                    let d = ds.distance(u, v);
                    if d < best[v] {
                        best[v] = d;
                    }
                }
            }
        }
        total
    }

    #[test]
    fn matrix_is_symmetric_with_zero_diagonal() {
        let ds = uniform_points(20, 3, 1.0, 4).unwrap();
        let m = FullDistanceMatrix::compute(&ds, false);
        assert_eq!(m.distance_computations(), 190);
        for i in 0..20 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..20 {
                assert_eq!(m.get(i, j), m.get(j, i));
                assert!(m.get(i, j) >= 0.0);
            }
        }
    }

    #[test]
    fn slc_two_points() {
        let ds = Dataset::from_rows(vec![vec![0.0], vec![3.0]]).unwrap();
        let hc = brute_slc(&ds);
        assert!(hc.is_complete());
        assert_eq!(hc.merges().len(), 1);
        assert_eq!(hc.merges()[0].distance, 3.0);
    }

    #[test]
    fn slc_line_with_outlier_merges_nested_pairs_first() {
        let ds =
            Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0], vec![100.0]])
                .unwrap();
        let hc = brute_slc(&ds);
        let dists: Vec<f64> = hc.distances().collect();
        assert_eq!(dists, vec![1.0, 1.0, 9.0, 89.0]);
    }

    #[test]
    fn slc_merge_distances_are_non_decreasing() {
        let ds = uniform_points(64, 4, 1.0, 9).unwrap();
        let hc = brute_slc(&ds);
        assert!(hc.is_complete());
        let d: Vec<f64> = hc.distances().collect();
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn slc_total_weight_matches_independent_prim() {
        for seed in 0..200u64 {
            let n = 5 + (seed as usize % 40);
            let ds = uniform_points(n, 1 + seed as usize % 6, 1.0, seed).unwrap();
            let hc = brute_slc(&ds);
            let kruskal_total: f64 = hc.distances().sum();
            assert_relative_eq!(
                kruskal_total,
                prim_total_weight(&ds),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn slc_is_invariant_to_point_order() {
        let (ds, _) = gaussian_blobs(3, 10, 4, 1.0, 20.0, 2).unwrap();
        let reversed =
            Dataset::from_rows((0..ds.len()).rev().map(|i| ds.coords(i).to_vec()).collect())
                .unwrap();
        let a: Vec<f64> = brute_slc(&ds).distances().collect();
        let b: Vec<f64> = brute_slc(&reversed).distances().collect();
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
    }

    #[test]
    fn alc_two_points_merges_at_squared_distance() {
        let ds = Dataset::from_rows(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let hc = brute_alc(&ds);
        assert_eq!(hc.merges().len(), 1);
        assert_eq!(hc.merges()[0].distance, 25.0);
    }

    #[test]
    fn alc_three_collinear_points() {
        // Points 0, 1, 5: first {0,1} at 1.0, then the pair mean
        // ((5-0)^2 + (5-1)^2)/2 = 20.5.
        let ds = Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![5.0]]).unwrap();
        let hc = brute_alc(&ds);
        let d: Vec<f64> = hc.distances().collect();
        assert_eq!(d.len(), 2);
        assert_eq!(d[0], 1.0);
        assert_relative_eq!(d[1], 20.5, max_relative = 1e-12);
        assert_eq!((hc.merges()[0].a, hc.merges()[0].b), (0, 1));
        assert_eq!((hc.merges()[1].a, hc.merges()[1].b), (0, 2));
    }

    #[test]
    fn alc_first_merge_is_global_minimum_squared_distance() {
        for seed in 0..20u64 {
            let ds = uniform_points(30, 3, 1.0, seed).unwrap();
            let hc = brute_alc(&ds);
            let mut global_min = f64::INFINITY;
            for i in 0..30 {
                for j in (i + 1)..30 {
                    global_min = global_min.min(ds.distance_sq(i, j));
                }
            }
            assert_eq!(hc.merges()[0].distance, global_min);
        }
    }

    #[test]
    fn alc_heights_match_naive_double_sum() {
        // The first few merges of small instances, checked against the
        // mean of all squared inter-cluster pairwise distances computed
        // from scratch with explicit membership tracking.
        for seed in 0..10u64 {
            let ds = uniform_points(12, 2, 1.0, seed + 50).unwrap();
            let hc = brute_alc(&ds);
            let mut clusters: Vec<Vec<usize>> = (0..12).map(|i| vec![i]).collect();
            for m in hc.merges() {
                let ia = clusters
                    .iter()
                    .position(|c| c.contains(&(m.a as usize)))
                    .unwrap();
                let ib = clusters
                    .iter()
                    .position(|c| c.contains(&(m.b as usize)))
                    .unwrap();
                assert_ne!(ia, ib);
                let mut sum = 0.0;
                for &p in &clusters[ia] {
                    for &q in &clusters[ib] {
                        sum += ds.distance_sq(p, q);
                    }
                }
                let naive = sum / (clusters[ia].len() * clusters[ib].len()) as f64;
                assert_relative_eq!(m.distance, naive, max_relative = 1e-9);
                let moved = clusters.remove(ia.max(ib));
                clusters[ia.min(ib)].extend(moved);
            }
        }
    }
}
