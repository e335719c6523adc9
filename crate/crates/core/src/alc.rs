//! Average-linkage clustering on random-projection candidate sets.
//!
//! Cluster distances use the squared scale: the mean of squared inter-cluster
//! pairwise distances equals the squared centroid distance plus both cluster
//! variances, so constant-size statistics `(size, centroid, variance)` replace
//! explicit member lists. After every merge the candidate sets sparsify: the
//! two merged representatives are replaced by the new one in every containing
//! set, and distances from the new cluster to all co-occurring clusters are
//! recomputed.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use crate::dendrogram::{MergeRecorder, MergeSequence};
use crate::error::{Error, Result};
use crate::geometry::Dataset;
use crate::hashing::{pack, PairMap};
use crate::partition::{perturb_multi_partition, PartitionConfig, PartitionFamily};
use crate::rng::derive_seed;
use crate::slc::{ClusteringRun, RunStats};

/// Constant-size cluster summary: member count, centroid, and mean squared
/// distance of members to the centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStats {
    pub size: usize,
    pub centroid: Vec<f64>,
    pub variance: f64,
}

impl ClusterStats {
    /// A one-point cluster: zero variance, centroid at the point.
    pub fn singleton(coords: &[f64]) -> Self {
        Self {
            size: 1,
            centroid: coords.to_vec(),
            variance: 0.0,
        }
    }
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

/// Average-linkage distance: squared centroid distance plus both variances.
/// Equals the mean of squared pairwise inter-cluster distances.
pub fn alc_distance(a: &ClusterStats, b: &ClusterStats) -> Result<f64> {
    if a.centroid.len() != b.centroid.len() {
        return Err(Error::DimensionMismatch {
            expected: a.centroid.len(),
            got: b.centroid.len(),
        });
    }
    Ok(centroid_distance_sq(&a.centroid, &b.centroid) + a.variance + b.variance)
}

/// Incremental statistics of the union of two clusters: size-weighted
/// centroid, and variance
/// `(|A| var_A + |B| var_B + |A||B|/(|A|+|B|) * |mu_A - mu_B|^2) / (|A|+|B|)`.
pub fn merge_stats(a: &ClusterStats, b: &ClusterStats) -> Result<ClusterStats> {
    if a.centroid.len() != b.centroid.len() {
        return Err(Error::DimensionMismatch {
            expected: a.centroid.len(),
            got: b.centroid.len(),
        });
    }
    let (sa, sb) = (a.size as f64, b.size as f64);
    let total = sa + sb;
    let centroid: Vec<f64> = a
        .centroid
        .iter()
        .zip(&b.centroid)
        .map(|(x, y)| (sa * x + sb * y) / total)
        .collect();
    let between = centroid_distance_sq(&a.centroid, &b.centroid);
    let variance = (sa * a.variance + sb * b.variance + sa * sb / total * between) / total;
    Ok(ClusterStats {
        size: a.size + b.size,
        centroid,
        variance,
    })
}

/// Live view of the partition family under cluster merges: each set holds
/// current cluster representatives, with merged pairs substituted by their
/// new representative.
#[derive(Debug, Clone)]
pub struct SparseSetState {
    sets: Vec<Vec<u32>>,
    sets_of: Vec<Vec<u32>>,
}

impl SparseSetState {
    pub fn new(family: &PartitionFamily, n: usize) -> Self {
        let mut sets: Vec<Vec<u32>> = family.sets.clone();
        for set in sets.iter_mut() {
            set.sort_unstable();
        }
        let mut sets_of: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (idx, set) in sets.iter().enumerate() {
            for &p in set {
                sets_of[p as usize].push(idx as u32);
            }
        }
        Self { sets, sets_of }
    }

    /// As [`new`](Self::new), for the degenerate family where every round
    /// holds the whole point set.
    fn full(n: usize, rounds: usize) -> Self {
        let all: Vec<u32> = (0..n as u32).collect();
        Self {
            sets: vec![all; rounds],
            sets_of: vec![(0..rounds as u32).collect(); n],
        }
    }

    pub fn live_sets(&self) -> &[Vec<u32>] {
        &self.sets
    }

    /// Indices of sets containing representative `rep`.
    pub fn sets_containing(&self, rep: u32) -> &[u32] {
        &self.sets_of[rep as usize]
    }

    /// Number of live sets containing both representatives.
    pub fn co_occurrence(&self, a: u32, b: u32) -> u32 {
        let (mut i, mut j, mut count) = (0, 0, 0);
        let (sa, sb) = (&self.sets_of[a as usize], &self.sets_of[b as usize]);
        while i < sa.len() && j < sb.len() {
            match sa[i].cmp(&sb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    /// Substitutes `{dead, root} -> root` in every set containing `dead`.
    pub fn replace(&mut self, dead: u32, root: u32) {
        let dead_sets = std::mem::take(&mut self.sets_of[dead as usize]);
        for &idx in &dead_sets {
            let set = &mut self.sets[idx as usize];
            if let Ok(pos) = set.binary_search(&dead) {
                set.remove(pos);
            }
            if let Err(pos) = set.binary_search(&root) {
                set.insert(pos, root);
            }
        }
        let merged = sorted_union(&self.sets_of[root as usize], &dead_sets);
        self.sets_of[root as usize] = merged;
    }
}

fn sorted_union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[derive(Debug, Clone, Copy)]
struct PairInfo {
    centroid_sq: f64,
    count: u32,
}

#[derive(Debug, PartialEq)]
struct HeapEdge {
    dist: f64,
    ids: (u32, u32),
    a: u32,
    b: u32,
}

impl Eq for HeapEdge {}

impl PartialOrd for HeapEdge {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEdge {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then_with(|| self.ids.cmp(&other.ids))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PassExit {
    Complete,
    ConditionFailed,
    PerturbationStale,
}

const NO_PARTNER: u32 = u32::MAX;

/// Feasibility summary of one live representative, maintained incrementally.
///
/// `wit` is the largest squared centroid distance among the rep's
/// potentially feasible edges (the witness bound). `mf_pf` / `mf_wit` are
/// the smallest full distances over potentially feasible edges and over
/// witness-certified ones; partners record where each value came from so a
/// merge knows when a cached value must be rebuilt.
#[derive(Debug, Clone, Copy)]
struct RepCache {
    wit: f64,
    wit_partner: u32,
    mf_pf: f64,
    mf_pf_partner: u32,
    mf_wit: f64,
    mf_wit_partner: u32,
}

impl Default for RepCache {
    fn default() -> Self {
        Self {
            wit: f64::NEG_INFINITY,
            wit_partner: NO_PARTNER,
            mf_pf: f64::INFINITY,
            mf_pf_partner: NO_PARTNER,
            mf_wit: f64::INFINITY,
            mf_wit_partner: NO_PARTNER,
        }
    }
}

impl RepCache {
    fn references(&self, a: u32, b: u32) -> bool {
        let touches = |p: u32| p == a || p == b;
        touches(self.wit_partner) || touches(self.mf_pf_partner) || touches(self.mf_wit_partner)
    }
}

struct AlcPass {
    threshold: f64,
    state: SparseSetState,
    stats: Vec<ClusterStats>,
    alive: Vec<bool>,
    adj: Vec<BTreeSet<u32>>,
    pairs: PairMap<PairInfo>,
    heap: BinaryHeap<Reverse<HeapEdge>>,
    cache: Vec<RepCache>,
    rec: MergeRecorder,
    distance_computations: u64,
}

impl AlcPass {
    fn new(
        ds: &Dataset,
        state: SparseSetState,
        full_counts: Option<usize>,
        threshold: f64,
    ) -> Self {
        let n = ds.len();
        let mut pass = Self {
            threshold,
            state,
            stats: (0..n).map(|i| ClusterStats::singleton(ds.coords(i))).collect(),
            alive: vec![true; n],
            adj: vec![BTreeSet::new(); n],
            pairs: PairMap::default(),
            heap: BinaryHeap::new(),
            cache: vec![RepCache::default(); n],
            rec: MergeRecorder::new(n),
            distance_computations: 0,
        };
        match full_counts {
            Some(rounds) => {
                // Full pairwise mode: every pair in every round.
                pass.pairs.reserve(n * n.saturating_sub(1) / 2);
                for a in 0..n as u32 {
                    for b in (a + 1)..n as u32 {
                        pass.pairs.insert(
                            pack(a, b),
                            PairInfo {
                                centroid_sq: ds.distance_sq(a as usize, b as usize),
                                count: rounds as u32,
                            },
                        );
                        pass.adj[a as usize].insert(b);
                        pass.adj[b as usize].insert(a);
                        pass.distance_computations += 1;
                    }
                }
            }
            None => {
                for set in pass.state.live_sets() {
                    for (i, &a) in set.iter().enumerate() {
                        for &b in &set[i + 1..] {
                            pass.pairs
                                .entry(pack(a, b))
                                .and_modify(|e| e.count += 1)
                                .or_insert_with(|| {
                                    pass.distance_computations += 1;
                                    pass.adj[a as usize].insert(b);
                                    pass.adj[b as usize].insert(a);
                                    PairInfo {
                                        centroid_sq: ds.distance_sq(a as usize, b as usize),
                                        count: 1,
                                    }
                                });
                        }
                    }
                }
            }
        }
        for (&key, info) in &pass.pairs {
            let (a, b) = crate::hashing::unpack(key);
            pass.heap.push(Reverse(HeapEdge {
                dist: info.centroid_sq,
                ids: (a, b),
                a,
                b,
            }));
        }
        for p in 0..n as u32 {
            pass.recompute_rep(p);
        }
        pass
    }

    #[inline]
    fn d_alc(&self, a: u32, b: u32, info: &PairInfo) -> f64 {
        info.centroid_sq + self.stats[a as usize].variance + self.stats[b as usize].variance
    }

    /// Frequency is judged per endpoint: the pair must appear in more than
    /// `threshold` of the sets containing that endpoint.
    #[inline]
    fn potentially_feasible_for(&self, p: u32, count: u32) -> bool {
        let denom = self.state.sets_containing(p).len();
        denom > 0 && count as f64 / denom as f64 > self.threshold
    }

    /// Full rebuild of one representative's feasibility summary.
    fn recompute_rep(&mut self, p: u32) {
        let mut cache = RepCache::default();
        let var_p = self.stats[p as usize].variance;
        let mut pf_edges: Vec<(f64, f64, u32)> = Vec::new();
        for &q in &self.adj[p as usize] {
            let Some(info) = self.pairs.get(&pack(p, q)) else {
                continue;
            };
            if !self.potentially_feasible_for(p, info.count) {
                continue;
            }
            let d = info.centroid_sq + var_p + self.stats[q as usize].variance;
            pf_edges.push((d, info.centroid_sq, q));
            if info.centroid_sq > cache.wit {
                cache.wit = info.centroid_sq;
                cache.wit_partner = q;
            }
        }
        for &(d, _, q) in &pf_edges {
            if d < cache.mf_pf {
                cache.mf_pf = d;
                cache.mf_pf_partner = q;
            }
            if d <= cache.wit && d < cache.mf_wit {
                cache.mf_wit = d;
                cache.mf_wit_partner = q;
            }
        }
        self.cache[p as usize] = cache;
    }

    /// O(1) cache update for a re-created edge `(q, root)` whose old value
    /// did not define any of `q`'s cached quantities.
    ///
    /// Raising the witness cannot lower `mf_wit` (newly certified edges are
    /// longer than the old witness, hence longer than any previously
    /// certified minimum), except when nothing was certified before; the
    /// caller handles that case with a full rebuild.
    fn apply_fresh_edge(&mut self, q: u32, root: u32, info: PairInfo) {
        if !self.potentially_feasible_for(q, info.count) {
            return;
        }
        let d = self.d_alc(q, root, &info);
        let cache = &mut self.cache[q as usize];
        if info.centroid_sq > cache.wit {
            cache.wit = info.centroid_sq;
            cache.wit_partner = root;
        }
        if d < cache.mf_pf {
            cache.mf_pf = d;
            cache.mf_pf_partner = root;
        }
        if d <= cache.wit && d < cache.mf_wit {
            cache.mf_wit = d;
            cache.mf_wit_partner = root;
        }
    }

    /// Shortest feasible distance from `p` under the current clustering.
    ///
    /// The witness exists to rule out competitors hiding outside `p`'s
    /// candidate set. When `p` already co-occurs with every live cluster
    /// there is nothing left to certify (every comparison is made directly),
    /// so potential feasibility suffices; without this the last merge could
    /// never be certified, since an edge cannot witness itself once
    /// variances are positive.
    #[inline]
    fn min_feasible_of(&self, p: u32) -> Option<f64> {
        if !self.alive[p as usize] {
            return None;
        }
        let covers_all_live = self.adj[p as usize].len() + 1 == self.rec.clusters();
        let cache = &self.cache[p as usize];
        let value = if covers_all_live {
            cache.mf_pf
        } else {
            cache.mf_wit
        };
        value.is_finite().then_some(value)
    }

    fn global_min_feasible(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for p in 0..self.alive.len() as u32 {
            if let Some(d) = self.min_feasible_of(p) {
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }

    /// The average-linkage analogue of the merge certificate. Live
    /// representatives are pairwise cross-cluster, so the taken-edge escape
    /// clause is vacuous here: every checked cluster must hold a feasible
    /// edge.
    fn certified(&self, check: &[u32]) -> bool {
        check
            .iter()
            .all(|&p| !self.alive[p as usize] || self.min_feasible_of(p).is_some())
    }

    fn run(&mut self, l_per: f64) -> (PassExit, Option<f64>, bool) {
        // Returns (exit, min feasible at exit, condition held at exit).
        let n = self.alive.len();
        let gmf = self.global_min_feasible();
        let all: Vec<u32> = (0..n as u32).collect();
        let cond = gmf.is_some() && self.certified(&all);
        if !cond {
            return (PassExit::ConditionFailed, gmf, false);
        }
        if gmf.unwrap().sqrt() / 8.0 < l_per {
            return (PassExit::PerturbationStale, gmf, true);
        }
        let mut last_gmf = gmf;
        while let Some(Reverse(edge)) = self.heap.pop() {
            let (a, b) = (edge.a, edge.b);
            if !self.alive[a as usize] || !self.alive[b as usize] {
                continue;
            }
            let info = self.pairs[&pack(a, b)];
            if self.d_alc(a, b, &info) != edge.dist {
                continue; // distance was recomputed since this entry
            }
            // Merge clusters a and b; the union-find keeps one of the two
            // as root.
            let ida = self.rec.uf().min_id_of(a);
            let idb = self.rec.uf().min_id_of(b);
            let merged = merge_stats(&self.stats[a as usize], &self.stats[b as usize])
                .expect("dimensions agree within one dataset");
            let root = self
                .rec
                .merge(ida.min(idb), ida.max(idb), edge.dist)
                .expect("heap pairs are cross-cluster");
            debug_assert!(root == a || root == b);
            let dead = if root == a { b } else { a };
            self.stats[root as usize] = merged;
            self.alive[dead as usize] = false;

            if self.rec.clusters() == 1 {
                return (PassExit::Complete, last_gmf, true);
            }

            // Sparsify: substitute the representative in every set, rewire
            // adjacency, and recompute distances of the merged cluster to
            // all co-occurring clusters.
            self.state.replace(dead, root);
            let dead_neighbors: Vec<u32> = std::mem::take(&mut self.adj[dead as usize])
                .into_iter()
                .filter(|&q| q != root)
                .collect();
            for &q in &dead_neighbors {
                self.adj[q as usize].remove(&dead);
                if self.alive[q as usize] {
                    self.adj[q as usize].insert(root);
                    self.adj[root as usize].insert(q);
                }
            }
            self.adj[root as usize].remove(&dead);
            let neighbors: Vec<u32> = self.adj[root as usize].iter().copied().collect();
            let mut fresh: Vec<(u32, PairInfo)> = Vec::with_capacity(neighbors.len());
            for &q in &neighbors {
                let centroid_sq = centroid_distance_sq(
                    &self.stats[root as usize].centroid,
                    &self.stats[q as usize].centroid,
                );
                self.distance_computations += 1;
                let count = self.state.co_occurrence(root, q);
                let info = PairInfo { centroid_sq, count };
                self.pairs.insert(pack(root, q), info);
                self.heap.push(Reverse(HeapEdge {
                    dist: centroid_sq
                        + self.stats[root as usize].variance
                        + self.stats[q as usize].variance,
                    ids: pack_ids(
                        self.rec.uf().min_id_of(root),
                        self.rec.uf().min_id_of(q),
                    ),
                    a: root,
                    b: q,
                }));
                fresh.push((q, info));
            }
            // Refresh feasibility summaries: only the merged cluster and its
            // co-occurring neighbors can change. A neighbor needs a full
            // rebuild only when one of its cached values came from the
            // merged pair (or its witness floor was empty and just rose).
            for &(q, info) in &fresh {
                let needs_rebuild = self.cache[q as usize].references(root, dead)
                    || (self.potentially_feasible_for(q, info.count)
                        && info.centroid_sq > self.cache[q as usize].wit
                        && !self.cache[q as usize].mf_wit.is_finite());
                if needs_rebuild {
                    self.recompute_rep(q);
                } else {
                    self.apply_fresh_edge(q, root, info);
                }
            }
            self.recompute_rep(root);

            // Re-certify the merged cluster and everything co-occurring
            // with it.
            let mut check = neighbors;
            check.push(root);
            let gmf = self.global_min_feasible();
            last_gmf = gmf;
            let cond = gmf.is_some() && self.certified(&check);
            if !cond {
                return (PassExit::ConditionFailed, gmf, false);
            }
            if gmf.unwrap().sqrt() / 8.0 < l_per {
                return (PassExit::PerturbationStale, gmf, true);
            }
        }
        // Candidate pairs exhausted with several clusters left: no feasible
        // edge can remain.
        let gmf = self.global_min_feasible();
        (PassExit::ConditionFailed, gmf, false)
    }

    fn finish(self) -> (MergeSequence, u64) {
        (self.rec.finish(), self.distance_computations)
    }
}

#[inline]
fn pack_ids(a: u32, b: u32) -> (u32, u32) {
    (a.min(b), a.max(b))
}

/// Parameter-free average linkage: the same restart loop as the
/// single-linkage engine, with squared-scale cluster distances, sparsifying
/// sets, and witness-gated feasibility. Always returns a complete sequence.
pub fn rp_alc_parameter_free(
    ds: &Dataset,
    base_cfg: &PartitionConfig,
    threshold: f64,
) -> Result<ClusteringRun> {
    base_cfg.validate()?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "frequency threshold must lie in (0, 1), got {threshold}"
        )));
    }
    if base_cfg.l_per != 0.0 {
        return Err(Error::InvalidConfig(
            "the perturbation length is scheduled internally; start from l_per = 0".into(),
        ));
    }
    let n = ds.len();
    let mut stats = RunStats {
        final_min_pts: base_cfg.min_pts,
        ..RunStats::default()
    };
    if n == 1 {
        stats.iterations = 1;
        return Ok(ClusteringRun {
            merges: MergeSequence::new(1, vec![]),
            stats,
        });
    }
    let mut min_pts = base_cfg.min_pts;
    let mut l_per = 0.0f64;
    for iteration in 0.. {
        stats.iterations = iteration + 1;
        let (state, full) = if min_pts >= n {
            (
                SparseSetState::full(n, base_cfg.rounds),
                Some(base_cfg.rounds),
            )
        } else {
            let cfg = PartitionConfig {
                min_pts,
                l_per,
                master_seed: derive_seed(base_cfg.master_seed, iteration as u64),
                ..base_cfg.clone()
            };
            let family = perturb_multi_partition(ds, &cfg)?;
            stats.depth_exhausted_rounds += family.depth_exhausted_rounds() as u64;
            (SparseSetState::new(&family, n), None)
        };
        let mut pass = AlcPass::new(ds, state, full, threshold);
        let (exit, gmf, _cond) = pass.run(l_per);
        let (merges, computed) = pass.finish();
        stats.distance_computations += computed;
        match exit {
            PassExit::Complete => {
                stats.final_min_pts = min_pts;
                stats.final_l_per = l_per;
                return Ok(ClusteringRun { merges, stats });
            }
            PassExit::ConditionFailed => {
                min_pts = (min_pts * 2).min(n);
                stats.doublings += 1;
            }
            PassExit::PerturbationStale => {
                stats.perturb_rescales += 1;
            }
        }
        if let Some(g) = gmf {
            l_per = g.sqrt() / 16.0;
        }
    }
    unreachable!("the restart loop exits via a complete pass");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_alc;
    use crate::rng::RngStream;
    use crate::slc::DEFAULT_FREQUENCY_THRESHOLD;
    use crate::synthetic::{gaussian_blobs, uniform_points};
    use approx::assert_relative_eq;

    fn random_cluster(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = RngStream::new(seed, &[70]);
        (0..n)
            .map(|_| (0..d).map(|_| rng.standard_normal() * 3.0).collect())
            .collect()
    }

    fn direct_stats(points: &[Vec<f64>]) -> ClusterStats {
        let d = points[0].len();
        let mut centroid = vec![0.0; d];
        for p in points {
            for i in 0..d {
                centroid[i] += p[i];
            }
        }
        for c in centroid.iter_mut() {
            *c /= points.len() as f64;
        }
        let variance = points
            .iter()
            .map(|p| centroid_distance_sq(p, &centroid))
            .sum::<f64>()
            / points.len() as f64;
        ClusterStats {
            size: points.len(),
            centroid,
            variance,
        }
    }

    #[test]
    fn distance_between_singletons_is_squared() {
        let a = ClusterStats::singleton(&[0.0, 0.0]);
        let b = ClusterStats::singleton(&[3.0, 4.0]);
        assert_eq!(alc_distance(&a, &b).unwrap(), 25.0);
        assert_eq!(alc_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn distance_matches_worked_example() {
        // {(0,0),(2,0)} vs {(10,0),(12,0)}: centroid gap 10 squared plus
        // variance 1 on each side.
        let a = direct_stats(&[vec![0.0, 0.0], vec![2.0, 0.0]]);
        let b = direct_stats(&[vec![10.0, 0.0], vec![12.0, 0.0]]);
        assert_eq!(alc_distance(&a, &b).unwrap(), 102.0);
    }

    #[test]
    fn distance_matches_naive_double_sum() {
        let mut rng = RngStream::new(3, &[71]);
        for trial in 0..200 {
            let d = 1 + (trial % 16);
            let na = 1 + rng.index(64);
            let nb = 1 + rng.index(64);
            let pa = random_cluster(na, d, trial as u64);
            let pb = random_cluster(nb, d, 1000 + trial as u64);
            let formula = alc_distance(&direct_stats(&pa), &direct_stats(&pb)).unwrap();
            let mut sum = 0.0;
            for x in &pa {
                for y in &pb {
                    sum += centroid_distance_sq(x, y);
                }
            }
            let naive = sum / (na * nb) as f64;
            assert_relative_eq!(formula, naive, max_relative = 1e-9);
        }
    }

    #[test]
    fn distance_rejects_dimension_mismatch() {
        let a = ClusterStats::singleton(&[0.0]);
        let b = ClusterStats::singleton(&[0.0, 1.0]);
        assert!(alc_distance(&a, &b).is_err());
        assert!(merge_stats(&a, &b).is_err());
    }

    #[test]
    fn merge_stats_analytic_cases() {
        let a = ClusterStats::singleton(&[-1.0]);
        let b = ClusterStats::singleton(&[1.0]);
        let m = merge_stats(&a, &b).unwrap();
        assert_eq!(m.size, 2);
        assert_eq!(m.centroid, vec![0.0]);
        assert_eq!(m.variance, 1.0);
        // Merging a singleton with a coincident singleton keeps variance 0.
        let c = merge_stats(&a, &a.clone()).unwrap();
        assert_eq!(c.variance, 0.0);
        assert_eq!(c.centroid, vec![-1.0]);
    }

    #[test]
    fn merge_stats_matches_direct_recomputation() {
        let points = random_cluster(50, 6, 9);
        for split in [1, 7, 25, 49] {
            let left = direct_stats(&points[..split]);
            let right = direct_stats(&points[split..]);
            let merged = merge_stats(&left, &right).unwrap();
            let whole = direct_stats(&points);
            assert_eq!(merged.size, 50);
            assert_relative_eq!(merged.variance, whole.variance, max_relative = 1e-9);
            for (m, w) in merged.centroid.iter().zip(&whole.centroid) {
                assert_relative_eq!(m, w, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sparse_state_conserves_members_under_substitution() {
        let family = crate::partition::PartitionFamily {
            sets: vec![vec![0, 1, 2], vec![1, 3], vec![0, 3, 4], vec![2, 4]],
            round_of_set: vec![0, 0, 1, 1],
            flagged: vec![false; 4],
            rounds: 2,
            round_max_depth: vec![0, 0],
            round_depth_exhausted: vec![false, false],
        };
        let mut state = SparseSetState::new(&family, 5);
        let before: Vec<Vec<u32>> = state.live_sets().to_vec();
        state.replace(1, 0); // merge {0,1} -> 0
        for (old, new) in before.iter().zip(state.live_sets()) {
            let mut expected: Vec<u32> =
                old.iter().map(|&p| if p == 1 { 0 } else { p }).collect();
            expected.sort_unstable();
            expected.dedup();
            assert_eq!(new, &expected);
        }
        assert_eq!(state.sets_containing(0), &[0, 1, 2]);
        assert!(state.sets_containing(1).is_empty());
        assert_eq!(state.co_occurrence(0, 3), 2);
    }

    #[test]
    fn two_points_merge_at_squared_distance() {
        let ds = Dataset::from_rows(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let cfg = PartitionConfig::parameter_free_start(2, 4);
        let run = rp_alc_parameter_free(&ds, &cfg, DEFAULT_FREQUENCY_THRESHOLD).unwrap();
        assert!(run.merges.is_complete());
        assert_eq!(run.merges.merges()[0].distance, 25.0);
    }

    #[test]
    fn blobs_match_oracle_step_by_step() {
        let (ds, _) = gaussian_blobs(3, 40, 8, 1.0, 40.0, 31).unwrap();
        let cfg = PartitionConfig::parameter_free_start(120, 31);
        let run = rp_alc_parameter_free(&ds, &cfg, DEFAULT_FREQUENCY_THRESHOLD).unwrap();
        assert!(run.merges.is_complete());
        let oracle = brute_alc(&ds);
        assert_eq!(run.merges.len(), oracle.len());
        for (got, want) in run.merges.merges().iter().zip(oracle.merges()) {
            assert_relative_eq!(got.distance, want.distance, max_relative = 1e-9);
        }
    }

    #[test]
    fn engine_is_deterministic() {
        let ds = uniform_points(50, 4, 1.0, 13).unwrap();
        let cfg = PartitionConfig::parameter_free_start(50, 13);
        let a = rp_alc_parameter_free(&ds, &cfg, DEFAULT_FREQUENCY_THRESHOLD).unwrap();
        let b = rp_alc_parameter_free(&ds, &cfg, DEFAULT_FREQUENCY_THRESHOLD).unwrap();
        assert_eq!(a.merges, b.merges);
    }

    #[test]
    fn doubling_count_stays_logarithmic() {
        let ds = uniform_points(60, 3, 1.0, 77).unwrap();
        let cfg = PartitionConfig::parameter_free_start(60, 77);
        let run = rp_alc_parameter_free(&ds, &cfg, DEFAULT_FREQUENCY_THRESHOLD).unwrap();
        assert!(run.merges.is_complete());
        assert!(run.stats.doublings as f64 <= (60.0f64).log2().ceil());
    }

    // The incremental feasibility cache must agree with a from-scratch
    // evaluation at every step of a real run.
    #[test]
    fn feasibility_cache_matches_full_recomputation() {
        let (ds, _) = gaussian_blobs(3, 12, 3, 1.0, 12.0, 91).unwrap();
        let cfg = PartitionConfig {
            min_pts: 8,
            rounds: 40,
            lines_per_round: 40,
            l_per: 0.0,
            master_seed: 91,
        };
        let family = perturb_multi_partition(&ds, &cfg).unwrap();
        let state = SparseSetState::new(&family, ds.len());
        let mut pass = AlcPass::new(&ds, state, None, DEFAULT_FREQUENCY_THRESHOLD);
        let mut merged_any = false;
        while run_single_step(&mut pass) {
            merged_any = true;
            if pass.rec.clusters() == 1 {
                break;
            }
            for p in 0..ds.len() as u32 {
                if !pass.alive[p as usize] {
                    continue;
                }
                let cached = pass.cache[p as usize];
                pass.recompute_rep(p);
                let fresh = pass.cache[p as usize];
                assert_eq!(cached.wit.to_bits(), fresh.wit.to_bits(), "wit at {p}");
                assert_eq!(cached.mf_pf.to_bits(), fresh.mf_pf.to_bits(), "mf_pf at {p}");
                assert_eq!(
                    cached.mf_wit.to_bits(),
                    fresh.mf_wit.to_bits(),
                    "mf_wit at {p}"
                );
            }
        }
        assert!(merged_any);
    }

    /// Pops until one merge happens, applying the same bookkeeping as the
    /// real loop (test-only driver).
    fn run_single_step(pass: &mut AlcPass) -> bool {
        while let Some(Reverse(edge)) = pass.heap.pop() {
            let (a, b) = (edge.a, edge.b);
            if !pass.alive[a as usize] || !pass.alive[b as usize] {
                continue;
            }
            let info = pass.pairs[&pack(a, b)];
            if pass.d_alc(a, b, &info) != edge.dist {
                continue;
            }
            let ida = pass.rec.uf().min_id_of(a);
            let idb = pass.rec.uf().min_id_of(b);
            let merged =
                merge_stats(&pass.stats[a as usize], &pass.stats[b as usize]).unwrap();
            let root = pass.rec.merge(ida.min(idb), ida.max(idb), edge.dist).unwrap();
            let dead = if root == a { b } else { a };
            pass.stats[root as usize] = merged;
            pass.alive[dead as usize] = false;
            if pass.rec.clusters() == 1 {
                return true;
            }
            pass.state.replace(dead, root);
            let dead_neighbors: Vec<u32> = std::mem::take(&mut pass.adj[dead as usize])
                .into_iter()
                .filter(|&q| q != root)
                .collect();
            for &q in &dead_neighbors {
                pass.adj[q as usize].remove(&dead);
                if pass.alive[q as usize] {
                    pass.adj[q as usize].insert(root);
                    pass.adj[root as usize].insert(q);
                }
            }
            pass.adj[root as usize].remove(&dead);
            let neighbors: Vec<u32> = pass.adj[root as usize].iter().copied().collect();
            let mut fresh: Vec<(u32, PairInfo)> = Vec::new();
            for &q in &neighbors {
                let centroid_sq = centroid_distance_sq(
                    &pass.stats[root as usize].centroid,
                    &pass.stats[q as usize].centroid,
                );
                let count = pass.state.co_occurrence(root, q);
                let info = PairInfo { centroid_sq, count };
                pass.pairs.insert(pack(root, q), info);
                pass.heap.push(Reverse(HeapEdge {
                    dist: centroid_sq
                        + pass.stats[root as usize].variance
                        + pass.stats[q as usize].variance,
                    ids: pack_ids(pass.rec.uf().min_id_of(root), pass.rec.uf().min_id_of(q)),
                    a: root,
                    b: q,
                }));
                fresh.push((q, info));
            }
            for &(q, info) in &fresh {
                let needs_rebuild = pass.cache[q as usize].references(root, dead)
                    || (pass.potentially_feasible_for(q, info.count)
                        && info.centroid_sq > pass.cache[q as usize].wit
                        && !pass.cache[q as usize].mf_wit.is_finite());
                if needs_rebuild {
                    pass.recompute_rep(q);
                } else {
                    pass.apply_fresh_edge(q, root, info);
                }
            }
            pass.recompute_rep(root);
            return true;
        }
        false
    }
}
