//! Single-linkage clustering driven by random-projection candidate sets.
//!
//! The fixed-parameter engine partitions once, computes distances only inside
//! the resulting small sets, and runs Kruskal's scan over that candidate edge
//! list. The parameter-free engine wraps the same scan in a restart loop: it
//! tracks which candidate edges are frequent across rounds, merges only while
//! every affected point still holds a frequent cross-cluster (feasible) edge
//! or a long-enough intra-cluster (taken) edge, doubles the leaf-size
//! threshold when that certificate fails, and re-partitions with a point
//! perturbation proportional to the shortest feasible edge to break up
//! adversarial near-colinear arrangements.

use crate::dendrogram::{MergeRecorder, MergeSequence};
use crate::error::{Error, Result};
use crate::geometry::Dataset;
use crate::hashing::{pack, unpack, PairMap};
use crate::partition::{perturb_multi_partition, PartitionConfig, PartitionFamily};
use crate::rng::derive_seed;
use crate::union_find::UnionFind;

/// Default frequency threshold: just below 2/3 so that an edge present in
/// exactly two of three sets counts as frequent under the strict comparison.
pub const DEFAULT_FREQUENCY_THRESHOLD: f64 = 0.66;

/// An edge present in at least one candidate set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateEdge {
    pub a: u32,
    pub b: u32,
    pub distance: f64,
    pub count: u32,
}

#[derive(Debug, Clone, Copy)]
struct EdgeInfo {
    distance: f64,
    count: u32,
}

/// Deduplicated point-pair records: exact distance on original coordinates
/// plus the number of candidate sets containing the pair.
#[derive(Debug, Clone)]
pub struct CandidateEdgeTable {
    edges: PairMap<EdgeInfo>,
    distance_computations: u64,
    rounds: usize,
}

impl CandidateEdgeTable {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Number of rounds the generating family used (the frequency
    /// denominator: each point occurs in exactly one set per round).
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Exact Euclidean distance for a stored pair.
    pub fn distance(&self, a: u32, b: u32) -> Option<f64> {
        self.edges.get(&pack(a, b)).map(|e| e.distance)
    }

    /// Number of candidate sets containing the pair (zero if absent).
    pub fn count(&self, a: u32, b: u32) -> u32 {
        self.edges.get(&pack(a, b)).map_or(0, |e| e.count)
    }

    /// Distance evaluations performed while building the table (one per
    /// stored pair).
    pub fn distance_computations(&self) -> u64 {
        self.distance_computations
    }

    /// All edges sorted ascending by `(distance, a, b)`.
    pub fn sorted_edges(&self) -> Vec<CandidateEdge> {
        let mut out: Vec<CandidateEdge> = self
            .edges
            .iter()
            .map(|(&key, e)| {
                let (a, b) = unpack(key);
                CandidateEdge {
                    a,
                    b,
                    distance: e.distance,
                    count: e.count,
                }
            })
            .collect();
        out.sort_unstable_by(|x, y| {
            x.distance
                .total_cmp(&y.distance)
                .then_with(|| (x.a, x.b).cmp(&(y.a, y.b)))
        });
        out
    }
}

/// Collects every unordered pair co-occurring in a family set, with its
/// exact distance (computed once) and occurrence count.
pub fn build_candidate_table(
    family: &PartitionFamily,
    ds: &Dataset,
) -> Result<CandidateEdgeTable> {
    let n = ds.len() as u32;
    let mut edges: PairMap<EdgeInfo> = PairMap::default();
    let mut computed = 0u64;
    for set in &family.sets {
        for (i, &a) in set.iter().enumerate() {
            if a >= n {
                return Err(Error::PointIdOutOfRange {
                    id: a as usize,
                    len: ds.len(),
                });
            }
            for &b in &set[i + 1..] {
                edges
                    .entry(pack(a, b))
                    .and_modify(|e| e.count += 1)
                    .or_insert_with(|| {
                        computed += 1;
                        EdgeInfo {
                            distance: ds.distance(a as usize, b as usize),
                            count: 1,
                        }
                    });
            }
        }
    }
    Ok(CandidateEdgeTable {
        edges,
        distance_computations: computed,
        rounds: family.rounds,
    })
}

/// The full pairwise table, as if every pair co-occurred in every round.
/// Used once the leaf-size threshold reaches the point count, where
/// partitioning would return one whole-set leaf per round anyway.
fn full_candidate_table(ds: &Dataset, rounds: usize) -> CandidateEdgeTable {
    let n = ds.len() as u32;
    let mut edges: PairMap<EdgeInfo> = PairMap::default();
    edges.reserve(ds.len() * ds.len().saturating_sub(1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            edges.insert(
                pack(a, b),
                EdgeInfo {
                    distance: ds.distance(a as usize, b as usize),
                    count: rounds as u32,
                },
            );
        }
    }
    CandidateEdgeTable {
        distance_computations: edges.len() as u64,
        edges,
        rounds,
    }
}

/// Per-point feasible/taken adjacency for a fixed clustering state.
///
/// An edge is frequent when its occurrence fraction strictly exceeds the
/// threshold; frequent cross-cluster edges are feasible, frequent
/// intra-cluster edges are taken.
#[derive(Debug, Clone)]
pub struct EdgeClassification {
    feasible: Vec<Vec<(f64, u32)>>,
    taken: Vec<Vec<(f64, u32)>>,
    min_feasible: Option<f64>,
    feasible_edges: usize,
}

impl EdgeClassification {
    /// Feasible neighbors of `p`, sorted ascending by distance.
    pub fn feasible_neighbors(&self, p: u32) -> &[(f64, u32)] {
        &self.feasible[p as usize]
    }

    /// Taken neighbors of `p`, sorted ascending by distance.
    pub fn taken_neighbors(&self, p: u32) -> &[(f64, u32)] {
        &self.taken[p as usize]
    }

    /// Shortest feasible distance over all points.
    pub fn global_min_feasible(&self) -> Option<f64> {
        self.min_feasible
    }

    /// Number of feasible edges (unordered pairs).
    pub fn feasible_edge_count(&self) -> usize {
        self.feasible_edges
    }
}

/// Classifies every stored edge against the current clustering.
///
/// `rounds` is the frequency denominator; an edge with count `c` is frequent
/// iff `c / rounds > threshold` (strict).
pub fn classify_edges(
    table: &CandidateEdgeTable,
    clustering: &mut UnionFind,
    rounds: usize,
    threshold: f64,
) -> Result<EdgeClassification> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "frequency threshold must lie in (0, 1), got {threshold}"
        )));
    }
    if rounds == 0 {
        return Err(Error::InvalidConfig("rounds must be positive".into()));
    }
    let n = clustering.len();
    let mut feasible = vec![Vec::new(); n];
    let mut taken = vec![Vec::new(); n];
    let mut min_feasible: Option<f64> = None;
    let mut feasible_edges = 0;
    for (&key, info) in &table.edges {
        let (a, b) = unpack(key);
        if info.count as f64 / rounds as f64 > threshold {
            if clustering.same(a, b) {
                taken[a as usize].push((info.distance, b));
                taken[b as usize].push((info.distance, a));
            } else {
                feasible[a as usize].push((info.distance, b));
                feasible[b as usize].push((info.distance, a));
                feasible_edges += 1;
                min_feasible = Some(match min_feasible {
                    Some(m) => m.min(info.distance),
                    None => info.distance,
                });
            }
        }
    }
    let by_distance = |x: &(f64, u32), y: &(f64, u32)| {
        x.0.total_cmp(&y.0).then_with(|| x.1.cmp(&y.1))
    };
    for list in feasible.iter_mut().chain(taken.iter_mut()) {
        list.sort_unstable_by(by_distance);
    }
    Ok(EdgeClassification {
        feasible,
        taken,
        min_feasible,
        feasible_edges,
    })
}

/// The merge-gating certificate: there is a feasible edge somewhere, and
/// every checked point either has a feasible edge itself or has a taken edge
/// at least as long as the globally shortest feasible edge.
pub fn merge_certificate_holds(classification: &EdgeClassification, check_set: &[u32]) -> bool {
    let Some(global_min) = classification.global_min_feasible() else {
        return false;
    };
    check_set.iter().all(|&p| {
        !classification.feasible_neighbors(p).is_empty()
            || classification
                .taken_neighbors(p)
                .last()
                .is_some_and(|&(d, _)| d >= global_min)
    })
}

/// Work and restart counters for one engine run.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunStats {
    /// Total exact distance evaluations across all iterations.
    pub distance_computations: u64,
    /// Restart-loop iterations executed (fixed mode: 1).
    pub iterations: u32,
    /// Number of times the leaf-size threshold doubled.
    pub doublings: u32,
    /// Restarts caused by the perturbation-length rescale rule.
    pub perturb_rescales: u32,
    /// Threshold in effect when the run finished.
    pub final_min_pts: usize,
    /// Perturbation length in effect when the run finished.
    pub final_l_per: f64,
    /// Rounds that ran out of projection lines, summed over iterations.
    pub depth_exhausted_rounds: u64,
}

/// A clustering run: the merge sequence plus its work counters.
#[derive(Debug, Clone)]
pub struct ClusteringRun {
    pub merges: MergeSequence,
    pub stats: RunStats,
}

/// Fixed-parameter single linkage over one unperturbed partition family.
///
/// The sequence is complete only if the candidate edges connect everything;
/// an incomplete result is a flagged outcome (the threshold was too small),
/// not an error.
pub fn rp_slc(ds: &Dataset, cfg: &PartitionConfig) -> Result<ClusteringRun> {
    cfg.validate()?;
    if cfg.l_per != 0.0 {
        return Err(Error::InvalidConfig(
            "fixed-parameter single linkage runs unperturbed (l_per must be 0)".into(),
        ));
    }
    let (table, depth_exhausted) = if cfg.min_pts >= ds.len() {
        (full_candidate_table(ds, cfg.rounds), 0)
    } else {
        let family = perturb_multi_partition(ds, cfg)?;
        let depth_exhausted = family.depth_exhausted_rounds() as u64;
        (build_candidate_table(&family, ds)?, depth_exhausted)
    };
    let mut rec = MergeRecorder::new(ds.len());
    for e in table.sorted_edges() {
        if rec.clusters() == 1 {
            break;
        }
        rec.merge(e.a, e.b, e.distance);
    }
    Ok(ClusteringRun {
        merges: rec.finish(),
        stats: RunStats {
            distance_computations: table.distance_computations(),
            iterations: 1,
            doublings: 0,
            perturb_rescales: 0,
            final_min_pts: cfg.min_pts,
            final_l_per: 0.0,
            depth_exhausted_rounds: depth_exhausted,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PassExit {
    Complete,
    ConditionFailed,
    PerturbationStale,
    EdgesExhausted,
}

struct PassResult {
    merges: MergeSequence,
    exit: PassExit,
    condition_at_exit: bool,
    min_feasible_at_exit: Option<f64>,
}

/// One merge pass over a candidate table: Kruskal's scan gated by the
/// feasible/taken certificate and the perturbation-length rule.
fn merge_pass(n: usize, table: &CandidateEdgeTable, threshold: f64, l_per: f64) -> PassResult {
    let edges = table.sorted_edges();
    // Frequent adjacency per point, ascending by distance (edges arrive
    // sorted). Feasibility of an entry depends on the live clustering.
    let mut frequent: Vec<Vec<(f64, u32)>> = vec![Vec::new(); n];
    let rounds = table.rounds() as f64;
    for e in &edges {
        if e.count as f64 / rounds > threshold {
            frequent[e.a as usize].push((e.distance, e.b));
            frequent[e.b as usize].push((e.distance, e.a));
        }
    }
    let mut rec = MergeRecorder::new(n);
    // Advance-only cursor per point: entries before it are intra-cluster
    // forever, so the first cross-cluster entry at or after it is the
    // point's shortest feasible edge.
    let mut cursor: Vec<usize> = vec![0; n];

    fn point_min_feasible(
        p: usize,
        frequent: &[Vec<(f64, u32)>],
        cursor: &mut [usize],
        uf: &mut UnionFind,
    ) -> Option<f64> {
        let list = &frequent[p];
        while cursor[p] < list.len() && uf.same(p as u32, list[cursor[p]].1) {
            cursor[p] += 1;
        }
        list.get(cursor[p]).map(|&(d, _)| d)
    }

    fn global_min_feasible(
        n: usize,
        frequent: &[Vec<(f64, u32)>],
        cursor: &mut [usize],
        uf: &mut UnionFind,
    ) -> Option<f64> {
        let mut best: Option<f64> = None;
        for p in 0..n {
            if let Some(d) = point_min_feasible(p, frequent, cursor, uf) {
                best = Some(match best {
                    Some(b) => b.min(d),
                    None => d,
                });
            }
        }
        best
    }

    // Certificate for one point: a feasible edge, or (all frequent
    // neighbors intra-cluster) a taken edge at least as long as the global
    // minimum feasible distance.
    fn point_certified(
        p: usize,
        global_min: f64,
        frequent: &[Vec<(f64, u32)>],
        cursor: &mut [usize],
        uf: &mut UnionFind,
    ) -> bool {
        if point_min_feasible(p, frequent, cursor, uf).is_some() {
            return true;
        }
        frequent[p].last().is_some_and(|&(d, _)| d >= global_min)
    }

    let check_gate = |check: Option<&[u32]>,
                          rec: &mut MergeRecorder,
                          cursor: &mut Vec<usize>|
     -> (bool, Option<f64>, bool) {
        // Returns (condition holds, global min feasible, perturbation ok).
        let gmf = global_min_feasible(n, &frequent, cursor, rec.uf());
        let Some(gmf_val) = gmf else {
            return (false, None, true);
        };
        let cond = match check {
            Some(points) => points
                .iter()
                .all(|&p| point_certified(p as usize, gmf_val, &frequent, cursor, rec.uf())),
            None => {
                (0..n).all(|p| point_certified(p, gmf_val, &frequent, cursor, rec.uf()))
            }
        };
        (cond, gmf, gmf_val / 8.0 >= l_per)
    };

    // Before the first merge every point is checked.
    let (cond, gmf, per_ok) = check_gate(None, &mut rec, &mut cursor);
    if !cond || !per_ok {
        let exit = if cond {
            PassExit::PerturbationStale
        } else {
            PassExit::ConditionFailed
        };
        return PassResult {
            merges: rec.finish(),
            exit,
            condition_at_exit: cond,
            min_feasible_at_exit: gmf,
        };
    }

    let mut exit = PassExit::EdgesExhausted;
    let mut condition_at_exit = false;
    let mut min_feasible_at_exit = None;
    'scan: for e in &edges {
        if rec.merge(e.a, e.b, e.distance).is_some() {
            if rec.clusters() == 1 {
                exit = PassExit::Complete;
                condition_at_exit = true;
                break 'scan;
            }
            // Re-certify the feasible neighbors of both endpoints.
            let mut check: Vec<u32> = Vec::new();
            for &p in &[e.a, e.b] {
                let from = cursor[p as usize];
                for &(_, q) in &frequent[p as usize][from..] {
                    if !rec.uf().same(p, q) {
                        check.push(q);
                    }
                }
            }
            check.sort_unstable();
            check.dedup();
            let (cond, gmf, per_ok) = check_gate(Some(&check), &mut rec, &mut cursor);
            min_feasible_at_exit = gmf;
            if !cond {
                exit = PassExit::ConditionFailed;
                condition_at_exit = false;
                break 'scan;
            }
            if !per_ok {
                exit = PassExit::PerturbationStale;
                condition_at_exit = true;
                break 'scan;
            }
        }
    }
    if exit == PassExit::EdgesExhausted {
        // Every candidate edge is now intra-cluster, so no feasible edge
        // remains and the certificate fails.
        let (cond, gmf, _) = check_gate(None, &mut rec, &mut cursor);
        condition_at_exit = cond;
        min_feasible_at_exit = gmf;
    }
    PassResult {
        merges: rec.finish(),
        exit,
        condition_at_exit,
        min_feasible_at_exit,
    }
}

/// Parameter-free single linkage: repeats partition + gated merge passes,
/// doubling the leaf-size threshold whenever the certificate fails and
/// rescaling the perturbation to 1/16 of the shortest feasible edge, until
/// the dendrogram completes. Always returns a complete sequence.
pub fn rp_slc_parameter_free(
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
        let table = if min_pts >= n {
            full_candidate_table(ds, base_cfg.rounds)
        } else {
            let cfg = PartitionConfig {
                min_pts,
                l_per,
                master_seed: derive_seed(base_cfg.master_seed, iteration as u64),
                ..base_cfg.clone()
            };
            let family = perturb_multi_partition(ds, &cfg)?;
            stats.depth_exhausted_rounds += family.depth_exhausted_rounds() as u64;
            build_candidate_table(&family, ds)?
        };
        stats.distance_computations += table.distance_computations();

        let pass = merge_pass(n, &table, threshold, l_per);
        if pass.exit == PassExit::Complete {
            stats.final_min_pts = min_pts;
            stats.final_l_per = l_per;
            return Ok(ClusteringRun {
                merges: pass.merges,
                stats,
            });
        }
        if !pass.condition_at_exit {
            // Certificate failed: the candidate sets are too small to be
            // trusted, double the threshold (capped at n, where the full
            // table guarantees completion).
            min_pts = (min_pts * 2).min(n);
            stats.doublings += 1;
        } else {
            stats.perturb_rescales += 1;
        }
        if let Some(gmf) = pass.min_feasible_at_exit {
            l_per = gmf / 16.0;
        }
    }
    unreachable!("the restart loop exits via a complete pass");
}
