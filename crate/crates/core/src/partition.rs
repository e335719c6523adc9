//! Recursive random-projection partitioning.
//!
//! One round projects the (optionally perturbed) point set onto a sequence of
//! random lines, recursively splitting at a uniformly chosen point until every
//! leaf set has fewer than `min_pts` members. Repeating over many rounds with
//! fresh lines and fresh perturbations yields a family of small candidate
//! sets; the clustering engines only ever compute distances inside these sets.
//!
//! Randomness contract (what a re-implementation must mirror to reproduce a
//! round bit-for-bit): line `j` of round `r` comes from stream
//! `[r, STREAM_LINE, j]`; the split-point stream `[r, STREAM_SPLIT]` is
//! consumed depth-first (low side before high side) with one `index(|S|)`
//! draw per attempt, at most four attempts per node; the perturbation stream
//! `[r, STREAM_PERTURB]` draws one unit vector per point in id order.

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{dot, perturb, sample_unit_vector, Dataset, RandomLine};
use crate::rng::RngStream;

pub const STREAM_LINE: u64 = 1;
pub const STREAM_SPLIT: u64 = 2;
pub const STREAM_PERTURB: u64 = 3;

/// Default leaf-size threshold used by the benchmark protocol.
pub const DEFAULT_MIN_PTS: usize = 14;
/// Default multiplier on `log2 N` for the number of partition rounds.
pub const DEFAULT_ROUNDS_FACTOR: f64 = 20.0;
/// Multiplier on `log2 N` bounding the recursion depth of one round.
pub const LINES_PER_ROUND_FACTOR: f64 = 8.0;
/// Smallest starting threshold for the parameter-free engines.
pub const PARAMETER_FREE_MIN_PTS_FLOOR: usize = 4;

/// Configuration for [`perturb_multi_partition`] and the clustering engines.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionConfig {
    /// Leaf sets are smaller than this threshold.
    pub min_pts: usize,
    /// Number of independent partition rounds.
    pub rounds: usize,
    /// Maximum number of projection lines (recursion depth) per round.
    pub lines_per_round: usize,
    /// Length of the random displacement applied to every point per round.
    pub l_per: f64,
    /// Master seed; all per-round streams derive from it.
    pub master_seed: u64,
}

impl PartitionConfig {
    /// `ceil(factor * log2(n))`, at least 1.
    pub fn rounds_for(n: usize, factor: f64) -> usize {
        ((n.max(2) as f64).log2() * factor).ceil().max(1.0) as usize
    }

    /// Depth budget `ceil(8 * log2(n))`, at least 1.
    pub fn lines_for(n: usize) -> usize {
        ((n.max(2) as f64).log2() * LINES_PER_ROUND_FACTOR)
            .ceil()
            .max(1.0) as usize
    }

    /// Benchmark-protocol defaults: `min_pts = 14`, `ceil(20 log2 N)` rounds.
    pub fn with_defaults(n: usize, master_seed: u64) -> Self {
        Self {
            min_pts: DEFAULT_MIN_PTS,
            rounds: Self::rounds_for(n, DEFAULT_ROUNDS_FACTOR),
            lines_per_round: Self::lines_for(n),
            l_per: 0.0,
            master_seed,
        }
    }

    /// Starting configuration for the parameter-free engines:
    /// `min_pts = max(4, ceil(log2 N))`.
    pub fn parameter_free_start(n: usize, master_seed: u64) -> Self {
        let min_pts = ((n.max(2) as f64).log2().ceil() as usize).max(PARAMETER_FREE_MIN_PTS_FLOOR);
        Self {
            min_pts,
            ..Self::with_defaults(n, master_seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_pts < 2 {
            return Err(Error::InvalidConfig(format!(
                "min_pts must be at least 2, got {}",
                self.min_pts
            )));
        }
        if self.rounds < 1 {
            return Err(Error::InvalidConfig("rounds must be at least 1".into()));
        }
        if self.lines_per_round < 1 {
            return Err(Error::InvalidConfig(
                "lines_per_round must be at least 1".into(),
            ));
        }
        if !self.l_per.is_finite() || self.l_per < 0.0 {
            return Err(Error::InvalidLength(self.l_per));
        }
        Ok(())
    }
}

/// Result of one partition round.
#[derive(Debug, Clone)]
pub struct PartitionOutcome {
    /// Disjoint leaf sets covering the input ids.
    pub sets: Vec<Vec<u32>>,
    /// Parallel to `sets`: true for oversized depth-limit leftovers.
    pub flagged: Vec<bool>,
    /// Deepest recursion level reached (lines consumed on that path).
    pub max_depth: usize,
    /// True if any leaf was emitted because the line budget ran out.
    pub depth_exhausted: bool,
}

/// The multiset of leaf sets produced by all rounds, with ids referring to
/// the original (unperturbed) points.
#[derive(Debug, Clone)]
pub struct PartitionFamily {
    /// All leaf sets, grouped by round in round order.
    pub sets: Vec<Vec<u32>>,
    /// Parallel to `sets`: originating round of each set.
    pub round_of_set: Vec<u32>,
    /// Parallel to `sets`: depth-limit leftover flag.
    pub flagged: Vec<bool>,
    /// Number of rounds run.
    pub rounds: usize,
    /// Per round: deepest recursion level.
    pub round_max_depth: Vec<u32>,
    /// Per round: whether the line budget was exhausted.
    pub round_depth_exhausted: Vec<bool>,
}

impl PartitionFamily {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Number of rounds that emitted a depth-limit warning.
    pub fn depth_exhausted_rounds(&self) -> usize {
        self.round_depth_exhausted.iter().filter(|&&x| x).count()
    }

    pub fn max_depth(&self) -> u32 {
        self.round_max_depth.iter().copied().max().unwrap_or(0)
    }

    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|&&x| x).count()
    }
}

/// Provides line `j` of a round; materialized or generated on demand.
trait LineProvider {
    fn limit(&self) -> usize;
    fn get(&mut self, j: usize) -> &RandomLine;
}

struct SliceLines<'a>(&'a [RandomLine]);

impl LineProvider for SliceLines<'_> {
    fn limit(&self) -> usize {
        self.0.len()
    }
    fn get(&mut self, j: usize) -> &RandomLine {
        &self.0[j]
    }
}

/// Generates line `j` from stream `[round, STREAM_LINE, j]` the first time it
/// is needed. Typical recursion depth is far below the budget, so most lines
/// are never drawn.
struct LazyLines {
    master_seed: u64,
    round: u64,
    dim: usize,
    limit: usize,
    cache: Vec<RandomLine>,
}

impl LineProvider for LazyLines {
    fn limit(&self) -> usize {
        self.limit
    }
    fn get(&mut self, j: usize) -> &RandomLine {
        while self.cache.len() <= j {
            let idx = self.cache.len() as u64;
            let mut rng = RngStream::new(self.master_seed, &[self.round, STREAM_LINE, idx]);
            let line = sample_unit_vector(self.dim, &mut rng).expect("dimension is positive");
            self.cache.push(line);
        }
        &self.cache[j]
    }
}

fn split_recursive(
    ds: &Dataset,
    ids: Vec<u32>,
    depth: usize,
    min_pts: usize,
    lines: &mut dyn LineProvider,
    rng: &mut RngStream,
    out: &mut PartitionOutcome,
) {
    if ids.len() < min_pts {
        out.max_depth = out.max_depth.max(depth);
        out.sets.push(ids);
        out.flagged.push(false);
        return;
    }
    if depth >= lines.limit() {
        // Line budget exhausted: emit the oversized set, flagged.
        out.max_depth = out.max_depth.max(depth);
        out.depth_exhausted = true;
        out.sets.push(ids);
        out.flagged.push(true);
        return;
    }
    let proj: Vec<f64> = {
        let line = lines.get(depth);
        ids.iter()
            .map(|&id| dot(ds.coords(id as usize), line.direction()))
            .collect()
    };
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut split_ok = false;
    // Points projecting <= the split value go low, so the split point itself
    // always lands low. If everything lands low (the split point had the
    // maximum projection, or all projections coincide), re-draw up to three
    // times.
    for _ in 0..4 {
        let pivot = rng.index(ids.len());
        let value = proj[pivot];
        low.clear();
        high.clear();
        for (i, &id) in ids.iter().enumerate() {
            if proj[i] <= value {
                low.push(id);
            } else {
                high.push(id);
            }
        }
        if !high.is_empty() {
            split_ok = true;
            break;
        }
    }
    if !split_ok {
        // Degenerate input (e.g. duplicate points): split at the id median
        // to guarantee progress.
        let mid = ids.len() / 2;
        low = ids[..mid].to_vec();
        high = ids[mid..].to_vec();
    }
    split_recursive(ds, low, depth + 1, min_pts, lines, rng, out);
    split_recursive(ds, high, depth + 1, min_pts, lines, rng, out);
}

/// Runs one partition round over `ids` with an explicit line sequence.
///
/// Leaf sets are disjoint, cover `ids`, and (unless flagged as depth-limit
/// leftovers) have fewer than `min_pts` members.
pub fn partition_once(
    ds: &Dataset,
    ids: &[u32],
    min_pts: usize,
    lines: &[RandomLine],
    rng: &mut RngStream,
) -> Result<PartitionOutcome> {
    if min_pts < 2 {
        return Err(Error::InvalidConfig(format!(
            "min_pts must be at least 2, got {min_pts}"
        )));
    }
    if lines.is_empty() {
        return Err(Error::InvalidConfig("line sequence is empty".into()));
    }
    for line in lines {
        if line.dim() != ds.dim() {
            return Err(Error::DimensionMismatch {
                expected: ds.dim(),
                got: line.dim(),
            });
        }
    }
    let mut sorted: Vec<u32> = ids.to_vec();
    sorted.sort_unstable();
    for &id in &sorted {
        if id as usize >= ds.len() {
            return Err(Error::PointIdOutOfRange {
                id: id as usize,
                len: ds.len(),
            });
        }
    }
    let mut out = PartitionOutcome {
        sets: Vec::new(),
        flagged: Vec::new(),
        max_depth: 0,
        depth_exhausted: false,
    };
    let mut provider = SliceLines(lines);
    split_recursive(ds, sorted, 0, min_pts, &mut provider, rng, &mut out);
    Ok(out)
}

fn run_round(ds: &Dataset, cfg: &PartitionConfig, round: usize) -> PartitionOutcome {
    let r = round as u64;
    let perturbed;
    let points: &Dataset = if cfg.l_per > 0.0 {
        let mut rng = RngStream::new(cfg.master_seed, &[r, STREAM_PERTURB]);
        perturbed = perturb(ds, cfg.l_per, &mut rng).expect("l_per validated");
        &perturbed
    } else {
        ds
    };
    let mut lines = LazyLines {
        master_seed: cfg.master_seed,
        round: r,
        dim: ds.dim(),
        limit: cfg.lines_per_round,
        cache: Vec::new(),
    };
    let mut rng = RngStream::new(cfg.master_seed, &[r, STREAM_SPLIT]);
    let ids: Vec<u32> = (0..ds.len() as u32).collect();
    let mut out = PartitionOutcome {
        sets: Vec::new(),
        flagged: Vec::new(),
        max_depth: 0,
        depth_exhausted: false,
    };
    split_recursive(points, ids, 0, cfg.min_pts, &mut lines, &mut rng, &mut out);
    out
}

/// Runs `cfg.rounds` independent partition rounds, each on freshly perturbed
/// points, and maps every leaf set back to original point ids.
///
/// The result is a pure function of `(ds, cfg)`: rounds derive independent
/// substreams, so concurrent execution cannot change the outcome.
pub fn perturb_multi_partition(ds: &Dataset, cfg: &PartitionConfig) -> Result<PartitionFamily> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    // Perturbed point i keeps id i, so the map back to original ids
    // is positional.
    let outcomes = exec::map_indexed(cfg.rounds, |r| run_round(ds, cfg, r));
    let mut family = PartitionFamily {
        sets: Vec::new(),
        round_of_set: Vec::new(),
        flagged: Vec::new(),
        rounds: cfg.rounds,
        round_max_depth: Vec::with_capacity(cfg.rounds),
        round_depth_exhausted: Vec::with_capacity(cfg.rounds),
    };
    for (r, out) in outcomes.into_iter().enumerate() {
        family.round_max_depth.push(out.max_depth as u32);
        family.round_depth_exhausted.push(out.depth_exhausted);
        for (set, flag) in out.sets.into_iter().zip(out.flagged) {
            family.sets.push(set);
            family.round_of_set.push(r as u32);
            family.flagged.push(flag);
        }
    }
    Ok(family)
}
