//! Runs one clustering configuration against a dataset.

use std::time::Instant;

use anyhow::{bail, Context};
use rphc_core::dendrogram::MergeSequence;
use rphc_core::geometry::Dataset;
use rphc_core::oracle::{brute_alc, brute_slc};
use rphc_core::partition::PartitionConfig;
use rphc_core::slc::RunStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Linkage {
    Slc,
    Alc,
}

impl std::fmt::Display for Linkage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Linkage::Slc => "slc",
            Linkage::Alc => "alc",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Fixed,
    ParameterFree,
    Oracle,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Fixed => "fixed",
            Mode::ParameterFree => "parameter-free",
            Mode::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunSettings {
    pub linkage: Linkage,
    pub mode: Mode,
    pub min_pts: Option<usize>,
    pub rounds_factor: f64,
    pub cf: f64,
    pub seed: u64,
}

#[derive(Debug)]
pub struct RunOutput {
    pub merges: MergeSequence,
    pub stats: RunStats,
    /// Algorithm time only; file I/O and dataset generation excluded.
    pub wall_seconds: f64,
}

fn oracle_stats(n: usize) -> RunStats {
    RunStats {
        distance_computations: (n * n.saturating_sub(1) / 2) as u64,
        iterations: 1,
        final_min_pts: n,
        ..RunStats::default()
    }
}

/// Executes the configured algorithm. Fixed mode may return an incomplete
/// sequence; the caller decides how to report it.
pub fn execute(ds: &Dataset, settings: &RunSettings) -> anyhow::Result<RunOutput> {
    let n = ds.len();
    let rounds = PartitionConfig::rounds_for(n, settings.rounds_factor);
    let start = Instant::now();
    let (merges, stats) = match (settings.linkage, settings.mode) {
        (Linkage::Slc, Mode::Oracle) => (brute_slc(ds), oracle_stats(n)),
        (Linkage::Alc, Mode::Oracle) => (brute_alc(ds), oracle_stats(n)),
        (Linkage::Slc, Mode::Fixed) => {
            let min_pts = settings
                .min_pts
                .context("--min-pts is required in fixed mode")?;
            let cfg = PartitionConfig {
                min_pts,
                rounds,
                lines_per_round: PartitionConfig::lines_for(n),
                l_per: 0.0,
                master_seed: settings.seed,
            };
            let run = rphc_core::slc::rp_slc(ds, &cfg)?;
            (run.merges, run.stats)
        }
        (Linkage::Slc, Mode::ParameterFree) => {
            let cfg = PartitionConfig {
                rounds,
                ..PartitionConfig::parameter_free_start(n, settings.seed)
            };
            let run = rphc_core::slc::rp_slc_parameter_free(ds, &cfg, settings.cf)?;
            (run.merges, run.stats)
        }
        (Linkage::Alc, Mode::ParameterFree) => {
            let cfg = PartitionConfig {
                rounds,
                ..PartitionConfig::parameter_free_start(n, settings.seed)
            };
            let run = rphc_core::alc::rp_alc_parameter_free(ds, &cfg, settings.cf)?;
            (run.merges, run.stats)
        }
        (Linkage::Alc, Mode::Fixed) => {
            bail!("fixed mode applies to single linkage only; average linkage runs parameter-free or oracle")
        }
    };
    Ok(RunOutput {
        merges,
        stats,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// The exact baseline matching a linkage.
pub fn oracle_for(ds: &Dataset, linkage: Linkage) -> MergeSequence {
    match linkage {
        Linkage::Slc => brute_slc(ds),
        Linkage::Alc => brute_alc(ds),
    }
}
