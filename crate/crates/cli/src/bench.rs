//! The benchmark harness: a TOML suite spec expands into (size, seed,
//! algorithm) cells over synthetic Gaussian blobs; each cell reports wall
//! time, distance computations, and preservation against the exact oracle
//! where the point count permits one.

use anyhow::{bail, Context};
use serde::Deserialize;
use std::fmt::Write as _;

use crate::driver::{execute, oracle_for, Linkage, Mode, RunSettings};
use rphc_core::eval::preservation;
use rphc_core::rng::derive_seed;
use rphc_core::synthetic::{blob_sizes, gaussian_blobs_sized};

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSpec {
    /// Total point counts, one dataset per (size, seed).
    pub sizes: Vec<usize>,
    pub d: usize,
    pub seeds: Vec<u64>,
    /// Any of: "rp-slc", "rp-alc", "oracle-slc", "oracle-alc".
    pub algorithms: Vec<String>,
    /// "parameter-free" or "fixed" (rp-slc only) for the rp-* algorithms.
    pub mode: String,
    pub min_pts: usize,
    pub rounds_factor: f64,
    pub cf: f64,
    pub clusters: usize,
    pub spread: f64,
    pub separation: f64,
    pub compare_oracle: bool,
    /// Oracles (and preservation scoring) only run for sizes up to this.
    pub oracle_limit: usize,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            sizes: Vec::new(),
            d: 32,
            seeds: vec![1],
            algorithms: vec!["rp-slc".into(), "rp-alc".into()],
            mode: "parameter-free".into(),
            min_pts: 14,
            rounds_factor: 20.0,
            cf: 0.66,
            clusters: 5,
            spread: 1.0,
            separation: 100.0,
            compare_oracle: true,
            oracle_limit: 5000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub n: usize,
    pub d: usize,
    pub algorithm: String,
    pub seed: u64,
    pub wall_seconds: f64,
    pub distance_computations: u64,
    pub preservation: Option<f64>,
    pub final_min_pts: Option<usize>,
    pub doublings: Option<u32>,
}

#[derive(Debug, Clone, Copy)]
enum Algorithm {
    Rp(Linkage),
    Oracle(Linkage),
}

fn parse_algorithm(name: &str) -> anyhow::Result<Algorithm> {
    Ok(match name {
        "rp-slc" => Algorithm::Rp(Linkage::Slc),
        "rp-alc" => Algorithm::Rp(Linkage::Alc),
        "oracle-slc" => Algorithm::Oracle(Linkage::Slc),
        "oracle-alc" => Algorithm::Oracle(Linkage::Alc),
        other => bail!(
            "unknown algorithm {other:?} (expected rp-slc, rp-alc, oracle-slc or oracle-alc)"
        ),
    })
}

fn parse_mode(name: &str) -> anyhow::Result<Mode> {
    Ok(match name {
        "parameter-free" => Mode::ParameterFree,
        "fixed" => Mode::Fixed,
        other => bail!("unknown mode {other:?} (expected parameter-free or fixed)"),
    })
}

pub fn load_suite(path: &std::path::Path) -> anyhow::Result<SuiteSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read suite spec {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid suite spec {}", path.display()))
}

fn run_cell(spec: &SuiteSpec, n: usize, seed: u64, algorithm: &str) -> anyhow::Result<BenchRow> {
    let algo = parse_algorithm(algorithm)?;
    let mode = parse_mode(&spec.mode)?;
    let data_seed = derive_seed(seed, n as u64);
    let (ds, _) = gaussian_blobs_sized(
        &blob_sizes(n, spec.clusters),
        spec.d,
        spec.spread,
        spec.separation,
        data_seed,
    )?;
    let (settings, is_rp) = match algo {
        Algorithm::Rp(linkage) => (
            RunSettings {
                linkage,
                mode,
                min_pts: Some(spec.min_pts),
                rounds_factor: spec.rounds_factor,
                cf: spec.cf,
                seed,
            },
            true,
        ),
        Algorithm::Oracle(linkage) => (
            RunSettings {
                linkage,
                mode: Mode::Oracle,
                min_pts: None,
                rounds_factor: spec.rounds_factor,
                cf: spec.cf,
                seed,
            },
            false,
        ),
    };
    if matches!(algo, Algorithm::Oracle(_)) && n > spec.oracle_limit {
        bail!("oracle algorithm requested for n = {n} above oracle_limit = {}", spec.oracle_limit);
    }
    let out = execute(&ds, &settings)?;
    let mut preservation_score = None;
    if is_rp && spec.compare_oracle && n <= spec.oracle_limit && out.merges.is_complete() {
        let linkage = match algo {
            Algorithm::Rp(l) => l,
            Algorithm::Oracle(l) => l,
        };
        let oracle = oracle_for(&ds, linkage);
        preservation_score = Some(preservation(&out.merges, &oracle)?.average);
    }
    Ok(BenchRow {
        n,
        d: spec.d,
        algorithm: algorithm.to_string(),
        seed,
        wall_seconds: out.wall_seconds,
        distance_computations: out.stats.distance_computations,
        preservation: preservation_score,
        final_min_pts: is_rp.then_some(out.stats.final_min_pts),
        doublings: is_rp.then_some(out.stats.doublings),
    })
}

/// Runs every cell of the suite. Cells execute concurrently (each owns its
/// seed-derived substreams); rows come back sorted so the report does not
/// depend on scheduling.
pub fn run_suite(spec: &SuiteSpec) -> anyhow::Result<Vec<BenchRow>> {
    for name in &spec.algorithms {
        parse_algorithm(name)?;
    }
    parse_mode(&spec.mode)?;
    let mut cells = Vec::new();
    for &n in &spec.sizes {
        for &seed in &spec.seeds {
            for algorithm in &spec.algorithms {
                cells.push((n, seed, algorithm.clone()));
            }
        }
    }
    let results = rphc_core::exec::map_indexed(cells.len(), |i| {
        let (n, seed, ref algorithm) = cells[i];
        run_cell(spec, n, seed, algorithm)
    });
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        rows.push(r?);
    }
    rows.sort_by(|a, b| {
        (a.n, a.d, &a.algorithm, a.seed).cmp(&(b.n, b.d, &b.algorithm, b.seed))
    });
    Ok(rows)
}

pub const REPORT_HEADER: &str =
    "n,d,algorithm,seed,wall_time_s,distance_computations,preservation,final_min_pts,doublings";

pub fn report_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        let preservation = r
            .preservation
            .map_or(String::new(), |p| format!("{p:.12}"));
        let min_pts = r.final_min_pts.map_or(String::new(), |m| m.to_string());
        let doublings = r.doublings.map_or(String::new(), |d| d.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{},{},{},{}",
            r.n,
            r.d,
            r.algorithm,
            r.seed,
            r.wall_seconds,
            r.distance_computations,
            preservation,
            min_pts,
            doublings
        );
    }
    out
}

pub fn report_summary(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let preservation = r
            .preservation
            .map_or("-".to_string(), |p| format!("{p:.6}"));
        let _ = writeln!(
            out,
            "n={:<6} {:<11} seed={:<4} time={:>9.3}s distances={:<12} preservation={}",
            r.n, r.algorithm, r.seed, r.wall_seconds, r.distance_computations, preservation
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_suite_produces_empty_report() {
        let spec = SuiteSpec {
            sizes: vec![],
            ..SuiteSpec::default()
        };
        let rows = run_suite(&spec).unwrap();
        assert!(rows.is_empty());
        assert_eq!(report_to_csv(&rows), format!("{REPORT_HEADER}\n"));
    }

    #[test]
    fn small_suite_reports_preservation() {
        let spec = SuiteSpec {
            sizes: vec![40],
            d: 4,
            seeds: vec![1, 2],
            algorithms: vec!["rp-slc".into(), "oracle-slc".into()],
            separation: 30.0,
            clusters: 3,
            ..SuiteSpec::default()
        };
        let rows = run_suite(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        for row in rows.iter().filter(|r| r.algorithm == "rp-slc") {
            assert!(row.preservation.is_some());
            assert!(row.preservation.unwrap() > 0.99);
        }
        for row in rows.iter().filter(|r| r.algorithm == "oracle-slc") {
            assert!(row.preservation.is_none());
            assert_eq!(row.distance_computations, (40 * 39 / 2) as u64);
        }
    }

    #[test]
    fn unknown_algorithm_is_rejected() {
        let spec = SuiteSpec {
            sizes: vec![10],
            algorithms: vec!["k-means".into()],
            ..SuiteSpec::default()
        };
        assert!(run_suite(&spec).is_err());
    }
}
