use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Parser;

use rphc_cli::bench;
use rphc_cli::csv_io;
use rphc_cli::driver::{execute, oracle_for, Linkage, Mode, RunSettings};
use rphc_core::eval::{cut, preservation};
use rphc_core::synthetic::gaussian_blobs;

/// Hierarchical clustering via recursive random-projection partitioning,
/// with exact quadratic baselines for comparison.
#[derive(Parser, Debug)]
#[command(name = "rphc", version)]
struct Cli {
    /// Input CSV: numeric rows of equal arity, optional header.
    #[arg(long)]
    input: Option<PathBuf>,

    /// Linkage criterion.
    #[arg(long, value_enum, default_value_t = Linkage::Slc)]
    linkage: Linkage,

    /// fixed (rp, explicit --min-pts), parameter-free (rp, self-tuning),
    /// or oracle (exact quadratic baseline).
    #[arg(long, value_enum, default_value_t = Mode::ParameterFree)]
    mode: Mode,

    /// Leaf-size threshold for fixed mode.
    #[arg(long)]
    min_pts: Option<usize>,

    /// Partition rounds = ceil(rounds-factor * log2 N).
    #[arg(long, default_value_t = 20.0)]
    rounds_factor: f64,

    /// Frequency threshold for the parameter-free certificates.
    #[arg(long, default_value_t = 0.66)]
    cf: f64,

    /// Master seed; every random stream derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Artifact to write: merges | labels:K | summary.
    #[arg(long, default_value = "merges")]
    format: String,

    /// Also run the exact oracle and report a preservation score.
    #[arg(long)]
    compare_oracle: bool,

    /// Run the benchmark suite described by a TOML file instead of a
    /// single clustering job.
    #[arg(long)]
    bench: Option<PathBuf>,

    /// Generate synthetic Gaussian blobs instead of clustering:
    /// "clusters=K,points=P,d=D,spread=S,separation=SEP".
    #[arg(long)]
    generate: Option<String>,

    /// Where to write ground-truth labels for --generate.
    #[arg(long)]
    labels_out: Option<PathBuf>,

    /// Also export the dendrogram as a Newick tree.
    #[arg(long)]
    newick: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
enum Format {
    Merges,
    Labels(usize),
    Summary,
}

fn parse_format(text: &str) -> anyhow::Result<Format> {
    if text == "merges" {
        return Ok(Format::Merges);
    }
    if text == "summary" {
        return Ok(Format::Summary);
    }
    if let Some(k) = text.strip_prefix("labels:") {
        let k: usize = k
            .parse()
            .with_context(|| format!("invalid cluster count in --format {text:?}"))?;
        return Ok(Format::Labels(k));
    }
    bail!("unknown --format {text:?} (expected merges, labels:K or summary)")
}

fn write_artifact(path: Option<&Path>, content: &str) -> anyhow::Result<bool> {
    match path {
        Some(p) => {
            std::fs::write(p, content).with_context(|| format!("cannot write {}", p.display()))?;
            Ok(true)
        }
        None => {
            print!("{content}");
            Ok(false)
        }
    }
}

fn threads_from_env() -> anyhow::Result<Option<usize>> {
    match std::env::var("RPHC_THREADS") {
        Ok(raw) => {
            let n: usize = raw
                .trim()
                .parse()
                .with_context(|| format!("RPHC_THREADS must be a positive integer, got {raw:?}"))?;
            if n == 0 {
                bail!("RPHC_THREADS must be at least 1");
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn generate_command(cli: &Cli, spec: &str) -> anyhow::Result<i32> {
    let mut clusters = 3usize;
    let mut points = 50usize;
    let mut d = 8usize;
    let mut spread = 1.0f64;
    let mut separation = 50.0f64;
    for part in spec.split(',') {
        let (key, value) = part
            .split_once('=')
            .with_context(|| format!("expected key=value in --generate, got {part:?}"))?;
        match key.trim() {
            "clusters" => clusters = value.trim().parse()?,
            "points" => points = value.trim().parse()?,
            "d" => d = value.trim().parse()?,
            "spread" => spread = value.trim().parse()?,
            "separation" => separation = value.trim().parse()?,
            other => bail!("unknown --generate key {other:?}"),
        }
    }
    let (ds, labels) = gaussian_blobs(clusters, points, d, spread, separation, cli.seed)?;
    write_artifact(cli.output.as_deref(), &csv_io::dataset_to_string(&ds))?;
    if let Some(path) = &cli.labels_out {
        std::fs::write(path, csv_io::truth_labels_to_string(&labels))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    eprintln!(
        "generated {} points in {} clusters (d={d}, spread={spread}, separation={separation})",
        ds.len(),
        clusters
    );
    Ok(0)
}

fn bench_command(cli: &Cli, suite_path: &Path) -> anyhow::Result<i32> {
    let spec = bench::load_suite(suite_path)?;
    let rows = bench::run_suite(&spec)?;
    write_artifact(cli.output.as_deref(), &bench::report_to_csv(&rows))?;
    eprint!("{}", bench::report_summary(&rows));
    Ok(0)
}

fn run_command(cli: &Cli) -> anyhow::Result<i32> {
    let format = parse_format(&cli.format)?;
    let input = cli
        .input
        .as_deref()
        .context("--input is required (or use --bench / --generate)")?;
    let ds = csv_io::ingest_csv(input)?;
    let settings = RunSettings {
        linkage: cli.linkage,
        mode: cli.mode,
        min_pts: cli.min_pts,
        rounds_factor: cli.rounds_factor,
        cf: cli.cf,
        seed: cli.seed,
    };
    if let Format::Labels(k) = format {
        if k < 1 || k > ds.len() {
            bail!("labels:{k} out of range for {} points", ds.len());
        }
    }
    let out = execute(&ds, &settings)?;

    let mut preservation_line = None;
    if cli.compare_oracle {
        if !out.merges.is_complete() {
            preservation_line = Some("preservation=unavailable (incomplete dendrogram)".into());
        } else if ds.len() > 5000 {
            preservation_line = Some("preservation=skipped (n > 5000)".into());
        } else {
            let oracle = oracle_for(&ds, cli.linkage);
            let score = preservation(&out.merges, &oracle)?;
            preservation_line = Some(format!("preservation={:.12}", score.average));
        }
    }

    let mut summary = String::new();
    let _ = writeln!(summary, "n={}", ds.len());
    let _ = writeln!(summary, "d={}", ds.dim());
    let _ = writeln!(summary, "linkage={}", cli.linkage);
    let _ = writeln!(summary, "mode={}", cli.mode);
    let _ = writeln!(summary, "seed={}", cli.seed);
    let _ = writeln!(summary, "rounds_factor={}", cli.rounds_factor);
    let _ = writeln!(summary, "cf={}", cli.cf);
    let _ = writeln!(summary, "complete={}", out.merges.is_complete());
    let _ = writeln!(summary, "merges={}", out.merges.len());
    let _ = writeln!(
        summary,
        "distance_computations={}",
        out.stats.distance_computations
    );
    let _ = writeln!(summary, "wall_time_s={:.6}", out.wall_seconds);
    let _ = writeln!(summary, "iterations={}", out.stats.iterations);
    let _ = writeln!(summary, "doublings={}", out.stats.doublings);
    let _ = writeln!(summary, "perturb_rescales={}", out.stats.perturb_rescales);
    let _ = writeln!(summary, "final_min_pts={}", out.stats.final_min_pts);
    let _ = writeln!(
        summary,
        "depth_exhausted_rounds={}",
        out.stats.depth_exhausted_rounds
    );
    if let Some(line) = &preservation_line {
        let _ = writeln!(summary, "{line}");
    }

    let incomplete_fixed = cli.mode == Mode::Fixed && !out.merges.is_complete();
    let wrote_to_file = match format {
        Format::Merges => write_artifact(cli.output.as_deref(), &csv_io::merges_to_string(&out.merges))?,
        Format::Labels(_) if incomplete_fixed => false, // no labels to cut; remedy below
        Format::Labels(k) => {
            let labels = cut(&out.merges, k)?;
            write_artifact(cli.output.as_deref(), &csv_io::labels_to_string(&labels))?
        }
        Format::Summary => write_artifact(cli.output.as_deref(), &summary)?,
    };
    if let Some(path) = &cli.newick {
        if out.merges.is_complete() {
            std::fs::write(path, csv_io::newick_string(&out.merges))
                .with_context(|| format!("cannot write {}", path.display()))?;
        } else {
            eprintln!("newick export skipped: dendrogram incomplete");
        }
    }
    if !matches!(format, Format::Summary) {
        // Keep the artifact stream clean: the summary goes to stderr unless
        // the artifact went to a file.
        if wrote_to_file {
            print!("{summary}");
        } else {
            eprint!("{summary}");
        }
    }

    if incomplete_fixed {
        eprintln!(
            "incomplete dendrogram: {} clusters remain; --min-pts {} is too small, increase it",
            ds.len() - out.merges.len(),
            settings.min_pts.unwrap_or(0)
        );
        return Ok(2);
    }
    Ok(0)
}

fn real_main() -> anyhow::Result<i32> {
    let cli = Cli::parse();
    rphc_core::exec::init_global_threads(threads_from_env()?);
    if let Some(spec) = cli.generate.clone() {
        return generate_command(&cli, &spec);
    }
    if let Some(suite) = cli.bench.clone() {
        return bench_command(&cli, &suite);
    }
    run_command(&cli)
}

fn main() {
    match real_main() {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
