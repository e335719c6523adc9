//! File formats: CSV ingestion with precise error locations, the merges
//! table, flat labels, and a Newick tree export.
//!
//! The merges table has one line per merge, `step,id_a,id_b,distance,
//! new_cluster_size`, where `id_a < id_b` are the smallest original point
//! ids of the two merging clusters and the distance carries 17 significant
//! digits so files round-trip bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use rphc_core::dendrogram::MergeSequence;
use rphc_core::eval::CutLabels;
use rphc_core::geometry::Dataset;
use rphc_core::union_find::UnionFind;
use thiserror::Error;

pub const MERGES_HEADER: &str = "step,id_a,id_b,distance,new_cluster_size";

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: no data rows")]
    Empty { path: String },

    #[error("{path}:{row}: expected {expected} columns, found {got}")]
    Ragged {
        path: String,
        row: usize,
        expected: usize,
        got: usize,
    },

    #[error("{path}:{row}:{col}: cannot parse {value:?} as a number")]
    NonNumeric {
        path: String,
        row: usize,
        col: usize,
        value: String,
    },

    #[error("{path}:{row}: {message}")]
    Malformed {
        path: String,
        row: usize,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] rphc_core::Error),
}

/// Reads a numeric CSV into a dataset; row order defines point ids.
///
/// An optional header is auto-detected (a first row with any non-numeric
/// cell is skipped). Errors carry 1-based file row and column locations.
pub fn ingest_csv(path: &Path) -> Result<Dataset, CsvError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CsvError::Io {
        path: display.clone(),
        source,
    })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut expected: Option<usize> = None;
    let mut saw_any = false;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let parsed: Result<Vec<f64>, usize> = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| cell.trim().parse::<f64>().map_err(|_| c))
            .collect();
        match parsed {
            Ok(values) => {
                if let Some(width) = expected {
                    if values.len() != width {
                        return Err(CsvError::Ragged {
                            path: display,
                            row: idx + 1,
                            expected: width,
                            got: values.len(),
                        });
                    }
                } else {
                    expected = Some(values.len());
                }
                rows.push(values);
            }
            Err(col) => {
                // A non-numeric cell is only legal in the very first
                // non-empty row, which is then treated as a header.
                if saw_any {
                    return Err(CsvError::NonNumeric {
                        path: display,
                        row: idx + 1,
                        col: col + 1,
                        value: cells[col].trim().to_string(),
                    });
                }
            }
        }
        saw_any = true;
    }
    if rows.is_empty() {
        return Err(CsvError::Empty { path: display });
    }
    Ok(Dataset::from_rows(rows)?)
}

/// Renders the merges table: strictly one line per merge (no header, so a
/// two-point run yields a one-line file). Cluster ids are derived by
/// replaying the merges, so the same bytes come out regardless of which
/// engine produced the sequence.
pub fn merges_to_string(hc: &MergeSequence) -> String {
    let mut uf = UnionFind::new(hc.point_count());
    let mut out = String::with_capacity(32 * hc.len());
    for m in hc.merges() {
        let ida = uf.min_id_of(m.a);
        let idb = uf.min_id_of(m.b);
        let (lo, hi) = (ida.min(idb), ida.max(idb));
        uf.union(m.a, m.b);
        let _ = writeln!(out, "{},{lo},{hi},{:.16e},{}", m.step, m.distance, m.size);
    }
    out
}

/// Parses a merges table back into a merge sequence. The sequence is
/// assumed complete: the point count is one more than the number of merges.
pub fn read_merges(path: &Path) -> Result<MergeSequence, CsvError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CsvError::Io {
        path: display.clone(),
        source,
    })?;
    let mut merges = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line == MERGES_HEADER {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 5 {
            return Err(CsvError::Ragged {
                path: display,
                row: idx + 1,
                expected: 5,
                got: cells.len(),
            });
        }
        let field = |c: usize| -> Result<f64, CsvError> {
            cells[c].trim().parse::<f64>().map_err(|_| CsvError::NonNumeric {
                path: display.clone(),
                row: idx + 1,
                col: c + 1,
                value: cells[c].trim().to_string(),
            })
        };
        merges.push(rphc_core::Merge {
            step: field(0)? as u32,
            a: field(1)? as u32,
            b: field(2)? as u32,
            distance: field(3)?,
            size: field(4)? as u32,
        });
    }
    if merges.is_empty() {
        return Err(CsvError::Empty { path: display });
    }
    let n = merges.len() + 1;
    for m in &merges {
        if m.a as usize >= n || m.b as usize >= n {
            return Err(CsvError::Malformed {
                path: display,
                row: m.step as usize + 2,
                message: format!("merge ids ({}, {}) exceed point count {n}", m.a, m.b),
            });
        }
    }
    Ok(MergeSequence::new(n, merges))
}

pub fn labels_to_string(labels: &CutLabels) -> String {
    let mut out = String::from("id,label\n");
    for (id, label) in labels.labels.iter().enumerate() {
        let _ = writeln!(out, "{id},{label}");
    }
    out
}

pub fn dataset_to_string(ds: &Dataset) -> String {
    let mut out = String::new();
    for row in ds.rows() {
        let mut first = true;
        for x in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{x:.16e}");
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn truth_labels_to_string(labels: &[u32]) -> String {
    let mut out = String::from("id,label\n");
    for (id, label) in labels.iter().enumerate() {
        let _ = writeln!(out, "{id},{label}");
    }
    out
}

/// Newick tree with merge distances as internal node labels.
pub fn newick_string(hc: &MergeSequence) -> String {
    let mut uf = UnionFind::new(hc.point_count());
    let mut text: Vec<String> = (0..hc.point_count()).map(|i| i.to_string()).collect();
    for m in hc.merges() {
        let (ra, rb) = (uf.find(m.a) as usize, uf.find(m.b) as usize);
        let combined = format!("({},{}){}", text[ra], text[rb], m.distance);
        let root = uf.union(m.a, m.b).expect("merge events are distinct clusters") as usize;
        text[root] = combined;
    }
    let mut uf2 = UnionFind::new(hc.point_count());
    for m in hc.merges() {
        uf2.union(m.a, m.b);
    }
    let root = uf2.find(0) as usize;
    format!("{};", text[root])
}
