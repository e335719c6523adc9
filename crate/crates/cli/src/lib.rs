//! Library half of the `rphc` command-line tool: file formats, the run
//! driver and the benchmark harness. The binary in `main.rs` is a thin
//! argument-parsing layer over these modules.

pub mod bench;
pub mod csv_io;
pub mod driver;
