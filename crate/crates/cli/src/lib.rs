//! Command-line front end: configuration handling, the sweep driver, and the
//! deterministic CSV report formats. The binary in `main.rs` is a thin clap
//! wrapper over [`config`] + [`run`]; tests drive the same functions.

pub mod config;
pub mod report;
pub mod run;

pub use config::{Command, ExperimentConfig, RawSettings};
pub use report::{
    emit_plotdata, emit_report, format_float, parse_plotdata, parse_report, MeasureRow, Metadata,
};
pub use run::{compute_rows, execute, CliError, RunArtifacts};
