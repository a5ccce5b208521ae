//! The sweep driver: computes one row per (region, temperature), in parallel
//! when asked, buffers them in deterministic order, and writes output files
//! atomically.

use std::io::Write;
use std::path::Path;

use harmonica_core::bounds::critical_temperature;
use harmonica_core::{
    bound_report, classical_mutual_information, entanglement_entropy, log_negativity,
    reduced_symplectic_spectrum, Bandwidth, Error, PotentialMatrix, Region,
};
use rayon::prelude::*;

use crate::config::{Command, ExperimentConfig};
use crate::report::{emit_plotdata, emit_report, format_float, MeasureRow, Metadata};

/// A run error with enough context to name the offending row.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Row { context: String, source: Error },
    #[error(transparent)]
    Config(#[from] Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Environment(String),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for numerical or
    /// environmental failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Row { source, .. } | CliError::Config(source) => {
                if source.is_config() {
                    2
                } else {
                    3
                }
            }
            CliError::Io { .. } | CliError::Environment(_) => 3,
        }
    }
}

/// Which columns a subcommand fills.
#[derive(Debug, Clone, Copy)]
struct Toggles {
    entropy: bool,
    negativity: bool,
    classical: bool,
    bounds: bool,
    tc: bool,
}

impl From<Command> for Toggles {
    fn from(command: Command) -> Self {
        let none = Toggles {
            entropy: false,
            negativity: false,
            classical: false,
            bounds: false,
            tc: false,
        };
        match command {
            Command::Entropy => Toggles { entropy: true, ..none },
            Command::Negativity => Toggles { negativity: true, ..none },
            Command::Bounds => Toggles { bounds: true, ..none },
            Command::Classical => Toggles { classical: true, ..none },
            Command::Tc => Toggles { tc: true, ..none },
            Command::Sweep => Toggles {
                entropy: true,
                negativity: true,
                classical: true,
                bounds: true,
                tc: true,
            },
        }
    }
}

/// Everything a run produces: ordered rows, the stamped metadata, the full
/// report text, and (for the `tc` subcommand) the lines printed to stdout.
#[derive(Debug)]
pub struct RunArtifacts {
    pub rows: Vec<MeasureRow>,
    pub metadata: Metadata,
    pub report: String,
    pub tc_lines: Vec<String>,
}

fn require_finite(value: f64, column: &str) -> Result<f64, Error> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(column.to_string()))
    }
}

/// Critical temperature for the cut, when the notion applies: a banded
/// potential with a genuinely spread spectrum and at least one contact pair.
fn solve_tc(v: &PotentialMatrix, region: &Region) -> Result<Option<f64>, Error> {
    let k = match v.bandwidth() {
        Bandwidth::Banded(k) => k,
        Bandwidth::Unbounded => return Ok(None),
    };
    let spectrum = v.spectral_bounds();
    if spectrum.lambda_max <= spectrum.lambda_min || region.surface() == 0 {
        return Ok(None);
    }
    critical_temperature(
        spectrum.lambda_min,
        spectrum.lambda_max,
        k,
        v.lattice().dim(),
        region.surface(),
    )
    .map(Some)
}

fn measure_row(
    v: &PotentialMatrix,
    model_text: &str,
    descriptor: &str,
    region: &Region,
    temperature: f64,
    toggles: Toggles,
) -> Result<MeasureRow, Error> {
    let entropy_bits = if toggles.entropy {
        let spectrum = reduced_symplectic_spectrum(v, region)?;
        Some(require_finite(entanglement_entropy(&spectrum), "entropy_bits")?)
    } else {
        None
    };
    let log_negativity_bits = if toggles.negativity {
        Some(require_finite(
            log_negativity(v, region, temperature)?,
            "log_negativity_bits",
        )?)
    } else {
        None
    };
    let classical_mi_bits = if toggles.classical && !region.is_full() {
        Some(require_finite(
            classical_mutual_information(v, region)?,
            "classical_mi_bits",
        )?)
    } else {
        None
    };
    let (lower, upper_zero, upper_finite, area) = if toggles.bounds {
        let report = bound_report(v, region, temperature)?;
        let per_surface = report.area_coefficient.or(report.zeta_coefficient);
        (
            Some(require_finite(report.lower_general, "lower_bound_bits")?),
            Some(require_finite(report.upper_zero_t, "upper_zero_t_bits")?),
            report
                .upper_finite_t
                .map(|x| require_finite(x, "upper_finite_t_bits"))
                .transpose()?,
            per_surface
                .map(|c| require_finite(c * report.surface as f64, "area_bound_bits"))
                .transpose()?,
        )
    } else {
        (None, None, None, None)
    };
    let t_c = if toggles.tc { solve_tc(v, region)? } else { None };
    Ok(MeasureRow {
        dim: v.lattice().dim(),
        side: v.lattice().side(),
        model: model_text.to_string(),
        region: descriptor.to_string(),
        volume: region.volume(),
        surface: region.surface(),
        entropy_bits,
        log_negativity_bits,
        classical_mi_bits,
        lower_bound_bits: lower,
        upper_zero_t_bits: upper_zero,
        upper_finite_t_bits: upper_finite,
        area_bound_bits: area,
        t_c,
    })
}

/// Computes every row of the run, in deterministic (region, then ascending
/// temperature) order regardless of how many worker threads execute them.
pub fn compute_rows(config: &ExperimentConfig) -> Result<Vec<MeasureRow>, CliError> {
    let v = config.build_potential().map_err(CliError::Config)?;
    let toggles = Toggles::from(config.command);
    let tasks: Vec<(usize, &(String, Region), f64)> = config
        .regions
        .iter()
        .flat_map(|pair| config.temps.iter().map(move |&t| (pair, t)))
        .enumerate()
        .map(|(index, (pair, t))| (index, pair, t))
        .collect();
    let run_task = |&(index, (descriptor, region), temperature): &(
        usize,
        &(String, Region),
        f64,
    )|
     -> Result<(usize, MeasureRow), CliError> {
        measure_row(&v, &config.model_text, descriptor, region, temperature, toggles)
            .map(|row| (index, row))
            .map_err(|source| CliError::Row {
                context: format!(
                    "model={}, region={descriptor}, T={}",
                    config.model_text,
                    format_float(temperature)
                ),
                source,
            })
    };
    let mut indexed: Vec<(usize, MeasureRow)> = match config.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Environment(format!("thread pool: {e}")))?;
            pool.install(|| tasks.par_iter().map(run_task).collect::<Result<_, _>>())?
        }
        None => tasks.par_iter().map(run_task).collect::<Result<_, _>>()?,
    };
    indexed.sort_by_key(|&(index, _)| index);
    Ok(indexed.into_iter().map(|(_, row)| row).collect())
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let parent = match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => dir,
        _ => Path::new("."),
    };
    let io_context = |what: &str| {
        let path = path.display();
        format!("{what} for {path}")
    };
    let mut staged = tempfile::NamedTempFile::new_in(parent).map_err(|source| CliError::Io {
        context: io_context("staging output"),
        source,
    })?;
    staged
        .write_all(contents.as_bytes())
        .map_err(|source| CliError::Io {
            context: io_context("writing output"),
            source,
        })?;
    staged.persist(path).map_err(|source| CliError::Io {
        context: io_context("replacing output"),
        source: source.error,
    })?;
    Ok(())
}

/// Runs the configured experiment end to end: compute rows, stamp metadata,
/// write the report (and plot subset) atomically where paths were given.
/// Returns the artifacts so callers — including tests — can inspect them.
pub fn execute(config: &ExperimentConfig) -> Result<RunArtifacts, CliError> {
    let rows = compute_rows(config)?;
    let vacuous_lower_rows: Vec<usize> = rows
        .iter()
        .enumerate()
        .filter(|(_, row)| row.lower_bound_bits.is_some_and(|lower| lower <= 0.0))
        .map(|(index, _)| index)
        .collect();
    let metadata = Metadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.canonical_line(),
        config_sha256: config.config_hash(),
        seed: config.seed,
        temps: config.temps.clone(),
        vacuous_lower_rows,
    };
    let report = emit_report(&rows, &metadata);

    let mut tc_lines = Vec::new();
    if config.command == Command::Tc {
        let v = config.build_potential().map_err(CliError::Config)?;
        for ((descriptor, region), row) in config.regions.iter().zip(&rows) {
            let t_c = row.t_c.ok_or_else(|| CliError::Row {
                context: format!("region={descriptor}"),
                source: Error::InvalidParameter(
                    "critical temperature is undefined here (no contact pairs, flat \
                     spectrum, or unbounded couplings)"
                        .into(),
                ),
            })?;
            let above = 1.05 * t_c;
            let verification = log_negativity(&v, region, above).map_err(|source| {
                CliError::Row {
                    context: format!("region={descriptor}, T={}", format_float(above)),
                    source,
                }
            })?;
            tc_lines.push(format!("region {descriptor}: T_c = {}", format_float(t_c)));
            tc_lines.push(format!(
                "region {descriptor}: E^N(1.05 T_c) = {}",
                format_float(verification)
            ));
        }
    }

    if let Some(path) = &config.out {
        write_atomic(path, &report)?;
    }
    if let Some(path) = &config.plot_out {
        write_atomic(path, &emit_plotdata(&rows))?;
    }
    Ok(RunArtifacts {
        rows,
        metadata,
        report,
        tc_lines,
    })
}
