//! Experiment configuration: merging config-file and command-line settings,
//! validating them into a runnable plan, and producing the canonical
//! description string whose hash stamps every output file.

use std::collections::BTreeMap;
use std::path::PathBuf;

use harmonica_core::potential::{canonical_model_text, parse_model};
use harmonica_core::{Boundary, Error, LatticeSpec, PotentialMatrix, Region, Result};
use sha2::{Digest, Sha256};

use crate::report::format_float;

/// Which measures a run computes. Chosen by the subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Entropy of entanglement only.
    Entropy,
    /// Logarithmic negativity per temperature.
    Negativity,
    /// Analytic bounds only.
    Bounds,
    /// Classical mutual information only.
    Classical,
    /// Critical temperature plus its verification value.
    Tc,
    /// Everything that applies.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Entropy => "entropy",
            Command::Negativity => "negativity",
            Command::Bounds => "bounds",
            Command::Classical => "classical",
            Command::Tc => "tc",
            Command::Sweep => "sweep",
        }
    }
}

/// Settings as they arrive from a config file or command-line flags, before
/// validation. `None` means "not given here"; merging lets flags override
/// file values key by key.
#[derive(Debug, Default, Clone)]
pub struct RawSettings {
    pub dim: Option<usize>,
    pub n: Option<usize>,
    pub boundary: Option<String>,
    pub model: Option<String>,
    pub regions: Vec<String>,
    pub temps: Option<String>,
    pub sweep_blocks: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub plot_out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub force: bool,
}

impl RawSettings {
    /// Parses the flat `key = value` config format. Keys mirror the
    /// command-line flags one to one; unknown keys are hard errors. Blank
    /// lines and `#` comments are skipped; `region` may repeat.
    pub fn from_file(text: &str) -> Result<Self> {
        let mut settings = RawSettings::default();
        for (number, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("config line {}: expected `key = value`", number + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_usize = |what: &str| -> Result<usize> {
                value.parse().map_err(|_| {
                    Error::Parse(format!("config line {}: bad {what} `{value}`", number + 1))
                })
            };
            match key {
                "dim" => settings.dim = Some(parse_usize("dimension")?),
                "n" => settings.n = Some(parse_usize("side length")?),
                "boundary" => settings.boundary = Some(value.to_string()),
                "model" => settings.model = Some(value.to_string()),
                "region" => settings.regions.push(value.to_string()),
                "temps" => settings.temps = Some(value.to_string()),
                "sweep-blocks" => settings.sweep_blocks = Some(value.to_string()),
                "seed" => {
                    settings.seed = Some(value.parse().map_err(|_| {
                        Error::Parse(format!("config line {}: bad seed `{value}`", number + 1))
                    })?)
                }
                "out" => settings.out = Some(PathBuf::from(value)),
                "plot-out" => settings.plot_out = Some(PathBuf::from(value)),
                "threads" => settings.threads = Some(parse_usize("thread count")?),
                "force" => {
                    settings.force = match value {
                        "true" => true,
                        "false" => false,
                        _ => {
                            return Err(Error::Parse(format!(
                                "config line {}: force must be true or false",
                                number + 1
                            )))
                        }
                    }
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "config line {}: unknown key `{key}`",
                        number + 1
                    )))
                }
            }
        }
        Ok(settings)
    }

    /// Overlays `over` on `self`: any value given in `over` wins, regions
    /// given in `over` replace the base list, and `force` is sticky.
    pub fn overlaid_with(mut self, over: RawSettings) -> RawSettings {
        if over.dim.is_some() {
            self.dim = over.dim;
        }
        if over.n.is_some() {
            self.n = over.n;
        }
        if over.boundary.is_some() {
            self.boundary = over.boundary;
        }
        if over.model.is_some() {
            self.model = over.model;
        }
        if !over.regions.is_empty() {
            self.regions = over.regions;
        }
        if over.temps.is_some() {
            self.temps = over.temps;
        }
        if over.sweep_blocks.is_some() {
            self.sweep_blocks = over.sweep_blocks;
        }
        if over.seed.is_some() {
            self.seed = over.seed;
        }
        if over.out.is_some() {
            self.out = over.out;
        }
        if over.plot_out.is_some() {
            self.plot_out = over.plot_out;
        }
        if over.threads.is_some() {
            self.threads = over.threads;
        }
        self.force |= over.force;
        self
    }
}

/// A fully validated run plan: every text spec parsed, every region resolved,
/// temperatures sorted. Building one performs no heavy numerics beyond model
/// validation.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub lattice: LatticeSpec,
    /// Canonical model text (seed pinned for disordered models).
    pub model_text: String,
    /// Region descriptor and resolved region, in output order.
    pub regions: Vec<(String, Region)>,
    /// Ascending, deduplicated temperatures.
    pub temps: Vec<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub plot_out: Option<PathBuf>,
    pub threads: Option<usize>,
}

/// Dense diagonalization is cubic in `n^D`; refuse beyond this site count
/// unless the caller insists with `--force`.
const SITE_GUARD: usize = 5000;

impl ExperimentConfig {
    pub fn resolve(command: Command, raw: &RawSettings) -> Result<ExperimentConfig> {
        let dim = raw
            .dim
            .ok_or_else(|| Error::InvalidParameter("missing lattice dimension (--dim)".into()))?;
        let n = raw
            .n
            .ok_or_else(|| Error::InvalidParameter("missing lattice side (--n)".into()))?;
        let boundary = match raw.boundary.as_deref().unwrap_or("periodic") {
            "periodic" => Boundary::Periodic,
            "open" => Boundary::Open,
            other => {
                return Err(Error::Parse(format!(
                    "boundary `{other}` must be periodic or open"
                )))
            }
        };
        let lattice = LatticeSpec::new(dim, n, boundary)?;
        if lattice.site_count()? > SITE_GUARD && !raw.force {
            return Err(Error::InvalidParameter(format!(
                "lattice has {} sites (> {SITE_GUARD}); dense diagonalization will be slow — \
                 pass --force to proceed",
                lattice.site_count()?
            )));
        }

        let seed = raw.seed.unwrap_or(0);
        let model = raw
            .model
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("missing model spec (--model)".into()))?;
        let model_text = canonical_model_text(model, Some(seed))?;

        let mut regions: Vec<(String, Region)> = Vec::new();
        for text in &raw.regions {
            let descriptor = text.trim().to_string();
            regions.push((descriptor.clone(), Region::parse(&descriptor, lattice)?));
        }
        if let Some(rule) = &raw.sweep_blocks {
            for m in parse_block_range(rule, n)? {
                let lo = vec![1usize; dim];
                let hi = vec![m; dim];
                let descriptor = format!("box:{}:{}", join_coords(&lo), join_coords(&hi));
                regions.push((descriptor, Region::cube(lattice, &lo, &hi)?));
            }
        }
        if regions.is_empty() {
            return Err(Error::InvalidParameter(
                "no regions requested: pass --region or --sweep-blocks".into(),
            ));
        }

        let temps = parse_temperatures(raw.temps.as_deref().unwrap_or("0"))?;

        Ok(ExperimentConfig {
            command,
            lattice,
            model_text,
            regions,
            temps,
            seed,
            out: raw.out.clone(),
            plot_out: raw.plot_out.clone(),
            threads: raw.threads,
        })
    }

    /// Builds the validated potential matrix for this configuration.
    pub fn build_potential(&self) -> Result<PotentialMatrix> {
        parse_model(&self.model_text, self.lattice, Some(self.seed))
    }

    /// One-line canonical description of everything that affects the output
    /// rows. Execution knobs (output paths, thread count) stay out so that
    /// runs differing only in them hash — and therefore stamp — identically.
    pub fn canonical_line(&self) -> String {
        let mut pairs: BTreeMap<&str, String> = BTreeMap::new();
        pairs.insert("command", self.command.name().to_string());
        pairs.insert("dim", self.lattice.dim().to_string());
        pairs.insert("n", self.lattice.side().to_string());
        pairs.insert("boundary", self.lattice.boundary().to_string());
        pairs.insert("model", self.model_text.clone());
        pairs.insert(
            "regions",
            self.regions
                .iter()
                .map(|(descriptor, _)| descriptor.as_str())
                .collect::<Vec<_>>()
                .join(";"),
        );
        pairs.insert(
            "temps",
            self.temps
                .iter()
                .map(|&t| format_float(t))
                .collect::<Vec<_>>()
                .join(","),
        );
        pairs.insert("seed", self.seed.to_string());
        pairs
            .into_iter()
            .map(|(key, value)| format!("{key}={value}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// SHA-256 of the canonical line, in lowercase hex.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_line().as_bytes());
        digest.iter().map(|byte| format!("{byte:02x}")).collect()
    }
}

fn join_coords(coords: &[usize]) -> String {
    coords
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses `m_lo..m_hi` into the inclusive list of block sides.
fn parse_block_range(text: &str, side: usize) -> Result<Vec<usize>> {
    let (lo, hi) = text
        .trim()
        .split_once("..")
        .ok_or_else(|| Error::Parse(format!("sweep rule `{text}` must be m_lo..m_hi")))?;
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad sweep start `{lo}`")))?;
    let hi: usize = hi
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad sweep end `{hi}`")))?;
    if lo < 1 || lo > hi {
        return Err(Error::InvalidParameter(format!(
            "sweep rule {lo}..{hi} must satisfy 1 <= m_lo <= m_hi"
        )));
    }
    if hi > side {
        return Err(Error::InvalidParameter(format!(
            "sweep blocks reach m = {hi}, beyond the lattice side {side}"
        )));
    }
    Ok((lo..=hi).collect())
}

/// Parses a comma list of temperatures and returns it sorted ascending with
/// duplicates removed, matching the row order contract.
fn parse_temperatures(text: &str) -> Result<Vec<f64>> {
    let mut temps = Vec::new();
    for part in text.split(',') {
        let value: f64 = part
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad temperature `{part}`")))?;
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "temperature {value} must be finite and nonnegative"
            )));
        }
        temps.push(value);
    }
    if temps.is_empty() {
        return Err(Error::InvalidParameter("empty temperature list".into()));
    }
    temps.sort_by(f64::total_cmp);
    temps.dedup();
    Ok(temps)
}
