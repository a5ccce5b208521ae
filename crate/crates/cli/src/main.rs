use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use harmonica_cli::run::CliError;
use harmonica_cli::{Command, ExperimentConfig, RawSettings};
use harmonica_core::Error;

/// Entanglement measures and area-law bounds for harmonic lattices.
///
/// Builds a coupling-matrix model on a D-dimensional cubic lattice, computes
/// exact measures (entropy of entanglement, logarithmic negativity,
/// classical mutual information) for the requested regions and temperatures,
/// evaluates every applicable analytic bound, and writes one deterministic
/// CSV row per (region, temperature).
#[derive(Parser)]
#[command(name = "harmonica", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Order,
}

#[derive(Subcommand)]
enum Order {
    /// Entropy of entanglement of each region's ground-state reduction
    Entropy(CommonArgs),
    /// Logarithmic negativity of the thermal state at each temperature
    Negativity(CommonArgs),
    /// Analytic lower/upper/area-law bounds for each region
    Bounds(CommonArgs),
    /// Classical mutual information of the Gibbs distribution
    Classical(CommonArgs),
    /// Critical temperature of each cut, with an E^N verification value
    Tc(CommonArgs),
    /// Everything at once: measures, bounds, and critical temperatures
    Sweep(CommonArgs),
}

impl Order {
    fn split(self) -> (Command, CommonArgs) {
        match self {
            Order::Entropy(args) => (Command::Entropy, args),
            Order::Negativity(args) => (Command::Negativity, args),
            Order::Bounds(args) => (Command::Bounds, args),
            Order::Classical(args) => (Command::Classical, args),
            Order::Tc(args) => (Command::Tc, args),
            Order::Sweep(args) => (Command::Sweep, args),
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Flat `key = value` config file; flags given here override its values
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Lattice dimension D
    #[arg(long)]
    dim: Option<usize>,
    /// Lattice side length n (the lattice is [1..n]^D)
    #[arg(long)]
    n: Option<usize>,
    /// Boundary conditions: periodic | open
    #[arg(long)]
    boundary: Option<String>,
    /// Model spec: nn:c=0.2 | fr:k=4,off=1=-0.1;-1=-0.1 |
    /// dis:k=2,lo=-0.1,hi=0.1[,seed=7] | lr:alpha=3 | sq:<inner>
    #[arg(long)]
    model: Option<String>,
    /// Region spec, repeatable: box:lo:hi | sites:a;b | spec+spec unions
    #[arg(long)]
    region: Vec<String>,
    /// Comma-separated temperature list (default 0)
    #[arg(long)]
    temps: Option<String>,
    /// Sweep cubic blocks [1..m]^D for m in this range
    #[arg(long, value_name = "m_lo..m_hi")]
    sweep_blocks: Option<String>,
    /// Seed for disordered models whose spec omits seed=
    #[arg(long)]
    seed: Option<u64>,
    /// Report CSV path (stdout when absent); written atomically
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write the plot-friendly column subset here
    #[arg(long, value_name = "PATH")]
    plot_out: Option<PathBuf>,
    /// Worker threads for row computation (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Proceed even on lattices beyond the 5000-site guard
    #[arg(long)]
    force: bool,
}

impl CommonArgs {
    fn into_settings(self) -> (Option<PathBuf>, RawSettings) {
        (
            self.config,
            RawSettings {
                dim: self.dim,
                n: self.n,
                boundary: self.boundary,
                model: self.model,
                regions: self.region,
                temps: self.temps,
                sweep_blocks: self.sweep_blocks,
                seed: self.seed,
                out: self.out,
                plot_out: self.plot_out,
                threads: self.threads,
                force: self.force,
            },
        )
    }
}

fn run(order: Order) -> Result<(), CliError> {
    let (command, args) = order.split();
    let (config_path, flag_settings) = args.into_settings();
    let settings = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                CliError::Config(Error::InvalidParameter(format!(
                    "cannot read config file {}: {e}",
                    path.display()
                )))
            })?;
            RawSettings::from_file(&text)?.overlaid_with(flag_settings)
        }
        None => flag_settings,
    };
    let config = ExperimentConfig::resolve(command, &settings)?;
    let artifacts = harmonica_cli::execute(&config)?;
    for line in &artifacts.tc_lines {
        println!("{line}");
    }
    let report_went_to_stdout = config.out.is_none() && command != Command::Tc;
    if report_went_to_stdout {
        print!("{}", artifacts.report);
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli.command) {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}
