use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spdc_cli::commands::{self, Context, ModeChoice, Outcome, DEFAULT_ORDERS};
use spdc_cli::{CliError, RunConfig};
use spdc_core::{HGIndex, LGIndex};

/// Transverse two-photon state of SPDC with Laguerre-Gaussian pumps.
#[derive(Debug, Parser)]
#[command(name = "spdc", version)]
struct Cli {
    /// TOML run configuration; every field has a default.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for aperture sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single-mode field grids.
    Modes {
        #[command(subcommand)]
        action: ModesAction,
    },
    /// Coincidence maps without interference.
    Biphoton {
        #[command(subcommand)]
        action: BiphotonAction,
    },
    /// Beam-splitter coincidence maps.
    Hom {
        #[command(subcommand)]
        action: HomAction,
    },
    /// LG decomposition table and spiral spectrum.
    Decompose,
    /// Quantum vs classical coincidences along a null line.
    Witness {
        /// Displacement `x_mm,y_mm`; repeat for several samples.
        #[arg(long = "delta", value_parser = parse_pair_f64, value_name = "X_MM,Y_MM")]
        deltas: Vec<(f64, f64)>,
    },
    /// Numerical checks of model approximations.
    Validate {
        #[command(subcommand)]
        action: ValidateAction,
    },
}

#[derive(Debug, Subcommand)]
enum ModesAction {
    /// Magnitude and phase grids of one mode.
    Eval(ModeArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ModeSelect {
    /// Laguerre-Gaussian mode `p,l`.
    #[arg(long, value_parser = parse_lg, value_name = "P,L")]
    lg: Option<LGIndex>,
    /// Hermite-Gaussian mode `m,n`.
    #[arg(long, value_parser = parse_hg, value_name = "M,N")]
    hg: Option<HGIndex>,
    /// Hermite-Gaussian mode `m,n` after the π/2 converter.
    #[arg(long, value_parser = parse_hg, value_name = "M,N")]
    converted: Option<HGIndex>,
}

#[derive(Debug, Args)]
struct ModeArgs {
    #[command(flatten)]
    select: ModeSelect,
    /// Propagation distance from the waist in meters.
    #[arg(long = "z-m", default_value_t = 0.0, allow_negative_numbers = true)]
    z_m: f64,
}

#[derive(Debug, Subcommand)]
enum BiphotonAction {
    /// Unbalanced coincidence map over the scan grid.
    Map,
}

#[derive(Debug, Subcommand)]
enum HomAction {
    /// Coincidence map in the configured regime.
    Scan,
}

#[derive(Debug, Subcommand)]
enum ValidateAction {
    /// Worst-case error of the thin-crystal approximation per mode order.
    ThinCrystal {
        /// Mode orders, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ORDERS)]
        orders: Vec<u32>,
        /// Evaluate at this multiple of the Rayleigh range instead of `detection.Z_m`.
        #[arg(long = "z-rayleigh")]
        z_rayleigh: Option<f64>,
    },
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<(T, T), String>
where
    T::Err: std::fmt::Display,
{
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated values, got {s:?}"))?;
    let a = a.trim().parse::<T>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<T>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn parse_pair_f64(s: &str) -> Result<(f64, f64), String> {
    parse_pair(s)
}

fn parse_lg(s: &str) -> Result<LGIndex, String> {
    let (p, l): (u32, i32) = {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected p,l, got {s:?}"))?;
        (a.trim().parse().map_err(|e| format!("p: {e}"))?, b.trim().parse().map_err(|e| format!("l: {e}"))?)
    };
    LGIndex::new(p, l).map_err(|e| e.to_string())
}

fn parse_hg(s: &str) -> Result<HGIndex, String> {
    let (m, n) = parse_pair::<u32>(s)?;
    HGIndex::new(m, n).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.clone(), source: e })?;
            RunConfig::from_toml_str(&text)?
        }
        None => RunConfig::default(),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot set up thread pool: {e}")))?;
    let ctx = Context::new(config, cli.out, cli.seed);
    match cli.command {
        Command::Modes { action: ModesAction::Eval(args) } => {
            let choice = match (args.select.lg, args.select.hg, args.select.converted) {
                (Some(i), _, _) => ModeChoice::Lg(i),
                (_, Some(i), _) => ModeChoice::Hg(i),
                (_, _, Some(i)) => ModeChoice::Converted(i),
                _ => unreachable!("clap requires one mode"),
            };
            commands::modes_eval(&ctx, choice, args.z_m)
        }
        Command::Biphoton { action: BiphotonAction::Map } => commands::biphoton_map(&ctx),
        Command::Hom { action: HomAction::Scan } => commands::hom_scan(&ctx),
        Command::Decompose => commands::decompose(&ctx),
        Command::Witness { deltas } => commands::witness(&ctx, &deltas),
        Command::Validate { action: ValidateAction::ThinCrystal { orders, z_rayleigh } } => {
            commands::validate_thin_crystal(&ctx, &orders, z_rayleigh)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
