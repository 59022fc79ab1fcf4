//! Thin CLI over the library: `rank`, `sensitivity`, `validity`, `ingest`.
//! Exit codes: 0 success, 1 computation error, 2 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use indexprobe::commands::{cmd_ingest, cmd_rank, cmd_sensitivity, cmd_validity, CommandContext};
use indexprobe::config::{
    parse_months_arg, parse_window_arg, parse_zscore_mode_arg, Overrides,
};

#[derive(Parser)]
#[command(
    name = "indexprobe",
    version,
    about = "Construct composite spatial indices and probe their stability and validity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Include a wall-clock timestamp in the run manifest.
    #[arg(long, global = true)]
    stamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate index specs into ranked scores, one output per (spec, frame).
    Rank(CommonArgs),
    /// Compare a base spec against variant specs and spatial scales.
    Sensitivity(CommonArgs),
    /// Correlation, alignment, and impact-validity reports.
    Validity(CommonArgs),
    /// Run impact record pipelines into per-unit outcome tables.
    Ingest(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration (JSON). Relative paths resolve against it.
    #[arg(long)]
    config: PathBuf,
    /// Override the z-score denominator: population | sample.
    #[arg(long)]
    zscore_mode: Option<String>,
    /// Override counted months: `5-9` or `5,6,7`.
    #[arg(long)]
    months: Option<String>,
    /// Override the date window: `YYYY-MM-DD..YYYY-MM-DD`.
    #[arg(long)]
    window: Option<String>,
    /// Output directory (beats INDEXPROBE_OUT and the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_overrides(args: &CommonArgs) -> Result<Overrides, String> {
    let mut overrides = Overrides {
        out: args.out.clone(),
        ..Overrides::default()
    };
    if let Some(mode) = &args.zscore_mode {
        overrides.zscore_mode = Some(parse_zscore_mode_arg(mode).map_err(|e| e.to_string())?);
    }
    if let Some(months) = &args.months {
        overrides.months = Some(parse_months_arg(months).map_err(|e| e.to_string())?);
    }
    if let Some(window) = &args.window {
        overrides.window = Some(parse_window_arg(window).map_err(|e| e.to_string())?);
    }
    Ok(overrides)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Rank(args) => ("rank", args),
        Command::Sensitivity(args) => ("sensitivity", args),
        Command::Validity(args) => ("validity", args),
        Command::Ingest(args) => ("ingest", args),
    };

    let overrides = match build_overrides(args) {
        Ok(o) => o,
        Err(message) => {
            eprintln!("indexprobe {name}: configuration error: {message}");
            return ExitCode::from(2);
        }
    };

    let ctx = match CommandContext::load(&args.config, &overrides, cli.stamp) {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("indexprobe {name}: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    let result = match &cli.command {
        Command::Rank(_) => cmd_rank(&ctx),
        Command::Sensitivity(_) => cmd_sensitivity(&ctx),
        Command::Validity(_) => cmd_validity(&ctx),
        Command::Ingest(_) => cmd_ingest(&ctx),
    };

    match result {
        Ok(written) => {
            for file in written {
                println!("{}", ctx.out_dir.join(file).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("indexprobe {name}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
