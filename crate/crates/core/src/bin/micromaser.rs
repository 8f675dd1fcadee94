use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use micromaser::generators::ModelKind;
use micromaser::runner::{run, Command, ModelConfig, PumpSpec, RunConfig};
use micromaser::Error;

#[derive(Parser)]
#[command(version, about = "Micromaser photon statistics and linewidths")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Steady-state photon distributions
    Steady(Args),
    /// Mean, variance, Mandel Q and linewidth versus pump
    Sweep(Args),
    /// Pairwise distances between models
    Compare(Args),
    /// Linewidth with and without the diagonal operators
    Linewidth(Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(clap::Args)]
struct Args {
    /// JSON run configuration ("-" reads standard input)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (standard output when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Model name; repeat to select several
    #[arg(long = "model")]
    models: Vec<String>,
    /// Dimensionless coupling gτ̄
    #[arg(long, allow_negative_numbers = true)]
    gtau: Option<f64>,
    /// Pump A/κ as a value or START:STOP:STEPS
    #[arg(long, allow_hyphen_values = true)]
    pump: Option<String>,
}

fn build_config(args: &Args) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let gtau = args
                .gtau
                .ok_or_else(|| Error::Config("--gtau is required without --config".into()))?;
            let pump = args
                .pump
                .as_deref()
                .ok_or_else(|| Error::Config("--pump is required without --config".into()))?;
            if args.models.is_empty() {
                return Err(Error::Config("--model is required without --config".into()));
            }
            RunConfig::new(Vec::new(), gtau, pump.parse()?)
        }
    };
    if !args.models.is_empty() {
        cfg.models = args
            .models
            .iter()
            .map(|m| m.parse::<ModelKind>().map(ModelConfig::named))
            .collect::<Result<_, _>>()?;
    }
    if let Some(g) = args.gtau {
        cfg.g_tau_bar = g;
    }
    if let Some(p) = &args.pump {
        cfg.pump = p.parse::<PumpSpec>()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    // usage errors share exit code 1 with configuration errors
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (command, args) = match &cli.command {
        Cmd::Steady(a) => (Command::Steady, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Compare(a) => (Command::Compare, a),
        Cmd::Linewidth(a) => (Command::Linewidth, a),
    };
    let cfg = match build_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let output = match run(command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    for f in &output.failures {
        eprintln!("failed: {f}");
    }
    let text = match args.format {
        Format::Csv => output.to_csv(),
        Format::Json => output.to_json(),
    };
    let text = match text {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let written = match &args.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(output.exit_code() as u8)
}
