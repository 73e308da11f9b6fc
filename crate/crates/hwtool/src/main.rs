use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hwtool::{suites, Format, RunConfig, Suite};

#[derive(Parser)]
#[command(name = "hwtool", version, about = "Checks Heisenberg-Weil characters, Gauss sums and torsor counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the datum and the polarization.
    Validate(Common),
    /// Character values, multiplicativity, irreducibility and support.
    CharacterTable(Common),
    /// Gauss sums by brute force and by reduction, with recurrence certificates.
    GaussSum(Common),
    /// Torsor counts, their certificates and fixed-locus sums.
    TorsorCount(Common),
    /// Every suite.
    VerifyAll(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Last t of every sequence.
    #[arg(long)]
    t_max: Option<u32>,
    /// Enumeration cap.
    #[arg(long)]
    cap: Option<u64>,
    /// Relative tolerance for root magnitudes.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output path; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Include wall-clock time in the report (makes it non-reproducible).
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    let (common, selected): (&Common, Vec<Suite>) = match &cli.command {
        Command::Validate(c) => (c, vec![Suite::Validate]),
        Command::CharacterTable(c) => (c, vec![Suite::CharacterTable]),
        Command::GaussSum(c) => (c, vec![Suite::GaussSum]),
        Command::TorsorCount(c) => (c, vec![Suite::TorsorCount]),
        Command::VerifyAll(c) => (c, Suite::ALL.to_vec()),
    };
    let mut config = RunConfig::from_path(&common.config)?;
    if common.t_max.is_some() {
        config.t_max = common.t_max;
    }
    if common.cap.is_some() {
        config.cap = common.cap;
    }
    if common.tolerance.is_some() {
        config.tolerance = common.tolerance;
    }
    config.check()?;
    let start = Instant::now();
    let mut report = suites::run(&config, &selected);
    if common.timing {
        report.timing_ms = Some(start.elapsed().as_millis());
    }
    match &common.out {
        Some(path) => {
            let mut f = std::fs::File::create(path).with_context(|| format!("IoFailure: {}", path.display()))?;
            report.write(&mut f, common.format)?;
            if common.format == Format::CsvSummary {
                let seq = path.with_extension("sequences.csv");
                std::fs::write(&seq, report.to_csv_sequences()?).with_context(|| format!("IoFailure: {}", seq.display()))?;
            }
        }
        None => report.write(&mut std::io::stdout().lock(), common.format)?,
    }
    Ok(report.ok())
}
