use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use avdl_cli::{run, Command, RunConfig};

/// Regenerates link-level simulation data from scenario files.
///
/// Output goes to --out, or to $AVDL_OUT_DIR/<scenario>-<command>, or to
/// out/<scenario>-<command>.
#[derive(Parser)]
#[command(name = "avdl", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory, replaced atomically.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Do not print the summary.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// BER curves for every scheme (ber.csv).
    Ber,
    /// PAPR CCDF for every scheme (papr.csv).
    Papr,
    /// Welch PSD for every scheme (psd.csv).
    Psd,
    /// BER, PAPR and link-margin table (lm.csv).
    LmTable,
    /// SC-FDMA against direct filtering (scfdma_verify.csv, waveform.csv).
    ScfdmaVerify,
    /// Multiplication counts (complexity.csv).
    Complexity,
    /// Timing of both block paths (bench.csv).
    Bench,
    /// Burst build/parse over D8PSK and AWGN (frame.csv, frame_dump.txt).
    FrameRoundtrip,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Ber => Command::Ber,
            Cmd::Papr => Command::Papr,
            Cmd::Psd => Command::Psd,
            Cmd::LmTable => Command::LmTable,
            Cmd::ScfdmaVerify => Command::ScfdmaVerify,
            Cmd::Complexity => Command::Complexity,
            Cmd::Bench => Command::Bench,
            Cmd::FrameRoundtrip => Command::FrameRoundtrip,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(scenario) = cli.scenario else {
        eprintln!("error: --scenario <FILE> is required");
        return ExitCode::from(2);
    };
    let cfg = RunConfig {
        command: cli.command.into(),
        scenario,
        out: cli.out,
        seed: cli.seed,
        jobs: cli.jobs,
        quiet: cli.quiet,
    };
    match run(&cfg) {
        Ok(report) => {
            if !cfg.quiet {
                print!("{}", report.artifacts.summary);
                println!("wrote {}", report.out.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
