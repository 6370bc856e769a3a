//! Scenario-driven front end: each command reads a scenario file, runs one
//! pipeline and writes CSVs, `summary.txt` and `manifest.txt` into a fresh
//! output directory.

pub mod output;
pub mod pipeline;
pub mod scenario;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use avdl_core::metrics::{ber_csv, lm_csv, papr_csv, psd_csv};
use avdl_core::scfdma::{bench_csv, complexity_csv};

use crate::output::OutputDir;
use crate::pipeline::Cache;
use crate::scenario::{Scenario, ScenarioError};

/// Environment variable naming the parent of default output directories.
pub const OUT_DIR_ENV: &str = "AVDL_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ber,
    Papr,
    Psd,
    LmTable,
    ScfdmaVerify,
    Complexity,
    Bench,
    FrameRoundtrip,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Ber,
        Command::Papr,
        Command::Psd,
        Command::LmTable,
        Command::ScfdmaVerify,
        Command::Complexity,
        Command::Bench,
        Command::FrameRoundtrip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Ber => "ber",
            Command::Papr => "papr",
            Command::Psd => "psd",
            Command::LmTable => "lm-table",
            Command::ScfdmaVerify => "scfdma-verify",
            Command::Complexity => "complexity",
            Command::Bench => "bench",
            Command::FrameRoundtrip => "frame-roundtrip",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub scenario: PathBuf,
    /// Exact output directory; see [`default_out_dir`] when absent.
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub quiet: bool,
}

#[derive(Debug)]
pub enum CliError {
    /// Scenario cannot be read, parsed or validated.
    Config(String),
    Simulation(avdl_core::Error),
    /// A curve does not reach the requested operating point.
    InsufficientData(avdl_core::Error),
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Simulation(_) | CliError::Output(_) => 3,
            CliError::InsufficientData(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Simulation(e) => write!(f, "simulation failed: {e}"),
            CliError::InsufficientData(e) => write!(f, "{e}"),
            CliError::Output(m) => write!(f, "cannot write output: {m}"),
        }
    }
}

impl From<avdl_core::Error> for CliError {
    fn from(e: avdl_core::Error) -> Self {
        if e.is_insufficient_data() {
            CliError::InsufficientData(e)
        } else {
            CliError::Simulation(e)
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// `$AVDL_OUT_DIR/<scenario>-<command>`, or `out/<scenario>-<command>`.
pub fn default_out_dir(scenario_name: &str, command: Command) -> PathBuf {
    let base = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("out"), PathBuf::from);
    base.join(format!("{scenario_name}-{}", command.name()))
}

/// Files and summary produced by one command.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, String)>,
    pub summary: String,
}

impl Artifacts {
    fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }
}

/// Runs `command` on a validated scenario in the current rayon pool.
pub fn execute(command: Command, sc: &Scenario, seed: u64) -> Result<Artifacts, CliError> {
    let problems = sc.problems_for(command);
    if !problems.is_empty() {
        return Err(ScenarioError::Invalid(problems).into());
    }
    let mut cache = Cache::default();
    let mut a = Artifacts::default();
    match command {
        Command::Ber => {
            let curves = pipeline::ber_curves(sc, seed, &mut cache)?;
            a.summary = pipeline::ber_summary(&curves);
            a.file("ber.csv", ber_csv(&curves));
        }
        Command::Papr => {
            let curves = pipeline::papr_curves(sc, seed, &mut cache)?;
            a.summary = pipeline::papr_summary(&curves, sc.papr.as_ref().map_or(1e-3, |p| p.ccdf_level));
            a.file("papr.csv", papr_csv(&curves));
        }
        Command::Psd => {
            let curves = pipeline::psd_curves(sc, seed, &mut cache)?;
            let off = sc.psd.as_ref().map_or(1.5, |p| p.oob_offset);
            for (c, s) in curves.iter().zip(&sc.schemes) {
                let r = s.symbol_rate_hz.unwrap_or(sc.symbol_rate_hz);
                let _ = writeln!(a.summary, "{:<16} level at ±{off}·R ({:.0} Hz): {:.1} dB", c.label, off * r, c.level_at(off * r));
            }
            a.file("psd.csv", psd_csv(&curves));
        }
        Command::LmTable => {
            let ber = pipeline::ber_curves(sc, seed, &mut cache)?;
            let papr = pipeline::papr_curves(sc, seed, &mut cache)?;
            a.file("ber.csv", ber_csv(&ber));
            a.file("papr.csv", papr_csv(&papr));
            let rows = pipeline::lm_rows(sc, &ber, &papr, &mut cache)?;
            let _ = writeln!(a.summary, "{:<12} {:>9} {:>11} {:>8} {:>10}", "modulation", "gain dB", "backoff dB", "LM dB", "kbps");
            for r in &rows {
                let _ = writeln!(
                    a.summary,
                    "{:<12} {:>9.2} {:>11.2} {:>8.2} {:>10.3}",
                    r.modulation, r.ebn0_gain_db, r.required_backoff_db, r.lm_db, r.info_bit_rate_kbps
                );
            }
            a.file("lm.csv", lm_csv(&rows));
        }
        Command::ScfdmaVerify => {
            let v = pipeline::scfdma_verify(sc, seed, &mut cache)?;
            let first = &v.rows[0];
            let worst = v.max_error();
            let verdict = if worst < 1e-9 { "PASS" } else { "FAIL" };
            let _ = writeln!(
                a.summary,
                "N = {}, N_up = {}, K = {}, {} filter, {} mapping: max relative error {:.3e}",
                first.n, first.n_up, first.k, first.filter, first.mapping, first.tx_error.max(first.rx_error)
            );
            let _ = writeln!(a.summary, "{} randomized configurations: max relative error {worst:.3e}", v.rows.len() - 1);
            let _ = writeln!(a.summary, "max relative error {worst:.3e} {verdict}");
            let mut csv = String::from("case,filter,mapping,N,K,N_up,symbols,tx_max_rel_error,rx_max_rel_error\n");
            for r in &v.rows {
                let _ = writeln!(csv, "{},{},{},{},{},{},{},{:e},{:e}", r.case, r.filter, r.mapping, r.n, r.k, r.n_up, r.symbols, r.tx_error, r.rx_error);
            }
            a.file("scfdma_verify.csv", csv);
            let mut csv = String::from("sample,direct_re,direct_im,scfdma_re,scfdma_im\n");
            for (i, (d, s)) in v.waveform.iter().enumerate() {
                let _ = writeln!(csv, "{i},{:e},{:e},{:e},{:e}", d.re, d.im, s.re, s.im);
            }
            a.file("waveform.csv", csv);
        }
        Command::Complexity => {
            let rows = pipeline::complexity(sc, &mut cache)?;
            for r in &rows {
                let _ = writeln!(
                    a.summary,
                    "N = {:>5}: conventional {:>8}, SC-FDMA {:>10.1}, ratio {:.2}",
                    r.n,
                    r.analytic_conventional,
                    r.analytic_scfdma,
                    r.analytic_scfdma / r.analytic_conventional as f64
                );
            }
            a.file("complexity.csv", complexity_csv(&rows));
        }
        Command::Bench => {
            let rows = pipeline::bench(sc, seed, &mut cache)?;
            for r in &rows {
                let _ = writeln!(
                    a.summary,
                    "N = {:>5}: conventional {:>10.0} ns, SC-FDMA {:>10.0} ns, ratio {:.2}",
                    r.n,
                    r.median_ns_conventional,
                    r.median_ns_scfdma,
                    r.median_ns_scfdma / r.median_ns_conventional
                );
            }
            a.file("bench.csv", bench_csv(&rows));
        }
        Command::FrameRoundtrip => {
            let (rows, dump) = pipeline::frame_roundtrip(sc, seed, &mut cache)?;
            let mut csv = String::from("mode,ebn0_db,frames,frames_ok,frames_lost,bit_errors,payload_bits\n");
            for r in &rows {
                let e = r.ebn0_db.map_or("inf".to_string(), |e| e.to_string());
                let _ = writeln!(csv, "{},{e},{},{},{},{},{}", r.mode, r.frames, r.frames_ok, r.frames_lost, r.bit_errors, r.payload_bits);
                let _ = writeln!(
                    a.summary,
                    "{} Eb/N0 {e} dB: {}/{} frames exact, {} lost, {} bit errors",
                    r.mode, r.frames_ok, r.frames, r.frames_lost, r.bit_errors
                );
            }
            a.file("frame.csv", csv);
            a.file("frame_dump.txt", dump);
        }
    }
    a.file("summary.txt", a.summary.clone());
    Ok(a)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Outcome of a successful [`run`].
#[derive(Debug)]
pub struct Report {
    pub out: PathBuf,
    pub artifacts: Artifacts,
}

/// Full command: validate, simulate in a pool of `jobs` threads, write the
/// output directory atomically.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let text = std::fs::read(&cfg.scenario)
        .map_err(|e| CliError::Config(format!("cannot read scenario {}: {e}", cfg.scenario.display())))?;
    let sc = scenario::validate_scenario(&cfg.scenario)?;
    let seed = cfg.seed.unwrap_or(sc.seed);
    let out = cfg.out.clone().unwrap_or_else(|| default_out_dir(&sc.name, cfg.command));
    let dir = OutputDir::begin(&out).map_err(|e| CliError::Output(format!("{}: {e}", out.display())))?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| CliError::Output(e.to_string()))?;
    let (artifacts, threads) = pool.install(|| execute(cfg.command, &sc, seed).map(|a| (a, rayon::current_num_threads())))?;

    let manifest = manifest(cfg, &sc, &text, seed, threads, &artifacts);
    let write = || -> std::io::Result<()> {
        for (name, contents) in &artifacts.files {
            dir.write(name, contents)?;
        }
        dir.commit(&manifest)
    };
    write().map_err(|e| CliError::Output(format!("{}: {e}", out.display())))?;
    Ok(Report { out, artifacts })
}

fn manifest(cfg: &RunConfig, sc: &Scenario, text: &[u8], seed: u64, threads: usize, a: &Artifacts) -> String {
    let mut m = String::new();
    let _ = writeln!(m, "command = {}", cfg.command.name());
    let _ = writeln!(m, "scenario = {}", display_path(&cfg.scenario));
    let _ = writeln!(m, "scenario_name = {}", sc.name);
    let _ = writeln!(m, "scenario_sha256 = {}", sha256_hex(text));
    let _ = writeln!(m, "seed = {seed}");
    let _ = writeln!(m, "threads = {threads}");
    let _ = writeln!(m, "avdl_cli = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "avdl_core = {}", avdl_core::VERSION);
    let names: Vec<&str> = a.files.iter().map(|(n, _)| n.as_str()).collect();
    let _ = writeln!(m, "files = {}", names.join(" "));
    for (name, contents) in &a.files {
        let _ = writeln!(m, "sha256 {name} = {}", sha256_hex(contents.as_bytes()));
    }
    m
}

fn display_path(p: &Path) -> String {
    p.display().to_string()
}
