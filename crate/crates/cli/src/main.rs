//! `correlator`: runs experiment configs and the oracle self-test.
//!
//! Exit codes: 0 success, 1 invalid input, 2 a numerical check failed.

mod output;
mod presets;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use correlator_core::config::ExperimentConfig;
use correlator_core::experiments::{self, ExperimentOutput, GateCheck, RunOptions, DEFAULT_RUN_ORACLE_CAP};
use correlator_core::Error;
use serde::Serialize;
use sha2::{Digest, Sha256};

use output::Writer;

#[derive(Parser)]
#[command(name = "correlator", version, about = "Multi-time correlation functions from shifted circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset by name or a config file by path.
    Run {
        target: String,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to the config's, then `out/<experiment>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Largest register also checked against the dense oracle.
        #[arg(long, default_value_t = DEFAULT_RUN_ORACLE_CAP)]
        oracle_max_qubits: usize,
    },
    /// Random nested brackets against the dense oracle.
    Selftest {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets.
    Presets,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error("numerical check failed: {0}")]
    Gate(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> CliError {
        CliError::Output(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) | CliError::Output(_) => 1,
            CliError::Core(e) => match e {
                Error::Config(_)
                | Error::Parse { .. }
                | Error::Dimension { .. }
                | Error::NotHermitian(_)
                | Error::Resource { .. } => 1,
                Error::State(_) | Error::Projection | Error::Internal(_) => 2,
            },
            CliError::Gate(_) => 2,
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    seed: u64,
    config_sha256: String,
    version: &'static str,
    wall_time_seconds: f64,
    checks: Vec<GateCheck>,
    passed: bool,
    files: Vec<String>,
}

fn load(target: &str) -> Result<(String, String), CliError> {
    let path = Path::new(target);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{target}: {e}")))?;
        return Ok((text, target.to_string()));
    }
    match presets::find(target) {
        Some(text) => Ok((text.to_string(), format!("preset {target}"))),
        None => Err(CliError::Invalid(format!(
            "{target} is neither a config file nor a preset ({})",
            presets::names().join(", ")
        ))),
    }
}

fn run(target: &str, seed: Option<u64>, out: Option<PathBuf>, oracle_max_qubits: usize) -> Result<(), CliError> {
    let (text, origin) = load(target)?;
    let mut cfg = ExperimentConfig::from_toml_str(&text).map_err(|e| CliError::Invalid(format!("{origin}: {e}")))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.name()));
    let normalized = cfg.to_toml_string()?;
    let start = Instant::now();
    let result = experiments::run(&cfg, &RunOptions { oracle_max_qubits })?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut w = Writer::new(&dir)?;
    match &result {
        ExperimentOutput::Spectrum(s) => {
            output::write_spectrum(&mut w, s)?;
            for m in &s.momenta {
                match m.energy {
                    Some(e) => println!("k index {:>3}: energy {e:.4}", m.index),
                    None => println!("k index {:>3}: no peak above cutoff", m.index),
                }
            }
            if let Some(f) = &s.fit {
                println!(
                    "dispersion fit: rest energy {:.4} ({:.4}), speed {:.4} ({:.4})",
                    f.rest_energy, f.rest_energy_se, f.speed, f.speed_se
                );
            }
            if let Some(g) = &s.gap {
                println!("gap at k index {}: {:.4} ({:.4} - {:.4})", g.index, g.gap, g.upper, g.lower);
            }
        }
        ExperimentOutput::Otoc(o) => {
            output::write_otoc(&mut w, o)?;
            if let Some((t, f)) = o.times.iter().zip(&o.values).min_by(|a, b| a.1.re.total_cmp(&b.1.re)) {
                println!("deepest Re F = {:.4} at t = {t:.2}", f.re);
            }
        }
        ExperimentOutput::Selftest(r) => {
            output::write_selftest(&mut w, r)?;
            for c in &r.classes {
                println!(
                    "n={} b={:<3} cases={:>3} max|dev|={:.2e} spread={:.2e}",
                    c.n, c.signs, c.count, c.max_oracle_deviation, c.max_shift_spread
                );
            }
        }
    }
    let checks = result.checks();
    for c in &checks {
        let verdict = match (c.tolerance, c.passed()) {
            (None, _) => "info",
            (Some(_), true) => "ok",
            (Some(_), false) => "FAIL",
        };
        println!("check {:<32} {:.3e} [{verdict}]", c.name, c.deviation);
    }
    let passed = result.passed();
    let manifest = Manifest {
        experiment: cfg.experiment.name(),
        seed: cfg.seed,
        config_sha256: hex::encode(Sha256::digest(normalized.as_bytes())),
        version: env!("CARGO_PKG_VERSION"),
        wall_time_seconds: elapsed,
        checks: checks.clone(),
        passed,
        files: w.files().to_vec(),
    };
    w.json("manifest.json", &manifest)?;
    println!("wrote {} files to {}", w.files().len(), dir.display());
    if !passed {
        let failed: Vec<String> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.clone()).collect();
        return Err(CliError::Gate(failed.join(", ")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            target,
            seed,
            out,
            oracle_max_qubits,
        } => run(&target, seed, out, oracle_max_qubits),
        Command::Selftest { seed, out } => run("bracket_selftest", seed, out, DEFAULT_RUN_ORACLE_CAP),
        Command::Presets => {
            for name in presets::names() {
                println!("{name}");
            }
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
