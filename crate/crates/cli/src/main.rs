//! Config-driven frontend for the fluctuating-sphere oscillator simulator.
//!
//! Exit codes: 0 success, 1 failed validation checks, 2 configuration errors,
//! 3 numerical failures. Logs go to stderr (`SPHOSC_LOG` controls verbosity);
//! data goes to files only.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use commands::Ctx;
use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(
    name = "sphosc",
    version,
    about = "Spectra, transition rates and propagation for a quantum oscillator on a sphere with a fluctuating radius"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the output directory from the configuration.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Override the output format from the configuration (csv | json).
    #[arg(long, global = true)]
    format: Option<String>,
    /// Cap the number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, angular-momentum labels and degeneracy clusters.
    Spectrum,
    /// Coupling matrix elements between eigenstates.
    Melem,
    /// Golden-rule rates per mode and channel.
    Rates,
    /// Time-dependent propagation of an initial eigenstate.
    Propagate,
    /// Transition probability per unit time over a probe-frequency grid.
    Scan,
    /// Run every module invariant and write the pass/fail manifest.
    Validate,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(format!("{e:#}"))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SPHOSC_LOG"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let config_path = cli
        .config
        .ok_or_else(|| Failure::Config("config error: --config PATH is required".into()))?;
    let raw = std::fs::read(&config_path).map_err(|e| {
        Failure::Config(format!(
            "config error: cannot read {}: {e}",
            config_path.display()
        ))
    })?;
    let config_sha256 = hex_digest(&raw);
    let text = String::from_utf8(raw)
        .map_err(|e| Failure::Config(format!("config error: not valid UTF-8: {e}")))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(fmt) = &cli.format {
        cfg.output.format = fmt.clone();
    }
    let v = cfg.validate()?;
    let dir = cli
        .output
        .unwrap_or_else(|| PathBuf::from(&cfg.output.directory));

    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config(
                "config error: --threads must be at least 1".into(),
            ));
        }
        // a later duplicate initialization (tests, repeated calls) is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }

    let format = v.format;
    let ctx = Ctx {
        cfg,
        v,
        dir,
        format,
        config_sha256,
    };

    match cli.command {
        Command::Spectrum => commands::cmd_spectrum(&ctx)?,
        Command::Melem => commands::cmd_melem(&ctx)?,
        Command::Rates => commands::cmd_rates(&ctx)?,
        Command::Propagate => commands::cmd_propagate(&ctx)?,
        Command::Scan => commands::cmd_scan(&ctx)?,
        Command::Validate => {
            let all_passed = commands::cmd_validate(&ctx)?;
            if !all_passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
