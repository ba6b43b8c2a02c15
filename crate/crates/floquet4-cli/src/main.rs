//! `floquet4` command-line front end: writes CSV tables and JSON reports under `--out`.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{Command, RunConfig};

#[derive(Parser)]
#[command(name = "floquet4", version, about = "Floquet spectra of the periodic operator d⁴/dt⁴ + V")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// T₁, ρ, the Lyapunov branches and D± along a real λ range.
    Trace(Common),
    /// Eigenvalues, resonances, region counts and optionally the band structure.
    Spectrum(Common),
    /// Residual tables against the leading large-n asymptotics.
    Asymptotics(Common),
    /// Lowest band of γV for small γ, with the gap law fit.
    SmallGamma(Common),
    /// Resonance pairs of the delta comb across the critical couplings.
    DeltaComb(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Tolerance override.
    #[arg(long)]
    tol: Option<f64>,
}

/// A failed run: exit code 2 for bad input, 3 for numerical failure, 1 for output I/O.
#[derive(Debug)]
pub struct Failure {
    pub exit_code: u8,
    pub code: String,
    pub message: String,
}

impl Failure {
    pub fn validation(code: &str, message: String) -> Self {
        Failure { exit_code: 2, code: code.into(), message }
    }

    pub fn numerical(code: &str, message: String) -> Self {
        Failure { exit_code: 3, code: code.into(), message }
    }

    pub fn io(message: String) -> Self {
        Failure { exit_code: 1, code: "io".into(), message }
    }
}

impl From<floquet4::Error> for Failure {
    fn from(e: floquet4::Error) -> Self {
        let code = format!("{e:?}").split(|c: char| !c.is_alphanumeric()).next().unwrap_or("error").to_string();
        Failure { exit_code: if e.is_validation() { 2 } else { 3 }, code, message: e.to_string() }
    }
}

fn run(command: Command, args: Common) -> Result<Vec<PathBuf>, Failure> {
    if let Some(k) = args.threads {
        if k == 0 {
            return Err(Failure::validation("threads", "--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::validation("threads", e.to_string()))?;
    }
    if let Some(t) = args.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::validation("tol", format!("--tol must be positive and finite (got {t})")));
        }
    }
    let mut config = RunConfig::load(&args.config)?;
    config.validate(command, args.tol)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::io(format!("{}: {e}", args.out.display())))?;
    let out = output::OutDir::new(args.out);
    match command {
        Command::Trace => commands::trace(&config, &out),
        Command::Spectrum => commands::spectrum(&config, &out),
        Command::Asymptotics => commands::asymptotics(&config, &out),
        Command::SmallGamma => commands::small_gamma(&config, &out),
        Command::DeltaComb => commands::delta_comb(&config, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Trace(a) => (Command::Trace, a),
        Sub::Spectrum(a) => (Command::Spectrum, a),
        Sub::Asymptotics(a) => (Command::Asymptotics, a),
        Sub::SmallGamma(a) => (Command::SmallGamma, a),
        Sub::DeltaComb(a) => (Command::DeltaComb, a),
    };
    match run(command, args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            let diag = json!({ "level": "error", "code": f.code, "message": f.message, "exit_code": f.exit_code });
            eprintln!("{diag}");
            ExitCode::from(f.exit_code)
        }
    }
}
