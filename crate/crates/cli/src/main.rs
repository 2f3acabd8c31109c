use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cryamabe_cli::checks::Env;
use cryamabe_cli::commands;
use cryamabe_cli::config::{parse_tol, RunConfig};
use cryamabe_cli::CliError;

/// Numerical CR Yamabe laboratory on the Heisenberg group.
///
/// Exit codes: 0 pass, 1 hard failure (including usage and config errors),
/// 2 inconclusive.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// JSON run configuration; defaults apply to every omitted field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance override NAME=VAL; repeatable.
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Calibrate c₁ and κ and check ∫U⁴ = 4π².
    Calibrate {
        /// Force the volume density instead of calibrating it.
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Run one verification suite, or `all`.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// s- and λ-sweeps of 𝒥 − 4π² with log–log fits.
    Expansion,
    /// Reduced-functional landscape over the configured window.
    Scan,
    /// Push-forward of W under the Cayley transform at random points.
    CayleyCheck {
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
}

fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.tolerances.extend(cli.tol.iter().cloned());
    if let Some(o) = &cli.out {
        cfg.out = o.display().to_string();
    }
    let env = Env::new(cfg, cli.seed)?;
    let out = PathBuf::from(&env.cfg.out);
    match cli.command {
        Command::Calibrate { kappa } => commands::calibrate(&env, &out, kappa),
        Command::Verify { suite } => commands::verify(&env, &out, &suite),
        Command::Expansion => commands::expansion(&env, &out),
        Command::Scan => commands::scan(&env, &out),
        Command::CayleyCheck { points } => commands::cayley_check(&env, &out, points),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(o) => {
            print!("{}", o.summary);
            for p in &o.written {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::from(o.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
