//! `lqas`: run local quantum architecture search experiments.
//!
//! Exit codes: 0 success, 1 configuration error, 2 I/O error,
//! 3 internal error.

mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "lqas", version, about = "Local quantum architecture search")]
struct Cli {
    /// Seed override: the search master seed for `run`, the generator
    /// seed for `gen`, the split seed for `eval`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for candidate training (default: all cores).
    /// Results do not depend on this value.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory for `run`, overriding the config's `output_dir`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a search experiment described by a TOML config.
    Run { config: PathBuf },

    /// Train one ansatz and print train/validation metrics as JSON.
    Eval {
        /// Ansatz file (JSON or text) or `hea:<n>,<k>,<m>`.
        ansatz: String,
        /// Dataset: a CSV file, a TOML file, or `kind[:key=value,...]`.
        #[arg(long)]
        data: String,
        /// TOML file with training settings.
        #[arg(long)]
        train_config: Option<PathBuf>,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        #[arg(long)]
        fit_on_train_only: bool,
    },

    /// Write a dataset to CSV with a `scale.json` sidecar.
    Gen {
        /// `quadratic1d[:key=value,...]`, `quadratic2d[...]` or a TOML file.
        spec: String,
        #[arg(short, long)]
        out: PathBuf,
    },
}

/// Executes a command and returns what it prints on stdout.
fn dispatch(cli: Cli) -> anyhow::Result<String> {
    match cli.command {
        Command::Run { config } => {
            let dir = commands::run(&config, cli.seed, cli.out_dir)?;
            eprintln!("wrote reports to {}", dir.display());
            Ok(String::new())
        }
        Command::Eval {
            ansatz,
            data,
            train_config,
            train_fraction,
            fit_on_train_only,
        } => commands::eval(commands::EvalArgs {
            ansatz: &ansatz,
            data: &data,
            train_config: train_config.as_deref(),
            train_fraction,
            fit_on_train_only,
            split_seed: cli.seed,
        }),
        Command::Gen { spec, out } => {
            let sidecar = commands::gen(&spec, &out, cli.seed)?;
            eprintln!("wrote {} and {}", out.display(), sidecar.display());
            Ok(String::new())
        }
    }
}

/// Runs a parsed command line on a pool of `--jobs` threads and returns
/// the exit code with the stdout text.
fn run_cli(cli: Cli) -> (u8, String) {
    let pool = match cli.jobs {
        Some(0) => {
            eprintln!("error: --jobs must be at least 1");
            return (exit::CONFIG, String::new());
        }
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return (exit::INTERNAL, String::new());
        }
    };
    match pool.install(|| dispatch(cli)) {
        Ok(out) => (exit::OK, out),
        Err(e) => {
            eprintln!("error: {e:#}");
            (exit::code_for(&e), String::new())
        }
    }
}

fn main() -> ExitCode {
    let (code, out) = run_cli(Cli::parse());
    print!("{out}");
    ExitCode::from(code)
}

#[cfg(test)]
mod tests;
