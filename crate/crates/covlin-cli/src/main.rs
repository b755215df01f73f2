use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use covlin_cli::config::Config;
use covlin_cli::scenarios::{resolve_out_dir, run_params, run_simulate, run_verify};

/// Translation-covariant master-equation scenario runner.
#[derive(Parser)]
#[command(name = "covlin", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured scenario and write its artifacts.
    Simulate {
        /// Scenario configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overridden by COVLIN_OUT_DIR).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named verification suite; exit 0 only if every check passes.
    Verify {
        /// Suite name: covariance, decay, amplification, equivalence, all.
        #[arg(long)]
        suite: String,
        /// Scenario configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the results file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the gas-equivalent localization parameters.
    Params {
        /// Scenario configuration (TOML) with a [gas] section.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the report file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run() -> covlin_cli::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = Config::load(&config)?;
            let out = resolve_out_dir(out.as_deref(), &cfg);
            run_simulate(&cfg, &out)
        }
        Command::Verify { suite, config, out } => {
            let cfg = Config::load(&config)?;
            let out = resolve_out_dir(out.as_deref(), &cfg);
            run_verify(&suite, &cfg, &out)
        }
        Command::Params { config, out } => {
            let cfg = Config::load(&config)?;
            let out = resolve_out_dir(out.as_deref(), &cfg);
            let text = run_params(&cfg, &out)?;
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
