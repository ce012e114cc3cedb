use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use orikit::checks::Fault;
use orikit_cli::{cmd_check, cmd_simulate, resolve_config, summary_line, CheckOptions, CliError};

#[derive(Parser)]
#[command(name = "orikit", version, about = "SO(3) identity checks and IMU/pose EKF simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity and Jacobian suite and print a pass/fail table.
    CheckIdentities {
        #[arg(long)]
        seed: Option<u64>,
        /// Size of the consistency matrix; other checks scale with it.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Simulate sensors along a trajectory, run the filter and write CSV logs.
    Simulate {
        /// TOML run configuration (defaults to $ORIKIT_CONFIG, then the built-in one).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::CheckIdentities { seed, samples, inject_fault } => {
            let opts = CheckOptions { seed, samples, fault: inject_fault };
            let (code, _) = cmd_check(&opts, &mut std::io::stdout().lock())?;
            Ok(code)
        }
        Command::Simulate { config, seed, out } => {
            let mut cfg = resolve_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            let outcome = cmd_simulate(&cfg)?;
            println!("{}", summary_line(&outcome.summary));
            Ok(orikit_cli::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("orikit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
