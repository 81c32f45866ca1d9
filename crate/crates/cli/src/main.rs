use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use photon_cumulants_cli::commands::{self, CumulantMethod, Global, MomentMethod};
use photon_cumulants_cli::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "photon-cumulants", version, about = "Photon-number moments and cumulants of Gaussian states")]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomised commands; overrides the experiment file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV output and run manifests.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moment ⟨n_0^p_0 n_1^p_1 …⟩ of a state file.
    Moment {
        #[arg(long)]
        state: PathBuf,
        /// Comma-separated exponents, one per mode.
        #[arg(long, value_delimiter = ',', required = true)]
        pattern: Vec<usize>,
        #[arg(long, value_enum, default_value_t = MomentMethod::Hafnian)]
        method: MomentMethod,
    },
    /// Joint cumulant of a list of modes (0-based).
    Cumulant {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        modes: Vec<usize>,
        #[arg(long, value_enum, default_value_t = CumulantMethod::Montrealer)]
        method: CumulantMethod,
        /// Use the explicit matching sum instead of the subset formula.
        #[arg(long)]
        reference: bool,
    },
    /// Haar Monte-Carlo sweep described by a TOML experiment file.
    Montecarlo {
        #[arg(long)]
        config: PathBuf,
    },
    /// Median timings of the Montrealer and loop Hafnian evaluators.
    Bench {
        #[arg(long, default_value_t = 2)]
        ell_min: usize,
        #[arg(long, default_value_t = 10)]
        ell_max: usize,
        #[arg(long, default_value_t = 3)]
        reps: usize,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("cannot start thread pool: {e}")))?;
    }
    let global = Global { seed: cli.seed, out_dir: cli.out_dir };
    match cli.command {
        Command::Moment { state, pattern, method } => commands::moment(&global, &state, &pattern, method),
        Command::Cumulant { state, modes, method, reference } => {
            commands::cumulant(&global, &state, &modes, method, reference)
        }
        Command::Montecarlo { config } => commands::montecarlo(&global, &config),
        Command::Bench { ell_min, ell_max, reps } => commands::bench(&global, ell_min, ell_max, reps),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
