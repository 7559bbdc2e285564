use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "visco2", version, about = "Second-order effective viscosity estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Reduced grids (acceptance only).
    #[arg(long, global = true)]
    quick: bool,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Point configurations plus provenance.
    Gen,
    /// Pairing convergence study or a single point file.
    Pairing,
    /// Corrector energy route.
    Corrector,
    /// Lattice-sum route.
    Lattice,
    /// Random routes against the isotropic value.
    Isotropic,
    /// Acceptance criteria.
    Accept,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(visco2::Error),
    Acceptance,
}

impl From<visco2::Error> for CliError {
    fn from(e: visco2::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        use visco2::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::NonConvergence(_) | E::Singular(_)) => 3,
            CliError::Core(_) => 2,
            CliError::Acceptance => 4,
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None if cli.command == Command::Accept => RunConfig::default(),
        None => return Err(CliError::Config("--config <path> is required".into())),
    };
    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err(CliError::Config("threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::Core(e.into()))?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Gen => commands::gen(&cfg, out),
        Command::Pairing => commands::pairing(&cfg, out),
        Command::Corrector => commands::corrector(&cfg, out),
        Command::Lattice => commands::lattice(&cfg, out),
        Command::Isotropic => commands::isotropic(&cfg, out),
        Command::Accept => {
            if commands::accept(&cfg, cli.quick, out)? {
                Ok(())
            } else {
                Err(CliError::Acceptance)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(m) => eprintln!("visco2: config error: {m}"),
                CliError::Core(err) => eprintln!("visco2: {err}"),
                CliError::Acceptance => eprintln!("visco2: acceptance failed"),
            }
            ExitCode::from(e.code())
        }
    }
}
