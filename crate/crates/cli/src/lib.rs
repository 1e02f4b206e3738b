//! `ddkelly`: run drawdown-constrained growth-optimal portfolio experiments
//! from the command line.
//!
//! Exit codes: 0 when every check of the run passes, 1 when an experiment
//! fails or errors, 2 on bad flags or configuration.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod report;
pub mod selftest;

use config::{Overrides, Preset};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("bad input: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] drawdown_kelly::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ddkelly",
    version,
    about = "Drawdown-constrained Kelly portfolio experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every simulation-backed subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Drawdown floor as a fraction of the running maximum, in [0, 1).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Log-level l of the hitting time tau_l = first time log(Xhat) >= l.
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub n_paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Worker threads. Never changes results.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory; reports go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write per-sample CSVs (needs --out).
    #[arg(long)]
    pub dump_samples: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            preset: self.preset,
            dt: self.dt,
            t_max: self.t_max,
            n_paths: self.n_paths,
            seed: self.seed,
            alpha: self.alpha,
            level: self.level,
            out_dir: self.out.clone(),
            dump_samples: self.dump_samples,
            ..Default::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a batch and write `path_id,t,asset_1..asset_d,xhat,growth`.
    Simulate(Common),
    /// Apply the drawdown transform (or its inverse) to a path CSV.
    Transform(TransformArgs),
    /// Expected relative returns against the constrained numeraire at tau_l.
    NumeraireTest {
        #[command(flatten)]
        common: Common,
        /// baseline, buyhold, halfkelly, or a proportions CSV. Repeatable.
        #[arg(long)]
        strategy: Vec<String>,
    },
    /// Long-run growth rate of the constrained numeraire and a strategy panel.
    Growth(Common),
    /// Law of the finite-horizon to constrained-numeraire ratio at cycle ends.
    ZetaLaw {
        #[command(flatten)]
        common: Common,
        /// Cycles harvested per path.
        #[arg(long)]
        max_n: Option<usize>,
    },
    /// Range of the relative drawdown of the constrained numeraire.
    Oscillation {
        #[command(flatten)]
        common: Common,
        /// Band width above the floor and below one.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Drawdown to alpha versus an e-fold of the numeraire: which comes first.
    DrawdownRace(Common),
    /// Finite-horizon optima against the constrained numeraire on [0, tau_l].
    Turnpike {
        #[command(flatten)]
        common: Common,
        /// Cycle numbers, comma separated.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Exact pathwise identities on seeded paths.
    Selftest {
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    /// Input path CSV (`t,value`).
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: f64,
    /// Map constrained wealth back to base wealth.
    #[arg(long)]
    pub inverse: bool,
    /// Check the constrained path (output, or input with --inverse) against
    /// the floor; exit 1 on any violation.
    #[arg(long)]
    pub verify: bool,
    /// Relative tolerance for floor checks.
    #[arg(long, default_value_t = drawdown_kelly::transform::DEFAULT_INVERSE_TOL)]
    pub tol: f64,
    /// Output path CSV; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn threads_of(cmd: &Command) -> Option<usize> {
    match cmd {
        Command::Simulate(c) | Command::Growth(c) | Command::DrawdownRace(c) => c.threads,
        Command::NumeraireTest { common, .. }
        | Command::ZetaLaw { common, .. }
        | Command::Oscillation { common, .. }
        | Command::Turnpike { common, .. } => common.threads,
        Command::Selftest { threads, .. } => *threads,
        Command::Transform(_) => None,
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match threads_of(&cli.command) {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| commands::dispatch(cli.command)),
            Err(e) => Err(CliError::Config(format!("cannot start {n} threads: {e}"))),
        },
        None => commands::dispatch(cli.command),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("ddkelly: {e}");
            e.exit_code()
        }
    }
}
