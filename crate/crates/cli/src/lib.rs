//! Verification runs over the bubble laboratory, driven by a sectioned config
//! file and emitting versioned JSON or CSV reports.

pub mod commands;
pub mod config;
pub mod report;

use bubblelab_core::Error as CoreError;
use thiserror::Error;

pub use config::RunConfig;
pub use report::{Assertion, Report, Section};

/// Exit status for a run that passed every assertion.
pub const EXIT_PASS: i32 = 0;
/// At least one assertion failed.
pub const EXIT_ASSERTION: i32 = 1;
/// A solver or quadrature did not converge or produced non-finite values.
pub const EXIT_NUMERICAL: i32 = 2;
/// Invalid configuration, violated parameter constraint, or unusable output path.
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Command {
    Profile,
    VerifyAsymptotics,
    VerifyIntegrals,
    VerifyTruncation,
    Cluster,
    Heights,
    AnsatzEnergy,
    Residuals,
    PsCheck,
    All,
}

impl Command {
    /// Every command that `all` runs, in report order.
    pub const SUITE: [Command; 9] = [
        Command::Profile,
        Command::VerifyAsymptotics,
        Command::VerifyIntegrals,
        Command::VerifyTruncation,
        Command::Cluster,
        Command::Heights,
        Command::AnsatzEnergy,
        Command::Residuals,
        Command::PsCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::VerifyAsymptotics => "verify-asymptotics",
            Command::VerifyIntegrals => "verify-integrals",
            Command::VerifyTruncation => "verify-truncation",
            Command::Cluster => "cluster",
            Command::Heights => "heights",
            Command::AnsatzEnergy => "ansatz-energy",
            Command::Residuals => "residuals",
            Command::PsCheck => "ps-check",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Output(_) => "output",
            CliError::Core(e) => match e {
                CoreError::StepLimitExceeded(_) => "step_limit_exceeded",
                CoreError::NonFinite(_) => "non_finite",
                CoreError::StepSizeUnderflow(_) => "step_size_underflow",
                CoreError::Singular(_) => "singular",
                CoreError::NoConvergence(_) => "no_convergence",
                CoreError::InsufficientPoints(_) => "insufficient_points",
                CoreError::NonPositiveValue { .. } => "non_positive_value",
                CoreError::CoincidentPoints(_) => "coincident_points",
                CoreError::ConstraintViolation(_) => "constraint_violation",
                CoreError::RangeViolation(_) => "range_violation",
                CoreError::BoundaryOrCoincident => "boundary_or_coincident",
                CoreError::ZeroDirichletEnergy => "zero_dirichlet_energy",
                CoreError::PreconditionViolated(_) => "precondition_violated",
                CoreError::InvalidInput(_) => "invalid_input",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => EXIT_CONFIG,
            CliError::Core(e) => match e {
                CoreError::StepLimitExceeded(_)
                | CoreError::NonFinite(_)
                | CoreError::StepSizeUnderflow(_)
                | CoreError::Singular(_)
                | CoreError::NoConvergence(_)
                | CoreError::NonPositiveValue { .. }
                | CoreError::CoincidentPoints(_) => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            },
        }
    }
}

/// Runs one command (or the whole suite) and assembles the report. Errors inside
/// a command are recorded in its section rather than aborting the run.
pub fn run(command: Command, config: &RunConfig) -> Report {
    let sections = match command {
        Command::All => Command::SUITE.iter().map(|&c| commands::run_section(c, config)).collect(),
        c => vec![commands::run_section(c, config)],
    };
    Report::new(command, config.clone(), sections)
}

pub const FORMATS_HELP: &str = "\
Report formats

JSON (--format json, default)
  {
    \"schema\": 1,
    \"command\": <command name>,
    \"config\": <fully resolved configuration, defaults included>,
    \"sections\": [
      { \"command\": <name>,
        \"results\": { <result name>: <value>, ... },
        \"assertions\": [ { \"name\", \"passed\", \"value\", \"lower\", \"upper\",
                            \"strict\", \"detail\" }, ... ],
        \"error\": null | { \"kind\", \"exit_code\", \"message\" } }
    ],
    \"passed\": <bool>
  }
  Non-finite numbers are written as null. Wall time is printed to stderr only,
  so identical runs produce byte-identical reports.

CSV (--format csv)
  Comma separated, '.' decimal separator, numbers with 17 significant digits.
  profile        s,t,w,w_prime,z,b_bar
                 t = ln(1+s^2), w = gamma*(gamma - b_bar), z = d(b_bar)/d(gamma)
  ansatz-energy  x1,x2,U    field samples on a grid_n x grid_n grid over
                            [-1,1]^2, points outside the disk omitted
  ps-check       trial,p,gamma,ratio
                 gamma empty for the unweighted ratio
  other commands command,name,passed,value,lower,upper,strict
                 (the assertion table; also used for `all`)

Exit status
  0 all assertions passed
  1 at least one assertion failed
  2 numerical failure (no convergence, non-finite values, singular systems)
  3 invalid configuration or violated parameter constraint
";
