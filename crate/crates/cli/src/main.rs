use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use bubblelab_cli::{run, CliError, Command, RunConfig, EXIT_CONFIG, FORMATS_HELP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Verification runs for sign-changing Moser-Trudinger bubble clusters.
#[derive(Debug, Parser)]
#[command(name = "bubblelab", version)]
struct Args {
    /// Command to run.
    #[arg(value_enum, required_unless_present = "help_formats")]
    command: Option<Command>,
    /// Config file with `key = value` lines and one `[section]` per command.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Overrides `seed` from the config file.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads for sweeps and restarts (default: all cores).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Describe the report formats and exit.
    #[arg(long)]
    help_formats: bool,
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.help_formats {
        print!("{FORMATS_HELP}");
        return ExitCode::SUCCESS;
    }
    let command = args.command.expect("clap enforces a command");
    let mut config = match &args.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => return fail(&e),
        },
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.jobs {
        if n == 0 {
            return fail(&CliError::Config("--jobs must be at least 1".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&CliError::Config(e.to_string()));
        }
    }

    let start = Instant::now();
    let report = run(command, &config);
    let text = match args.format {
        Format::Json => match report.to_json() {
            Ok(t) => t,
            Err(e) => return fail(&e),
        },
        Format::Csv => report.to_csv(),
    };
    let written = match &args.out {
        Some(p) => std::fs::write(p, &text).map_err(|e| CliError::Output(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Output(e.to_string())),
    };
    if let Err(e) = written {
        return fail(&e);
    }

    for s in &report.sections {
        if let Some(e) = &s.error {
            eprintln!("{}: {} error: {}", s.command, e.kind, e.message);
        }
    }
    for name in report.failed_assertions() {
        eprintln!("failed: {name}");
    }
    eprintln!("{}: wall time {:.2} s", command.name(), start.elapsed().as_secs_f64());
    let code = report.exit_code();
    debug_assert!(code <= EXIT_CONFIG);
    ExitCode::from(code as u8)
}
