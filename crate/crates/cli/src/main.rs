use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use strec_cli::{exit, load, run_batch, table, CliError, Command, Overrides, RunReport};

#[derive(Parser)]
#[command(name = "strec", version, about = "Stationary solutions of stochastic recursions on a cyclic base")]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// Also write the rendered report to this file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Sweep limit for the backwards and Loynes iterations.
    #[arg(long, global = true)]
    max_sweeps: Option<usize>,

    /// Overrides the seed of a cftp configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for CFTP replications and multi-config batches.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Sub {
    /// Backwards scheme, invariant sets, solutions and queue reports.
    #[command(visible_alias = "run")]
    Analyze {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Only parse and validate, as the validate subcommand.
        #[arg(long)]
        validate: bool,
    },
    /// Order checks and Loynes' scheme, with the envelopes for impatience models.
    Loynes {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Queue quantities, the bounds on c and the cargo inequality.
    Bounds {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Perfect sampling by coupling from the past.
    Cftp {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Parse and build the model without analysis.
    Validate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

fn render(reports: &[RunReport], format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let text = if reports.len() == 1 {
                serde_json::to_string_pretty(&reports[0])
            } else {
                serde_json::to_string_pretty(reports)
            };
            text.map(|t| t + "\n")
                .map_err(|e| CliError::new(exit::INTERNAL, "internal", e.to_string()))
        }
        Format::Table => Ok(reports.iter().map(table::render).collect::<Vec<_>>().join("\n")),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (command, paths) = match cli.command {
        Sub::Analyze { configs, validate: true } | Sub::Validate { configs } => (Command::Validate, configs),
        Sub::Analyze { configs, .. } => (Command::Analyze, configs),
        Sub::Loynes { configs } => (Command::Loynes, configs),
        Sub::Bounds { configs } => (Command::Bounds, configs),
        Sub::Cftp { configs } => (Command::Cftp, configs),
    };
    if cli.jobs == 0 {
        return Err(CliError::new(exit::USAGE, "usage", "--jobs must be at least 1"));
    }
    let overrides = Overrides {
        max_sweeps: cli.max_sweeps,
        seed: cli.seed,
        jobs: cli.jobs,
    };
    let configs = paths.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    let reports = run_batch(command, configs, &overrides)?
        .into_iter()
        .zip(&paths)
        .map(|(r, path)| {
            r.map_err(|mut e| {
                e.message = format!("{}: {}", path.display(), e.message);
                e
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let text = render(&reports, cli.format)?;
    if let Some(path) = &cli.output {
        std::fs::write(path, &text)
            .map_err(|e| CliError::new(exit::IO, "io_error", format!("{}: {e}", path.display())))?;
    }
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code as u8)
        }
    }
}
