use clap::{Args, Parser, Subcommand};
use fastslow_cli::config::{parse_document, ConfigDoc, ConfigError, Mode};
use fastslow_cli::runner::{run_experiment, RunError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fastslow",
    about = "Stiff three-component transport solver, layer asymptotics, and verification runs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to a flat key = value experiment config.
    config: PathBuf,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Brute-force solve of the full stiff system; fields CSV per output time.
    Solve(RunArgs),
    /// Assembled main term of the expansion; fields CSV per output time.
    Expand(RunArgs),
    /// Full solve vs expansion: fields, per-time error norms, decay fit.
    Compare(RunArgs),
    /// One compare per epsilon plus a fitted error-order summary.
    Sweep(RunArgs),
    /// Uniform-data solve vs the exact matrix-exponential solution.
    Oracle(RunArgs),
}

impl Command {
    fn mode(&self) -> Mode {
        match self {
            Command::Solve(_) => Mode::Solve,
            Command::Expand(_) => Mode::Expand,
            Command::Compare(_) => Mode::Compare,
            Command::Sweep(_) => Mode::Sweep,
            Command::Oracle(_) => Mode::Oracle,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Solve(a)
            | Command::Expand(a)
            | Command::Compare(a)
            | Command::Sweep(a)
            | Command::Oracle(a) => a,
        }
    }
}

/// Attach the config line of the offending key to a model error, when known.
fn describe_run_error(err: &RunError, doc: &ConfigDoc) -> String {
    use fastslow::model::ModelError;
    let key = match err {
        RunError::Model(ModelError::NonPositiveRelaxation { name, .. }) => Some(*name),
        RunError::Model(ModelError::NonFinite { name, .. }) => Some(*name),
        RunError::Model(ModelError::BadEpsilon(_)) => Some("epsilon"),
        RunError::Model(ModelError::BadHorizon(_)) => Some("T"),
        _ => None,
    };
    match key.and_then(|k| doc.line_of(k)) {
        Some(line) => format!("config line {line}: {err}"),
        None => err.to_string(),
    }
}

fn run() -> Result<(), (String, i32)> {
    let cli = Cli::parse();
    let mode = cli.command.mode();
    let args = cli.command.args();

    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| (format!("cannot read {}: {e}", args.config.display()), 1))?;
    let doc = match parse_document(&text) {
        Ok(doc) => doc,
        Err(ConfigError::MissingKey(key)) => {
            return Err((format!("config error: missing key `{key}`"), 1))
        }
        Err(e) => return Err((format!("config error: {e}"), 1)),
    };

    if doc.spec.mode != mode {
        return Err((
            format!(
                "config declares mode `{}` but the `{}` subcommand was invoked",
                doc.spec.mode.as_str(),
                mode.as_str()
            ),
            1,
        ));
    }

    let mut spec = doc.spec.clone();
    if let Some(out) = &args.out {
        spec.output_dir = out.display().to_string();
    }

    match run_experiment(&spec) {
        Ok(artifacts) => {
            for file in &artifacts.files {
                println!("wrote {}", file.display());
            }
            println!("wrote {}", artifacts.manifest.display());
            Ok(())
        }
        Err(e) => {
            let code = e.exit_code();
            Err((describe_run_error(&e, &doc), code))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((msg, code)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
