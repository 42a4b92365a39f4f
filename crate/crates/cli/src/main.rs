//! semikit: product-formula semigroup toolkit.
//!
//! `semikit <command> --config path.json [key=value ...]`
//!
//! Exit codes: 0 success, 1 config error, 2 numerical-contract violation.
//! Every run that reaches its output directory writes summary.json, with
//! the error field populated on failure; timestamps go to run.log so the
//! summary stays byte-reproducible.

mod config;
mod plot;
mod run;

use clap::{Args, Parser, Subcommand};
use config::CliError;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Parser)]
#[command(name = "semikit", version, about = "Semigroup approximation via Chernoff product formulas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve initial data with an iterated Chernoff product
    Evolve(RunArgs),
    /// Unitary Schrodinger propagation from a heat-type scheme
    Schrodinger(RunArgs),
    /// Measure the tangency order of a scheme against its generator
    Tangency(RunArgs),
    /// Error ladder against a reference oracle with an order fit
    Rate(RunArgs),
    /// Resolvent solve via the Laplace transform of the iterated scheme
    Resolvent(RunArgs),
    /// Scalar sanity ladder (1 + tl/n)^n -> exp(tl)
    Scalar(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration document
    #[arg(long)]
    config: PathBuf,
    /// Dotted-path overrides, e.g. grid.n_points=128
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Command {
    fn split(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Evolve(a) => ("evolve", a),
            Command::Schrodinger(a) => ("schrodinger", a),
            Command::Tangency(a) => ("tangency", a),
            Command::Rate(a) => ("rate", a),
            Command::Resolvent(a) => ("resolvent", a),
            Command::Scalar(a) => ("scalar", a),
        }
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write_summary(out_dir: &Path, command: &str, inputs: &Value, outcome: &Result<Value, CliError>) {
    let summary = match outcome {
        Ok(results) => json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": inputs,
            "error": null,
            "results": results,
        }),
        Err(e) => json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": inputs,
            "error": e.message(),
            "results": null,
        }),
    };
    let rendered = serde_json::to_string_pretty(&summary).expect("summary is serializable");
    // best effort: a failing summary write must not mask the run outcome
    let _ = std::fs::create_dir_all(out_dir);
    let _ = std::fs::write(out_dir.join("summary.json"), rendered + "\n");
}

fn append_log(out_dir: &Path, start: u64, command: &str, code: i32) {
    use std::io::Write;
    let line = format!("{start} {} {command} exit {code}\n", unix_now());
    if let Ok(mut file) = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(out_dir.join("run.log"))
    {
        let _ = file.write_all(line.as_bytes());
    }
}

fn drive(command: &str, args: &RunArgs) -> i32 {
    let start = unix_now();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            let err = CliError::Config(format!("cannot read {}: {e}", args.config.display()));
            let out_dir = PathBuf::from(".");
            write_summary(&out_dir, command, &Value::Null, &Err(err));
            append_log(&out_dir, start, command, 1);
            return 1;
        }
    };
    let fallback_dir = config::peek_output_dir(&text).unwrap_or_else(|| ".".to_string());

    let (cfg, doc) = match config::load_config(&text, &args.overrides) {
        Ok(pair) => pair,
        Err(e) => {
            let code = e.exit_code();
            let out_dir = PathBuf::from(fallback_dir);
            write_summary(&out_dir, command, &Value::Null, &Err(e));
            append_log(&out_dir, start, command, code);
            return code;
        }
    };
    let out_dir = PathBuf::from(cfg.output_dir.clone().unwrap_or_else(|| ".".to_string()));

    let outcome = preflight(command, &cfg).and_then(|()| run::execute(command, &cfg, &out_dir));
    let code = match &outcome {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    };
    write_summary(&out_dir, command, &doc, &outcome);
    append_log(&out_dir, start, command, code);
    code
}

fn preflight(command: &str, cfg: &config::RunConfig) -> Result<(), CliError> {
    if let Some(declared) = &cfg.command {
        if declared != command {
            return Err(CliError::Config(format!(
                "command: config declares '{declared}' but '{command}' was invoked"
            )));
        }
    }
    let threads = cfg.threads.or_else(|| {
        std::env::var("SEMIKIT_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("threads: must be at least 1".into()));
        }
        semikit_core::set_threads(n);
    }
    std::fs::create_dir_all(cfg.output_dir.as_deref().unwrap_or("."))
        .map_err(|e| CliError::Config(format!("output_dir: {e}")))
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's default usage-error code is 2, which is reserved here
            // for numerical-contract violations
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (command, args) = cli.command.split();
    std::process::exit(drive(command, args));
}
