//! `lzgate`: command-line front end. Assembles the run configuration
//! from a JSON file, shorthand flags, and dotted `--set` overrides,
//! then dispatches to the library. Exit codes: 0 success, 2 for
//! configuration or validation problems, 3 for numerical failures.

use std::path::PathBuf;

use clap::Parser;
use serde_json::{json, Value};

use lzgate_cli::config::{self, Mode};
use lzgate_cli::output::{self, Format};
use lzgate_cli::{run, CliError};

#[derive(Parser)]
#[command(
    name = "lzgate",
    version,
    about = "Adiabatic controlled-NOT gate simulator and design toolkit"
)]
struct Cli {
    /// Analysis mode: simulate, sweep, lz-verify, design-check,
    /// calibrate, or measure-phase.
    mode: String,
    /// JSON run configuration; every field can also be set with --set.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Dotted-path config override, e.g. --set cn_params.tau=500.
    /// Repeatable; applied after the file and shorthand flags.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format, json or csv. Sweeps and crossing grids default
    /// to csv, single reports to json.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads for sweep grids; defaults to LZGATE_WORKERS,
    /// then to one per core.
    #[arg(long)]
    workers: Option<usize>,
    /// Propagator convergence tolerance, in (0, 1e-3].
    #[arg(long)]
    tol: Option<f64>,
    /// Crossing-sweep timescale (lz-verify shorthand for lz.tau).
    #[arg(long)]
    tau: Option<f64>,
    /// Crossing gap (lz-verify shorthand for lz.omega).
    #[arg(long)]
    omega: Option<f64>,
    /// Sweep amplitude (lz-verify shorthand for lz.u).
    #[arg(long)]
    u: Option<f64>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn parse_mode(s: &str) -> Result<Mode, CliError> {
    match s {
        "simulate" => Ok(Mode::Simulate),
        "sweep" => Ok(Mode::Sweep),
        "lz-verify" => Ok(Mode::LzVerify),
        "design-check" => Ok(Mode::DesignCheck),
        "calibrate" => Ok(Mode::Calibrate),
        "measure-phase" => Ok(Mode::MeasurePhase),
        _ => Err(CliError::config(format!(
            "unknown mode `{s}`; expected simulate, sweep, lz-verify, design-check, \
             calibrate, or measure-phase"
        ))),
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let mode = parse_mode(&cli.mode)?;
    let mut tree: Value = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("config {}: {e}", path.display())))?
        }
        None => json!({}),
    };
    if !tree.is_object() {
        return Err(CliError::config("config root must be a JSON object".to_string()));
    }

    // The positional mode is authoritative; a different mode in the
    // file means the wrong file was passed.
    let mode_value = serde_json::to_value(mode).expect("mode serializes");
    if let Some(file_mode) = tree.get("mode") {
        if *file_mode != mode_value {
            return Err(CliError::config(format!(
                "config sets mode {file_mode} but the command line says {}",
                mode.name()
            )));
        }
    }
    tree["mode"] = mode_value;

    if let Some(tol) = cli.tol {
        config::apply_set_value(&mut tree, "tol", json!(tol))?;
    }
    for (flag, value) in [("tau", cli.tau), ("omega", cli.omega), ("u", cli.u)] {
        if let Some(x) = value {
            if mode != Mode::LzVerify {
                return Err(CliError::config(format!(
                    "--{flag} is an lz-verify shorthand, not valid for {}",
                    mode.name()
                )));
            }
            config::apply_set_value(&mut tree, &format!("lz.{flag}"), json!([x]))?;
        }
    }
    for kv in &cli.set {
        let (key, value) = kv.split_once('=').ok_or_else(|| {
            CliError::config(format!("--set expects KEY=VALUE, got `{kv}`"))
        })?;
        config::apply_set(&mut tree, key, value)?;
    }

    let run_config = config::from_tree(tree)?;
    let format = match cli.format.as_deref() {
        Some(s) => Format::parse(s)
            .ok_or_else(|| CliError::config(format!("format must be json or csv, got `{s}`")))?,
        None => run::default_format(mode),
    };
    let workers = match cli.workers {
        Some(n) => Some(n),
        None => match std::env::var("LZGATE_WORKERS") {
            Ok(s) => Some(s.trim().parse().map_err(|_| {
                CliError::config(format!("LZGATE_WORKERS must be a thread count, got `{s}`"))
            })?),
            Err(_) => None,
        },
    };

    let text = run::run(&run_config, workers, format)?;
    output::emit(cli.out.as_deref(), &text)
}
