//! Command-line front end over network documents. All computation lives
//! in the library; this binary parses arguments, loads files, and maps
//! errors onto the exit-code contract (0 success/unknown, 2 invalid
//! input, 3 composition mismatch, 4 numeric failure).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use open_nets::behavior_rx::BoundaryTuple;
use open_nets::doc::{
    cmd_blackbox, cmd_check, cmd_compose, cmd_entropy_report, cmd_membership, cmd_sample_csv,
    cmd_simulate, cmd_steady_state, cmd_tensor, cmd_tree_steady_state, cmd_validate,
    error_exit_code, parse_schedule, NetworkDocument, RunConfig,
};
use open_nets::error::{Error, Result};

#[derive(Parser)]
#[command(
    name = "open-nets",
    about = "Compose, simulate, and black-box open Markov processes and reaction networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to a RunConfig JSON file (falls back to $OPEN_NETS_CONFIG,
    /// announced on stderr, then to built-in defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the configured equality tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the primary output to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Schema and invariant checks; exit code 2 when invalid.
    Validate { file: PathBuf },
    /// Glue two documents output-to-input.
    Compose { file1: PathBuf, file2: PathBuf },
    /// Set two documents side by side.
    Tensor { file1: PathBuf, file2: PathBuf },
    /// Steady-state behavior: a linear relation (markov) or a
    /// sample-and-membership report (reaction).
    Blackbox {
        file: PathBuf,
        /// Sample count for reaction documents.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Oracle queries against a reaction document's behavior.
    BlackboxRx(BlackboxRxArgs),
    /// Integrate under a piecewise-constant boundary schedule, CSV out.
    Simulate {
        file: PathBuf,
        /// Schedule JSON: [{"t_end": 1.0, "fixed": {...}} , ...]
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Initial state JSON object {state: value}.
        #[arg(long)]
        p0: Option<String>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Fixed-boundary steady state of a markov document.
    SteadyState {
        file: PathBuf,
        /// Boundary values JSON object {state: value}.
        #[arg(long)]
        boundary: String,
    },
    /// Matrix-tree steady state with partition value.
    TreeSteadyState {
        file: PathBuf,
        #[arg(long)]
        normalize: bool,
    },
    /// Relative-entropy diagnostics per timestep (needs q or energies).
    EntropyReport {
        file: PathBuf,
        #[arg(long)]
        p0: Option<String>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Verify a law: functoriality-markov, functoriality-rx, naturality,
    /// or graybox.
    Check {
        law: String,
        file1: PathBuf,
        file2: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BlackboxRxArgs {
    file: PathBuf,
    /// Membership query: JSON {in_conc, inflow, out_conc, outflow}.
    #[arg(long)]
    member: Option<String>,
    /// Dump this many behavior samples as CSV.
    #[arg(long)]
    sample: Option<usize>,
}

#[derive(serde::Deserialize)]
struct TupleDoc {
    in_conc: Vec<f64>,
    inflow: Vec<f64>,
    out_conc: Vec<f64>,
    outflow: Vec<f64>,
}

fn load_doc(path: &PathBuf) -> Result<NetworkDocument> {
    NetworkDocument::parse(&std::fs::read_to_string(path)?)
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = if let Some(path) = &cli.config {
        RunConfig::parse(&std::fs::read_to_string(path)?)?
    } else if let Ok(path) = std::env::var("OPEN_NETS_CONFIG") {
        eprintln!("using config from OPEN_NETS_CONFIG={path}");
        RunConfig::parse(&std::fs::read_to_string(path)?)?
    } else {
        RunConfig::default()
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(tol) = cli.tol {
        config.tolerances.equality = tol;
    }
    Ok(config)
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => {
            // write atomically so partial output never lands at the target
            let tmp = path.with_extension("tmp");
            std::fs::write(&tmp, text)?;
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn parse_map(text: &str) -> Result<BTreeMap<String, f64>> {
    serde_json::from_str(text).map_err(|e| Error::InvalidDocument(e.to_string()))
}

fn run(cli: &Cli) -> Result<i32> {
    let mut config = load_config(cli)?;
    match &cli.command {
        Command::Validate { file } => {
            let report = cmd_validate(&load_doc(file)?);
            emit(cli, &serde_json::to_string_pretty(&report)?)?;
            Ok(if report.valid { 0 } else { 2 })
        }
        Command::Compose { file1, file2 } => {
            let out = cmd_compose(&load_doc(file1)?, &load_doc(file2)?)?;
            emit(cli, &out.to_json())?;
            Ok(0)
        }
        Command::Tensor { file1, file2 } => {
            let out = cmd_tensor(&load_doc(file1)?, &load_doc(file2)?)?;
            emit(cli, &out.to_json())?;
            Ok(0)
        }
        Command::Blackbox { file, samples } => {
            let out = cmd_blackbox(&load_doc(file)?, &config, *samples)?;
            emit(cli, &serde_json::to_string_pretty(&out)?)?;
            Ok(0)
        }
        Command::BlackboxRx(args) => {
            let doc = load_doc(&args.file)?;
            match (&args.member, args.sample) {
                (Some(tuple_json), None) => {
                    let t: TupleDoc = serde_json::from_str(tuple_json)
                        .map_err(|e| Error::MalformedTuple(e.to_string()))?;
                    let report = cmd_membership(
                        &doc,
                        &BoundaryTuple {
                            in_conc: t.in_conc,
                            inflow: t.inflow,
                            out_conc: t.out_conc,
                            outflow: t.outflow,
                        },
                        &config,
                    )?;
                    emit(cli, &serde_json::to_string_pretty(&report)?)?;
                    Ok(0)
                }
                (None, Some(n)) => {
                    let csv = cmd_sample_csv(&doc, n, &config)?;
                    emit(cli, &csv)?;
                    Ok(0)
                }
                _ => Err(Error::InvalidDocument(
                    "blackbox-rx needs exactly one of --member or --sample".to_string(),
                )),
            }
        }
        Command::Simulate {
            file,
            schedule,
            p0,
            t,
            dt,
        } => {
            if let Some(t) = t {
                config.integrator.t = *t;
            }
            if let Some(dt) = dt {
                config.integrator.dt = *dt;
            }
            let schedule = match schedule {
                Some(path) => parse_schedule(&std::fs::read_to_string(path)?)?,
                None => vec![],
            };
            let p0 = p0.as_deref().map(parse_map).transpose()?;
            let csv = cmd_simulate(&load_doc(file)?, &schedule, p0.as_ref(), &config)?;
            emit(cli, &csv)?;
            Ok(0)
        }
        Command::SteadyState { file, boundary } => {
            let report = cmd_steady_state(&load_doc(file)?, &parse_map(boundary)?)?;
            emit(cli, &serde_json::to_string_pretty(&report)?)?;
            Ok(0)
        }
        Command::TreeSteadyState { file, normalize } => {
            let report = cmd_tree_steady_state(&load_doc(file)?, *normalize)?;
            emit(cli, &serde_json::to_string_pretty(&report)?)?;
            Ok(0)
        }
        Command::EntropyReport { file, p0, t, dt } => {
            if let Some(t) = t {
                config.integrator.t = *t;
            }
            if let Some(dt) = dt {
                config.integrator.dt = *dt;
            }
            let p0 = p0.as_deref().map(parse_map).transpose()?;
            let steps = cmd_entropy_report(&load_doc(file)?, p0.as_ref(), &config)?;
            emit(cli, &serde_json::to_string_pretty(&steps)?)?;
            Ok(0)
        }
        Command::Check { law, file1, file2 } => {
            let doc1 = load_doc(file1)?;
            let doc2 = file2.as_ref().map(load_doc).transpose()?;
            let report = cmd_check(law, &doc1, doc2.as_ref(), &config)?;
            emit(cli, &serde_json::to_string_pretty(&report)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
