//! Command line front end: `verify`, `run` and `report`.
//!
//! Exit codes are 0 when every assertion passes, 1 when one fails and 2 for
//! usage, config and IO errors.

mod config_file;
mod manifest;
mod report;
mod verify;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::experiments::{
    run_experiment, ExperimentConfig, ExperimentError, ExperimentKind, GraphSpec,
};

pub use config_file::ConfigFile;
pub use manifest::{write_atomically, RunManifest, MANIFEST_SUFFIX};
pub use report::{gnuplot_data, render_table};
pub use verify::{fixtures, identity_row, render as render_identities, IdentityRow, IDENTITY_TOLERANCE};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Gaussian free field level sets on weighted graphs with killing.
#[derive(Debug, Parser)]
#[command(name = "cablefield", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Config file of `key = value` lines under `[section]` headers.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory for `run` and `verify`, input directory for `report`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Experiment to run; every experiment section of the config when absent.
    #[arg(long, global = true)]
    pub experiment: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Deterministic potential theory identities on fixture graphs.
    Verify,
    /// Monte Carlo experiments with CSV, JSON and manifest output.
    Run,
    /// Tables and gnuplot data from a result directory.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    Failed,
}

impl Outcome {
    fn all(passed: bool) -> Self {
        if passed {
            Self::Passed
        } else {
            Self::Failed
        }
    }
}

/// Parses `args`, runs the command and maps the result to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!(
                    "experiments: {}",
                    ExperimentKind::ALL.map(ExperimentKind::name).join(", ")
                );
            }
            ExitCode::from(2)
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("CABLEFIELD_LOG", "error");
    let _ = env_logger::Builder::from_env(env).try_init();
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Verify => cmd_verify(cli),
        Command::Run => cmd_run(cli),
        Command::Report => {
            let dir = cli
                .out
                .as_deref()
                .ok_or_else(|| CliError::Usage("report needs --out DIR".into()))?;
            report::cmd_report(dir)
        }
    }
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ConfigFile::parse(&text)
}

fn resolve_seed(flag: Option<u64>, pairs: &[(String, String)]) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    let text = ConfigFile::lookup(pairs, "seed")
        .ok_or_else(|| CliError::Config("no seed given by --seed or the config".into()))?;
    text.parse()
        .map_err(|_| CliError::Config(format!("seed `{text}` is not an unsigned 64-bit integer")))
}

fn cmd_verify(cli: &Cli) -> Result<Outcome, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage("verify needs --config PATH".into()))?;
    let file = read_config(path)?;
    let pairs = file
        .pairs_for("verify")
        .unwrap_or_else(|| file.shared.clone());
    let list = ConfigFile::lookup(&pairs, "fixtures")
        .ok_or_else(|| CliError::Config("no `fixtures` key".into()))?;
    // Only random fixtures consume a seed.
    let seed = if list.contains("random:") {
        resolve_seed(cli.seed, &pairs)?
    } else {
        cli.seed.unwrap_or(0)
    };
    let graphs = fixtures(list, seed)?;
    let rows = graphs
        .iter()
        .map(|(label, g)| identity_row(label, g))
        .collect::<Result<Vec<_>, _>>()?;
    print!("{}", render_identities(&rows));
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let json = serde_json::to_string_pretty(&rows).expect("rows serialize");
        write_atomically(&dir.join("verify.json"), json.as_bytes())?;
    }
    Ok(Outcome::all(
        rows.iter().all(|r| r.max() < IDENTITY_TOLERANCE),
    ))
}

/// Builds the config of one experiment from the shared and section keys,
/// then applies the command line overrides.
pub fn experiment_config(
    kind: ExperimentKind,
    pairs: &[(String, String)],
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<ExperimentConfig, CliError> {
    let graph: GraphSpec = ConfigFile::lookup(pairs, "graph")
        .ok_or_else(|| CliError::Config(format!("[{}] has no `graph`", kind.name())))?
        .parse()?;
    let samples: u64 = ConfigFile::lookup(pairs, "samples")
        .ok_or_else(|| CliError::Config(format!("[{}] has no `samples`", kind.name())))?
        .parse()
        .map_err(|_| CliError::Config("`samples` is not a count".into()))?;
    let seed = resolve_seed(seed, pairs)?;
    let mut config = ExperimentConfig::new(kind, graph, samples, seed);
    for (key, value) in pairs {
        match key.as_str() {
            "graph" | "samples" | "seed" => {}
            "experiment" => {
                let named: ExperimentKind = value.parse()?;
                if named != kind {
                    return Err(CliError::Config(format!(
                        "section [{}] names experiment `{value}`",
                        kind.name()
                    )));
                }
            }
            _ => config.apply(key, value)?,
        }
    }
    if let Some(t) = threads {
        config.threads = t;
    }
    config.validate()?;
    Ok(config)
}

fn cmd_run(cli: &Cli) -> Result<Outcome, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage("run needs --config PATH".into()))?;
    let file = read_config(path)?;
    let kinds: Vec<ExperimentKind> = match &cli.experiment {
        Some(name) => vec![name
            .parse()
            .map_err(|_| CliError::Usage(format!("unknown experiment `{name}`")))?],
        None => ExperimentKind::ALL
            .into_iter()
            .filter(|k| file.sections.contains_key(k.name()))
            .collect(),
    };
    if kinds.is_empty() {
        return Err(CliError::Config("config has no experiment sections".into()));
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let mut passed = true;
    for kind in kinds {
        let pairs = file.pairs_for(kind.name()).ok_or_else(|| {
            CliError::Config(format!("config has no [{}] section", kind.name()))
        })?;
        let config = experiment_config(kind, &pairs, cli.seed, cli.threads)?;
        let manifest = run_and_persist(&config, path, &out)?;
        println!(
            "{:<14} {}  {:.1}s  {}",
            manifest.experiment,
            if manifest.passed { "PASS" } else { "FAIL" },
            manifest.runtime_seconds,
            manifest.csv.display()
        );
        passed &= manifest.passed;
    }
    Ok(Outcome::all(passed))
}

/// Runs one experiment and writes `<name>.csv`, `<name>.json` and, last,
/// its manifest into `out`.
pub fn run_and_persist(
    config: &ExperimentConfig,
    config_path: &Path,
    out: &Path,
) -> Result<RunManifest, CliError> {
    let started = manifest::unix_now();
    let result = run_experiment(config)?;
    for check in &result.checks {
        log::info!(
            "{}: {} {} ({})",
            result.experiment,
            if check.passed { "pass" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    let name = config.kind.name();
    let csv = out.join(format!("{name}.csv"));
    let json = out.join(format!("{name}.json"));
    write_atomically(&csv, result.to_csv().as_bytes())?;
    let body = serde_json::to_string_pretty(&result).expect("result serializes");
    write_atomically(&json, body.as_bytes())?;
    let manifest = RunManifest {
        experiment: name.to_string(),
        config_path: config_path.to_path_buf(),
        config_hash: result.config_hash.clone(),
        graph: config.graph.to_string(),
        alpha: config.alpha,
        seed: config.seed,
        threads: config.threads,
        started_unix: started,
        finished_unix: manifest::unix_now(),
        runtime_seconds: result.runtime.as_secs_f64(),
        csv,
        json,
        version: env!("CARGO_PKG_VERSION").to_string(),
        passed: result.passed(),
    };
    manifest.write(out)?;
    Ok(manifest)
}
