//! Batch experiment runner behind the `ftrlab` binary.
//!
//! A run reads an [`config::ExperimentConfig`], dispatches to the matching
//! runner in [`experiments`] and writes `results.csv` and `manifest.json` to
//! the output directory.

pub mod config;
pub mod experiments;
pub mod pipelines;
pub mod table;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;
use serde_json::json;
use sha2::{Digest, Sha256};

use config::ExperimentConfig;
use experiments::Status;

pub const EXIT_OK: i32 = 0;
/// Invalid configuration, invalid parameter values, or I/O failure.
pub const EXIT_INVALID: i32 = 1;
/// A precondition or resolution requirement of the numerics failed.
pub const EXIT_FAILED: i32 = 2;
/// The run completed but its question stayed open; outputs are still written.
pub const EXIT_INCONCLUSIVE: i32 = 3;

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug)]
pub enum RunError {
    Numerics(ftrlab_core::Error),
    Io(PathBuf, std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Numerics(ftrlab_core::Error::Domain(_)) | RunError::Io(..) => EXIT_INVALID,
            RunError::Numerics(_) => EXIT_FAILED,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Numerics(e) => write!(f, "{e}"),
            RunError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl std::error::Error for RunError {}

/// What a finished run produced.
#[derive(Debug)]
pub struct RunReport {
    pub run_id: String,
    pub status: Status,
    pub results: PathBuf,
    pub manifest: PathBuf,
    pub rows: usize,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => EXIT_OK,
            Status::Inconclusive(_) => EXIT_INCONCLUSIVE,
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Execute `cfg` and write its outputs.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let outcome = experiments::execute(cfg).map_err(RunError::Numerics)?;
    let wall = start.elapsed().as_secs_f64();
    let run_id = cfg.run_id();
    let io = |path: &PathBuf| {
        let path = path.clone();
        move |e| RunError::Io(path, e)
    };
    fs::create_dir_all(&cfg.out).map_err(io(&cfg.out))?;
    let csv = outcome.table.to_csv(cfg.experiment.id, &run_id);
    let results = cfg.out.join(RESULTS_FILE);
    fs::write(&results, &csv).map_err(io(&results))?;

    let resolved: serde_json::Map<String, serde_json::Value> =
        cfg.values().map(|(k, v, _)| (k.to_string(), json!(v.to_string()))).collect();
    let (status, detail) = match &outcome.status {
        Status::Ok => ("ok", None),
        Status::Inconclusive(why) => ("inconclusive", Some(why.clone())),
    };
    let manifest_json = json!({
        "tool": "ftrlab",
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": cfg.experiment.id,
        "run_id": run_id,
        "seed": cfg.seed,
        "out": cfg.out.display().to_string(),
        "config": resolved,
        "config_text": cfg.canonical(),
        "threads": rayon::current_num_threads(),
        "wall_time_s": wall,
        "status": status,
        "status_detail": detail,
        "summary": outcome.summary,
        "outputs": [{
            "file": RESULTS_FILE,
            "sha256": hex(&Sha256::digest(csv.as_bytes())),
            "bytes": csv.len(),
            "rows": outcome.table.len(),
        }],
    });
    let manifest = cfg.out.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest_json).expect("manifest serializes") + "\n";
    fs::write(&manifest, text).map_err(io(&manifest))?;
    Ok(RunReport { run_id, status: outcome.status, results, manifest, rows: outcome.table.len() })
}

#[derive(Parser, Debug)]
#[command(
    name = "ftrlab",
    version,
    about = "Seeded numerical experiments on Fourier restriction and the lattice NLS",
    after_help = "Commands:\n  <experiment>  run one experiment (see `ftrlab list`)\n  validate      check a config file and print the resolved parameters\n  list          print the experiments and their parameters\n\nEnvironment:\n  FTRLAB_THREADS  worker threads (default: all cores)\n\nExit codes: 0 ok, 1 invalid input, 2 numerical precondition failed, 3 inconclusive"
)]
struct Cli {
    /// Experiment id, `validate` or `list`.
    command: String,
    /// Configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the seed of the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Text of `ftrlab list`.
pub fn experiment_listing() -> String {
    let mut s = String::new();
    for e in config::EXPERIMENTS {
        s.push_str(&format!("{}\n    {}\n", e.id, e.about));
        for p in e.params {
            s.push_str(&format!("    {:<16}{:<40} {}\n", p.key, format!("(default {})", p.default), p.help));
        }
    }
    s
}

/// Size the global thread pool from `FTRLAB_THREADS`.
fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("FTRLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| format!("FTRLAB_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn load(path: &Option<PathBuf>, requested: Option<&str>) -> Result<ExperimentConfig, String> {
    let Some(path) = path else {
        return Err("--config <path> is required".into());
    };
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    ExperimentConfig::parse(&text, requested).map_err(|e| format!("{}: {e}", path.display()))
}

/// Entry point of the binary; returns the process exit code.
pub fn cli_main(args: impl IntoIterator<Item = OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command.as_str() {
        "list" => {
            print!("{}", experiment_listing());
            EXIT_OK
        }
        "validate" => match load(&cli.config, None) {
            Ok(cfg) => {
                print!("{}", cfg.with_seed(cli.seed).with_out(cli.out).listing());
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INVALID
            }
        },
        id => {
            if config::experiment(id).is_none() {
                let near = config::experiment_ids().into_iter().min_by_key(|c| strsim::levenshtein(id, c)).unwrap_or("list");
                eprintln!("error: unknown experiment `{id}`; did you mean `{near}`? (`ftrlab list` shows all)");
                return EXIT_INVALID;
            }
            let cfg = match load(&cli.config, Some(id)) {
                Ok(c) => c.with_seed(cli.seed).with_out(cli.out),
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_INVALID;
                }
            };
            if let Err(e) = init_threads() {
                eprintln!("error: {e}");
                return EXIT_INVALID;
            }
            match run(&cfg) {
                Ok(report) => {
                    println!("{} run {}: {} rows -> {}", cfg.experiment.id, report.run_id, report.rows, report.results.display());
                    if let Status::Inconclusive(why) = &report.status {
                        eprintln!("inconclusive: {why}");
                    }
                    report.exit_code()
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
    }
}
