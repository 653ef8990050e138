//! Command line driver: reads a run configuration, executes one of the
//! experiment modes and writes a JSON report plus optional CSV tables.
//!
//! Exit codes: 0 on success, 1 on configuration or I/O errors, 2 when the
//! engine fails (a partial report is still written).

pub mod config;
pub mod modes;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use thiserror::Error;

use config::{Mode, RunConfig};
use report::{to_json, write_file, ErrorObject, Report, Timings, TIMINGS_FILE};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config file not found: {0}")]
    ConfigNotFound(String),
    #[error("config does not parse: {0}")]
    ConfigParse(String),
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("{0}")]
    Config(polydisk_core::Error),
    #[error("{0}")]
    Engine(polydisk_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::ConfigNotFound(_) => "ConfigNotFound",
            CliError::ConfigParse(_) => "ConfigParseError",
            CliError::ConfigInvalid(_) => "ConfigInvalid",
            CliError::Config(e) | CliError::Engine(e) => e.kind(),
            CliError::Io(_) => "IoError",
            CliError::Usage(_) => "UsageError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Engine(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "polydisk", version, about = "Universal inner function experiments on the polydisk")]
pub struct Args {
    /// Run configuration (TOML).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Overrides the mode named in the config.
    #[arg(long, value_name = "NAME")]
    pub mode: Option<String>,
    /// Overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides `seed` (random verification points only).
    #[arg(long, value_name = "INT")]
    pub seed: Option<u64>,
    /// Suppresses the stdout summary.
    #[arg(long)]
    pub quiet: bool,
}

/// What a mode hands back for the writer.
pub struct Outcome {
    pub report: Report,
    pub tables: Vec<report::Table>,
    pub summary: Vec<String>,
    pub phases: Vec<(String, f64)>,
    pub exit_code: i32,
}

fn write_outputs(dir: &Path, cfg: Option<&RunConfig>, outcome: &mut Outcome, total: f64) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let tables_on = cfg.map_or(true, |c| c.output.tables);
    if tables_on {
        for t in &outcome.tables {
            t.write(dir)?;
        }
        outcome.report.tables = outcome.tables.iter().map(|t| t.name.clone()).collect();
    }
    let name = cfg.map_or("report.json", |c| c.output.report.as_str());
    write_file(&dir.join(name), to_json(&outcome.report).as_bytes())?;
    let timings = Timings {
        total_seconds: total,
        phases: outcome.phases.clone(),
    };
    write_file(&dir.join(TIMINGS_FILE), to_json(&timings).as_bytes())
}

fn error_outcome(mode: &str, seed: u64, cfg: Option<RunConfig>, err: &CliError) -> Outcome {
    let mut report = Report::new(mode, seed, cfg);
    report.status = if err.exit_code() == 2 { "engine-failure" } else { "config-error" };
    report.error = Some(ErrorObject::from(err));
    Outcome {
        report,
        tables: Vec::new(),
        summary: Vec::new(),
        phases: Vec::new(),
        exit_code: err.exit_code(),
    }
}

/// Entry point shared by the binary and the tests.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let started = Instant::now();

    let loaded = RunConfig::load(&args.config).and_then(|mut cfg| {
        if let Some(m) = &args.mode {
            cfg.mode = Mode::parse(m).ok_or_else(|| CliError::Usage(format!("unknown mode '{m}'")))?;
        }
        if let Some(s) = args.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    });

    let (mut outcome, dir, cfg) = match loaded {
        Ok(cfg) => {
            let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
            let outcome = modes::run_mode(&cfg, &base)
                .unwrap_or_else(|e| error_outcome(cfg.mode.name(), cfg.seed, Some(cfg.clone()), &e));
            (outcome, cfg.output_dir(args.out.as_deref()), Some(cfg))
        }
        Err(e) => {
            let mode = args.mode.clone().unwrap_or_default();
            let outcome = error_outcome(&mode, args.seed.unwrap_or(0), None, &e);
            let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            (outcome, dir, None)
        }
    };

    if let Some(err) = &outcome.report.error {
        eprintln!("error [{}]: {}", err.kind, err.message);
    }
    if let Err(e) = write_outputs(&dir, cfg.as_ref(), &mut outcome, started.elapsed().as_secs_f64()) {
        eprintln!("error [{}]: {e}", e.kind());
        return 1;
    }
    if !args.quiet {
        for line in &outcome.summary {
            println!("{line}");
        }
        println!("report written to {}", dir.join(cfg.as_ref().map_or("report.json", |c| c.output.report.as_str())).display());
    }
    outcome.exit_code
}
