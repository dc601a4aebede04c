//! Configuration, experiment drivers and result files.
//!
//! A run is a pure function of its [`ExperimentConfig`]: every random
//! quantity is derived from the master seed by [`derive_seed`] with a cell
//! id, so adding cells never changes the randomness of existing ones, and
//! parallel jobs are reduced in a fixed order. Each command writes its CSV
//! files (first line `# schema_version=1`) and a JSON [`RunRecord`] to the
//! output directory.
//!
//! [`derive_seed`]: crate::rng::derive_seed

mod config;
mod drivers;
pub mod oracle;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;

pub use config::{Experiment, ExperimentConfig};
pub use drivers::{
    cmd_coupling_verify, cmd_decay_fit, cmd_kertesz_scan, cmd_mixing_tv, cmd_oracle_verify,
    cmd_threshold_table, cmd_verify_constants, field_distribution, spin_boundary,
};
pub use oracle::Check;

pub const SCHEMA_VERSION: u32 = 1;

/// Content version of the library: crate version and a hash of its sources.
pub fn content_version() -> String {
    format!("{}+{}", env!("CARGO_PKG_VERSION"), env!("RFIM_SOURCE_HASH"))
}

/// Outcome of one command.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: Experiment,
    pub checks: Vec<Check>,
    /// Per-cell results, command specific.
    pub cells: serde_json::Value,
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            checks: vec![],
            cells: serde_json::Value::Null,
            files: vec![],
            notes: vec![],
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RngAudit {
    pub master_seed: u64,
    pub scheme: &'static str,
}

/// Everything needed to reproduce a run, plus its results.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub config_hash: String,
    pub version: String,
    pub config: ExperimentConfig,
    /// The config in the text format accepted by `--config`.
    pub config_text: String,
    pub wall_clock_seconds: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub cells: serde_json::Value,
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
    pub rng: RngAudit,
}

impl RunRecord {
    pub fn new(config: &ExperimentConfig, report: &Report, seconds: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config_hash: format!("{:016x}", config.hash()),
            version: content_version(),
            config: config.clone(),
            config_text: config.to_text(),
            wall_clock_seconds: seconds,
            passed: report.passed(),
            checks: report.checks.clone(),
            cells: report.cells.clone(),
            files: report.files.clone(),
            notes: report.notes.clone(),
            rng: RngAudit {
                master_seed: config.seed,
                scheme: "cell seed = splitmix(master, fnv1a(cell id)); keyed uniforms hash (seed, element key)",
            },
        }
    }
}

/// Creates `dir/name` and hands a buffered writer to `f`.
pub(crate) fn write_file(
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(path)
}

/// `check,instance,draw,value,bound,slack,passed`.
pub fn write_checks_csv<W: Write>(mut w: W, checks: &[Check]) -> Result<()> {
    writeln!(w, "# schema_version={SCHEMA_VERSION}")?;
    writeln!(w, "check,instance,draw,value,bound,slack,passed")?;
    for c in checks {
        writeln!(
            w,
            "{},{},{},{:.12e},{:.12e},{:.12e},{}",
            c.check, c.instance, c.draw, c.value, c.bound, c.slack, c.passed
        )?;
    }
    Ok(())
}

/// Runs the command named by the config, writes its files and the run
/// record `<experiment>.record.json`.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let mut report = match config.experiment {
        Experiment::OracleVerify => cmd_oracle_verify(config)?,
        Experiment::CouplingVerify => cmd_coupling_verify(config)?,
        Experiment::KerteszScan => cmd_kertesz_scan(config)?,
        Experiment::DecayFit => cmd_decay_fit(config)?,
        Experiment::ThresholdTable => cmd_threshold_table(config)?,
        Experiment::MixingTv => cmd_mixing_tv(config)?,
        Experiment::VerifyConstants => cmd_verify_constants(config)?,
    };
    let name = format!("{}.record.json", config.experiment);
    let record_path = config.out.join(&name);
    report.files.push(record_path);
    let record = RunRecord::new(config, &report, start.elapsed().as_secs_f64());
    write_file(&config.out, &name, |w| {
        serde_json::to_writer_pretty(&mut *w, &record)?;
        writeln!(w)?;
        Ok(())
    })?;
    Ok(report)
}
