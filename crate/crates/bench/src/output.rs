//! CSV tables, the aggregate summary file and the run manifest.

use crate::config::ExperimentConfig;
use crate::error::BenchError;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Bumped whenever a column is added, removed or reordered.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Column names of per-trial sweep rows, in output order.
pub const TRIAL_COLUMNS: [&str; 17] = [
    "experiment",
    "trial",
    "m",
    "d",
    "n",
    "k",
    "block_size",
    "selector",
    "epsilon",
    "sigma",
    "seed",
    "iterations",
    "halt_reason",
    "relative_error",
    "error_norm",
    "success",
    "wall_ms",
];

/// Columns holding wall-clock measurements; everything else is reproducible.
pub const TIMING_COLUMNS: [&str; 1] = ["wall_ms"];

/// Floats with 17 significant digits; non-finite values as `NaN`, `inf`, `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub experiment: String,
    pub trial: usize,
    pub m: usize,
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub block_size: usize,
    pub selector: String,
    pub epsilon: f64,
    pub sigma: f64,
    pub seed: u64,
    pub iterations: usize,
    /// `residual`, `stall`, `max-iterations`, or `error` for a failed trial.
    pub halt_reason: String,
    pub relative_error: f64,
    /// `‖x̂ − x‖₂`.
    pub error_norm: f64,
    pub success: bool,
    pub wall_ms: f64,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        self.halt_reason == "error"
    }

    pub fn to_row(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.trial.to_string(),
            self.m.to_string(),
            self.d.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            self.block_size.to_string(),
            self.selector.clone(),
            fmt_f64(self.epsilon),
            fmt_f64(self.sigma),
            self.seed.to_string(),
            self.iterations.to_string(),
            self.halt_reason.clone(),
            fmt_f64(self.relative_error),
            fmt_f64(self.error_norm),
            u8::from(self.success).to_string(),
            fmt_f64(self.wall_ms),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| BenchError::Io(e.into_error()))
    }
}

pub fn summary_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.summary.csv"))
}

pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest")
}

/// Writes to a sibling temporary file and renames, so readers never see a
/// partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    let attempt = || -> std::io::Result<()> {
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("partial");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)
    };
    attempt().map_err(|e| BenchError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn manifest_text(config: &ExperimentConfig, rows: &Table, summary: Option<&Table>, infeasible: usize) -> String {
    let mut lines = vec![
        format!("code_version={}", env!("CARGO_PKG_VERSION")),
        format!("code_name={}", env!("CARGO_PKG_NAME")),
        format!("csv_schema_version={CSV_SCHEMA_VERSION}"),
        format!("columns={}", rows.columns.join(",")),
        format!("timing_columns={}", TIMING_COLUMNS.join(",")),
        format!("rows={}", rows.rows.len()),
        "float_format=17 significant digits".into(),
        "field=complex".into(),
        "dictionary=overcomplete-dft exp(-2*pi*i*j*l/n)/sqrt(d)".into(),
        "sensing_entries=real gaussian embedded in the complex field".into(),
        "coefficients=circular complex gaussian on clustered blocks".into(),
        "noise=circular complex gaussian, E|e_i|^2 = sigma^2".into(),
        "rng=chacha8 seeded by master_seed, stream = trial index".into(),
        format!("infeasible_rows={infeasible}"),
    ];
    if let Some(s) = summary {
        let name = summary_path(&config.output);
        lines.push(format!(
            "summary={}",
            name.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
        ));
        lines.push(format!("summary_columns={}", s.columns.join(",")));
    }
    for (k, v) in config.to_pairs() {
        lines.push(format!("config.{k}={v}"));
    }
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

/// Writes the row CSV, the optional summary CSV and the manifest.
pub fn write_outputs(
    config: &ExperimentConfig,
    rows: &Table,
    summary: Option<&Table>,
    infeasible: usize,
) -> Result<(), BenchError> {
    write_atomic(&config.output, &rows.to_csv_bytes()?)?;
    if let Some(s) = summary {
        write_atomic(&summary_path(&config.output), &s.to_csv_bytes()?)?;
    }
    write_atomic(
        &manifest_path(&config.output),
        manifest_text(config, rows, summary, infeasible).as_bytes(),
    )
}
