use clap::{Args, Parser, Subcommand};
use sscosamp_bench::config::{normalize_key, read_config_file};
use sscosamp_bench::{execute, BenchError, ExperimentConfig, ExperimentKind, RawConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sscosamp-bench", version, about = "Signal Space CoSaMP experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recovery rate versus m for each selector (noiseless).
    RecoveryRate(Flags),
    /// Error versus noise level σ.
    NoiseSweep(Flags),
    /// Error versus block sparsity k.
    KSweep(Flags),
    /// Exact and sampled block D-RIP constants of Gaussian M.
    RipProbe(Flags),
    /// Near-optimality constants of the selectors against brute force.
    ProjectionAudit(Flags),
    /// Convergence condition, ε threshold and iteration constants.
    TheoryProbe(Flags),
}

/// Flags mirror the config keys; comma-separated values give lists.
#[derive(Args)]
struct Flags {
    /// Flat key=value file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    redundancy: Option<String>,
    #[arg(long)]
    block_size: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    /// omp, eps-omp, bomp, eps-bomp, thresholding, block-thresholding, optimal
    #[arg(long)]
    selectors: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Support expansion multiplier a.
    #[arg(long)]
    expansion: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long, alias = "seed")]
    master_seed: Option<String>,
    #[arg(long)]
    success_threshold: Option<String>,
    #[arg(long)]
    min_gap: Option<String>,
    /// normalized (N(0,1/m) entries) or unit (N(0,1) entries)
    #[arg(long)]
    sensing_scale: Option<String>,
    #[arg(long)]
    max_iterations: Option<String>,
    #[arg(long)]
    residual_tolerance: Option<String>,
    #[arg(long)]
    stall_tolerance: Option<String>,
    /// Enumeration cap for exhaustive searches.
    #[arg(long)]
    cap: Option<String>,
    /// Random draws per sampled D-RIP bound.
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    c_k: Option<String>,
    #[arg(long)]
    c_tilde: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(short, long)]
    output: Option<String>,
}

impl Flags {
    fn overrides(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("d", &self.d),
            ("redundancy", &self.redundancy),
            ("block_size", &self.block_size),
            ("k", &self.k),
            ("m", &self.m),
            ("sigma", &self.sigma),
            ("selectors", &self.selectors),
            ("epsilon", &self.epsilon),
            ("expansion", &self.expansion),
            ("trials", &self.trials),
            ("master_seed", &self.master_seed),
            ("success_threshold", &self.success_threshold),
            ("min_gap", &self.min_gap),
            ("sensing_scale", &self.sensing_scale),
            ("max_iterations", &self.max_iterations),
            ("residual_tolerance", &self.residual_tolerance),
            ("stall_tolerance", &self.stall_tolerance),
            ("cap", &self.cap),
            ("samples", &self.samples),
            ("c_k", &self.c_k),
            ("c_tilde", &self.c_tilde),
            ("gamma", &self.gamma),
            ("delta", &self.delta),
            ("output", &self.output),
        ]
    }

    fn raw(&self) -> Result<RawConfig, BenchError> {
        let mut raw = match &self.config {
            Some(path) => read_config_file(path)?,
            None => RawConfig::new(),
        };
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                raw.insert(normalize_key(key), v.clone());
            }
        }
        Ok(raw)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = match &cli.command {
        Command::RecoveryRate(f) => (ExperimentKind::RecoveryRate, f),
        Command::NoiseSweep(f) => (ExperimentKind::NoiseSweep, f),
        Command::KSweep(f) => (ExperimentKind::KSweep, f),
        Command::RipProbe(f) => (ExperimentKind::RipProbe, f),
        Command::ProjectionAudit(f) => (ExperimentKind::ProjectionAudit, f),
        Command::TheoryProbe(f) => (ExperimentKind::TheoryProbe, f),
    };
    let result = flags
        .raw()
        .and_then(|raw| ExperimentConfig::from_raw(Some(kind), &raw))
        .and_then(|config| {
            let out = execute(&config)?;
            eprintln!("{}: {} rows -> {}", kind, out.rows.rows.len(), config.output.display());
            Ok(())
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sscosamp-bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
