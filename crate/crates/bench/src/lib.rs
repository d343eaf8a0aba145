//! Monte Carlo experiment runner for `sscosamp`: recovery-rate, noise and
//! sparsity sweeps plus D-RIP, projection and theory probes. Every run writes
//! a per-row CSV, a manifest and, for sweeps, an aggregate summary CSV.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind, RawConfig, SelectorKind};
pub use error::BenchError;
pub use output::{Table, TrialRecord};
pub use runner::{run, RunOutput};

/// Runs `config` and writes its CSV, summary and manifest. Rows whose
/// exhaustive search exceeded the cap are still written; they turn the
/// result into [`BenchError::Infeasible`] afterwards.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutput, BenchError> {
    let out = run(config)?;
    output::write_outputs(config, &out.rows, out.summary.as_ref(), out.infeasible)?;
    if out.infeasible > 0 {
        return Err(BenchError::Infeasible(format!(
            "{} row(s) exceeded the enumeration cap {}",
            out.infeasible, config.cap
        )));
    }
    Ok(out)
}
