//! Experiment runners. Trials fan out over rayon and are collected in trial
//! order, so every table is independent of scheduling.

use crate::config::{ExperimentConfig, ExperimentKind, SelectorKind};
use crate::error::BenchError;
use crate::output::{fmt_f64, Table, TrialRecord, TRIAL_COLUMNS};
use num_complex::Complex64;
use rayon::prelude::*;
use sscosamp::genprob::{self, ExperimentSeed};
use sscosamp::rip;
use sscosamp::selectors::estimate_near_optimality;
use sscosamp::solver::{sscosamp, HaltingPolicy, RecoveryProblem};
use sscosamp::theory::{self, IterationDeltas};
use sscosamp::{Dictionary, Error};
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Table,
    pub summary: Option<Table>,
    /// Rows that could not be computed because an exhaustive search exceeded the cap.
    pub infeasible: usize,
}

/// One sweep point: everything but the trial index.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub m: usize,
    pub k: usize,
    pub sigma: f64,
    pub selector: SelectorKind,
}

pub fn sweep_points(config: &ExperimentConfig) -> Vec<SweepPoint> {
    let mut points = Vec::new();
    for &m in &config.m {
        for &k in &config.k {
            for &sigma in &config.sigma {
                for &selector in &config.selectors {
                    points.push(SweepPoint { m, k, sigma, selector });
                }
            }
        }
    }
    points
}

/// The DFT dictionary at the configured block size and its `B = 1` view.
fn dictionaries(config: &ExperimentConfig) -> sscosamp::Result<(Dictionary<Complex64>, Dictionary<Complex64>)> {
    let block = genprob::overcomplete_dft(config.d, config.redundancy, config.block_size)?;
    let unit = block.with_block_size(1)?;
    Ok((block, unit))
}

/// Runs one SSCoSaMP trial. The instance depends only on `(master_seed,
/// trial, m, k, σ)`: every selector sees the same `M`, `x` and noise
/// direction, and the noise scales with `σ`.
pub fn run_trial(
    config: &ExperimentConfig,
    block_dict: &Dictionary<Complex64>,
    unit_dict: &Dictionary<Complex64>,
    point: SweepPoint,
    trial: usize,
) -> TrialRecord {
    let start = Instant::now();
    let (dict, k_eff) = if point.selector.is_block() {
        (block_dict, point.k)
    } else {
        (unit_dict, point.k * config.block_size)
    };
    let outcome = (|| -> sscosamp::Result<_> {
        let mut rng = ExperimentSeed::new(config.master_seed, trial as u64).rng();
        let sensing = genprob::gaussian_sensing_scaled::<Complex64, _>(point.m, config.d, config.sensing_scale, &mut rng)?;
        let coeffs = genprob::clustered_block_coeffs::<Complex64, _>(
            block_dict.n(),
            config.block_size,
            point.k,
            config.min_gap,
            &mut rng,
        )?;
        let noise = genprob::awgn::<Complex64, _>(point.m, point.sigma, &mut rng)?;
        let x = block_dict.synthesize(coeffs.values())?;
        let y = sensing.apply(&x)? + noise;
        let problem = RecoveryProblem::new(y, sensing, dict.clone(), k_eff, config.expansion)?;
        let selector = point.selector.build(config.epsilon, config.cap)?;
        let halt = HaltingPolicy {
            max_iterations: config.max_iterations,
            relative_residual_tolerance: config.residual_tolerance,
            stall_tolerance: config.stall_tolerance,
        };
        let trace = sscosamp(&problem, &*selector, &*selector, &halt, None)?;
        let error_norm = (&trace.estimate - &x).norm();
        Ok((trace.iterations_used(), trace.halt.as_str(), error_norm, error_norm / x.norm()))
    })();
    let (iterations, halt_reason, error_norm, relative_error) = match outcome {
        Ok((it, reason, err, rel)) => (it, reason.to_string(), err, rel),
        Err(_) => (0, "error".to_string(), f64::NAN, f64::NAN),
    };
    TrialRecord {
        experiment: config.kind.as_str().into(),
        trial,
        m: point.m,
        d: config.d,
        n: dict.n(),
        k: k_eff,
        block_size: dict.block_size(),
        selector: point.selector.as_str().into(),
        epsilon: if point.selector.uses_epsilon() { config.epsilon } else { 0.0 },
        sigma: point.sigma,
        seed: config.master_seed,
        iterations,
        halt_reason,
        relative_error,
        error_norm,
        success: relative_error <= config.success_threshold,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// All trial records of a sweep, grouped by point and in trial order.
pub fn sweep_records(config: &ExperimentConfig) -> Result<Vec<TrialRecord>, BenchError> {
    let (block, unit) = dictionaries(config).map_err(|e| BenchError::Config(e.to_string()))?;
    let tasks: Vec<(SweepPoint, usize)> = sweep_points(config)
        .into_iter()
        .flat_map(|p| (0..config.trials).map(move |t| (p, t)))
        .collect();
    Ok(tasks
        .into_par_iter()
        .map(|(p, t)| run_trial(config, &block, &unit, p, t))
        .collect())
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    let v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

pub const SUMMARY_COLUMNS: [&str; 14] = [
    "experiment",
    "selector",
    "m",
    "k",
    "sigma",
    "trials",
    "failures",
    "successes",
    "recovery_rate",
    "median_relative_error",
    "mean_relative_error",
    "median_squared_error",
    "mean_squared_error",
    "median_iterations",
];

/// Aggregates per sweep point: recovery rate = successes/trials, median and
/// mean of the relative error and of `‖x̂ − x‖₂²`. Failed trials count as
/// unsuccessful and are excluded from the error statistics.
pub fn summarize(records: &[TrialRecord], trials: usize) -> Table {
    let mut table = Table::new(&SUMMARY_COLUMNS);
    for group in records.chunks(trials.max(1)) {
        let first = &group[0];
        let ok: Vec<&TrialRecord> = group.iter().filter(|r| !r.failed()).collect();
        let rel: Vec<f64> = ok.iter().map(|r| r.relative_error).collect();
        let sq: Vec<f64> = ok.iter().map(|r| r.error_norm * r.error_norm).collect();
        let its: Vec<f64> = ok.iter().map(|r| r.iterations as f64).collect();
        let successes = group.iter().filter(|r| r.success).count();
        table.push(vec![
            first.experiment.clone(),
            first.selector.clone(),
            first.m.to_string(),
            first.k.to_string(),
            fmt_f64(first.sigma),
            group.len().to_string(),
            (group.len() - ok.len()).to_string(),
            successes.to_string(),
            fmt_f64(successes as f64 / group.len() as f64),
            fmt_f64(median(&rel)),
            fmt_f64(mean(&rel)),
            fmt_f64(median(&sq)),
            fmt_f64(mean(&sq)),
            fmt_f64(median(&its)),
        ]);
    }
    table
}

fn run_sweep(config: &ExperimentConfig) -> Result<RunOutput, BenchError> {
    let records = sweep_records(config)?;
    let mut rows = Table::new(&TRIAL_COLUMNS);
    for r in &records {
        rows.push(r.to_row());
    }
    Ok(RunOutput {
        rows,
        summary: Some(summarize(&records, config.trials)),
        infeasible: 0,
    })
}

pub const RIP_COLUMNS: [&str; 13] = [
    "experiment",
    "trial",
    "m",
    "d",
    "n",
    "k",
    "block_size",
    "seed",
    "exact_delta",
    "sampled_delta",
    "supports_examined",
    "status",
    "wall_ms",
];

fn status_of(e: &Error) -> &'static str {
    match e.root() {
        Error::InfeasibleBruteforce { .. } => "infeasible-bruteforce",
        _ => "error",
    }
}

/// Exact and sampled block D-RIP constants of random Gaussian `M` against the DFT frame.
fn run_rip_probe(config: &ExperimentConfig) -> Result<RunOutput, BenchError> {
    let (dict, _) = dictionaries(config).map_err(|e| BenchError::Config(e.to_string()))?;
    let mut tasks = Vec::new();
    for &m in &config.m {
        for &k in &config.k {
            for t in 0..config.trials {
                tasks.push((m, k, t));
            }
        }
    }
    let results: Vec<(Vec<String>, bool)> = tasks
        .into_par_iter()
        .map(|(m, k, t)| {
            let start = Instant::now();
            let outcome = (|| -> sscosamp::Result<_> {
                let mut rng = ExperimentSeed::new(config.master_seed, t as u64).rng();
                let sensing =
                    genprob::gaussian_sensing_scaled::<Complex64, _>(m, config.d, config.sensing_scale, &mut rng)?;
                let sampled = rip::sampled_drip_lower_bound(
                    &sensing,
                    &dict,
                    k,
                    config.samples,
                    config.master_seed.wrapping_add(t as u64),
                )?;
                let exact = rip::exact_drip(&sensing, &dict, k, config.cap);
                Ok((sampled.delta, exact))
            })();
            let (exact, sampled, examined, status, infeasible) = match outcome {
                Ok((s, Ok(e))) => (e.delta, s, e.supports_examined.to_string(), "ok", false),
                Ok((s, Err(e))) => (f64::NAN, s, "0".into(), status_of(&e), status_of(&e) != "error"),
                Err(e) => (f64::NAN, f64::NAN, "0".into(), status_of(&e), false),
            };
            let row = vec![
                config.kind.as_str().into(),
                t.to_string(),
                m.to_string(),
                config.d.to_string(),
                dict.n().to_string(),
                k.to_string(),
                dict.block_size().to_string(),
                config.master_seed.to_string(),
                fmt_f64(exact),
                fmt_f64(sampled),
                examined,
                status.into(),
                fmt_f64(start.elapsed().as_secs_f64() * 1e3),
            ];
            (row, infeasible)
        })
        .collect();
    let mut rows = Table::new(&RIP_COLUMNS);
    let infeasible = results.iter().filter(|r| r.1).count();
    for (row, _) in results {
        rows.push(row);
    }
    Ok(RunOutput {
        rows,
        summary: None,
        infeasible,
    })
}

pub const AUDIT_COLUMNS: [&str; 12] = [
    "experiment",
    "selector",
    "d",
    "n",
    "k",
    "block_size",
    "epsilon",
    "trials",
    "skipped",
    "c_hat",
    "c_tilde_hat",
    "status",
];

/// Worst-case near-optimality constants of each selector on the DFT frame.
fn run_projection_audit(config: &ExperimentConfig) -> Result<RunOutput, BenchError> {
    let (block, unit) = dictionaries(config).map_err(|e| BenchError::Config(e.to_string()))?;
    let mut rows = Table::new(&AUDIT_COLUMNS);
    let mut infeasible = 0;
    for &k in &config.k {
        for &selector in &config.selectors {
            let (dict, k_eff) = if selector.is_block() {
                (&block, k)
            } else {
                (&unit, k * config.block_size)
            };
            let report = selector.build(config.epsilon, config.cap).and_then(|sel| {
                estimate_near_optimality(&*sel, dict, k_eff, config.trials, config.master_seed, config.cap)
            });
            let (skipped, c_hat, c_tilde_hat, status) = match report {
                Ok(r) => (r.skipped.to_string(), r.c_hat, r.c_tilde_hat, "ok"),
                Err(e) => {
                    let status = status_of(&e);
                    if status != "error" {
                        infeasible += 1;
                    }
                    ("0".into(), f64::NAN, f64::NAN, status)
                }
            };
            rows.push(vec![
                config.kind.as_str().into(),
                selector.as_str().into(),
                config.d.to_string(),
                dict.n().to_string(),
                k_eff.to_string(),
                dict.block_size().to_string(),
                fmt_f64(if selector.uses_epsilon() { config.epsilon } else { 0.0 }),
                config.trials.to_string(),
                skipped,
                fmt_f64(c_hat),
                fmt_f64(c_tilde_hat),
                status.into(),
            ]);
        }
    }
    Ok(RunOutput {
        rows,
        summary: None,
        infeasible,
    })
}

pub const THEORY_COLUMNS: [&str; 16] = [
    "experiment",
    "c_k",
    "c_tilde",
    "gamma",
    "condition",
    "epsilon",
    "delta",
    "alpha",
    "rho1",
    "rho2",
    "eta1",
    "eta2",
    "rho",
    "eta",
    "converges",
    "status",
];

/// Convergence condition, `ε` threshold and iteration constants over a grid.
fn run_theory_probe(config: &ExperimentConfig) -> Result<RunOutput, BenchError> {
    let mut rows = Table::new(&THEORY_COLUMNS);
    let err = |e: Error| BenchError::Config(e.to_string());
    for &c_k in &config.c_k {
        for &c_tilde in &config.c_tilde {
            for &gamma in &config.gamma {
                let condition = theory::check_convergence_condition(c_k, c_tilde, gamma).map_err(err)?;
                let epsilon = theory::epsilon_threshold(c_k, c_tilde, gamma).map_err(err)?;
                for &delta in &config.delta {
                    let mut row = vec![
                        config.kind.as_str().into(),
                        fmt_f64(c_k),
                        fmt_f64(c_tilde),
                        fmt_f64(gamma),
                        u8::from(condition).to_string(),
                        fmt_f64(epsilon.unwrap_or(f64::NAN)),
                        fmt_f64(delta),
                    ];
                    match theory::iteration_constants(IterationDeltas::uniform(delta), c_k, c_tilde, gamma) {
                        Ok(tc) => {
                            row.extend([tc.alpha_proof, tc.rho1, tc.rho2, tc.eta1, tc.eta2, tc.rho, tc.eta].map(fmt_f64));
                            row.push(u8::from(tc.converges()).to_string());
                            row.push("ok".into());
                        }
                        Err(Error::RegimeViolation(_)) => {
                            row.extend(std::iter::repeat_n(fmt_f64(f64::NAN), 7));
                            row.push("0".into());
                            row.push("regime-violation".into());
                        }
                        Err(e) => return Err(err(e)),
                    }
                    rows.push(row);
                }
            }
        }
    }
    Ok(RunOutput {
        rows,
        summary: None,
        infeasible: 0,
    })
}

/// Runs the configured experiment in memory.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, BenchError> {
    config.validate()?;
    match config.kind {
        ExperimentKind::RecoveryRate | ExperimentKind::NoiseSweep | ExperimentKind::KSweep => run_sweep(config),
        ExperimentKind::RipProbe => run_rip_probe(config),
        ExperimentKind::ProjectionAudit => run_projection_audit(config),
        ExperimentKind::TheoryProbe => run_theory_probe(config),
    }
}
