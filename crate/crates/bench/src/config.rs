//! Experiment configuration: a flat `key=value` map (from a file and/or CLI
//! flags) parsed into a validated [`ExperimentConfig`].

use crate::error::BenchError;
use num_complex::Complex64;
use sscosamp::genprob::SensingScale;
use sscosamp::selectors::{Bomp, EpsBomp, Omp, OptimalBruteforce, SupportSelector, Thresholding};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

pub type RawConfig = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    RecoveryRate,
    NoiseSweep,
    KSweep,
    RipProbe,
    ProjectionAudit,
    TheoryProbe,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::RecoveryRate,
        ExperimentKind::NoiseSweep,
        ExperimentKind::KSweep,
        ExperimentKind::RipProbe,
        ExperimentKind::ProjectionAudit,
        ExperimentKind::TheoryProbe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::RecoveryRate => "recovery-rate",
            ExperimentKind::NoiseSweep => "noise-sweep",
            ExperimentKind::KSweep => "k-sweep",
            ExperimentKind::RipProbe => "rip-probe",
            ExperimentKind::ProjectionAudit => "projection-audit",
            ExperimentKind::TheoryProbe => "theory-probe",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Sweeps run SSCoSaMP trials and emit `TrialRecord` rows.
    pub fn is_sweep(self) -> bool {
        matches!(
            self,
            ExperimentKind::RecoveryRate | ExperimentKind::NoiseSweep | ExperimentKind::KSweep
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelectorKind {
    Omp,
    EpsOmp,
    Bomp,
    EpsBomp,
    Thresholding,
    BlockThresholding,
    Optimal,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 7] = [
        SelectorKind::Omp,
        SelectorKind::EpsOmp,
        SelectorKind::Bomp,
        SelectorKind::EpsBomp,
        SelectorKind::Thresholding,
        SelectorKind::BlockThresholding,
        SelectorKind::Optimal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SelectorKind::Omp => "omp",
            SelectorKind::EpsOmp => "eps-omp",
            SelectorKind::Bomp => "bomp",
            SelectorKind::EpsBomp => "eps-bomp",
            SelectorKind::Thresholding => "thresholding",
            SelectorKind::BlockThresholding => "block-thresholding",
            SelectorKind::Optimal => "optimal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Block selectors work on the configured block size; the others see the
    /// same dictionary with `B = 1` and sparsity `k·B`.
    pub fn is_block(self) -> bool {
        matches!(
            self,
            SelectorKind::Bomp | SelectorKind::EpsBomp | SelectorKind::BlockThresholding | SelectorKind::Optimal
        )
    }

    pub fn uses_epsilon(self) -> bool {
        matches!(self, SelectorKind::EpsOmp | SelectorKind::EpsBomp)
    }

    pub fn build(self, epsilon: f64, cap: u64) -> sscosamp::Result<Box<dyn SupportSelector<Complex64>>> {
        Ok(match self {
            SelectorKind::Omp => Box::new(Omp),
            SelectorKind::Bomp => Box::new(Bomp),
            SelectorKind::EpsOmp | SelectorKind::EpsBomp => Box::new(EpsBomp::new(epsilon)?),
            SelectorKind::Thresholding | SelectorKind::BlockThresholding => Box::new(Thresholding),
            SelectorKind::Optimal => Box::new(OptimalBruteforce { cap }),
        })
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub d: usize,
    pub redundancy: usize,
    pub block_size: usize,
    pub k: Vec<usize>,
    pub m: Vec<usize>,
    pub sigma: Vec<f64>,
    pub selectors: Vec<SelectorKind>,
    pub epsilon: f64,
    pub expansion: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub success_threshold: f64,
    pub min_gap: usize,
    pub sensing_scale: SensingScale,
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    pub stall_tolerance: f64,
    /// Enumeration cap for exhaustive searches.
    pub cap: u64,
    /// Random coefficient draws per sampled D-RIP lower bound.
    pub samples: usize,
    pub c_k: Vec<f64>,
    pub c_tilde: Vec<f64>,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub output: PathBuf,
}

/// Every key accepted in a config file or as a `--flag`.
pub const KEYS: [&str; 25] = [
    "kind",
    "d",
    "redundancy",
    "block_size",
    "k",
    "m",
    "sigma",
    "selectors",
    "epsilon",
    "expansion",
    "trials",
    "master_seed",
    "success_threshold",
    "min_gap",
    "sensing_scale",
    "max_iterations",
    "residual_tolerance",
    "stall_tolerance",
    "cap",
    "samples",
    "c_k",
    "c_tilde",
    "gamma",
    "delta",
    "output",
];

/// `-` and `_` are interchangeable in keys.
pub fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

/// Parses a flat `key=value` file; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<RawConfig, BenchError> {
    let mut raw = RawConfig::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| BenchError::Config(format!("line {}: expected key=value, got {line:?}", lineno + 1)))?;
        let key = normalize_key(key);
        if !KEYS.contains(&key.as_str()) {
            return Err(BenchError::Config(format!("line {}: unknown key {key:?}", lineno + 1)));
        }
        raw.insert(key, value.trim().to_string());
    }
    Ok(raw)
}

pub fn read_config_file(path: &Path) -> Result<RawConfig, BenchError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| BenchError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, BenchError> {
    value
        .trim()
        .parse()
        .map_err(|_| BenchError::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, BenchError> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_one(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(BenchError::Config(format!("{key}: list must be nonempty")));
    }
    Ok(items)
}

impl ExperimentConfig {
    /// Defaults for a kind: desk-scale sweeps and tiny probe instances.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut c = ExperimentConfig {
            kind,
            d: 128,
            redundancy: 4,
            block_size: 4,
            k: vec![2],
            m: vec![12, 16, 20, 24, 32, 48, 64],
            sigma: vec![0.0],
            selectors: vec![
                SelectorKind::Omp,
                SelectorKind::EpsOmp,
                SelectorKind::Bomp,
                SelectorKind::EpsBomp,
            ],
            epsilon: 0.1_f64.sqrt(),
            expansion: 2,
            trials: 200,
            master_seed: 0,
            success_threshold: 1e-4,
            min_gap: 1,
            sensing_scale: SensingScale::PerMeasurement,
            max_iterations: 50,
            residual_tolerance: 1e-6,
            stall_tolerance: 1e-6,
            cap: sscosamp::combinatorics::DEFAULT_ENUMERATION_CAP,
            samples: 1000,
            c_k: vec![1.0, 1.05, 1.1],
            c_tilde: vec![1.0, 0.95, 0.9],
            gamma: vec![0.1],
            delta: vec![0.0, 1e-4, 5e-4],
            output: PathBuf::from(format!("results/{}.csv", kind.as_str())),
        };
        match kind {
            ExperimentKind::RecoveryRate | ExperimentKind::TheoryProbe => {}
            ExperimentKind::NoiseSweep => {
                c.m = vec![40];
                c.sigma = vec![0.0, 0.1, 0.2, 0.3, 0.4];
                c.selectors = vec![SelectorKind::EpsBomp];
                c.sensing_scale = SensingScale::Unit;
            }
            ExperimentKind::KSweep => {
                c.m = vec![40];
                c.k = vec![1, 2, 3, 4];
                c.sigma = vec![0.4];
                c.selectors = vec![SelectorKind::EpsBomp];
                c.sensing_scale = SensingScale::Unit;
            }
            ExperimentKind::RipProbe => {
                c.d = 8;
                c.redundancy = 2;
                c.block_size = 2;
                c.k = vec![1, 2];
                c.m = vec![6, 8];
                c.trials = 20;
            }
            ExperimentKind::ProjectionAudit => {
                c.d = 8;
                c.redundancy = 2;
                c.block_size = 2;
                c.k = vec![1, 2];
                c.selectors = vec![
                    SelectorKind::Thresholding,
                    SelectorKind::Omp,
                    SelectorKind::BlockThresholding,
                    SelectorKind::Bomp,
                    SelectorKind::EpsBomp,
                ];
            }
        }
        c
    }

    /// Applies `raw` over the defaults of the kind named by `raw["kind"]`
    /// (or `kind` when given), then validates.
    pub fn from_raw(kind: Option<ExperimentKind>, raw: &RawConfig) -> Result<Self, BenchError> {
        let kind = match (kind, raw.get("kind")) {
            (Some(k), _) => k,
            (None, Some(s)) => ExperimentKind::parse(s.trim())
                .ok_or_else(|| BenchError::Config(format!("unknown experiment kind {s:?}")))?,
            (None, None) => return Err(BenchError::Config("experiment kind not given".into())),
        };
        let mut c = Self::defaults(kind);
        for (key, value) in raw {
            let v = value.as_str();
            match key.as_str() {
                "kind" => {}
                "d" => c.d = parse_one(key, v)?,
                "redundancy" => c.redundancy = parse_one(key, v)?,
                "block_size" => c.block_size = parse_one(key, v)?,
                "k" => c.k = parse_list(key, v)?,
                "m" => c.m = parse_list(key, v)?,
                "sigma" => c.sigma = parse_list(key, v)?,
                "selectors" => {
                    c.selectors = parse_list::<String>(key, v)?
                        .iter()
                        .map(|s| {
                            SelectorKind::parse(s).ok_or_else(|| BenchError::Config(format!("unknown selector {s:?}")))
                        })
                        .collect::<Result<_, _>>()?
                }
                "epsilon" => c.epsilon = parse_one(key, v)?,
                "expansion" => c.expansion = parse_one(key, v)?,
                "trials" => c.trials = parse_one(key, v)?,
                "master_seed" => c.master_seed = parse_one(key, v)?,
                "success_threshold" => c.success_threshold = parse_one(key, v)?,
                "min_gap" => c.min_gap = parse_one(key, v)?,
                "sensing_scale" => {
                    c.sensing_scale = SensingScale::parse(v.trim())
                        .ok_or_else(|| BenchError::Config(format!("sensing_scale: expected normalized|unit, got {v:?}")))?
                }
                "max_iterations" => c.max_iterations = parse_one(key, v)?,
                "residual_tolerance" => c.residual_tolerance = parse_one(key, v)?,
                "stall_tolerance" => c.stall_tolerance = parse_one(key, v)?,
                "cap" => c.cap = parse_one(key, v)?,
                "samples" => c.samples = parse_one(key, v)?,
                "c_k" => c.c_k = parse_list(key, v)?,
                "c_tilde" => c.c_tilde = parse_list(key, v)?,
                "gamma" => c.gamma = parse_list(key, v)?,
                "delta" => c.delta = parse_list(key, v)?,
                "output" => c.output = PathBuf::from(v.trim()),
                other => return Err(BenchError::Config(format!("unknown key {other:?}"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.d * self.redundancy
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let fail = |msg: String| Err(BenchError::Config(msg));
        let finite_nonneg = |xs: &[f64]| xs.iter().all(|x| x.is_finite() && *x >= 0.0);
        if self.kind == ExperimentKind::TheoryProbe {
            if !self.c_k.iter().all(|&c| c.is_finite() && c >= 1.0) {
                return fail("c_k values must be finite and at least 1".into());
            }
            if !self.c_tilde.iter().all(|&c| c > 0.0 && c <= 1.0) {
                return fail("c_tilde values must lie in (0, 1]".into());
            }
            if !self.gamma.iter().all(|&g| g.is_finite() && g > 0.0) {
                return fail("gamma values must be positive".into());
            }
            if !self.delta.iter().all(|&d| (0.0..1.0).contains(&d)) {
                return fail("delta values must lie in [0, 1)".into());
            }
            return Ok(());
        }
        if self.d == 0 || self.redundancy == 0 || self.block_size == 0 {
            return fail("d, redundancy and block_size must be positive".into());
        }
        if self.n() % self.block_size != 0 {
            return fail(format!("block_size {} does not divide n = {}", self.block_size, self.n()));
        }
        let blocks = self.n() / self.block_size;
        if let Some(&k) = self.k.iter().find(|&&k| k == 0 || k > blocks) {
            return fail(format!("k = {k} outside [1, {blocks}]"));
        }
        if self.m.contains(&0) {
            return fail("m values must be positive".into());
        }
        if self.trials == 0 {
            return fail("trials must be positive".into());
        }
        if self.kind == ExperimentKind::RipProbe {
            return Ok(());
        }
        if self.selectors.is_empty() {
            return fail("selectors must be nonempty".into());
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return fail(format!("epsilon = {} outside [0, 1)", self.epsilon));
        }
        if self.kind == ExperimentKind::ProjectionAudit {
            return Ok(());
        }
        if !finite_nonneg(&self.sigma) {
            return fail("sigma values must be finite and nonnegative".into());
        }
        if self.expansion == 0 {
            return fail("expansion must be at least 1".into());
        }
        if !(self.success_threshold > 0.0) {
            return fail("success_threshold must be positive".into());
        }
        if self.max_iterations == 0 {
            return fail("max_iterations must be at least 1".into());
        }
        if !finite_nonneg(&[self.residual_tolerance, self.stall_tolerance]) {
            return fail("halting tolerances must be nonnegative".into());
        }
        if let Some(&k) = self
            .k
            .iter()
            .find(|&&k| k + k.saturating_sub(1) * self.min_gap > blocks)
        {
            return fail(format!(
                "cannot place k = {k} blocks with min_gap {} among {blocks} blocks",
                self.min_gap
            ));
        }
        Ok(())
    }

    /// `key=value` lines describing the configuration, in [`KEYS`] order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        fn join<T: ToString>(xs: &[T]) -> String {
            xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
        }
        vec![
            ("kind", self.kind.to_string()),
            ("d", self.d.to_string()),
            ("redundancy", self.redundancy.to_string()),
            ("block_size", self.block_size.to_string()),
            ("k", join(&self.k)),
            ("m", join(&self.m)),
            ("sigma", join(&self.sigma)),
            ("selectors", join(&self.selectors)),
            ("epsilon", self.epsilon.to_string()),
            ("expansion", self.expansion.to_string()),
            ("trials", self.trials.to_string()),
            ("master_seed", self.master_seed.to_string()),
            ("success_threshold", self.success_threshold.to_string()),
            ("min_gap", self.min_gap.to_string()),
            ("sensing_scale", self.sensing_scale.as_str().to_string()),
            ("max_iterations", self.max_iterations.to_string()),
            ("residual_tolerance", self.residual_tolerance.to_string()),
            ("stall_tolerance", self.stall_tolerance.to_string()),
            ("cap", self.cap.to_string()),
            ("samples", self.samples.to_string()),
            ("c_k", join(&self.c_k)),
            ("c_tilde", join(&self.c_tilde)),
            ("gamma", join(&self.gamma)),
            ("delta", join(&self.delta)),
            ("output", self.output.display().to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(pairs: &[(&str, &str)]) -> RawConfig {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn file_parsing_comments_and_dashes() {
        let r = parse_config_text("# header\nkind = noise-sweep\nmaster-seed=7 # trailing\n\nsigma=0.1, 0.2\n").unwrap();
        assert_eq!(r["kind"], "noise-sweep");
        assert_eq!(r["master_seed"], "7");
        let c = ExperimentConfig::from_raw(None, &r).unwrap();
        assert_eq!(c.kind, ExperimentKind::NoiseSweep);
        assert_eq!(c.master_seed, 7);
        assert_eq!(c.sigma, vec![0.1, 0.2]);
        assert_eq!(c.sensing_scale, SensingScale::Unit);
    }

    #[test]
    fn unknown_key_and_bad_line_rejected() {
        assert!(parse_config_text("bogus=1").is_err());
        assert!(parse_config_text("just words").is_err());
    }

    #[test]
    fn validation_rejects_degenerate_values() {
        let k = Some(ExperimentKind::KSweep);
        assert!(ExperimentConfig::from_raw(k, &raw(&[("k", "0")])).is_err());
        assert!(ExperimentConfig::from_raw(k, &raw(&[("k", "")])).is_err());
        assert!(ExperimentConfig::from_raw(k, &raw(&[("trials", "0")])).is_err());
        assert!(ExperimentConfig::from_raw(k, &raw(&[("block_size", "3")])).is_err());
        assert!(ExperimentConfig::from_raw(k, &raw(&[("selectors", "omp,lasso")])).is_err());
        assert!(ExperimentConfig::from_raw(k, &raw(&[("sigma", "-1")])).is_err());
        assert!(ExperimentConfig::from_raw(k, &raw(&[("epsilon", "1.5")])).is_err());
        assert!(ExperimentConfig::from_raw(k, &raw(&[("sensing_scale", "huge")])).is_err());
        assert!(ExperimentConfig::from_raw(None, &raw(&[])).is_err());
    }

    #[test]
    fn explicit_kind_overrides_file() {
        let c = ExperimentConfig::from_raw(Some(ExperimentKind::TheoryProbe), &raw(&[("kind", "k-sweep")])).unwrap();
        assert_eq!(c.kind, ExperimentKind::TheoryProbe);
    }

    #[test]
    fn pairs_round_trip() {
        let c = ExperimentConfig::defaults(ExperimentKind::RecoveryRate);
        let text: String = c.to_pairs().iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        let back = ExperimentConfig::from_raw(None, &parse_config_text(&text).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn names_round_trip() {
        for s in SelectorKind::ALL {
            assert_eq!(SelectorKind::parse(s.as_str()), Some(s));
        }
        for k in ExperimentKind::ALL {
            assert_eq!(ExperimentKind::parse(k.as_str()), Some(k));
        }
    }
}
