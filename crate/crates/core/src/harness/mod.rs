//! Experiment orchestration: JSON configs, deterministic reports and the
//! acceptance gate.

mod experiments;
pub mod gate;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::SolverConfig;
use crate::fit::LogLogFit;
use crate::gauge::Coefficients;
use crate::initial_data::InitialData;
use crate::spectral::GridSpec;

pub use experiments::{
    run_bona_smith, run_conservation, run_direct_vs_gauged, run_envelope, run_eps_convergence, run_joint_limit,
    run_lipschitz_flow, run_strichartz,
};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "GAUGE_DNLS_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    EpsConvergence,
    JointLimit,
    BonaSmith,
    Conservation,
    LipschitzFlow,
    Envelope,
    Strichartz,
    DirectVsGauged,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::EpsConvergence => "eps_convergence",
            ExperimentKind::JointLimit => "joint_limit",
            ExperimentKind::BonaSmith => "bona_smith",
            ExperimentKind::Conservation => "conservation",
            ExperimentKind::LipschitzFlow => "lipschitz_flow",
            ExperimentKind::Envelope => "envelope",
            ExperimentKind::Strichartz => "strichartz",
            ExperimentKind::DirectVsGauged => "direct_vs_gauged",
        }
    }
}

fn default_grid() -> GridSpec {
    GridSpec {
        n: 512,
        length: 80.0,
        x_left: -40.0,
    }
}

fn default_initial_data() -> InitialData {
    InitialData::gaussian(0.5, 2.0, 0.0)
}

fn default_sobolev_index() -> f64 {
    2.0
}

fn default_envelope_delta() -> f64 {
    0.005
}

fn default_ensemble_size() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "Coefficients::canonical_special")]
    pub coefficients: Coefficients,
    #[serde(default = "default_initial_data")]
    pub initial_data: InitialData,
    #[serde(default)]
    pub seed: u64,
    /// Exponent `s` of the `X^s` / `H^s` norms the experiment measures in.
    #[serde(default = "default_sobolev_index")]
    pub sobolev_index: f64,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub etas: Vec<f64>,
    #[serde(default)]
    pub perturbations: Vec<f64>,
    /// Shells for the tail check of the envelope experiment.
    #[serde(default)]
    pub shells: Vec<i32>,
    #[serde(default = "default_envelope_delta")]
    pub envelope_delta: f64,
    /// Envelope radius; `None` uses `||phi||_{H^s}`.
    #[serde(default)]
    pub envelope_radius: Option<f64>,
    /// Members of random ensembles (Strichartz).
    #[serde(default = "default_ensemble_size")]
    pub ensemble_size: usize,
    /// Extra regularity `j` of the mollifier rate.
    #[serde(default)]
    pub smoothing_gain: Option<f64>,
}

impl ExperimentConfig {
    /// A config of `kind` with every default filled in, including the sweep lists.
    pub fn with_defaults(kind: ExperimentKind) -> Self {
        let mut cfg = ExperimentConfig {
            kind,
            grid: default_grid(),
            solver: SolverConfig::default(),
            coefficients: Coefficients::canonical_special(),
            initial_data: default_initial_data(),
            seed: 0,
            sobolev_index: default_sobolev_index(),
            epsilons: Vec::new(),
            etas: Vec::new(),
            perturbations: Vec::new(),
            shells: Vec::new(),
            envelope_delta: default_envelope_delta(),
            envelope_radius: None,
            ensemble_size: default_ensemble_size(),
            smoothing_gain: None,
        };
        cfg.fill_sweep_defaults();
        cfg
    }

    /// Empty sweep lists take the documented defaults for the kind.
    pub fn fill_sweep_defaults(&mut self) {
        match self.kind {
            ExperimentKind::EpsConvergence if self.epsilons.is_empty() => {
                self.epsilons = vec![1e-2, 3e-3, 1e-3, 3e-4];
            }
            ExperimentKind::JointLimit => {
                if self.epsilons.is_empty() {
                    self.epsilons = vec![1e-2, 1e-3, 1e-4];
                }
                if self.etas.is_empty() {
                    self.etas = vec![0.3, 0.1, 0.03];
                }
            }
            ExperimentKind::BonaSmith if self.etas.is_empty() => {
                self.etas = vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
            }
            ExperimentKind::LipschitzFlow if self.perturbations.is_empty() => {
                self.perturbations = vec![1e-2, 1e-3, 1e-4];
            }
            ExperimentKind::Envelope if self.shells.is_empty() => {
                self.shells = (0..=5).collect();
            }
            _ => {}
        }
        if self.kind == ExperimentKind::BonaSmith && self.smoothing_gain.is_none() {
            self.smoothing_gain = Some(1.0);
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.fill_sweep_defaults();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.build()?;
        self.solver.validate()?;
        self.initial_data.validate()?;
        let finite = |name: &str, v: &[f64]| -> Result<()> {
            if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::Config(format!("{name} must be finite and nonnegative")));
            }
            Ok(())
        };
        finite("epsilons", &self.epsilons)?;
        finite("etas", &self.etas)?;
        finite("perturbations", &self.perturbations)?;
        let need = |name: &str, len: usize, min: usize| -> Result<()> {
            if len < min {
                return Err(Error::Config(format!(
                    "{} needs at least {min} {name}",
                    self.kind.name()
                )));
            }
            Ok(())
        };
        match self.kind {
            ExperimentKind::EpsConvergence => need("epsilons", self.epsilons.len(), 4)?,
            ExperimentKind::JointLimit => {
                need("epsilons", self.epsilons.len(), 1)?;
                need("etas", self.etas.len(), 1)?;
            }
            ExperimentKind::BonaSmith => need("etas", self.etas.len(), 4)?,
            ExperimentKind::LipschitzFlow => need("perturbations", self.perturbations.len(), 1)?,
            ExperimentKind::Envelope => need("shells", self.shells.len(), 1)?,
            ExperimentKind::Strichartz => need("ensemble members", self.ensemble_size, 1)?,
            ExperimentKind::Conservation | ExperimentKind::DirectVsGauged => {}
        }
        if matches!(self.kind, ExperimentKind::Conservation | ExperimentKind::Envelope)
            && !self.coefficients.is_special_case()
        {
            return Err(Error::Config(format!(
                "{} needs coefficients with 2 lambda + conj(mu) = 0",
                self.kind.name()
            )));
        }
        Ok(())
    }
}

/// A measured quantity checked against a declared bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contract {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `"<="` or `">="`.
    pub relation: String,
    pub passed: bool,
}

impl Contract {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Contract {
            name: name.into(),
            value,
            bound,
            relation: "<=".into(),
            passed: value <= bound,
        }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Contract {
            name: name.into(),
            value,
            bound,
            relation: ">=".into(),
            passed: value >= bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: LogLogFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub point: String,
    pub error: String,
}

/// Deterministic outcome of one experiment; wall-clock data lives in [`Timings`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    /// One row per sweep point or sample, keyed by column name.
    pub points: Vec<BTreeMap<String, f64>>,
    pub fits: Vec<NamedFit>,
    pub contracts: Vec<Contract>,
    pub failures: Vec<Failure>,
    pub passed: bool,
}

impl Report {
    pub(crate) fn new(config: &ExperimentConfig) -> Self {
        Report {
            experiment: config.kind,
            config: config.clone(),
            points: Vec::new(),
            fits: Vec::new(),
            contracts: Vec::new(),
            failures: Vec::new(),
            passed: false,
        }
    }

    pub(crate) fn finish(mut self) -> Self {
        self.passed = self.failures.is_empty() && self.contracts.iter().all(|c| c.passed);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// CSV of `points`; columns are the union of keys in sorted order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut columns: Vec<&String> = self.points.iter().flat_map(|p| p.keys()).collect();
        columns.sort();
        columns.dedup();
        writeln!(
            w,
            "{}",
            columns.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(",")
        )?;
        for p in &self.points {
            let row: Vec<String> = columns
                .iter()
                .map(|c| p.get(*c).map(|v| format!("{v:e}")).unwrap_or_default())
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Wall-clock seconds per experiment, kept apart from the byte-stable reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub seconds: BTreeMap<String, f64>,
}

pub(crate) fn row(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `f` inside a rayon pool honoring [`THREADS_ENV`].
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(f))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    with_pool(|| match cfg.kind {
        ExperimentKind::EpsConvergence => run_eps_convergence(cfg),
        ExperimentKind::JointLimit => run_joint_limit(cfg),
        ExperimentKind::BonaSmith => run_bona_smith(cfg),
        ExperimentKind::Conservation => run_conservation(cfg),
        ExperimentKind::LipschitzFlow => run_lipschitz_flow(cfg),
        ExperimentKind::Envelope => run_envelope(cfg),
        ExperimentKind::Strichartz => run_strichartz(cfg),
        ExperimentKind::DirectVsGauged => run_direct_vs_gauged(cfg),
    })?
}
