//! Experiment configuration: a flat TOML file of dotted keys, e.g.
//!
//! ```text
//! experiment = "mf"
//! seeds = "1..50"
//! pace.mu = 1.05
//! mf.rank = 4
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use splir_core::spl::{LambdaInit, PaceSchedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Mf,
    HqSweep,
    Classify,
    Mvc,
    Regcheck,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Mf => "mf",
            Experiment::HqSweep => "hq-sweep",
            Experiment::Classify => "classify",
            Experiment::Mvc => "mvc",
            Experiment::Regcheck => "regcheck",
        })
    }
}

/// Inclusive seed range `"a..b"` or an explicit list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Range(String),
    List(Vec<u64>),
}

impl SeedSpec {
    pub fn expand(&self) -> Result<Vec<u64>> {
        match self {
            SeedSpec::List(v) => Ok(v.clone()),
            SeedSpec::Range(s) => parse_seed_range(s),
        }
    }
}

pub fn parse_seed_range(s: &str) -> Result<Vec<u64>> {
    let (a, b) = s
        .split_once("..")
        .with_context(|| format!("seed range {s:?} is not of the form a..b"))?;
    let a: u64 = a.trim().parse().with_context(|| format!("bad seed range start in {s:?}"))?;
    let b: u64 = b.trim().parse().with_context(|| format!("bad seed range end in {s:?}"))?;
    if b < a {
        bail!("empty seed range {s:?}");
    }
    Ok((a..=b).collect())
}

/// `"auto"` or a positive number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLambda", into = "RawLambda")]
pub struct Lambda0(pub LambdaInit);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawLambda {
    Num(f64),
    Word(String),
}

impl TryFrom<RawLambda> for Lambda0 {
    type Error = String;

    fn try_from(raw: RawLambda) -> std::result::Result<Self, String> {
        match raw {
            RawLambda::Num(x) => Ok(Lambda0(LambdaInit::Fixed(x))),
            RawLambda::Word(w) if w == "auto" => Ok(Lambda0(LambdaInit::AutoHalf)),
            RawLambda::Word(w) => Err(format!("lambda0 must be \"auto\" or a number, got {w:?}")),
        }
    }
}

impl From<Lambda0> for RawLambda {
    fn from(l: Lambda0) -> Self {
        match l.0 {
            LambdaInit::Fixed(x) => RawLambda::Num(x),
            LambdaInit::AutoHalf => RawLambda::Word("auto".into()),
        }
    }
}

/// Pace keys; unset ones fall back to the experiment's defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaceConfig {
    pub lambda0: Option<Lambda0>,
    pub mu: Option<f64>,
    pub rounds: Option<usize>,
    pub inner_tol: Option<f64>,
    pub inner_cap: Option<usize>,
}

impl PaceConfig {
    pub fn resolve(&self, defaults: PaceSchedule) -> PaceSchedule {
        PaceSchedule {
            lambda0: self.lambda0.map_or(defaults.lambda0, |l| l.0),
            mu: self.mu.unwrap_or(defaults.mu),
            max_rounds: self.rounds.unwrap_or(defaults.max_rounds),
            inner_tol: self.inner_tol.unwrap_or(defaults.inner_tol),
            inner_cap: self.inner_cap.unwrap_or(defaults.inner_cap),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MfBootstrap {
    /// The pace loop starts from a converged unweighted fit.
    Converged,
    /// The pace loop starts from a single `mf.iters` budget fit.
    Budget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfSection {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub missing: f64,
    pub outliers: f64,
    pub outlier_scale: f64,
    pub noise_std: f64,
    pub l2: f64,
    /// MM iterations per weighted fit inside the pace loop.
    pub iters: usize,
    pub bootstrap: MfBootstrap,
    /// Iterations of the converged unweighted fit (baseline and bootstrap).
    pub full_iters: usize,
    pub tol: f64,
    pub eps: f64,
}

impl Default for MfSection {
    fn default() -> Self {
        Self {
            rows: 100,
            cols: 100,
            rank: 4,
            missing: 0.4,
            outliers: 0.2,
            outlier_scale: 20.0,
            noise_std: 0.1,
            l2: 1e-2,
            iters: 5,
            bootstrap: MfBootstrap::Converged,
            full_iters: 1000,
            tol: 1e-6,
            eps: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplirInit {
    /// SPL-IR starts from the automatic half-weight λ.
    Auto,
    /// SPL-IR starts from each grid λ.
    Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HqSection {
    pub lambdas: Vec<f64>,
    pub regularizer: String,
    /// Weight/fit alternations of the fixed-λ baseline.
    pub inner_cap: usize,
    pub inner_tol: f64,
    pub splir_init: SplirInit,
}

impl Default for HqSection {
    fn default() -> Self {
        Self {
            lambdas: (1..=10).map(|i| 0.3 * i as f64).collect(),
            regularizer: "welsch".into(),
            inner_cap: 150,
            inner_tol: 1e-6,
            splir_init: SplirInit::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySection {
    /// Labeled CSV (label in column 0); synthetic two-Gaussian data if unset.
    pub data: Option<PathBuf>,
    pub n: usize,
    pub d: usize,
    pub separation: f64,
    pub flip: f64,
    pub folds: usize,
    pub l2: f64,
    /// Gradient iterations per weighted fit inside the pace loop.
    pub max_iter: usize,
    pub baseline_max_iter: usize,
    pub tol: f64,
    pub standardize: bool,
}

impl Default for ClassifySection {
    fn default() -> Self {
        Self {
            data: None,
            n: 400,
            d: 5,
            separation: 3.0,
            flip: 0.2,
            folds: 10,
            l2: 1.0,
            max_iter: 100,
            baseline_max_iter: 500,
            tol: 1e-6,
            standardize: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MvcSection {
    /// Multi-view manifest; synthetic blobs if unset.
    pub manifest: Option<PathBuf>,
    pub k: usize,
    pub beta: f64,
    pub rho: f64,
    pub gamma: f64,
    pub palm_iters: usize,
    pub palm_tol: f64,
    /// `"half"` (ρ/2·C, exact for H) or `"full"` (ρ·C).
    pub z_gradient: String,
    pub restarts: usize,
    pub n: usize,
    pub dims: Vec<usize>,
    pub separation: f64,
    pub noise_std: f64,
    pub corrupt_fraction: f64,
    pub corrupt_std: f64,
}

impl Default for MvcSection {
    fn default() -> Self {
        Self {
            manifest: None,
            k: 3,
            beta: 1.0,
            rho: 0.1,
            gamma: 1.1,
            palm_iters: 200,
            palm_tol: 1e-6,
            z_gradient: "half".into(),
            restarts: 10,
            n: 150,
            dims: vec![10, 12, 8],
            separation: 1.5,
            noise_std: 1.0,
            corrupt_fraction: 0.1,
            corrupt_std: 6.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegcheckSection {
    pub lambdas: Vec<f64>,
    pub t_points: usize,
    pub t_max: f64,
}

impl Default for RegcheckSection {
    fn default() -> Self {
        Self {
            lambdas: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            t_points: 100,
            t_max: 5.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    None,
    First,
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Which seeds get per-round trace files.
    pub traces: TraceMode,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { traces: TraceMode::First }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixtureSection {
    pub gamma: f64,
}

impl Default for MixtureSection {
    fn default() -> Self {
        Self { gamma: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seeds: Option<SeedSpec>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Methods to run; experiment defaults if unset.
    #[serde(default)]
    pub methods: Option<Vec<String>>,
    #[serde(default)]
    pub pace: PaceConfig,
    #[serde(default)]
    pub mixture: MixtureSection,
    #[serde(default)]
    pub mf: MfSection,
    #[serde(default)]
    pub hq: HqSection,
    #[serde(default)]
    pub classify: ClassifySection,
    #[serde(default)]
    pub mvc: MvcSection,
    #[serde(default)]
    pub regcheck: RegcheckSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a config file; relative data paths are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.classify.data, &mut cfg.mvc.manifest].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Checks that every referenced input exists.
    pub fn check_inputs(&self) -> Result<()> {
        let inputs = match self.experiment {
            Experiment::Classify => self.classify.data.as_ref(),
            Experiment::Mvc => self.mvc.manifest.as_ref(),
            _ => None,
        };
        if let Some(p) = inputs {
            if !p.is_file() {
                bail!("input file {} does not exist", p.display());
            }
        }
        Ok(())
    }

    pub fn seeds(&self) -> Result<Vec<u64>> {
        let seeds = match &self.seeds {
            Some(s) => s.expand()?,
            None if self.experiment == Experiment::Regcheck => vec![0],
            None => bail!("no seeds given; set `seeds` in the config or pass --seeds"),
        };
        if seeds.is_empty() {
            bail!("seed list is empty");
        }
        Ok(seeds)
    }

    pub fn methods_or(&self, defaults: &[&str]) -> Vec<String> {
        self.methods
            .clone()
            .unwrap_or_else(|| defaults.iter().map(|s| s.to_string()).collect())
    }

    /// Canonical JSON of the resolved configuration, the input to the
    /// manifest hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
