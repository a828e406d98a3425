use std::path::PathBuf;

use anyhow::{Context, Result};

use crate::config::{parse_seed_range, Experiment, ExperimentConfig, SeedSpec};
use crate::experiments::{classify, hq, mf, mvc, regcheck};
use crate::output::{add_manifest, Artifacts};

/// Command-line overrides of the config file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    /// `a..b`, inclusive.
    pub seeds: Option<String>,
    pub jobs: usize,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub passed: bool,
    pub artifacts: Artifacts,
}

/// Applies the overrides to `cfg`; the manifest hash covers the result.
pub fn resolve(mut cfg: ExperimentConfig, opts: &RunOptions) -> Result<ExperimentConfig> {
    if let Some(s) = &opts.seeds {
        parse_seed_range(s)?;
        cfg.seeds = Some(SeedSpec::Range(s.clone()));
    }
    if let Some(o) = &opts.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

/// Runs the experiment and returns its artifacts, manifest included,
/// without touching the disk.
pub fn execute(cfg: &ExperimentConfig, jobs: usize) -> Result<(bool, Artifacts)> {
    cfg.check_inputs()?;
    let seeds = cfg.seeds()?;
    let jobs = jobs.max(1);
    let out = match cfg.experiment {
        Experiment::Mf => mf::run(cfg, &seeds, jobs)?,
        Experiment::HqSweep => hq::run(cfg, &seeds, jobs)?,
        Experiment::Classify => classify::run(cfg, &seeds, jobs)?,
        Experiment::Mvc => mvc::run(cfg, &seeds, jobs)?,
        Experiment::Regcheck => regcheck::run(cfg)?,
    };
    let mut artifacts = out.artifacts;
    // where the files land does not change their content
    let hashed = ExperimentConfig {
        out: None,
        ..cfg.clone()
    };
    add_manifest(&mut artifacts, &cfg.experiment.to_string(), &hashed.canonical_json(), &seeds, out.notes);
    Ok((out.passed, artifacts))
}

pub fn run(cfg: ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let cfg = resolve(cfg, opts)?;
    let out_dir = cfg
        .out
        .clone()
        .context("no output directory; set `out` in the config or pass --out")?;
    let (passed, artifacts) = execute(&cfg, opts.jobs)?;
    std::fs::create_dir_all(&out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    artifacts.write_all(&out_dir)?;
    Ok(RunOutcome {
        out_dir,
        passed,
        artifacts,
    })
}
