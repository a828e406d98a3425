//! Logistic regression under flipped training labels, scored by stratified
//! k-fold cross-validation on clean held-out labels.

use anyhow::{Context, Result};
use splir_core::classify::{kfold_cv, two_gaussians, weighted_logreg_fit, CvOptions, CvReport, LabeledDataset, LogRegModel, LogRegOptions};
use splir_core::spl_ir_fit;

use super::{par_map_seeds, schedule, ExperimentOutput};
use crate::config::ExperimentConfig;
use crate::loaders::load_labeled;
use crate::methods::Method;
use crate::output::{mean_std, Cell, Table};

pub const DEFAULT_METHODS: &[&str] = &["lr", "spl-ir-welsch", "spl-ir-cauchy", "spl-ir-huber", "spl-ir-l1l2"];

#[derive(Clone, Debug)]
pub struct ClassifyRow {
    pub method: String,
    pub clean: CvReport,
    pub noisy: CvReport,
}

fn cross_validate(cfg: &ExperimentConfig, data: &LabeledDataset, method: &Method, seed: u64, noise: f64) -> Result<CvReport> {
    let c = &cfg.classify;
    let opts = CvOptions {
        k: c.folds,
        seed,
        train_noise: noise,
        standardize: c.standardize,
    };
    let sched = cfg.pace.resolve(schedule(3, 30));
    let report = kfold_cv(data, &opts, |train, test, _| {
        let params = match method {
            Method::Reference(_) => {
                let opts = LogRegOptions {
                    tol: c.tol,
                    max_iter: c.baseline_max_iter,
                };
                weighted_logreg_fit(train, &vec![1.0; train.len()], c.l2, &opts, None)?
            }
            Method::SelfPaced { reg, .. } => {
                let mut model = LogRegModel {
                    data: train.clone(),
                    l2_reg: c.l2,
                    options: LogRegOptions {
                        tol: c.tol,
                        max_iter: c.max_iter,
                    },
                };
                spl_ir_fit(&mut model, *reg, &sched, seed)?.params
            }
        };
        Ok((0..test.len()).map(|i| params.predict(test.features().row(i))).collect())
    })?;
    Ok(report)
}

/// `data` is the user dataset, or None for a fresh synthetic draw per seed.
pub fn run_seed(cfg: &ExperimentConfig, methods: &[Method], data: Option<&LabeledDataset>, seed: u64) -> Result<Vec<ClassifyRow>> {
    let c = &cfg.classify;
    let synthetic;
    let data = match data {
        Some(d) => d,
        None => {
            synthetic = two_gaussians(c.n, c.d, c.separation, seed)?;
            &synthetic
        }
    };
    methods
        .iter()
        .map(|m| {
            Ok(ClassifyRow {
                method: m.name().to_string(),
                clean: cross_validate(cfg, data, m, seed, 0.0)?,
                noisy: cross_validate(cfg, data, m, seed, c.flip)?,
            })
        })
        .collect()
}

pub fn run(cfg: &ExperimentConfig, seeds: &[u64], jobs: usize) -> Result<ExperimentOutput> {
    let methods = Method::parse_all(&cfg.methods_or(DEFAULT_METHODS), &["lr"], cfg.mixture.gamma)?;
    let mut out = ExperimentOutput {
        passed: true,
        ..ExperimentOutput::default()
    };
    let loaded = match &cfg.classify.data {
        Some(path) => {
            let (data, summary) = load_labeled(path).with_context(|| format!("loading {}", path.display()))?;
            out.notes.insert("data", "user-supplied CSV");
            let mut t = Table::new(&["n", "d", "positives"]);
            t.row(&[Cell::Int(summary.n as u64), Cell::Int(summary.d as u64), Cell::Int(summary.positives as u64)]);
            out.artifacts.add_csv("classify_dataset.csv", t);
            Some(data)
        }
        None => {
            out.notes.insert("data", "synthetic two-Gaussian draw per seed");
            None
        }
    };
    let per_seed = par_map_seeds(seeds, jobs, |seed| run_seed(cfg, &methods, loaded.as_ref(), seed))?;

    let mut folds = Table::new(&["seed", "method", "condition", "fold", "accuracy"]);
    for (&seed, rows) in seeds.iter().zip(&per_seed) {
        for r in rows {
            for (cond, rep) in [("clean", &r.clean), ("noisy", &r.noisy)] {
                for (f, a) in rep.accuracies.iter().enumerate() {
                    folds.row(&[Cell::Int(seed), Cell::Str(&r.method), Cell::Str(cond), Cell::Int(f as u64), Cell::Real(*a)]);
                }
            }
        }
    }
    out.artifacts.add_csv("classify_folds.csv", folds);

    let mut results = Table::new(&["seed", "method", "clean_acc", "noisy_acc"]);
    for (&seed, rows) in seeds.iter().zip(&per_seed) {
        for r in rows {
            results.row(&[Cell::Int(seed), Cell::Str(&r.method), Cell::Real(r.clean.mean), Cell::Real(r.noisy.mean)]);
        }
    }
    out.artifacts.add_csv("classify_results.csv", results);

    let mut summary = Table::new(&["method", "clean_mean", "clean_std", "noisy_mean", "noisy_std", "drop"]);
    for (i, m) in methods.iter().enumerate() {
        let clean: Vec<f64> = per_seed.iter().map(|rows| rows[i].clean.mean).collect();
        let noisy: Vec<f64> = per_seed.iter().map(|rows| rows[i].noisy.mean).collect();
        let (c_mean, c_std) = mean_std(&clean);
        let (n_mean, n_std) = mean_std(&noisy);
        summary.row(&[
            Cell::Str(m.name()),
            Cell::Real(c_mean),
            Cell::Real(c_std),
            Cell::Real(n_mean),
            Cell::Real(n_std),
            Cell::Real(c_mean - n_mean),
        ]);
    }
    out.artifacts.add_csv("classify_summary.csv", summary);
    Ok(out)
}
