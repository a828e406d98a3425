//! Self-paced multi-view subspace clustering against concatenate-then-k-means.

use anyhow::{bail, Context, Result};
use serde::Serialize;
use splir_core::mvc::{concat_kmeans, generate_multiview, spl_mvc_fit, MultiViewDataset, MvcConfig, PalmReport, SyntheticMvcConfig, ZGradient};
use splir_core::{ClusterLabels, MetricsReport};

use super::{par_map_seeds, schedule, wants_trace, ExperimentOutput};
use crate::config::ExperimentConfig;
use crate::loaders::{load_multiview, LoadedMultiView};
use crate::methods::Method;
use crate::output::{mean_std, Cell, Table};

pub const DEFAULT_METHODS: &[&str] = &["concat-kmeans", "spl-ir-welsch"];

/// Largest per-sweep increase of H, total sweeps, and constraint audits over
/// every P2 solve of a fit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PalmAudit {
    pub solves: usize,
    pub sweeps: usize,
    pub max_h_increase: f64,
    pub max_orth_error: f64,
    pub z_violations: usize,
    pub degenerate_y_steps: usize,
}

impl PalmAudit {
    pub fn from_reports(reports: &[PalmReport]) -> Self {
        let mut a = PalmAudit {
            solves: reports.len(),
            max_h_increase: f64::NEG_INFINITY,
            ..PalmAudit::default()
        };
        for r in reports {
            a.sweeps += r.sweeps;
            a.max_orth_error = a.max_orth_error.max(r.max_orth_error);
            a.z_violations += r.z_violations;
            a.degenerate_y_steps += r.degenerate_y_steps;
            for w in r.h.windows(2) {
                a.max_h_increase = a.max_h_increase.max(w[1] - w[0]);
            }
        }
        a
    }
}

#[derive(Clone, Debug)]
pub struct MvcRow {
    pub method: String,
    pub labels: Vec<usize>,
    pub metrics: Option<MetricsReport>,
    pub audit: Option<PalmAudit>,
    /// `solve,sweep,h` rows of every P2 solve.
    pub h_trace: Option<Vec<u8>>,
}

pub fn solver_config(cfg: &ExperimentConfig) -> Result<MvcConfig> {
    let s = &cfg.mvc;
    let z_gradient = match s.z_gradient.as_str() {
        "half" => ZGradient::Half,
        "full" => ZGradient::Full,
        other => bail!("mvc.z_gradient must be \"half\" or \"full\", got {other:?}"),
    };
    Ok(MvcConfig {
        beta: s.beta,
        rho: s.rho,
        gamma: s.gamma,
        k: s.k,
        pace: cfg.pace.resolve(schedule(1, 30)),
        palm_iters: s.palm_iters,
        palm_tol: s.palm_tol,
        z_gradient,
        kmeans_restarts: s.restarts,
    })
}

fn h_trace(reports: &[PalmReport]) -> Vec<u8> {
    let mut t = Table::new(&["solve", "sweep", "h"]);
    for (i, r) in reports.iter().enumerate() {
        for (s, h) in r.h.iter().enumerate() {
            t.row(&[Cell::Int(i as u64), Cell::Int(s as u64), Cell::Real(*h)]);
        }
    }
    t.into_bytes()
}

pub fn run_seed(
    cfg: &ExperimentConfig,
    methods: &[Method],
    user: Option<&LoadedMultiView>,
    seed: u64,
    keep_trace: bool,
) -> Result<Vec<MvcRow>> {
    let solver = solver_config(cfg)?;
    let synthetic;
    let (data, truth): (&MultiViewDataset, Option<&[usize]>) = match user {
        Some(u) => (&u.data, u.labels.as_deref()),
        None => {
            let s = &cfg.mvc;
            let gen = SyntheticMvcConfig {
                n: s.n,
                k: s.k,
                dims: s.dims.clone(),
                separation: s.separation,
                noise_std: s.noise_std,
                corrupt_fraction: s.corrupt_fraction,
                corrupt_std: s.corrupt_std,
            };
            synthetic = generate_multiview(&gen, seed)?;
            (&synthetic.data, Some(synthetic.truth.as_slice()))
        }
    };
    let truth = truth.map(|t| ClusterLabels::from_assignments(t.to_vec()));

    let mut rows = Vec::with_capacity(methods.len());
    for m in methods {
        let (labels, audit, h) = match m {
            Method::Reference(_) => (concat_kmeans(data, solver.k, seed, solver.kmeans_restarts)?, None, None),
            Method::SelfPaced { reg, .. } => {
                let fit = spl_mvc_fit(data, &solver, *reg, seed)?;
                let audit = PalmAudit::from_reports(&fit.palm_reports);
                (fit.labels, Some(audit), keep_trace.then(|| h_trace(&fit.palm_reports)))
            }
        };
        let metrics = match &truth {
            Some(t) => Some(MetricsReport::evaluate(&ClusterLabels::from_assignments(labels.clone()), t)?),
            None => None,
        };
        rows.push(MvcRow {
            method: m.name().to_string(),
            labels,
            metrics,
            audit,
            h_trace: h,
        });
    }
    Ok(rows)
}

#[derive(Serialize)]
struct SeedMetrics<'a> {
    seed: u64,
    method: &'a str,
    #[serde(flatten)]
    metrics: &'a MetricsReport,
}

pub fn run(cfg: &ExperimentConfig, seeds: &[u64], jobs: usize) -> Result<ExperimentOutput> {
    let methods = Method::parse_all(&cfg.methods_or(DEFAULT_METHODS), &["concat-kmeans"], cfg.mixture.gamma)?;
    solver_config(cfg)?;
    let mut out = ExperimentOutput {
        passed: true,
        ..ExperimentOutput::default()
    };
    let user = match &cfg.mvc.manifest {
        Some(path) => {
            let loaded = load_multiview(path).with_context(|| format!("loading {}", path.display()))?;
            if let Some(l) = &loaded.labels {
                if l.len() != loaded.data.n_samples() {
                    bail!("{} labels for {} samples", l.len(), loaded.data.n_samples());
                }
            }
            out.notes.insert("data", "user-supplied multi-view manifest");
            Some(loaded)
        }
        None => {
            out.notes.insert("data", "synthetic multi-blob views per seed");
            None
        }
    };
    out.notes.insert("nmi", "normalized by the geometric mean of the entropies");
    out.notes.insert("fscore", "pairwise precision/recall F1 over same-cluster sample pairs");
    out.notes.insert("acc", "best one-to-one label matching (Hungarian)");

    let per_seed = par_map_seeds(seeds, jobs, |seed| {
        let idx = seeds.iter().position(|s| *s == seed).expect("seed in list");
        run_seed(cfg, &methods, user.as_ref(), seed, wants_trace(cfg.output.traces, idx))
    })?;

    let mut audit = Table::new(&["seed", "method", "solves", "sweeps", "max_h_increase", "max_orth_error", "z_violations", "degenerate_y_steps"]);
    let mut metrics = Table::new(&["seed", "method", "acc", "nmi", "ar", "fscore", "purity"]);
    let mut json = Vec::new();
    for (&seed, rows) in seeds.iter().zip(&per_seed) {
        for r in rows {
            let labels: String = r.labels.iter().map(|l| format!("{l}\n")).collect();
            out.artifacts.add(format!("labels/mvc_seed{seed}_{}.txt", r.method), labels.into_bytes());
            if let Some(h) = &r.h_trace {
                out.artifacts.add(format!("traces/mvc_h_seed{seed}_{}.csv", r.method), h.clone());
            }
            if let Some(a) = &r.audit {
                audit.row(&[
                    Cell::Int(seed),
                    Cell::Str(&r.method),
                    Cell::Int(a.solves as u64),
                    Cell::Int(a.sweeps as u64),
                    Cell::Real(a.max_h_increase),
                    Cell::Real(a.max_orth_error),
                    Cell::Int(a.z_violations as u64),
                    Cell::Int(a.degenerate_y_steps as u64),
                ]);
            }
            if let Some(m) = &r.metrics {
                metrics.row(&[
                    Cell::Int(seed),
                    Cell::Str(&r.method),
                    Cell::Real(m.acc),
                    Cell::Real(m.nmi),
                    Cell::Real(m.ar),
                    Cell::Real(m.fscore),
                    Cell::Real(m.purity),
                ]);
                json.push(SeedMetrics {
                    seed,
                    method: &r.method,
                    metrics: m,
                });
            }
        }
    }
    out.artifacts.add_csv("mvc_palm_audit.csv", audit);

    if !json.is_empty() {
        out.artifacts.add_json("mvc_metrics.json", &json);
        out.artifacts.add_csv("mvc_results.csv", metrics);
        let mut summary = Table::new(&[
            "method", "acc_mean", "acc_std", "nmi_mean", "nmi_std", "ar_mean", "ar_std", "fscore_mean", "fscore_std", "purity_mean", "purity_std",
        ]);
        for (i, m) in methods.iter().enumerate() {
            let reports: Vec<&MetricsReport> = per_seed.iter().filter_map(|rows| rows[i].metrics.as_ref()).collect();
            let stats: Vec<(f64, f64)> = [
                |r: &MetricsReport| r.acc,
                |r: &MetricsReport| r.nmi,
                |r: &MetricsReport| r.ar,
                |r: &MetricsReport| r.fscore,
                |r: &MetricsReport| r.purity,
            ]
            .iter()
            .map(|f| mean_std(&reports.iter().map(|r| f(r)).collect::<Vec<_>>()))
            .collect();
            let mut cells = vec![Cell::Str(m.name())];
            for (mean, std) in stats {
                cells.push(Cell::Real(mean));
                cells.push(Cell::Real(std));
            }
            summary.row(&cells);
        }
        out.artifacts.add_csv("mvc_summary.csv", summary);
    }
    Ok(out)
}
