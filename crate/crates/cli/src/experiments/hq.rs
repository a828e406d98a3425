//! Fixed-λ half-quadratic fits against the self-paced schedule over a λ grid.

use anyhow::{bail, Result};
use splir_core::matfact::rmse;
use splir_core::{hq_fit, spl_ir_fit, ImplicitRegularizer, LambdaInit};

use super::mf::setup;
use super::{par_map_seeds, schedule, ExperimentOutput};
use crate::config::{ExperimentConfig, SplirInit};
use crate::output::{mean_std, Cell, Table};

#[derive(Clone, Debug)]
pub struct HqRow {
    pub lambda: f64,
    pub hq_rmse: f64,
    pub splir_rmse: f64,
}

pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<HqRow>> {
    let h = &cfg.hq;
    let kind: ImplicitRegularizer = h.regularizer.parse()?;
    let (inst, mut model, _) = setup(cfg, seed)?;
    let sched = cfg.pace.resolve(schedule(5, 30));

    let auto = match h.splir_init {
        SplirInit::Auto => Some(rmse(&inst.ground_truth, &spl_ir_fit(&mut model, kind, &sched, seed)?.params)?),
        SplirInit::Grid => None,
    };
    let mut rows = Vec::with_capacity(h.lambdas.len());
    for &lambda in &h.lambdas {
        let hq = hq_fit(&mut model, kind, lambda, h.inner_tol, h.inner_cap, seed)?;
        let splir_rmse = match auto {
            Some(r) => r,
            None => {
                let s = splir_core::PaceSchedule {
                    lambda0: LambdaInit::Fixed(lambda),
                    ..sched
                };
                rmse(&inst.ground_truth, &spl_ir_fit(&mut model, kind, &s, seed)?.params)?
            }
        };
        rows.push(HqRow {
            lambda,
            hq_rmse: rmse(&inst.ground_truth, &hq.params)?,
            splir_rmse,
        });
    }
    Ok(rows)
}

pub fn run(cfg: &ExperimentConfig, seeds: &[u64], jobs: usize) -> Result<ExperimentOutput> {
    if cfg.hq.lambdas.is_empty() {
        bail!("hq.lambdas is empty");
    }
    let _: ImplicitRegularizer = cfg.hq.regularizer.parse()?;
    let per_seed = par_map_seeds(seeds, jobs, |seed| run_seed(cfg, seed))?;

    let mut out = ExperimentOutput {
        passed: true,
        ..ExperimentOutput::default()
    };
    let mut results = Table::new(&["seed", "lambda", "hq_rmse", "splir_rmse"]);
    for (&seed, rows) in seeds.iter().zip(&per_seed) {
        for r in rows {
            results.row(&[Cell::Int(seed), Cell::Real(r.lambda), Cell::Real(r.hq_rmse), Cell::Real(r.splir_rmse)]);
        }
    }
    out.artifacts.add_csv("hq_results.csv", results);

    let mut sweep = Table::new(&["lambda", "hq_rmse", "splir_rmse", "hq_std", "splir_std"]);
    for (g, &lambda) in cfg.hq.lambdas.iter().enumerate() {
        let hq: Vec<f64> = per_seed.iter().map(|rows| rows[g].hq_rmse).collect();
        let sp: Vec<f64> = per_seed.iter().map(|rows| rows[g].splir_rmse).collect();
        let (hq_mean, hq_std) = mean_std(&hq);
        let (sp_mean, sp_std) = mean_std(&sp);
        sweep.row(&[Cell::Real(lambda), Cell::Real(hq_mean), Cell::Real(sp_mean), Cell::Real(hq_std), Cell::Real(sp_std)]);
    }
    out.artifacts.add_csv("hq_sweep.csv", sweep);
    out.notes.insert(
        "splir_rmse",
        match cfg.hq.splir_init {
            SplirInit::Auto => "self-paced fit from the automatic half-weight lambda, repeated on every grid row",
            SplirInit::Grid => "self-paced fit started from the grid lambda",
        },
    );
    Ok(out)
}
