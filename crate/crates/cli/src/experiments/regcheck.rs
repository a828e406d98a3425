//! Pointwise validation of the regularizer conditions on λ and t grids.

use anyhow::{bail, Result};
use splir_core::regularizers::{validate_conditions, Violation};
use splir_core::ImplicitRegularizer;

use super::ExperimentOutput;
use crate::config::ExperimentConfig;
use crate::output::{Cell, Table};

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let r = &cfg.regcheck;
    if r.lambdas.is_empty() || r.t_points == 0 {
        bail!("regcheck needs a non-empty lambda grid and t_points > 0");
    }
    if let Some(l) = r.lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
        bail!("regcheck lambda {l} is not positive");
    }
    if !(r.t_max.is_finite() && r.t_max > 0.0) {
        bail!("regcheck.t_max must be positive, got {}", r.t_max);
    }
    let ts: Vec<f64> = (1..=r.t_points).map(|i| r.t_max * i as f64 / r.t_points as f64).collect();

    let mut out = ExperimentOutput::default();
    let mut table = Table::new(&["kind", "checks", "violations", "passed"]);
    let mut violations: Vec<Violation> = Vec::new();
    let mut passed = true;
    for kind in ImplicitRegularizer::ALL {
        let report = validate_conditions(kind, &r.lambdas, &ts);
        passed &= report.passed();
        table.row(&[
            Cell::Str(kind.name()),
            Cell::Int(report.checks as u64),
            Cell::Int(report.violations.len() as u64),
            Cell::Str(if report.passed() { "true" } else { "false" }),
        ]);
        violations.extend(report.violations);
    }
    out.artifacts.add_csv("regcheck.csv", table);
    out.artifacts.add_json("regcheck_violations.json", &violations);
    out.notes.insert("t_grid", "t_max * i / t_points for i = 1..t_points");
    out.passed = passed;
    Ok(out)
}
