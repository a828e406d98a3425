use serde::Serialize;

use super::implicit::{ImplicitRegularizer, PaceDirection};

/// Largest allowed gap in `σ(λ, t) = φ'(λ, t) / t`.
pub const IDENTITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// 0 ≤ σ ≤ σ_max
    Bounded,
    /// σ non-increasing in t
    DecreasingInT,
    /// σ monotone in λ, in the direction that admits more samples
    MonotoneInLambda,
    /// σ(t)·t = φ'(t)
    MinimizerIdentity,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub kind: ImplicitRegularizer,
    pub lambda: f64,
    pub t: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConditionReport {
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: ConditionReport) {
        self.checks += other.checks;
        self.violations.extend(other.violations);
    }
}

/// Checks boundedness, monotonicity in t and λ, and the minimizer identity
/// pointwise on the given grids.
pub fn validate_conditions(
    reg: ImplicitRegularizer,
    lambda_grid: &[f64],
    t_grid: &[f64],
) -> ConditionReport {
    let mut report = ConditionReport::default();
    let mut lambdas: Vec<f64> = lambda_grid.to_vec();
    lambdas.sort_by(f64::total_cmp);
    let mut ts: Vec<f64> = t_grid.to_vec();
    ts.sort_by(f64::total_cmp);

    let fail = |report: &mut ConditionReport, condition, lambda, t, detail: String| {
        report.violations.push(Violation {
            condition,
            kind: reg,
            lambda,
            t,
            detail,
        })
    };

    for &lam in &lambdas {
        let smax = reg.sigma_max(lam);
        let mut prev: Option<f64> = None;
        for &t in &ts {
            let s = reg.sigma(lam, t);
            report.checks += 1;
            if !(0.0..=smax).contains(&s) {
                fail(&mut report, Condition::Bounded, lam, t, format!("sigma {s} outside [0, {smax}]"));
            }
            if let Some(p) = prev {
                report.checks += 1;
                if s > p {
                    fail(&mut report, Condition::DecreasingInT, lam, t, format!("sigma rose from {p} to {s}"));
                }
            }
            prev = Some(s);
            if t > 1e-6 {
                report.checks += 1;
                let ratio = reg.phi_derivative(lam, t) / t;
                if (s - ratio).abs() > IDENTITY_TOL {
                    fail(
                        &mut report,
                        Condition::MinimizerIdentity,
                        lam,
                        t,
                        format!("sigma {s} vs phi'/t {ratio}"),
                    );
                }
            }
        }
    }

    for &t in &ts {
        for pair in lambdas.windows(2) {
            let (a, b) = (reg.sigma(pair[0], t), reg.sigma(pair[1], t));
            report.checks += 1;
            let ok = match reg.direction() {
                PaceDirection::Increase => b >= a,
                PaceDirection::Decrease => b <= a,
            };
            if !ok {
                fail(
                    &mut report,
                    Condition::MonotoneInLambda,
                    pair[1],
                    t,
                    format!("sigma {a} at lambda {} then {b}", pair[0]),
                );
            }
        }
    }
    report
}
