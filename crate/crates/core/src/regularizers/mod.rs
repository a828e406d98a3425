//! Self-paced regularizers: the four implicit (robust-loss) kinds, the
//! explicit family with closed-form weights, and a unified handle used by the
//! training loops.

mod conditions;
mod dual;
mod explicit;
mod implicit;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use conditions::{validate_conditions, Condition, ConditionReport, Violation, IDENTITY_TOL};
pub use dual::{dual_potential_numeric, DualGrid};
pub use explicit::{ExplicitKind, ExplicitRegularizer};
pub use implicit::{ImplicitRegularizer, PaceDirection, PaceParameter};

use crate::error::{Error, Result};

/// Any regularizer the pace loop can drive. λ is supplied per call since it
/// changes from round to round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularizer {
    Implicit(ImplicitRegularizer),
    Explicit {
        kind: ExplicitKind,
        gamma: Option<f64>,
    },
}

impl From<ImplicitRegularizer> for Regularizer {
    fn from(r: ImplicitRegularizer) -> Self {
        Regularizer::Implicit(r)
    }
}

impl Regularizer {
    /// Parses a kind name; `gamma` is only meaningful for mixture.
    pub fn parse(name: &str, gamma: Option<f64>) -> Result<Self> {
        if let Ok(r) = name.parse::<ImplicitRegularizer>() {
            if gamma.is_some() {
                return Err(Error::invalid(format!("{r} regularizer takes no gamma")));
            }
            return Ok(Regularizer::Implicit(r));
        }
        let kind = name
            .parse::<ExplicitKind>()
            .map_err(|_| Error::invalid(format!("unknown regularizer {name:?}")))?;
        let reg = Regularizer::Explicit { kind, gamma };
        // reuse the constructor's parameter checks with a valid λ
        reg.explicit_at(if kind == ExplicitKind::Logarithmic { 0.5 } else { 1.0 })?;
        Ok(reg)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regularizer::Implicit(r) => r.name(),
            Regularizer::Explicit { kind, .. } => kind.name(),
        }
    }

    pub fn direction(&self) -> PaceDirection {
        match self {
            Regularizer::Implicit(r) => r.direction(),
            Regularizer::Explicit { .. } => PaceDirection::Increase,
        }
    }

    pub fn validate_lambda(&self, lambda: f64) -> Result<()> {
        match self {
            Regularizer::Implicit(_) => PaceParameter::new(lambda).map(|_| ()),
            Regularizer::Explicit { kind, .. } => explicit::validate_lambda(*kind, lambda),
        }
    }

    fn explicit_at(&self, lambda: f64) -> Result<ExplicitRegularizer> {
        match *self {
            Regularizer::Explicit { kind, gamma } => ExplicitRegularizer::new(kind, lambda, gamma),
            Regularizer::Implicit(r) => Err(Error::invalid(format!("{r} is not explicit"))),
        }
    }

    /// Optimal weight of a sample with loss ℓ at pace λ (λ assumed valid).
    pub fn weight(&self, lambda: f64, loss: f64) -> f64 {
        match *self {
            Regularizer::Implicit(r) => r.weight(lambda, loss),
            Regularizer::Explicit { kind, gamma } => ExplicitRegularizer::new(kind, lambda, gamma)
                .expect("lambda validated by caller")
                .weight(loss),
        }
    }

    /// Weight of a zero-loss sample.
    pub fn max_weight(&self, lambda: f64) -> f64 {
        match self {
            Regularizer::Implicit(r) => 0.5 * r.sigma_max(lambda),
            Regularizer::Explicit { .. } => 1.0,
        }
    }

    /// min over v of the self-paced term for one sample, i.e. its share of
    /// the pace objective once weights are optimal.
    pub fn objective_term(&self, lambda: f64, loss: f64) -> f64 {
        match *self {
            Regularizer::Implicit(r) => r.phi(lambda, loss.sqrt()),
            Regularizer::Explicit { kind, gamma } => ExplicitRegularizer::new(kind, lambda, gamma)
                .expect("lambda validated by caller")
                .pace_objective(loss),
        }
    }

    /// λ after one pace step with factor μ > 1. The logarithmic kind lives on
    /// (0, 1) and moves its gap to 1 instead.
    pub fn next_lambda(&self, lambda: f64, mu: f64) -> f64 {
        match self {
            Regularizer::Explicit {
                kind: ExplicitKind::Logarithmic,
                ..
            } => 1.0 - (1.0 - lambda) / mu,
            _ => match self.direction() {
                PaceDirection::Increase => lambda * mu,
                PaceDirection::Decrease => lambda / mu,
            },
        }
    }
}

impl fmt::Display for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regularizer::Explicit {
                gamma: Some(g),
                kind,
            } => write!(f, "{kind}(gamma={g})"),
            _ => f.write_str(self.name()),
        }
    }
}
