use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::implicit::check_nonneg;
use crate::error::{Error, Result};

/// Hand-designed self-paced regularizers g(λ, v) with closed-form weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExplicitKind {
    Hard,
    Linear,
    Logarithmic,
    Mixture,
    Logistic,
}

impl ExplicitKind {
    pub const ALL: [ExplicitKind; 5] = [
        ExplicitKind::Hard,
        ExplicitKind::Linear,
        ExplicitKind::Logarithmic,
        ExplicitKind::Mixture,
        ExplicitKind::Logistic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExplicitKind::Hard => "hard",
            ExplicitKind::Linear => "linear",
            ExplicitKind::Logarithmic => "logarithmic",
            ExplicitKind::Mixture => "mixture",
            ExplicitKind::Logistic => "logistic",
        }
    }
}

impl fmt::Display for ExplicitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExplicitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExplicitKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::invalid(format!("unknown explicit regularizer {s:?}")))
    }
}

/// An explicit regularizer together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitRegularizer {
    kind: ExplicitKind,
    lambda: f64,
    gamma: Option<f64>,
}

impl ExplicitRegularizer {
    /// `gamma` is required for the mixture kind and rejected otherwise.
    pub fn new(kind: ExplicitKind, lambda: f64, gamma: Option<f64>) -> Result<Self> {
        validate_lambda(kind, lambda)?;
        match (kind, gamma) {
            (ExplicitKind::Mixture, Some(g)) if g.is_finite() && g > 0.0 => {}
            (ExplicitKind::Mixture, Some(g)) => {
                return Err(Error::invalid(format!("mixture gamma must be positive, got {g}")))
            }
            (ExplicitKind::Mixture, None) => {
                return Err(Error::invalid("mixture regularizer requires gamma"))
            }
            (_, Some(_)) => {
                return Err(Error::invalid(format!("{kind} regularizer takes no gamma")))
            }
            (_, None) => {}
        }
        Ok(Self { kind, lambda, gamma })
    }

    pub fn kind(&self) -> ExplicitKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    /// Optimal weight v*(λ, ℓ) = argmin over v in [0, 1] of vℓ + g(λ, v).
    pub fn explicit_weight(&self, loss: f64) -> Result<f64> {
        check_nonneg("loss", loss)?;
        Ok(self.weight(loss))
    }

    pub(crate) fn weight(&self, loss: f64) -> f64 {
        let lam = self.lambda;
        match self.kind {
            ExplicitKind::Hard => {
                if loss <= lam {
                    1.0
                } else {
                    0.0
                }
            }
            ExplicitKind::Linear => (1.0 - loss / lam).max(0.0),
            ExplicitKind::Logarithmic => {
                if loss < lam {
                    let zeta = 1.0 - lam;
                    ((loss + zeta).ln() / zeta.ln()).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            }
            ExplicitKind::Mixture => {
                let gamma = self.gamma.expect("validated");
                let full = (lam * gamma / (lam + gamma)).powi(2);
                if loss <= full {
                    1.0
                } else if loss >= lam * lam {
                    0.0
                } else {
                    gamma * (1.0 / loss.sqrt() - 1.0 / lam)
                }
            }
            ExplicitKind::Logistic => {
                let num = 1.0 + (-lam).exp();
                // 1 + e^{ℓ-λ} overflows only where the weight is already 0
                num / (1.0 + (loss - lam).exp())
            }
        }
    }

    /// g(λ, v) for v in [0, 1].
    pub fn penalty(&self, v: f64) -> f64 {
        let lam = self.lambda;
        match self.kind {
            ExplicitKind::Hard => -lam * v,
            ExplicitKind::Linear => 0.5 * lam * (v * v - 2.0 * v),
            ExplicitKind::Logarithmic => {
                let zeta = 1.0 - lam;
                zeta * v - zeta.powf(v) / zeta.ln()
            }
            ExplicitKind::Mixture => {
                let gamma = self.gamma.expect("validated");
                lam * gamma * gamma / (lam * v + gamma)
            }
            ExplicitKind::Logistic => {
                let c = 1.0 + (-lam).exp();
                xlogx(c - v) + xlogx(v) - lam * v
            }
        }
    }

    /// min over v of vℓ + g(λ, v), evaluated at v*.
    pub fn pace_objective(&self, loss: f64) -> f64 {
        let v = self.weight(loss);
        v * loss + self.penalty(v)
    }
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

pub(crate) fn validate_lambda(kind: ExplicitKind, lambda: f64) -> Result<()> {
    let ok = match kind {
        ExplicitKind::Logarithmic => lambda > 0.0 && lambda < 1.0,
        _ => lambda.is_finite() && lambda > 0.0,
    };
    if ok {
        Ok(())
    } else if kind == ExplicitKind::Logarithmic {
        Err(Error::invalid(format!(
            "logarithmic regularizer needs 0 < lambda < 1, got {lambda}"
        )))
    } else {
        Err(Error::invalid(format!("{kind} regularizer needs lambda > 0, got {lambda}")))
    }
}
