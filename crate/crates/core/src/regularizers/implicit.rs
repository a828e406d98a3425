use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Learning-pace parameter λ > 0.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PaceParameter(f64);

impl PaceParameter {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda > 0.0 {
            Ok(Self(lambda))
        } else {
            Err(Error::invalid(format!("pace parameter must be positive, got {lambda}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which way λ moves to admit more samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PaceDirection {
    Increase,
    Decrease,
}

/// Robust-loss families whose dual potentials act as self-paced regularizers.
///
/// Each kind is described by its latent loss φ(λ, t) and minimizer function
/// σ(λ, t) = φ'(λ, t)/t. The dual potential ψ is never written down; see
/// [`dual_potential_numeric`](super::dual_potential_numeric) for a numeric
/// evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImplicitRegularizer {
    Huber,
    Cauchy,
    L1L2,
    Welsch,
}

impl ImplicitRegularizer {
    pub const ALL: [ImplicitRegularizer; 4] = [
        ImplicitRegularizer::Huber,
        ImplicitRegularizer::Cauchy,
        ImplicitRegularizer::L1L2,
        ImplicitRegularizer::Welsch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ImplicitRegularizer::Huber => "huber",
            ImplicitRegularizer::Cauchy => "cauchy",
            ImplicitRegularizer::L1L2 => "l1l2",
            ImplicitRegularizer::Welsch => "welsch",
        }
    }

    /// L1-L2 admits more samples as λ shrinks; the others as λ grows.
    pub fn direction(self) -> PaceDirection {
        match self {
            ImplicitRegularizer::L1L2 => PaceDirection::Decrease,
            _ => PaceDirection::Increase,
        }
    }

    pub fn latent_loss(self, lambda: PaceParameter, t: f64) -> Result<f64> {
        check_nonneg("t", t)?;
        Ok(self.phi(lambda.value(), t))
    }

    pub fn minimizer(self, lambda: PaceParameter, t: f64) -> Result<f64> {
        check_nonneg("t", t)?;
        Ok(self.sigma(lambda.value(), t))
    }

    /// Sample weight `½ σ(λ, √ℓ)` for a sample with loss ℓ.
    pub fn weight_from_loss(self, lambda: PaceParameter, loss: f64) -> Result<f64> {
        check_nonneg("loss", loss)?;
        Ok(self.weight(lambda.value(), loss))
    }

    /// Upper bound of σ(λ, ·), attained at t = 0.
    pub fn sigma_max(self, lambda: f64) -> f64 {
        match self {
            ImplicitRegularizer::Huber => 1.0,
            ImplicitRegularizer::Cauchy | ImplicitRegularizer::Welsch => 2.0,
            ImplicitRegularizer::L1L2 => 1.0 / lambda.sqrt(),
        }
    }

    /// φ(λ, t), unchecked.
    pub fn phi(self, lambda: f64, t: f64) -> f64 {
        match self {
            ImplicitRegularizer::Huber => {
                let a = t.abs();
                if a <= lambda {
                    0.5 * t * t
                } else {
                    lambda * a - 0.5 * lambda * lambda
                }
            }
            ImplicitRegularizer::Cauchy => {
                let r = t / lambda;
                lambda * lambda * (r * r).ln_1p()
            }
            ImplicitRegularizer::L1L2 => (lambda + t * t).sqrt() - 1.0,
            ImplicitRegularizer::Welsch => {
                let r = t / lambda;
                -lambda * lambda * (-r * r).exp_m1()
            }
        }
    }

    /// ∂φ/∂t, unchecked.
    pub fn phi_derivative(self, lambda: f64, t: f64) -> f64 {
        match self {
            ImplicitRegularizer::Huber => {
                if t.abs() <= lambda {
                    t
                } else {
                    lambda * t.signum()
                }
            }
            ImplicitRegularizer::Cauchy => {
                let r = t / lambda;
                2.0 * t / (1.0 + r * r)
            }
            ImplicitRegularizer::L1L2 => t / (lambda + t * t).sqrt(),
            ImplicitRegularizer::Welsch => {
                let r = t / lambda;
                2.0 * t * (-r * r).exp()
            }
        }
    }

    /// σ(λ, t), unchecked.
    pub fn sigma(self, lambda: f64, t: f64) -> f64 {
        match self {
            ImplicitRegularizer::Huber => {
                let a = t.abs();
                if a <= lambda {
                    1.0
                } else {
                    lambda / a
                }
            }
            ImplicitRegularizer::Cauchy => {
                let r = t / lambda;
                2.0 / (1.0 + r * r)
            }
            ImplicitRegularizer::L1L2 => 1.0 / (lambda + t * t).sqrt(),
            ImplicitRegularizer::Welsch => {
                let r = t / lambda;
                2.0 * (-r * r).exp()
            }
        }
    }

    /// `½ σ(λ, √ℓ)`, unchecked.
    #[inline]
    pub fn weight(self, lambda: f64, loss: f64) -> f64 {
        match self {
            // closed form of ½σ(λ, √ℓ) avoids the square root round trip
            ImplicitRegularizer::Cauchy => 1.0 / (1.0 + loss / (lambda * lambda)),
            ImplicitRegularizer::Welsch => (-loss / (lambda * lambda)).exp(),
            _ => 0.5 * self.sigma(lambda, loss.sqrt()),
        }
    }
}

impl fmt::Display for ImplicitRegularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ImplicitRegularizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "huber" => Ok(ImplicitRegularizer::Huber),
            "cauchy" => Ok(ImplicitRegularizer::Cauchy),
            "l1l2" | "l1-l2" => Ok(ImplicitRegularizer::L1L2),
            "welsch" => Ok(ImplicitRegularizer::Welsch),
            other => Err(Error::invalid(format!("unknown implicit regularizer {other:?}"))),
        }
    }
}

pub(crate) fn check_nonneg(what: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} must be finite and nonnegative, got {x}")))
    }
}
