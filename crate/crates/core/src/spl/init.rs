use crate::error::{Error, Result};
use crate::regularizers::{ExplicitKind, Regularizer};

const BISECTION_TOL: f64 = 1e-8;
const MAX_EXPANSIONS: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaStart {
    pub lambda: f64,
    /// Every loss was zero; λ = 1 was returned without search.
    pub all_zero: bool,
}

/// λ₀ at which ⌈n/2⌉ of the losses receive at least half the maximum weight.
///
/// The ⌈n/2⌉-th smallest loss is placed on the half-weight threshold by
/// bisection in log λ (relative tolerance 1e-8), returning the end of the
/// bracket that still includes it. Ties in the losses can push the count
/// above ⌈n/2⌉. When more than half the losses are zero the smallest positive
/// loss is placed just outside the threshold instead.
pub fn init_lambda_half(losses: &[f64], reg: &Regularizer) -> Result<LambdaStart> {
    if losses.is_empty() {
        return Err(Error::invalid("no losses to initialize lambda from"));
    }
    if let Some(bad) = losses.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::invalid(format!("loss {bad} is not finite and nonnegative")));
    }
    let mut sorted = losses.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[sorted.len() - 1] == 0.0 {
        return Ok(LambdaStart {
            lambda: 1.0,
            all_zero: true,
        });
    }
    let k = sorted.len().div_ceil(2);
    let (target, include) = if sorted[k - 1] > 0.0 {
        (sorted[k - 1], true)
    } else {
        (*sorted.iter().find(|l| **l > 0.0).expect("positive loss"), false)
    };

    if let Regularizer::Explicit {
        kind: ExplicitKind::Logarithmic,
        ..
    } = reg
    {
        return logarithmic_half(target, include);
    }

    // excess(λ) ≥ 0 iff the target loss is at or above half weight
    let excess = |lam: f64| reg.weight(lam, target) - 0.5 * reg.max_weight(lam);
    let (mut lo, mut hi) = (target, target);
    let mut expansions = 0;
    while excess(hi) < 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > MAX_EXPANSIONS || !hi.is_finite() {
            return Err(unreachable_half(reg, target));
        }
    }
    while excess(lo) >= 0.0 {
        lo *= 0.5;
        expansions += 1;
        if expansions > MAX_EXPANSIONS || lo == 0.0 {
            return Err(unreachable_half(reg, target));
        }
    }
    while hi / lo - 1.0 > BISECTION_TOL {
        let mid = (lo * hi).sqrt();
        if excess(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(LambdaStart {
        lambda: if include { hi } else { lo },
        all_zero: false,
    })
}

// e.g. logistic weights never fall to half for losses below ln 3
fn unreachable_half(reg: &Regularizer, target: f64) -> Error {
    Error::Numerical(format!(
        "{reg}: no lambda puts loss {target} at half weight (weight not monotone or bounded away from half)"
    ))
}

/// With ζ = 1 − λ the weight log(ℓ+ζ)/log ζ equals ½ where ℓ + ζ = √ζ; the
/// larger root in √ζ gives the smallest λ that includes ℓ.
fn logarithmic_half(target: f64, include: bool) -> Result<LambdaStart> {
    let disc = 1.0 - 4.0 * target;
    if disc < 0.0 {
        return Err(Error::invalid(format!(
            "logarithmic regularizer cannot give half weight to loss {target} (> 1/4)"
        )));
    }
    let s = 0.5 * (1.0 + disc.sqrt());
    let zeta = s * s;
    let lambda = 1.0 - zeta;
    let nudged = if include {
        lambda * (1.0 + BISECTION_TOL)
    } else {
        lambda * (1.0 - BISECTION_TOL)
    };
    Ok(LambdaStart {
        lambda: nudged.min(1.0 - f64::EPSILON),
        all_zero: false,
    })
}
