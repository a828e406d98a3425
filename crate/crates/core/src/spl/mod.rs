//! The alternating self-paced loop, generic over weighted-loss models, and the
//! fixed-λ half-quadratic baseline.

mod init;
mod trace;

pub use init::{init_lambda_half, LambdaStart};
pub use trace::{SplRecord, SplTrace};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regularizers::Regularizer;

/// Gap to the maximum weight below which every sample counts as included.
pub const SATURATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LambdaInit {
    Fixed(f64),
    /// Chosen so that about half the bootstrap losses sit above half weight.
    AutoHalf,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaceSchedule {
    pub lambda0: LambdaInit,
    pub mu: f64,
    pub max_rounds: usize,
    /// Relative objective change that ends the inner alternation.
    pub inner_tol: f64,
    pub inner_cap: usize,
}

impl Default for PaceSchedule {
    fn default() -> Self {
        Self {
            lambda0: LambdaInit::AutoHalf,
            mu: 1.05,
            max_rounds: 30,
            inner_tol: 1e-6,
            inner_cap: 50,
        }
    }
}

impl PaceSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 1.0) {
            return Err(Error::invalid(format!("pace step mu must exceed 1, got {}", self.mu)));
        }
        if self.max_rounds == 0 || self.inner_cap == 0 {
            return Err(Error::invalid("max_rounds and inner_cap must be at least 1"));
        }
        if !(self.inner_tol >= 0.0) {
            return Err(Error::invalid("inner_tol must be nonnegative"));
        }
        if let LambdaInit::Fixed(l) = self.lambda0 {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::invalid(format!("lambda0 must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

/// A model trained by minimizing a per-sample weighted loss.
pub trait WeightedModel {
    type Params: Clone;

    fn n_samples(&self) -> usize;

    fn initial_params(&mut self, seed: u64) -> Result<Self::Params>;

    /// Approximately minimizes `Σ vᵢ ℓᵢ(params) + regularization(params)`,
    /// warm-started from `start`.
    fn fit_weighted(&mut self, weights: &[f64], start: &Self::Params) -> Result<Self::Params>;

    fn per_sample_losses(&self, params: &Self::Params) -> Result<Vec<f64>>;

    /// Model-side terms of the training objective that carry no sample weight.
    fn regularization(&self, _params: &Self::Params) -> f64 {
        0.0
    }
}

/// Output of a pace-loop run.
#[derive(Clone, Debug)]
pub struct SplFit<P> {
    pub params: P,
    pub trace: SplTrace,
    /// Weights implied by the final losses at the final λ.
    pub weights: Vec<f64>,
    pub lambda: f64,
}

pub fn spl_ir_fit<M: WeightedModel>(
    model: &mut M,
    reg: impl Into<Regularizer>,
    sched: &PaceSchedule,
    seed: u64,
) -> Result<SplFit<M::Params>> {
    let reg = reg.into();
    sched.validate()?;
    let (mut params, mut losses) = bootstrap(model, seed)?;
    let mut lambda = match sched.lambda0 {
        LambdaInit::Fixed(l) => l,
        LambdaInit::AutoHalf => init_lambda_half(&losses, &reg)?.lambda,
    };
    reg.validate_lambda(lambda)?;

    let mut trace = SplTrace::default();
    let mut weights = Vec::new();
    for round in 1..=sched.max_rounds {
        let step = alternate(model, &reg, lambda, params, losses, sched)
            .map_err(|e| Error::Round {
                round,
                source: Box::new(e),
            })?;
        params = step.params;
        losses = step.losses;
        weights = step.weights;
        trace.push(SplRecord::new(round, lambda, &weights, step.objective, step.iterations, &losses));

        let top = reg.max_weight(lambda);
        if weights.iter().all(|w| top - w <= SATURATION_TOL) || round == sched.max_rounds {
            break;
        }
        lambda = reg.next_lambda(lambda, sched.mu);
        reg.validate_lambda(lambda)?;
    }
    Ok(SplFit {
        params,
        trace,
        weights,
        lambda,
    })
}

/// The same alternation at a fixed λ: one trace record per weight/fit pair.
pub fn hq_fit<M: WeightedModel>(
    model: &mut M,
    reg: impl Into<Regularizer>,
    lambda: f64,
    inner_tol: f64,
    inner_cap: usize,
    seed: u64,
) -> Result<SplFit<M::Params>> {
    let reg = reg.into();
    reg.validate_lambda(lambda)?;
    if inner_cap == 0 {
        return Err(Error::invalid("inner_cap must be at least 1"));
    }
    let (mut params, mut losses) = bootstrap(model, seed)?;
    let one_step = PaceSchedule {
        lambda0: LambdaInit::Fixed(lambda),
        inner_cap: 1,
        ..PaceSchedule::default()
    };
    let mut trace = SplTrace::default();
    let mut weights = Vec::new();
    let mut prev: Option<f64> = None;
    for it in 1..=inner_cap {
        let step = alternate(model, &reg, lambda, params, losses, &one_step).map_err(|e| {
            Error::Round {
                round: it,
                source: Box::new(e),
            }
        })?;
        params = step.params;
        losses = step.losses;
        weights = step.weights;
        trace.push(SplRecord::new(it, lambda, &weights, step.objective, 1, &losses));
        if prev.is_some_and(|p| converged(p, step.objective, inner_tol)) {
            break;
        }
        prev = Some(step.objective);
    }
    Ok(SplFit {
        params,
        trace,
        weights,
        lambda,
    })
}

fn bootstrap<M: WeightedModel>(model: &mut M, seed: u64) -> Result<(M::Params, Vec<f64>)> {
    let n = model.n_samples();
    if n == 0 {
        return Err(Error::invalid("model exposes no samples"));
    }
    let start = model.initial_params(seed)?;
    let params = model.fit_weighted(&vec![1.0; n], &start)?;
    let losses = checked_losses(model, &params)?;
    Ok((params, losses))
}

fn checked_losses<M: WeightedModel>(model: &M, params: &M::Params) -> Result<Vec<f64>> {
    let losses = model.per_sample_losses(params)?;
    if let Some(i) = losses.iter().position(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::Numerical(format!(
            "sample {i} has invalid loss {}",
            losses[i]
        )));
    }
    Ok(losses)
}

fn converged(prev: f64, cur: f64, tol: f64) -> bool {
    (cur - prev).abs() <= tol * prev.abs().max(f64::MIN_POSITIVE)
}

struct InnerResult<P> {
    params: P,
    losses: Vec<f64>,
    weights: Vec<f64>,
    objective: f64,
    iterations: usize,
}

/// Weight update / weighted fit alternation at fixed λ.
fn alternate<M: WeightedModel>(
    model: &mut M,
    reg: &Regularizer,
    lambda: f64,
    mut params: M::Params,
    mut losses: Vec<f64>,
    sched: &PaceSchedule,
) -> Result<InnerResult<M::Params>> {
    let mut prev: Option<f64> = None;
    let mut objective = f64::NAN;
    let mut iterations = 0;
    for _ in 0..sched.inner_cap {
        iterations += 1;
        let weights: Vec<f64> = losses.iter().map(|&l| reg.weight(lambda, l)).collect();
        params = model.fit_weighted(&weights, &params)?;
        losses = checked_losses(model, &params)?;
        objective = pace_objective(reg, lambda, &losses) + model.regularization(&params);
        if !objective.is_finite() {
            return Err(Error::Numerical(format!("objective became {objective}")));
        }
        if prev.is_some_and(|p| converged(p, objective, sched.inner_tol)) {
            break;
        }
        prev = Some(objective);
    }
    let weights = losses.iter().map(|&l| reg.weight(lambda, l)).collect();
    Ok(InnerResult {
        params,
        losses,
        weights,
        objective,
        iterations,
    })
}

/// `Σᵢ min over vᵢ` of the self-paced term at the given losses.
pub fn pace_objective(reg: &Regularizer, lambda: f64, losses: &[f64]) -> f64 {
    losses.iter().map(|&l| reg.objective_term(lambda, l)).sum()
}
