use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::numerics::dot;
use crate::spl::WeightedModel;

const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRegOptions {
    /// Gradient-norm stopping threshold.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogRegOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogRegParams {
    pub w: Vec<f64>,
    pub b: f64,
}

impl LogRegParams {
    pub fn zeros(d: usize) -> Self {
        Self { w: vec![0.0; d], b: 0.0 }
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }

    /// ±1 prediction; ties go to +1.
    pub fn predict(&self, x: &[f64]) -> f64 {
        if self.decision(x) >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn accuracy(&self, data: &LabeledDataset) -> f64 {
        let hits = (0..data.len())
            .filter(|&i| self.predict(data.features().row(i)) == data.labels()[i])
            .count();
        hits as f64 / data.len() as f64
    }
}

/// log(1 + eᶻ) without overflow.
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// 1 / (1 + e⁻ᶻ) without overflow.
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-sample logistic loss `log(1 + exp(−yᵢ(wᵀxᵢ + b)))`.
pub fn logreg_losses(params: &LogRegParams, data: &LabeledDataset) -> Vec<f64> {
    (0..data.len())
        .map(|i| softplus(-data.labels()[i] * params.decision(data.features().row(i))))
        .collect()
}

/// `Σ vᵢ ℓᵢ + (l2/2)‖w‖²`.
pub fn logreg_objective(params: &LogRegParams, data: &LabeledDataset, weights: &[f64], l2: f64) -> f64 {
    let fit: f64 = logreg_losses(params, data).iter().zip(weights).map(|(l, v)| l * v).sum();
    fit + 0.5 * l2 * dot(&params.w, &params.w)
}

/// Objective and gradient in one pass over the samples.
fn evaluate(params: &LogRegParams, data: &LabeledDataset, weights: &[f64], l2: f64) -> (f64, Vec<f64>, f64) {
    let mut f = 0.5 * l2 * dot(&params.w, &params.w);
    let mut gw: Vec<f64> = params.w.iter().map(|w| l2 * w).collect();
    let mut gb = 0.0;
    for i in 0..data.len() {
        let v = weights[i];
        if v == 0.0 {
            continue;
        }
        let x = data.features().row(i);
        let y = data.labels()[i];
        let z = -y * params.decision(x);
        f += v * softplus(z);
        // d/dm softplus(−y m) = −y·logistic(−y m)
        let coef = -v * y * logistic(z);
        for (g, xj) in gw.iter_mut().zip(x) {
            *g += coef * xj;
        }
        gb += coef;
    }
    (f, gw, gb)
}

/// Full-batch gradient descent with Armijo backtracking from `start`. The
/// intercept is not regularized.
pub fn weighted_logreg_fit(
    data: &LabeledDataset,
    weights: &[f64],
    l2_reg: f64,
    opts: &LogRegOptions,
    start: Option<&LogRegParams>,
) -> Result<LogRegParams> {
    if weights.len() != data.len() {
        return Err(Error::dim(format!("{} weights for {} samples", weights.len(), data.len())));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::invalid("weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("weights sum to zero"));
    }
    if !(l2_reg.is_finite() && l2_reg > 0.0) {
        return Err(Error::invalid(format!("l2_reg must be positive, got {l2_reg}")));
    }
    let d = data.dim();
    let mut p = match start {
        Some(s) if s.w.len() == d => s.clone(),
        Some(s) => return Err(Error::dim(format!("start has {} weights for {d} features", s.w.len()))),
        None => LogRegParams::zeros(d),
    };

    // the loss curvature is at most ¼ Σ vᵢ(‖xᵢ‖² + 1)
    let lipschitz = 0.25
        * (0..data.len())
            .map(|i| weights[i] * (dot(data.features().row(i), data.features().row(i)) + 1.0))
            .sum::<f64>()
        + l2_reg;
    let safe_step = 1.0 / lipschitz;
    let (mut f, mut gw, mut gb) = evaluate(&p, data, weights, l2_reg);
    let mut step = safe_step;
    for iter in 0..opts.max_iter {
        let gnorm_sq = dot(&gw, &gw) + gb * gb;
        if !gnorm_sq.is_finite() {
            return Err(Error::Numerical(format!("non-finite gradient at iteration {iter}")));
        }
        if gnorm_sq.sqrt() <= opts.tol {
            break;
        }
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let cand = LogRegParams {
                w: p.w.iter().zip(&gw).map(|(w, g)| w - step * g).collect(),
                b: p.b - step * gb,
            };
            let (fc, cgw, cgb) = evaluate(&cand, data, weights, l2_reg);
            // the slack lets the search finish when the decrease is below
            // the rounding level of f
            if fc <= f - ARMIJO_C * step * gnorm_sq + 4.0 * f64::EPSILON * f.abs() {
                accepted = Some((cand, fc, cgw, cgb));
                break;
            }
            step *= SHRINK;
        }
        let Some((next, fc, ngw, ngb)) = accepted else {
            // no representable decrease left along the gradient
            break;
        };
        // Barzilai–Borwein trial step for the next line search
        let sy: f64 = -step
            * (gw.iter().zip(&ngw).map(|(a, b)| a * (b - a)).sum::<f64>() + gb * (ngb - gb));
        let ss = step * step * gnorm_sq;
        step = if sy > 0.0 { (ss / sy).clamp(safe_step, 1e6 * safe_step) } else { safe_step };
        p = next;
        f = fc;
        gw = ngw;
        gb = ngb;
    }
    Ok(p)
}

/// Logistic regression as a pace-loop model; samples are training rows.
#[derive(Clone, Debug)]
pub struct LogRegModel {
    pub data: LabeledDataset,
    pub l2_reg: f64,
    pub options: LogRegOptions,
}

impl WeightedModel for LogRegModel {
    type Params = LogRegParams;

    fn n_samples(&self) -> usize {
        self.data.len()
    }

    fn initial_params(&mut self, _seed: u64) -> Result<LogRegParams> {
        Ok(LogRegParams::zeros(self.data.dim()))
    }

    fn fit_weighted(&mut self, weights: &[f64], start: &LogRegParams) -> Result<LogRegParams> {
        weighted_logreg_fit(&self.data, weights, self.l2_reg, &self.options, Some(start))
    }

    fn per_sample_losses(&self, params: &LogRegParams) -> Result<Vec<f64>> {
        Ok(logreg_losses(params, &self.data))
    }

    fn regularization(&self, params: &LogRegParams) -> f64 {
        0.5 * self.l2_reg * dot(&params.w, &params.w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::two_gaussians;
    use crate::numerics::Matrix;

    #[test]
    fn softplus_examples() {
        assert_eq!(softplus(0.0), 2f64.ln());
        let tiny = softplus(-50.0);
        assert!(tiny < 1e-20 && tiny > 0.0);
        assert!((softplus(50.0) - 50.0).abs() < 1e-9);
    }

    #[test]
    fn separable_pair() {
        let data = LabeledDataset::new(Matrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap(), vec![1.0, -1.0])
            .unwrap();
        let p = weighted_logreg_fit(&data, &[1.0, 1.0], 1e-6, &LogRegOptions::default(), None).unwrap();
        assert_eq!(p.accuracy(&data), 1.0);
    }

    #[test]
    fn weight_scaling_equivalence() {
        let data = two_gaussians(30, 3, 2.0, 4).unwrap();
        let opts = LogRegOptions {
            tol: 1e-11,
            max_iter: 20_000,
        };
        let c = 3.0;
        let a = weighted_logreg_fit(&data, &[1.0; 30], 0.5 / c, &opts, None).unwrap();
        let b = weighted_logreg_fit(&data, &[c; 30], 0.5, &opts, None).unwrap();
        for (x, y) in a.w.iter().zip(&b.w) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
        assert!((a.b - b.b).abs() < 1e-8);
    }

    #[test]
    fn optimum_gradient_matches_finite_differences() {
        let data = two_gaussians(40, 2, 1.0, 6).unwrap();
        let w: Vec<f64> = (0..40).map(|i| 0.5 + (i % 3) as f64 * 0.25).collect();
        let p = weighted_logreg_fit(&data, &w, 0.7, &LogRegOptions::default(), None).unwrap();
        let h = 1e-6;
        let (_, gw, gb) = evaluate(&p, &data, &w, 0.7);
        for j in 0..2 {
            let mut up = p.clone();
            let mut dn = p.clone();
            up.w[j] += h;
            dn.w[j] -= h;
            let fd = (logreg_objective(&up, &data, &w, 0.7) - logreg_objective(&dn, &data, &w, 0.7)) / (2.0 * h);
            assert!((fd - gw[j]).abs() < 1e-5, "{fd} vs {}", gw[j]);
            assert!(fd.abs() < 1e-5);
        }
        let mut up = p.clone();
        let mut dn = p.clone();
        up.b += h;
        dn.b -= h;
        let fd = (logreg_objective(&up, &data, &w, 0.7) - logreg_objective(&dn, &data, &w, 0.7)) / (2.0 * h);
        assert!((fd - gb).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_weights() {
        let data = two_gaussians(10, 2, 1.0, 0).unwrap();
        let o = LogRegOptions::default();
        assert!(weighted_logreg_fit(&data, &[0.0; 10], 1.0, &o, None).is_err());
        assert!(weighted_logreg_fit(&data, &[1.0; 9], 1.0, &o, None).is_err());
        assert!(weighted_logreg_fit(&data, &[1.0; 10], 0.0, &o, None).is_err());
    }
}
