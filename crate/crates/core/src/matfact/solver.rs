use super::{MfFactors, MfProblem};
use crate::error::{Error, Result};
use crate::numerics::{dot, solve_spd, Matrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MfOptions {
    /// Outer iterations; each updates every row of U, then every row of V.
    pub iters: usize,
    /// Relative objective change that stops the solver.
    pub tol: f64,
    /// Smoothing of |x| as √(x² + ε²) − ε.
    pub eps: f64,
    pub jitter: f64,
}

impl Default for MfOptions {
    fn default() -> Self {
        Self {
            iters: 100,
            tol: 1e-6,
            eps: 1e-6,
            jitter: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MfFit {
    pub factors: MfFactors,
    /// Objective before the first iteration and after each one.
    pub objective: Vec<f64>,
}

fn smooth_abs(x: f64, eps: f64) -> f64 {
    x.hypot(eps) - eps
}

/// `Σ w_ij h(Y_ij − u_i·v_j) + l2 (‖U‖² + ‖V‖²)` with h the smoothed |x|.
pub fn mf_objective(prob: &MfProblem, weights: &[f64], f: &MfFactors, eps: f64) -> f64 {
    let y = prob.observed();
    let fit: f64 = prob
        .entries()
        .iter()
        .zip(weights)
        .map(|(&(i, j), &w)| w * smooth_abs(y[(i, j)] - dot(f.u.row(i), f.v.row(j)), eps))
        .sum();
    fit + prob.l2_reg() * f.squared_norm()
}

/// Weighted L1 factorization by alternating row-wise majorize-minimize
/// steps: each row solves the reweighted least-squares surrogate of the
/// smoothed absolute loss, so the objective never increases.
pub fn weighted_l1_mf(
    prob: &MfProblem,
    weights: &[f64],
    init: &MfFactors,
    opts: &MfOptions,
) -> Result<MfFit> {
    let (m, n) = prob.shape();
    let r = prob.rank();
    if weights.len() != prob.observed_count() {
        return Err(Error::dim(format!(
            "{} weights for {} observed entries",
            weights.len(),
            prob.observed_count()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::invalid(format!("weights must be finite and nonnegative, got {w}")));
    }
    if init.u.shape() != (m, r) || init.v.shape() != (n, r) {
        return Err(Error::dim(format!(
            "initial factors {:?}, {:?} for a {m}x{n} rank-{r} problem",
            init.u.shape(),
            init.v.shape()
        )));
    }

    let mut f = init.clone();
    let mut history = vec![mf_objective(prob, weights, &f, opts.eps)];
    for _ in 0..opts.iters {
        {
            let MfFactors { u, v } = &mut f;
            for i in 0..m {
                let row = solve_row(prob, weights, prob.row_entries(i), v, u.row(i), opts, |k| {
                    prob.entries()[k].1
                })?;
                u.row_mut(i).copy_from_slice(&row);
            }
            for j in 0..n {
                let row = solve_row(prob, weights, prob.col_entries(j), u, v.row(j), opts, |k| {
                    prob.entries()[k].0
                })?;
                v.row_mut(j).copy_from_slice(&row);
            }
        }
        let obj = mf_objective(prob, weights, &f, opts.eps);
        if !obj.is_finite() {
            return Err(Error::Numerical("factorization objective is not finite".into()));
        }
        let prev = *history.last().expect("nonempty");
        history.push(obj);
        if (prev - obj).abs() <= opts.tol * prev.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(MfFit {
        factors: f,
        objective: history,
    })
}

/// Minimizes the surrogate `Σ_k ½ c_k (y_k − x·o_k)² + l2‖x‖²` for one row x,
/// where `c_k = w_k / √(r_k² + ε²)` at the current residual and `o_k` is the
/// matching row of the other factor.
fn solve_row(
    prob: &MfProblem,
    weights: &[f64],
    entries: &[usize],
    other: &Matrix,
    current: &[f64],
    opts: &MfOptions,
    partner: impl Fn(usize) -> usize,
) -> Result<Vec<f64>> {
    let r = current.len();
    let y = prob.observed();
    let mut a = Matrix::zeros(r, r);
    let mut rhs = vec![0.0; r];
    for p in 0..r {
        a[(p, p)] = 2.0 * prob.l2_reg();
    }
    let mut any = prob.l2_reg() > 0.0;
    for &k in entries {
        let w = weights[k];
        if w == 0.0 {
            continue;
        }
        any = true;
        let (i, j) = prob.entries()[k];
        let o = other.row(partner(k));
        let target = y[(i, j)];
        let res = target - dot(current, o);
        let c = w / res.hypot(opts.eps);
        for p in 0..r {
            rhs[p] += c * target * o[p];
            for q in 0..=p {
                a[(p, q)] += c * o[p] * o[q];
            }
        }
    }
    if !any {
        return Ok(current.to_vec());
    }
    for p in 0..r {
        for q in 0..p {
            a[(q, p)] = a[(p, q)];
        }
    }
    solve_spd(&a, &rhs, opts.jitter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfact::{mf_losses, rmse};

    fn planted(m: usize, n: usize, r: usize, seed: u64) -> MfFactors {
        MfFactors::random(m, n, r, 1.0, seed)
    }

    #[test]
    fn exact_recovery_noiseless() {
        let truth = planted(10, 10, 2, 11);
        let y = truth.reconstruct();
        let prob = MfProblem::new(y.clone(), vec![true; 100], 2, 1e-6).unwrap();
        let init = MfFactors::random(10, 10, 2, 1.0, 99);
        let opts = MfOptions {
            iters: 500,
            tol: 1e-12,
            ..MfOptions::default()
        };
        let fit = weighted_l1_mf(&prob, &[1.0; 100], &init, &opts).unwrap();
        let obj = *fit.objective.last().unwrap();
        assert!(obj < 1e-4, "objective {obj}");
        assert!(rmse(&y, &fit.factors).unwrap() < 1e-3);
    }

    #[test]
    fn objective_never_increases() {
        for seed in 0..5 {
            let truth = planted(12, 9, 2, seed);
            let mut y = truth.reconstruct();
            y[(1, 1)] += 15.0;
            let mask: Vec<bool> = (0..108).map(|k| k % 7 != 3).collect();
            let prob = MfProblem::new(y, mask, 2, 1e-2).unwrap();
            let w: Vec<f64> = (0..prob.observed_count()).map(|k| 0.2 + (k % 5) as f64 * 0.3).collect();
            let fit = weighted_l1_mf(&prob, &w, &MfFactors::random(12, 9, 2, 1.0, seed + 50), &MfOptions::default())
                .unwrap();
            for pair in fit.objective.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-9 * pair[0].abs().max(1.0), "{pair:?}");
            }
        }
    }

    #[test]
    fn zero_weights_shrink_factors() {
        let prob = MfProblem::new(Matrix::zeros(4, 4), vec![true; 16], 2, 0.5).unwrap();
        let init = MfFactors::random(4, 4, 2, 1.0, 1);
        let fit = weighted_l1_mf(&prob, &[0.0; 16], &init, &MfOptions::default()).unwrap();
        let expect0 = 0.5 * init.squared_norm();
        assert!((fit.objective[0] - expect0).abs() < 1e-12);
        for pair in fit.objective.windows(2) {
            assert!(pair[1] <= pair[0]);
        }
        assert_eq!(fit.factors.squared_norm(), 0.0);
    }

    #[test]
    fn downweighting_an_outlier_helps() {
        let truth = planted(8, 8, 1, 5);
        let clean = truth.reconstruct();
        let mut y = clean.clone();
        y[(2, 3)] += 30.0;
        let prob = MfProblem::new(y, vec![true; 64], 1, 1e-3).unwrap();
        let init = MfFactors::random(8, 8, 1, 1.0, 2);
        let mut w = vec![1.0; 64];
        let ones = weighted_l1_mf(&prob, &w, &init, &MfOptions::default()).unwrap();
        w[2 * 8 + 3] = 0.0;
        let masked = weighted_l1_mf(&prob, &w, &init, &MfOptions::default()).unwrap();
        let err = |f: &MfFactors| (f.reconstruct()[(2, 3)] - clean[(2, 3)]).abs();
        assert!(err(&masked.factors) < err(&ones.factors));
    }

    #[test]
    fn losses_match_direct_subtraction() {
        let f = planted(5, 5, 2, 8);
        let mut y = Matrix::from_fn(5, 5, |i, j| (i * 5 + j) as f64 * 0.37 - 3.0);
        y[(0, 0)] = 1.5;
        let mask: Vec<bool> = (0..25).map(|k| k % 4 != 0).collect();
        let prob = MfProblem::new(y.clone(), mask.clone(), 2, 0.0).unwrap();
        let got = mf_losses(&prob, &f);
        let recon = f.reconstruct();
        let expect: Vec<f64> = (0..25)
            .filter(|k| mask[*k])
            .map(|k| (y.as_slice()[k] - recon.as_slice()[k]).abs())
            .collect();
        assert_eq!(got.len(), expect.len());
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_errors() {
        let prob = MfProblem::new(Matrix::zeros(3, 3), vec![true; 9], 1, 0.0).unwrap();
        let init = MfFactors::random(3, 3, 1, 1.0, 0);
        assert!(weighted_l1_mf(&prob, &[1.0; 8], &init, &MfOptions::default()).is_err());
        assert!(weighted_l1_mf(&prob, &[-1.0; 9], &init, &MfOptions::default()).is_err());
        let bad = MfFactors::random(3, 3, 2, 1.0, 0);
        assert!(weighted_l1_mf(&prob, &[1.0; 9], &bad, &MfOptions::default()).is_err());
    }
}
