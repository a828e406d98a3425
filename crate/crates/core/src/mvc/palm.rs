//! P2 of the clustering model: PALM over the blocks W, b, Y, Z with fixed
//! sample weights.
//!
//! Every block objective is the restriction of H to that block, so each step
//! is a linearized proximal step on H itself and H cannot increase.

use super::{MultiViewDataset, MvcConfig, MvcState, ZGradient};
use crate::error::{Error, Result};
use crate::numerics::{project_orthonormal_rows, Matrix};
use crate::regularizers::Regularizer;

/// `C_ij = ‖Y_i − Y_j‖²` over the columns of Y.
pub fn pairwise_sq_dists(y: &Matrix) -> Matrix {
    let n = y.cols();
    let gram = y.t_matmul(y);
    let sq: Vec<f64> = (0..n).map(|i| gram[(i, i)]).collect();
    let mut c = Matrix::from_fn(n, n, |i, j| (sq[i] + sq[j] - 2.0 * gram[(i, j)]).max(0.0));
    for i in 0..n {
        c[(i, i)] = 0.0;
    }
    c
}

/// Columns of `X − XZ`.
fn self_residual(x: &Matrix, z: &Matrix) -> Matrix {
    x.sub(&x.matmul(z))
}

/// Columns of `WX + b1ᵀ − Y`.
fn embed_residual(state: &MvcState, x: &Matrix, v: usize) -> Matrix {
    let mut r = state.w[v].matmul(x).sub(&state.y);
    for i in 0..r.rows() {
        let b = state.b[v][i];
        for x in r.row_mut(i) {
            *x += b;
        }
    }
    r
}

fn col_sq_norms(m: &Matrix) -> Vec<f64> {
    let mut out = vec![0.0; m.cols()];
    for i in 0..m.rows() {
        for (o, x) in out.iter_mut().zip(m.row(i)) {
            *o += x * x;
        }
    }
    out
}

fn weighted_sum(m: &Matrix, p: &[f64]) -> Vec<f64> {
    (0..m.rows()).map(|i| m.row(i).iter().zip(p).map(|(x, w)| x * w).sum()).collect()
}

/// tr(ZC) = Σ_ij Z_ij C_ij for symmetric C.
fn trace_zc(z: &Matrix, c: &Matrix) -> f64 {
    z.as_slice().iter().zip(c.as_slice()).map(|(a, b)| a * b).sum()
}

/// Squared per-sample losses `‖X_i − XZ_i‖² + β‖WX_i + b − Y_i‖²`, one vector
/// per view.
pub fn squared_losses(state: &MvcState, data: &MultiViewDataset, beta: f64) -> Vec<Vec<f64>> {
    data.views()
        .iter()
        .enumerate()
        .map(|(v, x)| {
            let r1 = col_sq_norms(&self_residual(x, &state.z[v]));
            let r2 = col_sq_norms(&embed_residual(state, x, v));
            r1.iter().zip(&r2).map(|(a, b)| a + beta * b).collect()
        })
        .collect()
}

/// P1: per-view weights at pace λ, `p_i = weight(λ, ℓ_i²)`.
pub fn p1_update_weights(
    state: &MvcState,
    data: &MultiViewDataset,
    lambda: f64,
    reg: &Regularizer,
    beta: f64,
) -> Vec<Vec<f64>> {
    squared_losses(state, data, beta)
        .into_iter()
        .map(|l| l.into_iter().map(|x| reg.weight(lambda, x)).collect())
        .collect()
}

/// `Σ_v tr(Z^v C)` for the current Y.
pub fn affinity_penalty(state: &MvcState) -> f64 {
    let c = pairwise_sq_dists(&state.y);
    state.z.iter().map(|z| trace_zc(z, &c)).sum()
}

/// The P2 objective H.
pub fn objective_h(state: &MvcState, data: &MultiViewDataset, config: &MvcConfig) -> f64 {
    let c = pairwise_sq_dists(&state.y);
    let mut h = 0.0;
    for (v, x) in data.views().iter().enumerate() {
        let p = &state.p[v];
        let r1 = col_sq_norms(&self_residual(x, &state.z[v]));
        let r2 = col_sq_norms(&embed_residual(state, x, v));
        let fit: f64 = (0..p.len()).map(|i| p[i] * (r1[i] + config.beta * r2[i])).sum();
        h += fit + config.rho * trace_zc(&state.z[v], &c);
    }
    0.5 * h
}

/// Gradient of H in W^v, divided by β: `(WX + b1ᵀ − Y)P²Xᵀ`.
pub fn grad_w(state: &MvcState, data: &MultiViewDataset, v: usize) -> Matrix {
    let x = &data.views()[v];
    embed_residual(state, x, v).scale_cols(&state.p[v]).matmul_t(x)
}

/// `‖B Bᵀ‖_F` with `B = X^v P^v`.
pub fn lipschitz_w(state: &MvcState, data: &MultiViewDataset, v: usize) -> f64 {
    let x = &data.views()[v];
    x.scale_cols(&state.p[v]).matmul_t(x).frobenius_norm()
}

/// Gradient of H in b^v, divided by β: `Σ_i p_i (WX_i + b − Y_i)`.
pub fn grad_b(state: &MvcState, data: &MultiViewDataset, v: usize) -> Vec<f64> {
    weighted_sum(&embed_residual(state, &data.views()[v], v), &state.p[v])
}

/// `Σ_i p_i`, the squared norm of the diagonal of P^v.
pub fn lipschitz_b(state: &MvcState, v: usize) -> f64 {
    state.p[v].iter().sum()
}

/// Curvature of H in Y: `βΣ_v P_v² + ρΣ_v (D_row + D_col − Z − Zᵀ)`.
pub fn y_curvature(state: &MvcState, config: &MvcConfig) -> Matrix {
    let n = state.y.cols();
    let mut a = Matrix::zeros(n, n);
    for (z, p) in state.z.iter().zip(&state.p) {
        for i in 0..n {
            a[(i, i)] += config.beta * p[i];
            for j in 0..n {
                let s = z[(i, j)];
                if s != 0.0 {
                    a[(i, i)] += config.rho * s;
                    a[(j, j)] += config.rho * s;
                    a[(i, j)] -= config.rho * s;
                    a[(j, i)] -= config.rho * s;
                }
            }
        }
    }
    a
}

/// Gradient of H in Y: `Y A − βΣ_v (W^vX^v + b^v1ᵀ)P_v²`.
pub fn grad_y(state: &MvcState, data: &MultiViewDataset, config: &MvcConfig) -> Matrix {
    grad_y_with(state, data, config, &y_curvature(state, config))
}

fn grad_y_with(state: &MvcState, data: &MultiViewDataset, config: &MvcConfig, a: &Matrix) -> Matrix {
    let mut g = state.y.matmul(a);
    for (v, x) in data.views().iter().enumerate() {
        let mut m = state.w[v].matmul(x);
        for i in 0..m.rows() {
            let b = state.b[v][i];
            for x in m.row_mut(i) {
                *x += b;
            }
        }
        g.axpy(-config.beta, &m.scale_cols(&state.p[v]));
    }
    g
}

/// Gradient used by the Z-step: `XᵀXZP² − XᵀXP² + c·C`, with c = ρ/2 (the
/// exact gradient of H) or ρ in the full-ρ compatibility mode.
pub fn grad_z(state: &MvcState, data: &MultiViewDataset, config: &MvcConfig, v: usize) -> Matrix {
    grad_z_with(state, data, config, v, &pairwise_sq_dists(&state.y))
}

fn grad_z_with(
    state: &MvcState,
    data: &MultiViewDataset,
    config: &MvcConfig,
    v: usize,
    c: &Matrix,
) -> Matrix {
    let x = &data.views()[v];
    let r = x.matmul(&state.z[v]).sub(x).scale_cols(&state.p[v]);
    let mut g = x.t_matmul(&r);
    g.axpy(config.z_gradient.coefficient(config.rho), c);
    g
}

/// `‖XᵀX‖_F · ‖P²‖_F`.
pub fn lipschitz_z(state: &MvcState, data: &MultiViewDataset, v: usize) -> f64 {
    let p_sq: f64 = state.p[v].iter().map(|p| p * p).sum();
    data.gram_norm(v) * p_sq.sqrt()
}

impl ZGradient {
    fn coefficient(self, rho: f64) -> f64 {
        match self {
            ZGradient::Half => 0.5 * rho,
            ZGradient::Full => rho,
        }
    }
}

pub fn w_step(state: &mut MvcState, data: &MultiViewDataset, config: &MvcConfig) {
    for v in 0..data.n_views() {
        let l = lipschitz_w(state, data, v);
        if l > 0.0 {
            let g = grad_w(state, data, v);
            state.w[v].axpy(-1.0 / (config.gamma * l), &g);
        }
    }
}

pub fn b_step(state: &mut MvcState, data: &MultiViewDataset, config: &MvcConfig) {
    for v in 0..data.n_views() {
        let l = lipschitz_b(state, v);
        if l > 0.0 {
            let g = grad_b(state, data, v);
            let step = 1.0 / (config.gamma * l);
            for (b, g) in state.b[v].iter_mut().zip(g) {
                *b -= step * g;
            }
        }
    }
}

/// Gradient step on Y followed by projection onto `YYᵀ = I`. Returns whether
/// the projection was degenerate.
pub fn y_step(state: &mut MvcState, data: &MultiViewDataset, config: &MvcConfig) -> Result<bool> {
    let a = y_curvature(state, config);
    let l = a.frobenius_norm();
    if l == 0.0 {
        return Ok(false);
    }
    let mut target = state.y.clone();
    target.axpy(-1.0 / (config.gamma * l), &grad_y_with(state, data, config, &a));
    let proj = project_orthonormal_rows(&target)?;
    state.y = proj.matrix;
    Ok(proj.degenerate)
}

pub fn z_step(state: &mut MvcState, data: &MultiViewDataset, config: &MvcConfig) {
    let c = pairwise_sq_dists(&state.y);
    for v in 0..data.n_views() {
        let l = lipschitz_z(state, data, v);
        if l == 0.0 {
            continue;
        }
        let g = grad_z_with(state, data, config, v, &c);
        let z = &mut state.z[v];
        z.axpy(-1.0 / (config.gamma * l), &g);
        let n = z.rows();
        for i in 0..n {
            for j in 0..n {
                let e = &mut z[(i, j)];
                *e = if i == j { 0.0 } else { e.max(0.0) };
            }
        }
    }
}

/// Outcome of one P2 solve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PalmReport {
    /// H before the first sweep, then after every sweep.
    pub h: Vec<f64>,
    pub sweeps: usize,
    pub degenerate_y_steps: usize,
    /// Largest `‖YYᵀ − I‖_F` seen after a Y-step.
    pub max_orth_error: f64,
    /// Z entries found negative or on the diagonal nonzero after Z-steps.
    pub z_violations: usize,
}

fn orth_error(y: &Matrix) -> f64 {
    y.matmul_t(y).sub(&Matrix::identity(y.rows())).frobenius_norm()
}

fn z_violations(z: &Matrix) -> usize {
    let n = z.rows();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| if i == j { z[(i, j)] != 0.0 } else { z[(i, j)] < 0.0 })
        .count()
}

/// Runs W-, b-, Y-, Z-sweeps until H changes by less than `palm_tol`
/// relatively, or `palm_iters` sweeps.
pub fn palm_solve_p2(state: &mut MvcState, data: &MultiViewDataset, config: &MvcConfig) -> Result<PalmReport> {
    let mut report = PalmReport {
        h: vec![objective_h(state, data, config)],
        ..PalmReport::default()
    };
    for sweep in 1..=config.palm_iters {
        w_step(state, data, config);
        b_step(state, data, config);
        if y_step(state, data, config)? {
            report.degenerate_y_steps += 1;
        }
        report.max_orth_error = report.max_orth_error.max(orth_error(&state.y));
        z_step(state, data, config);
        report.z_violations += state.z.iter().map(z_violations).sum::<usize>();
        let h = objective_h(state, data, config);
        if !h.is_finite() {
            return Err(Error::Numerical(format!("PALM objective became {h} at sweep {sweep}")));
        }
        let prev = *report.h.last().expect("initial value");
        report.h.push(h);
        report.sweeps = sweep;
        if (prev - h).abs() <= config.palm_tol * prev.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(report)
}
