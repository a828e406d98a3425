//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations and
//! the nearest-orthonormal-rows projection built on it.

use super::matrix::{dot, norm, Matrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;
const ROTATION_TOL: f64 = 1e-15;
/// Relative threshold below which a singular direction is treated as null and
/// its singular vector is completed from the standard basis.
const NULL_TOL: f64 = 1e-13;
/// Relative rank-deficiency threshold reported by the projection.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Full SVD `m = left · Λ̂ · rightᵀ` with `left` k×k, `right` n×n.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub left: Matrix,
    pub singular_values: Vec<f64>,
    pub right: Matrix,
}

impl SvdResult {
    /// `left · Λ̂ · rightᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let (k, n) = (self.left.rows(), self.right.rows());
        let p = self.singular_values.len();
        let mut ls = Matrix::zeros(k, n);
        for i in 0..k {
            for j in 0..p {
                ls[(i, j)] = self.left[(i, j)] * self.singular_values[j];
            }
        }
        ls.matmul_t(&self.right)
    }
}

/// Thin factors: `u` r×p, `v` c×p with p = min(r, c).
#[derive(Clone, Debug)]
pub(crate) struct ThinSvd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

pub fn svd(m: &Matrix) -> Result<SvdResult> {
    check_finite(m)?;
    let thin = thin_svd(m);
    Ok(SvdResult {
        left: complete_columns(&thin.u),
        singular_values: thin.s,
        right: complete_columns(&thin.v),
    })
}

fn check_finite(m: &Matrix) -> Result<()> {
    if let Some(pos) = m.as_slice().iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / m.cols(),
            col: pos % m.cols(),
        });
    }
    Ok(())
}

pub(crate) fn thin_svd(m: &Matrix) -> ThinSvd {
    let mut out = if m.rows() >= m.cols() {
        jacobi_tall(m)
    } else {
        let t = jacobi_tall(&m.transpose());
        ThinSvd {
            u: t.v,
            s: t.s,
            v: t.u,
        }
    };
    // first nonzero component of each left vector is made nonnegative
    for j in 0..out.s.len() {
        let first = out.u.col(j).into_iter().find(|x| *x != 0.0).unwrap_or(0.0);
        if first < 0.0 {
            for i in 0..out.u.rows() {
                out.u[(i, j)] = -out.u[(i, j)];
            }
            for i in 0..out.v.rows() {
                out.v[(i, j)] = -out.v[(i, j)];
            }
        }
    }
    out
}

/// One-sided Jacobi on the columns of a tall (r ≥ c) matrix.
fn jacobi_tall(a: &Matrix) -> ThinSvd {
    let (r, c) = a.shape();
    // column-major working copies
    let mut cols: Vec<Vec<f64>> = (0..c).map(|j| a.col(j)).collect();
    let mut vcols: Vec<Vec<f64>> = (0..c)
        .map(|j| (0..c).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..c {
            for q in p + 1..c {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= ROTATION_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut cols, p, q, cs, sn);
                rotate(&mut vcols, p, q, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(f64, usize)> = cols.iter().enumerate().map(|(j, x)| (norm(x), j)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let smax = order.first().map_or(0.0, |o| o.0);

    let mut u = Matrix::zeros(r, c);
    let mut v = Matrix::zeros(c, c);
    let mut s = Vec::with_capacity(c);
    let mut null_slots = Vec::new();
    for (dst, &(sigma, src)) in order.iter().enumerate() {
        s.push(sigma);
        v.set_col(dst, &vcols[src]);
        if sigma > NULL_TOL * smax && sigma > 0.0 {
            let unit: Vec<f64> = cols[src].iter().map(|x| x / sigma).collect();
            u.set_col(dst, &unit);
        } else {
            null_slots.push(dst);
        }
    }
    fill_null_columns(&mut u, &null_slots);
    ThinSvd { u, s, v }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, cs: f64, sn: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (a, b) = (*x, *y);
        *x = cs * a - sn * b;
        *y = sn * a + cs * b;
    }
}

/// Fills the listed (zero) columns of `u` with unit vectors orthogonal to all
/// nonzero columns, drawing candidates from the standard basis.
fn fill_null_columns(u: &mut Matrix, slots: &[usize]) {
    let r = u.rows();
    for &slot in slots {
        let basis: Vec<Vec<f64>> = (0..u.cols())
            .filter(|&j| j != slot)
            .map(|j| u.col(j))
            .filter(|c| c.iter().any(|x| *x != 0.0))
            .collect();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for e in 0..r {
            let mut cand = vec![0.0; r];
            cand[e] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let proj = dot(&cand, b);
                    for (x, y) in cand.iter_mut().zip(b) {
                        *x -= proj * y;
                    }
                }
            }
            let nrm = norm(&cand);
            if best.as_ref().is_none_or(|(bn, _)| nrm > *bn + 1e-12) {
                best = Some((nrm, cand));
            }
        }
        let (nrm, cand) = best.expect("completion candidate");
        let unit: Vec<f64> = cand.iter().map(|x| x / nrm).collect();
        u.set_col(slot, &unit);
    }
}

/// Extends an r×p matrix with orthonormal columns to an r×r orthogonal matrix.
fn complete_columns(thin: &Matrix) -> Matrix {
    let (r, p) = thin.shape();
    if p == r {
        return thin.clone();
    }
    let mut full = Matrix::zeros(r, r);
    for j in 0..p {
        full.set_col(j, &thin.col(j));
    }
    let slots: Vec<usize> = (p..r).collect();
    fill_null_columns(&mut full, &slots);
    full
}

/// Result of projecting onto `{Y : Y Yᵀ = I}`.
#[derive(Clone, Debug)]
pub struct OrthoProjection {
    pub matrix: Matrix,
    /// Set when the input is numerically rank deficient; the nearest point is
    /// then not unique and `matrix` is one of the minimizers.
    pub degenerate: bool,
}

/// Nearest matrix with orthonormal rows in Frobenius norm: `S [I, 0] Qᵀ` for
/// `v = S Λ Qᵀ`.
pub fn project_orthonormal_rows(v: &Matrix) -> Result<OrthoProjection> {
    check_finite(v)?;
    let (k, n) = v.shape();
    if k > n {
        return Err(Error::dim(format!(
            "orthonormal-row projection needs rows <= cols, got {k}x{n}"
        )));
    }
    let t = thin_svd(v);
    let smax = t.s[0];
    let smin = t.s[k - 1];
    let degenerate = smax == 0.0 || smin < DEGENERATE_TOL * smax;
    Ok(OrthoProjection {
        matrix: t.u.matmul_t(&t.v),
        degenerate,
    })
}
