//! Dense matrix primitives shared by every solver.

mod csv;
mod matrix;
mod svd;

pub use csv::{format_real, read_matrix_csv, write_matrix_csv};
pub use matrix::{dot, norm, solve_spd, Matrix};
pub use svd::{project_orthonormal_rows, svd, OrthoProjection, SvdResult, DEGENERATE_TOL};

pub fn frobenius_norm(m: &Matrix) -> f64 {
    m.frobenius_norm()
}

pub fn trace(m: &Matrix) -> crate::Result<f64> {
    m.trace()
}
