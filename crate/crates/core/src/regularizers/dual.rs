use super::implicit::{ImplicitRegularizer, PaceParameter};
use crate::error::{Error, Result};

const GOLDEN_TOL: f64 = 1e-10;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Uniform grid on `[0, t_max]` used to bracket the supremum in ψ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualGrid {
    pub points: usize,
    pub t_max: f64,
}

impl DualGrid {
    /// 4096 points on `[0, 10·max(λ, 1)]`.
    pub fn for_lambda(lambda: PaceParameter) -> Self {
        Self {
            points: 4096,
            t_max: 10.0 * lambda.value().max(1.0),
        }
    }

    fn point(&self, i: usize) -> f64 {
        self.t_max * i as f64 / (self.points - 1) as f64
    }
}

/// ψ(λ, v) = sup over t ≥ 0 of −½ v t² + φ(λ, t), evaluated numerically.
///
/// The best grid point is refined by golden-section search on its two
/// neighbouring cells; the supremand is unimodal in t because φ(√s) is
/// concave in s.
pub fn dual_potential_numeric(
    reg: ImplicitRegularizer,
    lambda: PaceParameter,
    v: f64,
    grid: DualGrid,
) -> Result<f64> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid(format!("dual potential needs v > 0, got {v}")));
    }
    if grid.points < 3 || !(grid.t_max > 0.0) {
        return Err(Error::invalid("dual grid needs >= 3 points and t_max > 0"));
    }
    let lam = lambda.value();
    let f = |t: f64| -0.5 * v * t * t + reg.phi(lam, t);

    let (mut best_i, mut best) = (0, f(0.0));
    for i in 1..grid.points {
        let val = f(grid.point(i));
        if val > best {
            best = val;
            best_i = i;
        }
    }
    if best_i == grid.points - 1 {
        return Err(Error::Numerical(format!(
            "dual grid up to t = {} does not bracket the supremum for {reg} at v = {v}",
            grid.t_max
        )));
    }
    let lo = grid.point(best_i.saturating_sub(1));
    let hi = grid.point(best_i + 1);
    let refined = golden_max(f, lo, hi);
    Ok(refined.max(best))
}

/// Maximum of a unimodal function on `[a, b]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    f(0.5 * (a + b)).max(fc).max(fd).max(f(a)).max(f(b))
}
