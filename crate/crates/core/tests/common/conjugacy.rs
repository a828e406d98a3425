//! Independent check that φ(λ, t) = min over v of { ½ v t² + ψ(λ, v) }.

use splir_core::regularizers::{dual_potential_numeric, DualGrid};
use splir_core::{ImplicitRegularizer, PaceParameter};

const GRID: usize = 2000;

/// `min_v ½vt² + ψ(λ, v)` for each t, over a log-spaced v-grid in
/// `[10⁻⁶σ_max, σ_max]` refined by golden-section search around the best
/// grid point. Grid points where ψ cannot be bracketed are skipped.
pub fn conjugate_minimum(kind: ImplicitRegularizer, lambda: f64, ts: &[f64]) -> Vec<f64> {
    let lam = PaceParameter::new(lambda).unwrap();
    let dual = DualGrid::for_lambda(lam);
    let top = kind.sigma_max(lambda);
    let psi = |v: f64| dual_potential_numeric(kind, lam, v, dual).ok();
    let vs: Vec<f64> = (0..GRID)
        .map(|i| top * 10f64.powf(-6.0 + 6.0 * i as f64 / (GRID - 1) as f64))
        .collect();
    let cached: Vec<Option<f64>> = vs.iter().map(|&v| psi(v)).collect();

    ts.iter()
        .map(|&t| {
            let g = |v: f64, p: f64| 0.5 * v * t * t + p;
            let (best_i, best) = cached
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.map(|p| (i, g(vs[i], p))))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("some grid point is bracketed");
            let lo = vs[best_i.saturating_sub(1)];
            let hi = vs[(best_i + 1).min(GRID - 1)];
            let refined = golden_min(|v| psi(v).map_or(f64::INFINITY, |p| g(v, p)), lo, hi);
            best.min(refined)
        })
        .collect()
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-13 * b.abs().max(1.0) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}
