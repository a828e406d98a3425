mod common {
    pub mod conjugacy;
}

use proptest::prelude::*;
use splir_core::classify::{flip_labels, two_gaussians, LogRegModel, LogRegOptions};
use splir_core::classify::softplus;
use splir_core::matfact::{generate_synthetic, generate_synthetic_with, mae, rmse, weighted_l1_mf, MfFactors, MfModel, MfOptions, MfProblem, SyntheticMfConfig};
use splir_core::numerics::{project_orthonormal_rows, svd, Matrix};
use splir_core::regularizers::{dual_potential_numeric, DualGrid};
use splir_core::{
    spl_ir_fit, ExplicitKind, ImplicitRegularizer, LambdaInit, PaceParameter, PaceSchedule, Regularizer, Result,
    WeightedModel,
};

fn matrix_strategy(max: usize) -> impl Strategy<Value = Matrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec(-10.0..10.0f64, r * c).prop_map(move |d| Matrix::new(r, c, d).unwrap())
    })
}

fn orth_err(m: &Matrix) -> f64 {
    m.matmul_t(m).sub(&Matrix::identity(m.rows())).frobenius_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn svd_invariants(m in matrix_strategy(20)) {
        let s = svd(&m).unwrap();
        prop_assert!(orth_err(&s.left) <= 1e-10);
        prop_assert!(orth_err(&s.right) <= 1e-10);
        for w in s.singular_values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        prop_assert!(s.singular_values.iter().all(|&x| x >= 0.0));
        let err = s.reconstruct().sub(&m).frobenius_norm();
        prop_assert!(err <= 1e-9 * m.frobenius_norm().max(f64::MIN_POSITIVE));
        for j in 0..s.singular_values.len() {
            let first = s.left.col(j).into_iter().find(|x| *x != 0.0).unwrap_or(0.0);
            prop_assert!(first >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn projection_orthonormal_and_idempotent(m in matrix_strategy(12)) {
        prop_assume!(m.rows() <= m.cols());
        let p = project_orthonormal_rows(&m).unwrap();
        prop_assume!(!p.degenerate);
        prop_assert!(orth_err(&p.matrix) <= 1e-10);
        let again = project_orthonormal_rows(&p.matrix).unwrap();
        prop_assert!(again.matrix.sub(&p.matrix).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn weights_non_increasing_in_loss(
        kind in prop::sample::select(ImplicitRegularizer::ALL.to_vec()),
        lambda in 0.05..5.0f64,
        a in 0.0..50.0f64,
        b in 0.0..50.0f64,
    ) {
        let lam = PaceParameter::new(lambda).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let wl = kind.weight_from_loss(lam, lo).unwrap();
        let wh = kind.weight_from_loss(lam, hi).unwrap();
        prop_assert!(wl >= wh);
        // strictly decreasing away from Huber's flat region
        let flat = kind == ImplicitRegularizer::Huber && hi <= lambda * lambda;
        if hi - lo > 1e-3 && !flat && wh > 1e-300 {
            prop_assert!(wl > wh);
        }
    }

    #[test]
    fn cauchy_closed_form(lambda in 0.05..5.0f64, loss in 0.0..100.0f64) {
        let w = ImplicitRegularizer::Cauchy.weight_from_loss(PaceParameter::new(lambda).unwrap(), loss).unwrap();
        prop_assert_eq!(w, 1.0 / (1.0 + loss / (lambda * lambda)));
    }

    #[test]
    fn explicit_weights_bounded(lambda in 0.01..0.99f64, gamma in 0.1..3.0f64, loss in 0.0..100.0f64) {
        for kind in ExplicitKind::ALL {
            let g = (kind == ExplicitKind::Mixture).then_some(gamma);
            let r = Regularizer::parse(kind.name(), g).unwrap();
            let w = r.weight(lambda, loss);
            prop_assert!((0.0..=1.0).contains(&w), "{kind} {w}");
        }
    }

    // with the loss frozen, stepping λ never lowers a weight
    #[test]
    fn weights_monotone_under_pace_steps(loss in 0.0..20.0f64, lambda in 0.05..0.9f64, mu in 1.01..1.5f64) {
        let mut regs: Vec<Regularizer> = ImplicitRegularizer::ALL.iter().map(|&k| k.into()).collect();
        // logarithmic is excluded: its weight is not monotone in λ
        for kind in [ExplicitKind::Hard, ExplicitKind::Linear, ExplicitKind::Logistic] {
            regs.push(Regularizer::parse(kind.name(), None).unwrap());
        }
        regs.push(Regularizer::parse("mixture", Some(0.8)).unwrap());
        for r in regs {
            let next = r.next_lambda(lambda, mu);
            prop_assert!(r.weight(next, loss) >= r.weight(lambda, loss) - 1e-15, "{r}");
        }
    }

    #[test]
    fn mf_metrics_gauge_invariant(seed in 0u64..1000, g in prop::collection::vec(0.2..5.0f64, 3)) {
        let f = MfFactors::random(7, 5, 3, 1.0, seed);
        let y0 = MfFactors::random(7, 5, 3, 1.0, seed + 1).reconstruct();
        let inv: Vec<f64> = g.iter().map(|x| 1.0 / x).collect();
        let h = MfFactors::new(f.u.scale_cols(&g), f.v.scale_cols(&inv)).unwrap();
        prop_assert!((rmse(&y0, &f).unwrap() - rmse(&y0, &h).unwrap()).abs() < 1e-12);
        prop_assert!((mae(&y0, &f).unwrap() - mae(&y0, &h).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn sigma_times_t_is_phi_derivative() {
    for kind in ImplicitRegularizer::ALL {
        for lambda in [0.5, 1.0, 2.0] {
            for i in 1..=100 {
                let t = 5.0 * i as f64 / 100.0;
                let d = kind.phi_derivative(lambda, t);
                assert!((kind.sigma(lambda, t) * t - d).abs() <= 1e-6);
                let h = 1e-6;
                let fd = (kind.phi(lambda, t + h) - kind.phi(lambda, t - h)) / (2.0 * h);
                assert!((fd - d).abs() <= 1e-4, "{kind} λ={lambda} t={t}");
            }
        }
    }
}

#[test]
fn latent_loss_is_conjugate_of_dual_potential() {
    let ts = [0.25, 1.0, 3.0];
    for kind in ImplicitRegularizer::ALL {
        for lambda in [0.5, 1.0, 2.0] {
            let mins = common::conjugacy::conjugate_minimum(kind, lambda, &ts);
            for (&t, m) in ts.iter().zip(mins) {
                let phi = kind.phi(lambda, t);
                assert!((phi - m).abs() <= 1e-5, "{kind} λ={lambda} t={t}: {phi} vs {m}");
            }
        }
    }
}

#[test]
fn explicit_limits() {
    for kind in [ExplicitKind::Hard, ExplicitKind::Linear, ExplicitKind::Mixture] {
        let r = Regularizer::parse(kind.name(), (kind == ExplicitKind::Mixture).then_some(1.0)).unwrap();
        assert_eq!(r.weight(0.7, 1e3), 0.0, "{kind}");
    }
    let r = Regularizer::parse("logistic", None).unwrap();
    // e^{-49λ} falls below 1e-10 once λ ≥ 0.5
    for lambda in [0.5, 1.0, 3.0] {
        for i in 0..=100 {
            assert!(r.weight(lambda, i as f64) > 0.0);
        }
        let w = r.weight(lambda, 50.0 * lambda);
        assert!(w.abs() <= 1e-10, "λ={lambda}: {w}");
    }
}

#[test]
fn softplus_shape() {
    let h = 1e-3;
    let mut prev = f64::INFINITY;
    for i in 0..=400 {
        let m = -20.0 + 0.1 * i as f64;
        let s = softplus(-m);
        assert!(s > 0.0);
        assert!(s < prev);
        prev = s;
        let second = (softplus(-(m + h)) - 2.0 * s + softplus(-(m - h))) / (h * h);
        assert!(second >= -1e-8);
    }
}

/// Weighted location model: ℓᵢ = (xᵢ − θ)², solved exactly.
struct Location(Vec<f64>);

impl WeightedModel for Location {
    type Params = f64;

    fn n_samples(&self) -> usize {
        self.0.len()
    }

    fn initial_params(&mut self, _seed: u64) -> Result<f64> {
        Ok(0.0)
    }

    fn fit_weighted(&mut self, w: &[f64], start: &f64) -> Result<f64> {
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            return Ok(*start);
        }
        Ok(self.0.iter().zip(w).map(|(x, v)| x * v).sum::<f64>() / total)
    }

    fn per_sample_losses(&self, theta: &f64) -> Result<Vec<f64>> {
        Ok(self.0.iter().map(|x| (x - theta).powi(2)).collect())
    }
}

/// Σ vᵢℓᵢ + Σ ψ(λ, 2vᵢ): the factor 2 matches the ½σ weight rule.
fn spl_objective(kind: ImplicitRegularizer, lambda: f64, v: &[f64], losses: &[f64]) -> f64 {
    let lam = PaceParameter::new(lambda).unwrap();
    let grid = DualGrid {
        points: 4096,
        t_max: 200.0,
    };
    v.iter()
        .zip(losses)
        .map(|(&vi, &l)| vi * l + dual_potential_numeric(kind, lam, 2.0 * vi, grid).unwrap())
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn alternation_descends_the_spl_objective(
        xs in prop::collection::vec(-3.0..3.0f64, 3..12),
        outlier in 5.0..15.0f64,
        lambda in 1.0..4.0f64,
        cauchy in any::<bool>(),
    ) {
        let kind = if cauchy { ImplicitRegularizer::Cauchy } else { ImplicitRegularizer::Welsch };
        let mut data = xs;
        data.push(outlier);
        let mut model = Location(data);
        let mut theta = model.fit_weighted(&vec![1.0; model.n_samples()], &0.0).unwrap();
        let mut losses = model.per_sample_losses(&theta).unwrap();
        let mut v = vec![1.0; losses.len()];
        let mut prev = spl_objective(kind, lambda, &v, &losses);
        for _ in 0..15 {
            v = losses.iter().map(|&l| kind.weight(lambda, l)).collect();
            let after_v = spl_objective(kind, lambda, &v, &losses);
            prop_assert!(after_v <= prev + 1e-7, "weight step {prev} -> {after_v}");
            theta = model.fit_weighted(&v, &theta).unwrap();
            losses = model.per_sample_losses(&theta).unwrap();
            let after_fit = spl_objective(kind, lambda, &v, &losses);
            prop_assert!(after_fit <= after_v + 1e-7, "fit step {after_v} -> {after_fit}");
            prev = after_fit;
        }
    }
}

#[test]
fn pace_loop_is_deterministic() {
    let inst = generate_synthetic_with(
        &SyntheticMfConfig {
            rows: 20,
            cols: 15,
            rank: 2,
            ..SyntheticMfConfig::default()
        },
        3,
    );
    let run = || {
        let mut model = MfModel::new(MfProblem::from_instance(&inst, 2, 1e-3).unwrap());
        model.options.iters = 5;
        let sched = PaceSchedule {
            max_rounds: 6,
            inner_cap: 3,
            ..PaceSchedule::default()
        };
        spl_ir_fit(&mut model, ImplicitRegularizer::Welsch, &sched, 11).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.trace.records(), b.trace.records());
    assert_eq!(a.params, b.params);
}

#[test]
fn mf_objective_monotone_on_seeded_instances() {
    for seed in 0..20 {
        let inst = generate_synthetic_with(
            &SyntheticMfConfig {
                rows: 25,
                cols: 20,
                rank: 3,
                ..SyntheticMfConfig::default()
            },
            seed,
        );
        let prob = MfProblem::from_instance(&inst, 3, 1e-2).unwrap();
        let w: Vec<f64> = (0..prob.observed_count()).map(|i| 0.2 + 0.8 * ((i * 7 + seed as usize) % 10) as f64 / 10.0).collect();
        let init = MfFactors::random(25, 20, 3, 0.5, seed);
        let fit = weighted_l1_mf(&prob, &w, &init, &MfOptions { iters: 60, tol: 0.0, ..MfOptions::default() }).unwrap();
        for pair in fit.objective.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "seed {seed}: {pair:?}");
        }
    }
}

#[test]
fn mf_mean_weight_grows_across_rounds() {
    let inst = generate_synthetic(0);
    for kind in [ImplicitRegularizer::Welsch, ImplicitRegularizer::Cauchy, ImplicitRegularizer::Huber] {
        let mut model = MfModel::new(MfProblem::from_instance(&inst, 4, 1e-3).unwrap());
        model.options.iters = 5;
        model.warm_up = Some(MfOptions {
            iters: 1000,
            ..MfOptions::default()
        });
        let sched = PaceSchedule {
            inner_cap: 5,
            ..PaceSchedule::default()
        };
        let fit = spl_ir_fit(&mut model, kind, &sched, 0).unwrap();
        for pair in fit.trace.records().windows(2) {
            assert!(pair[1].mean_weight >= pair[0].mean_weight, "{kind}: {} -> {}", pair[0].mean_weight, pair[1].mean_weight);
        }
    }
}

#[test]
fn flipped_labels_get_lower_weight() {
    for kind in [ImplicitRegularizer::Welsch, ImplicitRegularizer::Cauchy] {
        for seed in 0..20 {
            let clean = two_gaussians(200, 5, 3.0, seed).unwrap();
            let (noisy, flipped) = flip_labels(&clean, 0.2, seed + 100).unwrap();
            let mut model = LogRegModel {
                data: noisy,
                l2_reg: 1.0,
                options: LogRegOptions {
                    max_iter: 100,
                    ..LogRegOptions::default()
                },
            };
            let sched = PaceSchedule {
                lambda0: LambdaInit::AutoHalf,
                inner_cap: 3,
                ..PaceSchedule::default()
            };
            let fit = spl_ir_fit(&mut model, kind, &sched, seed).unwrap();
            let mut is_flipped = vec![false; fit.weights.len()];
            flipped.iter().for_each(|&i| is_flipped[i] = true);
            let mean = |want: bool| {
                let sel: Vec<f64> = fit.weights.iter().zip(&is_flipped).filter(|(_, &f)| f == want).map(|(w, _)| *w).collect();
                sel.iter().sum::<f64>() / sel.len() as f64
            };
            assert!(mean(true) < mean(false), "{kind} seed {seed}: {} vs {}", mean(true), mean(false));
        }
    }
}
