use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splir_core::evalmetrics::acc;
use splir_core::mvc::palm::*;
use splir_core::mvc::*;
use splir_core::numerics::{project_orthonormal_rows, Matrix};
use splir_core::{ClusterLabels, ImplicitRegularizer, PaceParameter, Regularizer};

fn gauss_matrix(r: usize, c: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

/// A state with every block nonzero and constraints satisfied.
fn random_instance(dims: &[usize], n: usize, k: usize, seed: u64) -> (MultiViewDataset, MvcState) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let views: Vec<Matrix> = dims.iter().map(|&d| gauss_matrix(d, n, &mut rng)).collect();
    let data = MultiViewDataset::new(views).unwrap();
    let mut state = MvcState::init(&data, k, seed).unwrap();
    for v in 0..dims.len() {
        state.z[v] = Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { rng.random_range(0.0..0.3) });
        state.w[v] = gauss_matrix(k, dims[v], &mut rng);
        state.b[v] = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        state.p[v] = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    }
    (data, state)
}

fn config(k: usize) -> MvcConfig {
    let mut c = MvcConfig::new(k);
    c.beta = 0.7;
    c.rho = 0.3;
    c
}

fn orth_err(y: &Matrix) -> f64 {
    y.matmul_t(y).sub(&Matrix::identity(y.rows())).frobenius_norm()
}

fn assert_gamma2(z: &Matrix) {
    for i in 0..z.rows() {
        assert_eq!(z[(i, i)], 0.0);
        for j in 0..z.cols() {
            assert!(z[(i, j)] >= 0.0);
        }
    }
}

fn welsch() -> Regularizer {
    ImplicitRegularizer::Welsch.into()
}

/// Term-by-term evaluation of H with explicit loops.
fn brute_h(state: &MvcState, data: &MultiViewDataset, cfg: &MvcConfig) -> f64 {
    let n = data.n_samples();
    let k = state.y.rows();
    let mut h = 0.0;
    for (v, x) in data.views().iter().enumerate() {
        for i in 0..n {
            let mut self_res = 0.0;
            for r in 0..x.rows() {
                let mut xz = 0.0;
                for j in 0..n {
                    xz += x[(r, j)] * state.z[v][(j, i)];
                }
                self_res += (x[(r, i)] - xz).powi(2);
            }
            let mut emb = 0.0;
            for c in 0..k {
                let mut wx = state.b[v][c];
                for r in 0..x.rows() {
                    wx += state.w[v][(c, r)] * x[(r, i)];
                }
                emb += (wx - state.y[(c, i)]).powi(2);
            }
            h += state.p[v][i] * (self_res + cfg.beta * emb);
        }
        for i in 0..n {
            for j in 0..n {
                let d: f64 = (0..k).map(|c| (state.y[(c, i)] - state.y[(c, j)]).powi(2)).sum();
                h += cfg.rho * state.z[v][(i, j)] * d;
            }
        }
    }
    0.5 * h
}

#[test]
fn objective_matches_brute_force() {
    let (data, state) = random_instance(&[3], 4, 2, 11);
    let cfg = config(2);
    let h = objective_h(&state, &data, &cfg);
    assert!((h - brute_h(&state, &data, &cfg)).abs() < 1e-12 * h.abs().max(1.0));
    let (data, state) = random_instance(&[3, 5], 7, 3, 12);
    let h = objective_h(&state, &data, &cfg);
    assert!((h - brute_h(&state, &data, &cfg)).abs() < 1e-12 * h.abs().max(1.0));
}

#[test]
fn objective_linear_in_rho_and_weights() {
    let (data, mut state) = random_instance(&[3, 4], 6, 2, 5);
    let cfg = config(2);
    let mut doubled = cfg;
    doubled.rho *= 2.0;
    let pen = affinity_penalty(&state);
    let diff = objective_h(&state, &data, &doubled) - objective_h(&state, &data, &cfg);
    assert!((diff - 0.5 * cfg.rho * pen).abs() < 1e-12);

    for p in state.p.iter_mut() {
        p.iter_mut().for_each(|x| *x = 0.0);
    }
    let h = objective_h(&state, &data, &cfg);
    assert!((h - 0.5 * cfg.rho * pen).abs() < 1e-13);
}

#[test]
fn p1_weights_hand_case() {
    // one view, two samples, k = 1
    let x = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
    let data = MultiViewDataset::new(vec![x]).unwrap();
    let mut state = MvcState::init(&data, 1, 0).unwrap();
    state.z[0] = Matrix::from_rows(&[vec![0.0, 0.5], vec![0.25, 0.0]]).unwrap();
    state.w[0] = Matrix::from_rows(&[vec![0.3]]).unwrap();
    state.b[0] = vec![-0.1];
    state.y = Matrix::from_rows(&[vec![0.6, 0.8]]).unwrap();
    let beta = 0.5;
    let lambda = 1.3;
    // sample 0: x - XZ_0 = 1 - 2*0.25 = 0.5;  w x + b - y = 0.3 - 0.1 - 0.6 = -0.4
    // sample 1: 2 - 1*0.5 = 1.5;             0.6 - 0.1 - 0.8 = -0.3
    let l0 = 0.25 + beta * 0.16;
    let l1 = 2.25 + beta * 0.09;
    let p = p1_update_weights(&state, &data, lambda, &welsch(), beta);
    let lam = PaceParameter::new(lambda).unwrap();
    let w = |l: f64| ImplicitRegularizer::Welsch.weight_from_loss(lam, l).unwrap();
    assert!((p[0][0] - w(l0)).abs() < 1e-12);
    assert!((p[0][1] - w(l1)).abs() < 1e-12);
    assert!((p[0][0] - (-l0 / (lambda * lambda)).exp()).abs() < 1e-12);

    // β = 0 keeps only the self-representation residual
    let p = p1_update_weights(&state, &data, lambda, &welsch(), 0.0);
    assert!((p[0][1] - w(2.25)).abs() < 1e-12);
}

#[test]
fn p1_zero_residual_gives_max_weight() {
    let x = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
    let data = MultiViewDataset::new(vec![x]).unwrap();
    let mut state = MvcState::init(&data, 1, 0).unwrap();
    state.z[0] = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let p = p1_update_weights(&state, &data, 0.5, &welsch(), 0.0);
    assert_eq!(p, vec![vec![1.0, 1.0]]);
}

#[test]
fn p1_weights_monotone_in_lambda() {
    let (data, state) = random_instance(&[4, 3], 10, 2, 8);
    for kind in ImplicitRegularizer::ALL {
        let reg = Regularizer::from(kind);
        let mut lam = 0.2;
        let mut prev = p1_update_weights(&state, &data, lam, &reg, 1.0);
        for _ in 0..20 {
            lam = reg.next_lambda(lam, 1.3);
            let cur = p1_update_weights(&state, &data, lam, &reg, 1.0);
            for (a, b) in prev.iter().flatten().zip(cur.iter().flatten()) {
                assert!(b >= a, "{kind}: {a} -> {b}");
                assert!(*b <= reg.max_weight(lam) + 1e-15);
            }
            prev = cur;
        }
    }
}

fn central_diff(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

#[test]
fn gradients_match_finite_differences() {
    let (data, state) = random_instance(&[3, 4], 6, 2, 21);
    let cfg = config(2);
    let eps = 1e-6;
    let tol = 1e-5;

    for v in 0..2 {
        let g = grad_w(&state, &data, v).scale(cfg.beta);
        for (r, c) in [(0, 0), (1, 2)] {
            let fd = central_diff(
                |h| {
                    let mut s = state.clone();
                    s.w[v][(r, c)] += h;
                    objective_h(&s, &data, &cfg)
                },
                eps,
            );
            assert!((fd - g[(r, c)]).abs() < tol, "W: {fd} vs {}", g[(r, c)]);
        }
        let g = grad_b(&state, &data, v);
        let fd = central_diff(
            |h| {
                let mut s = state.clone();
                s.b[v][1] += h;
                objective_h(&s, &data, &cfg)
            },
            eps,
        );
        assert!((fd - cfg.beta * g[1]).abs() < tol, "b: {fd} vs {}", cfg.beta * g[1]);

        let g = grad_z(&state, &data, &cfg, v);
        for (i, j) in [(0, 1), (4, 2), (5, 0)] {
            let fd = central_diff(
                |h| {
                    let mut s = state.clone();
                    s.z[v][(i, j)] += h;
                    objective_h(&s, &data, &cfg)
                },
                eps,
            );
            assert!((fd - g[(i, j)]).abs() < tol, "Z: {fd} vs {}", g[(i, j)]);
        }
    }

    // H extended off the orthonormal set is still smooth in Y
    let g = grad_y(&state, &data, &cfg);
    for (r, c) in [(0, 0), (1, 3), (0, 5)] {
        let fd = central_diff(
            |h| {
                let mut s = state.clone();
                s.y[(r, c)] += h;
                objective_h(&s, &data, &cfg)
            },
            eps,
        );
        assert!((fd - g[(r, c)]).abs() < tol, "Y: {fd} vs {}", g[(r, c)]);
    }
}

#[test]
fn y_curvature_row_sum_audit() {
    let (_, state) = random_instance(&[2], 5, 2, 4);
    let cfg = config(2);
    let a = y_curvature(&state, &cfg);
    let z = &state.z[0];
    for i in 0..5 {
        let row: f64 = (0..5).map(|j| z[(i, j)]).sum();
        let col: f64 = (0..5).map(|j| z[(j, i)]).sum();
        let expect_diag = cfg.beta * state.p[0][i] + cfg.rho * (row + col);
        assert!((a[(i, i)] - expect_diag).abs() < 1e-15);
        for j in 0..5 {
            if i != j {
                assert!((a[(i, j)] + cfg.rho * (z[(i, j)] + z[(j, i)])).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn pairwise_distances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut y = gauss_matrix(3, 6, &mut rng);
    for r in 0..3 {
        y[(r, 4)] = y[(r, 1)];
    }
    let c = pairwise_sq_dists(&y);
    for i in 0..6 {
        assert_eq!(c[(i, i)], 0.0);
        for j in 0..6 {
            let d: f64 = (0..3).map(|r| (y[(r, i)] - y[(r, j)]).powi(2)).sum();
            assert!((c[(i, j)] - d).abs() < 1e-12);
            assert_eq!(c[(i, j)], c[(j, i)]);
        }
    }
    assert!(c[(1, 4)].abs() < 1e-15);
}

fn sq_norm_w(state: &MvcState, data: &MultiViewDataset, v: usize) -> f64 {
    // ½‖W B − A‖² with A = (Y − b1ᵀ)P, B = XP
    let x = &data.views()[v];
    let mut r = state.w[v].matmul(x).sub(&state.y);
    for i in 0..r.rows() {
        for e in r.row_mut(i) {
            *e += state.b[v][i];
        }
    }
    let sq: Vec<f64> = state.p[v].iter().map(|p| p.sqrt()).collect();
    0.5 * r.scale_cols(&sq).frobenius_norm_sq()
}

#[test]
fn w_and_b_steps() {
    let (data, mut state) = random_instance(&[3, 4], 8, 2, 31);
    let cfg = config(2);
    let before: Vec<f64> = (0..2).map(|v| sq_norm_w(&state, &data, v)).collect();
    w_step(&mut state, &data, &cfg);
    let mid: Vec<f64> = (0..2).map(|v| sq_norm_w(&state, &data, v)).collect();
    assert!(mid[0] < before[0] && mid[1] < before[1]);
    b_step(&mut state, &data, &cfg);
    let after: Vec<f64> = (0..2).map(|v| sq_norm_w(&state, &data, v)).collect();
    assert!(after[0] < mid[0] && after[1] < mid[1]);

    // zero weights: nothing moves
    let frozen = {
        let mut s = state.clone();
        s.p.iter_mut().for_each(|p| p.iter_mut().for_each(|x| *x = 0.0));
        s
    };
    let mut s = frozen.clone();
    w_step(&mut s, &data, &cfg);
    b_step(&mut s, &data, &cfg);
    assert_eq!(s, frozen);
}

#[test]
fn w_step_stationary() {
    // Y = W X exactly with b = 0
    let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let data = MultiViewDataset::new(vec![x]).unwrap();
    let mut state = MvcState::init(&data, 1, 0).unwrap();
    state.w[0] = state.y.clone();
    let before = state.clone();
    w_step(&mut state, &data, &config(1));
    assert_eq!(state.w, before.w);
}

#[test]
fn b_step_scalar_trace() {
    // k = 1, n = 2: b ← b − Σ p_i (w x_i + b − y_i) / (γ Σ p_i)
    let x = Matrix::from_rows(&[vec![1.0, -2.0]]).unwrap();
    let data = MultiViewDataset::new(vec![x]).unwrap();
    let mut state = MvcState::init(&data, 1, 0).unwrap();
    state.y = Matrix::from_rows(&[vec![0.6, -0.8]]).unwrap();
    state.w[0] = Matrix::from_rows(&[vec![0.5]]).unwrap();
    state.b[0] = vec![0.2];
    state.p[0] = vec![0.25, 1.0];
    let cfg = config(1);
    let r0 = 0.5 + 0.2 - 0.6;
    let r1 = -1.0 + 0.2 + 0.8;
    let expect = 0.2 - (0.25 * r0 + 1.0 * r1) / (cfg.gamma * 1.25);
    b_step(&mut state, &data, &cfg);
    assert!((state.b[0][0] - expect).abs() < 1e-12);
}

#[test]
fn y_and_z_steps_keep_constraints() {
    for seed in 0..5 {
        let (data, mut state) = random_instance(&[4, 3], 9, 3, 40 + seed);
        let cfg = config(3);
        let degenerate = y_step(&mut state, &data, &cfg).unwrap();
        assert!(!degenerate);
        assert!(orth_err(&state.y) <= 1e-10);
        z_step(&mut state, &data, &cfg);
        state.z.iter().for_each(assert_gamma2);
    }
}

/// ‖∇(x₁) − ∇(x₂)‖ ≤ ℓ‖x₁ − x₂‖ between the start and end of each step.
#[test]
fn lipschitz_moduli_bound_the_step() {
    for seed in 0..5 {
        let (data, state) = random_instance(&[4, 6], 10, 2, 60 + seed);
        let cfg = config(2);
        let slack = 1.0 + 1e-10;

        let mut s = state.clone();
        w_step(&mut s, &data, &cfg);
        for v in 0..2 {
            let dg = grad_w(&s, &data, v).sub(&grad_w(&state, &data, v)).frobenius_norm();
            let dx = s.w[v].sub(&state.w[v]).frobenius_norm();
            assert!(dg <= slack * lipschitz_w(&state, &data, v) * dx);
        }

        let mut s = state.clone();
        b_step(&mut s, &data, &cfg);
        for v in 0..2 {
            let dg: f64 = grad_b(&s, &data, v)
                .iter()
                .zip(grad_b(&state, &data, v))
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let dx: f64 = s.b[v].iter().zip(&state.b[v]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(dg <= slack * lipschitz_b(&state, v) * dx);
        }

        let mut s = state.clone();
        y_step(&mut s, &data, &cfg).unwrap();
        let dg = grad_y(&s, &data, &cfg).sub(&grad_y(&state, &data, &cfg)).frobenius_norm();
        let dx = s.y.sub(&state.y).frobenius_norm();
        assert!(dg <= slack * y_curvature(&state, &cfg).frobenius_norm() * dx);

        // Z gradient at fixed Y
        let mut s = state.clone();
        z_step(&mut s, &data, &cfg);
        for v in 0..2 {
            let dg = grad_z(&s, &data, &cfg, v).sub(&grad_z(&state, &data, &cfg, v)).frobenius_norm();
            let dx = s.z[v].sub(&state.z[v]).frobenius_norm();
            assert!(dg <= slack * lipschitz_z(&state, &data, v) * dx);
        }
    }
}

#[test]
fn palm_descends_and_keeps_constraints() {
    for seed in 0..10 {
        let cfg_data = SyntheticMvcConfig {
            n: 30,
            dims: vec![5, 4, 6],
            ..SyntheticMvcConfig::default()
        };
        let inst = generate_multiview(&cfg_data, seed).unwrap();
        let mut state = MvcState::init(&inst.data, 3, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in state.p.iter_mut() {
            p.iter_mut().for_each(|x| *x = rng.random_range(0.0..1.0));
        }
        let cfg = MvcConfig::new(3);
        let mut h = objective_h(&state, &inst.data, &cfg);
        for _ in 0..40 {
            w_step(&mut state, &inst.data, &cfg);
            b_step(&mut state, &inst.data, &cfg);
            y_step(&mut state, &inst.data, &cfg).unwrap();
            assert!(orth_err(&state.y) <= 1e-8);
            z_step(&mut state, &inst.data, &cfg);
            state.z.iter().for_each(assert_gamma2);
            let next = objective_h(&state, &inst.data, &cfg);
            assert!(next <= h + 1e-8, "seed {seed}: {h} -> {next}");
            h = next;
        }

        let report = palm_solve_p2(&mut state, &inst.data, &cfg).unwrap();
        assert_eq!(report.h.len(), report.sweeps + 1);
        for w in report.h.windows(2) {
            assert!(w[1] <= w[0] + 1e-8);
        }
    }
}

#[test]
fn zero_data_keeps_z_zero() {
    let data = MultiViewDataset::new(vec![Matrix::zeros(3, 12), Matrix::zeros(2, 12)]).unwrap();
    let mut state = MvcState::init(&data, 2, 1).unwrap();
    let mut cfg = MvcConfig::new(2);
    cfg.palm_iters = 2;
    let report = palm_solve_p2(&mut state, &data, &cfg).unwrap();
    assert!(report.sweeps <= 2);
    for z in &state.z {
        assert_eq!(z.max_abs(), 0.0);
    }
}

#[test]
fn zero_weights_leave_y_unchanged() {
    let data = MultiViewDataset::new(vec![Matrix::zeros(3, 5)]).unwrap();
    let mut state = MvcState::init(&data, 2, 1).unwrap();
    state.p[0] = vec![0.0; 5];
    let before = state.y.clone();
    assert!(!y_step(&mut state, &data, &MvcConfig::new(2)).unwrap());
    assert_eq!(state.y, before);
}

fn two_blobs(n: usize, seed: u64) -> (MultiViewDataset, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let x = Matrix::from_fn(3, n, |_, j| 10.0 * (2.0 * truth[j] as f64 - 1.0) + rng.random_range(-0.5..0.5));
    (MultiViewDataset::new(vec![x]).unwrap(), truth)
}

fn quick_config(k: usize) -> MvcConfig {
    let mut c = MvcConfig::new(k);
    c.pace.max_rounds = 5;
    c.pace.inner_cap = 1;
    c.palm_iters = 40;
    c
}

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    acc(
        &ClusterLabels::from_assignments(pred.to_vec()),
        &ClusterLabels::from_assignments(truth.to_vec()),
    )
    .unwrap()
}

#[test]
fn separated_blobs_recovered() {
    let (data, truth) = two_blobs(40, 3);
    let fit = spl_mvc_fit(&data, &quick_config(2), ImplicitRegularizer::Welsch, 0).unwrap();
    assert_eq!(accuracy(&fit.labels, &truth), 1.0);
    assert!(orth_err(&fit.state.y) <= 1e-8);

    // sample order does not matter
    let perm: Vec<usize> = (0..40).rev().collect();
    let shuffled = data.permuted(&perm).unwrap();
    let truth_p: Vec<usize> = perm.iter().map(|&i| truth[i]).collect();
    let fit_p = spl_mvc_fit(&shuffled, &quick_config(2), ImplicitRegularizer::Welsch, 0).unwrap();
    assert_eq!(accuracy(&fit_p.labels, &truth_p), 1.0);
}

#[test]
fn duplicated_views_match_single_view() {
    let inst = generate_multiview(
        &SyntheticMvcConfig {
            n: 30,
            dims: vec![5],
            ..SyntheticMvcConfig::default()
        },
        4,
    )
    .unwrap();
    let x = inst.data.views()[0].clone();
    let triple = MultiViewDataset::new(vec![x.clone(), x.clone(), x]).unwrap();
    let cfg = quick_config(3);
    let one = spl_mvc_fit(&inst.data, &cfg, ImplicitRegularizer::Cauchy, 9).unwrap();
    let three = spl_mvc_fit(&triple, &cfg, ImplicitRegularizer::Cauchy, 9).unwrap();
    assert_eq!(one.labels, three.labels);
    assert!(one.state.y.sub(&three.state.y).frobenius_norm() < 1e-8);
}

#[test]
fn kmeans_recovers_planted_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let truth: Vec<usize> = (0..60).map(|i| i % 3).collect();
    let centers = [[0.0, 0.0], [20.0, 0.0], [0.0, 20.0]];
    let pts = Matrix::from_fn(2, 60, |r, j| centers[truth[j]][r] + rng.random_range(-1.0..1.0));
    let r = kmeans(&pts, 3, 5, 10).unwrap();
    assert_eq!(accuracy(&r.labels, &truth), 1.0);
    assert_eq!(kmeans(&pts, 3, 5, 10).unwrap(), r);
}

#[test]
fn config_and_dataset_validation() {
    assert!(MultiViewDataset::new(vec![]).is_err());
    assert!(MultiViewDataset::new(vec![Matrix::zeros(2, 3), Matrix::zeros(2, 4)]).is_err());
    let data = MultiViewDataset::new(vec![Matrix::zeros(2, 3)]).unwrap();
    assert!(MvcConfig::new(4).validate(&data).is_err());
    assert!(MvcConfig::new(1).validate(&data).is_err());
    let mut c = MvcConfig::new(2);
    c.gamma = 1.0;
    assert!(c.validate(&data).is_err());
    assert!(data.permuted(&[0, 0, 1]).is_err());
    let y = project_orthonormal_rows(&Matrix::identity(2)).unwrap().matrix;
    assert!(orth_err(&y) < 1e-15);
}
