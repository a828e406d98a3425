//! Multi-view self-paced subspace clustering.
//!
//! Each view contributes a self-representation `X ≈ XZ` and a linear map onto
//! a shared orthonormal embedding `Y`; samples are weighted per view by the
//! pace regularizer. Labels come from k-means on the columns of `Y`.

mod kmeans;
pub mod palm;
mod synthetic;

pub use kmeans::{kmeans, lloyd, KmeansResult};
pub use palm::{objective_h, p1_update_weights, palm_solve_p2, PalmReport};
pub use synthetic::{generate_multiview, SyntheticMvcConfig, SyntheticMvcInstance};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{project_orthonormal_rows, Matrix};
use crate::regularizers::Regularizer;
use crate::spl::{spl_ir_fit, PaceSchedule, SplTrace, WeightedModel};

/// Views `X^v` of shape d_v × n; columns are samples.
#[derive(Clone, Debug)]
pub struct MultiViewDataset {
    views: Vec<Matrix>,
    gram_norms: Vec<f64>,
}

impl MultiViewDataset {
    pub fn new(views: Vec<Matrix>) -> Result<Self> {
        let Some(first) = views.first() else {
            return Err(Error::invalid("dataset needs at least one view"));
        };
        let n = first.cols();
        if n == 0 {
            return Err(Error::invalid("views have no samples"));
        }
        for (v, x) in views.iter().enumerate() {
            if x.cols() != n {
                return Err(Error::dim(format!("view {v} has {} samples, expected {n}", x.cols())));
            }
            if x.rows() == 0 {
                return Err(Error::dim(format!("view {v} has no features")));
            }
            if let Some(pos) = x.as_slice().iter().position(|e| !e.is_finite()) {
                return Err(Error::NonFinite { row: pos / n, col: pos % n });
            }
        }
        // ‖XᵀX‖_F = ‖XXᵀ‖_F, and the latter is only d×d
        let gram_norms = views.iter().map(|x| x.matmul_t(x).frobenius_norm()).collect();
        Ok(Self { views, gram_norms })
    }

    pub fn views(&self) -> &[Matrix] {
        &self.views
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn n_samples(&self) -> usize {
        self.views[0].cols()
    }

    pub(crate) fn gram_norm(&self, v: usize) -> f64 {
        self.gram_norms[v]
    }

    /// All views stacked into one (Σd_v) × n matrix.
    pub fn concatenated(&self) -> Matrix {
        let refs: Vec<&Matrix> = self.views.iter().collect();
        Matrix::vstack(&refs).expect("views share n")
    }

    /// Same views with samples reordered: new column j is old column `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_samples();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::invalid("not a permutation of the samples"));
        }
        Self::new(self.views.iter().map(|x| x.select_cols(perm)).collect())
    }
}

/// How the affinity term enters the Z gradient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZGradient {
    /// `(ρ/2)C`, the exact gradient of H.
    #[default]
    Half,
    /// `ρC`.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MvcConfig {
    pub beta: f64,
    pub rho: f64,
    /// Step-size safety factor, > 1.
    pub gamma: f64,
    pub k: usize,
    pub pace: PaceSchedule,
    pub palm_iters: usize,
    pub palm_tol: f64,
    pub z_gradient: ZGradient,
    pub kmeans_restarts: usize,
}

impl MvcConfig {
    pub fn new(k: usize) -> Self {
        Self {
            beta: 1.0,
            rho: 0.1,
            gamma: 1.1,
            k,
            pace: PaceSchedule::default(),
            palm_iters: 200,
            palm_tol: 1e-6,
            z_gradient: ZGradient::Half,
            kmeans_restarts: 10,
        }
    }

    pub fn validate(&self, data: &MultiViewDataset) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {x}")))
            }
        };
        positive("beta", self.beta)?;
        positive("rho", self.rho)?;
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return Err(Error::invalid(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        if self.k < 2 {
            return Err(Error::invalid(format!("need at least 2 clusters, got {}", self.k)));
        }
        if self.k > data.n_samples() {
            return Err(Error::invalid(format!(
                "{} clusters for {} samples",
                self.k,
                data.n_samples()
            )));
        }
        if self.palm_iters == 0 {
            return Err(Error::invalid("palm_iters must be at least 1"));
        }
        if !(self.palm_tol >= 0.0) {
            return Err(Error::invalid("palm_tol must be nonnegative"));
        }
        self.pace.validate()
    }
}

/// All block variables of the clustering model.
#[derive(Clone, Debug, PartialEq)]
pub struct MvcState {
    /// n × n self-representation per view.
    pub z: Vec<Matrix>,
    /// k × d_v map per view.
    pub w: Vec<Matrix>,
    pub b: Vec<Vec<f64>>,
    /// Per-view sample weights; `P^v = diag(√p^v)`.
    pub p: Vec<Vec<f64>>,
    /// Shared k × n embedding with orthonormal rows.
    pub y: Matrix,
}

impl MvcState {
    /// Z, W, b zero; unit weights; Y the orthonormal projection of a seeded
    /// Gaussian matrix.
    pub fn init(data: &MultiViewDataset, k: usize, seed: u64) -> Result<Self> {
        let n = data.n_samples();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Matrix::from_fn(k, n, |_, _| Distribution::<f64>::sample(&StandardNormal, &mut rng));
        let y = project_orthonormal_rows(&g)?.matrix;
        let m = data.n_views();
        Ok(Self {
            z: vec![Matrix::zeros(n, n); m],
            w: data.views().iter().map(|x| Matrix::zeros(k, x.rows())).collect(),
            b: vec![vec![0.0; k]; m],
            p: vec![vec![1.0; n]; m],
            y,
        })
    }

    fn set_weights(&mut self, flat: &[f64]) {
        let n = self.y.cols();
        for (v, p) in self.p.iter_mut().enumerate() {
            p.copy_from_slice(&flat[v * n..(v + 1) * n]);
        }
    }
}

/// The clustering model seen by the pace loop: one sample per (view, column)
/// pair, view-major, with loss `‖X_i − XZ_i‖² + β‖WX_i + b − Y_i‖²`.
pub struct MvcModel<'a> {
    data: &'a MultiViewDataset,
    config: MvcConfig,
    /// One report per P2 solve, bootstrap first.
    pub palm_reports: Vec<PalmReport>,
}

impl<'a> MvcModel<'a> {
    pub fn new(data: &'a MultiViewDataset, config: MvcConfig) -> Result<Self> {
        config.validate(data)?;
        Ok(Self {
            data,
            config,
            palm_reports: Vec::new(),
        })
    }
}

impl WeightedModel for MvcModel<'_> {
    type Params = MvcState;

    fn n_samples(&self) -> usize {
        self.data.n_views() * self.data.n_samples()
    }

    fn initial_params(&mut self, seed: u64) -> Result<MvcState> {
        MvcState::init(self.data, self.config.k, seed)
    }

    fn fit_weighted(&mut self, weights: &[f64], start: &MvcState) -> Result<MvcState> {
        if weights.len() != self.n_samples() {
            return Err(Error::dim(format!(
                "{} weights for {} samples",
                weights.len(),
                self.n_samples()
            )));
        }
        let mut state = start.clone();
        state.set_weights(weights);
        let report = palm_solve_p2(&mut state, self.data, &self.config)?;
        self.palm_reports.push(report);
        Ok(state)
    }

    fn per_sample_losses(&self, state: &MvcState) -> Result<Vec<f64>> {
        Ok(palm::squared_losses(state, self.data, self.config.beta).concat())
    }

    fn regularization(&self, state: &MvcState) -> f64 {
        self.config.rho * palm::affinity_penalty(state)
    }
}

#[derive(Clone, Debug)]
pub struct MvcFit {
    pub state: MvcState,
    pub labels: Vec<usize>,
    pub trace: SplTrace,
    pub palm_reports: Vec<PalmReport>,
    pub lambda: f64,
}

/// Self-paced fit followed by k-means on the columns of Y.
pub fn spl_mvc_fit(
    data: &MultiViewDataset,
    config: &MvcConfig,
    reg: impl Into<Regularizer>,
    seed: u64,
) -> Result<MvcFit> {
    let mut model = MvcModel::new(data, *config)?;
    let fit = spl_ir_fit(&mut model, reg, &config.pace, seed)?;
    let labels = kmeans(&fit.params.y, config.k, seed, config.kmeans_restarts)?.labels;
    Ok(MvcFit {
        state: fit.params,
        labels,
        trace: fit.trace,
        palm_reports: model.palm_reports,
        lambda: fit.lambda,
    })
}

/// Baseline: k-means on the stacked raw views.
pub fn concat_kmeans(data: &MultiViewDataset, k: usize, seed: u64, restarts: usize) -> Result<Vec<usize>> {
    Ok(kmeans(&data.concatenated(), k, seed, restarts)?.labels)
}
