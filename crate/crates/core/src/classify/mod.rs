//! Per-sample-weighted logistic regression, label-noise injection, and
//! stratified k-fold cross-validation.

mod cv;
mod logreg;

pub use cv::{flip_labels, kfold_cv, stratified_folds, CvOptions, CvReport};
pub use logreg::{
    logreg_losses, logreg_objective, softplus, weighted_logreg_fit, LogRegModel, LogRegOptions,
    LogRegParams,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Features (one row per sample) with labels in {−1, +1}.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    labels: Vec<f64>,
}

impl LabeledDataset {
    pub fn new(features: Matrix, labels: Vec<f64>) -> Result<Self> {
        let ds = Self::unchecked(features, labels)?;
        if ds.positives() == 0 || ds.positives() == ds.len() {
            return Err(Error::Degenerate("dataset contains a single class".into()));
        }
        Ok(ds)
    }

    /// Like [`new`](Self::new) but allows a single class; used for
    /// held-out folds.
    pub(crate) fn unchecked(features: Matrix, labels: Vec<f64>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::dim(format!(
                "{} feature rows for {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if let Some(i) = labels.iter().position(|y| *y != 1.0 && *y != -1.0) {
            return Err(Error::invalid(format!("label at row {i} is {}, expected -1 or +1", labels[i])));
        }
        Ok(Self { features, labels })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|y| **y > 0.0).count()
    }

    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        Self::new(self.features.select_rows(idx), idx.iter().map(|&i| self.labels[i]).collect())
    }

    pub(crate) fn subset_unchecked(&self, idx: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub(crate) fn with_labels(&self, labels: Vec<f64>) -> Self {
        Self {
            features: self.features.clone(),
            labels,
        }
    }
}

/// Per-column affine map to zero mean and unit variance, fitted on one set
/// and applied to another. Constant columns are only centered.
#[derive(Clone, Debug)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows() as f64;
        let mut mean = vec![0.0; x.cols()];
        let mut scale = vec![1.0; x.cols()];
        for j in 0..x.cols() {
            let col = x.col(j);
            let m = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            mean[j] = m;
            if var > 0.0 {
                scale[j] = 1.0 / var.sqrt();
            }
        }
        Self { mean, scale }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        Matrix::from_fn(x.rows(), x.cols(), |i, j| (x[(i, j)] - self.mean[j]) * self.scale[j])
    }
}

/// Two isotropic unit-variance Gaussian classes of equal size whose means
/// sit at ±(separation/2)·u for the unit diagonal direction u.
pub fn two_gaussians(n: usize, d: usize, separation: f64, seed: u64) -> Result<LabeledDataset> {
    if n < 2 || d == 0 {
        return Err(Error::invalid("two_gaussians needs n >= 2 and d >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = 0.5 * separation / (d as f64).sqrt();
    let labels: Vec<f64> = (0..n).map(|i| if i < n / 2 { 1.0 } else { -1.0 }).collect();
    let features = Matrix::from_fn(n, d, |i, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        z + labels[i] * offset
    });
    LabeledDataset::new(features, labels)
}
