use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::numerics::Matrix;

/// How an entry of a synthetic instance was corrupted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryNoise {
    Missing,
    Outlier,
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticMfConfig {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    /// Fraction of all entries hidden from the solver.
    pub missing: f64,
    /// Fraction of all entries (drawn from the observed ones) replaced by
    /// additive uniform noise on `[-outlier_scale, outlier_scale]`.
    pub outliers: f64,
    pub outlier_scale: f64,
    pub noise_std: f64,
}

impl Default for SyntheticMfConfig {
    fn default() -> Self {
        Self {
            rows: 100,
            cols: 100,
            rank: 4,
            missing: 0.4,
            outliers: 0.2,
            outlier_scale: 20.0,
            noise_std: 0.1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticMfInstance {
    pub ground_truth: Matrix,
    /// Corrupted data; missing entries hold 0.
    pub observed: Matrix,
    pub mask: Vec<bool>,
    pub noise: Vec<EntryNoise>,
}

impl SyntheticMfInstance {
    pub fn count(&self, kind: EntryNoise) -> usize {
        self.noise.iter().filter(|n| **n == kind).count()
    }
}

/// The 100×100, rank-4 protocol: 40% missing, 20% uniform outliers, the
/// remaining entries perturbed by N(0, 0.1²).
pub fn generate_synthetic(seed: u64) -> SyntheticMfInstance {
    generate_synthetic_with(&SyntheticMfConfig::default(), seed)
}

pub fn generate_synthetic_with(cfg: &SyntheticMfConfig, seed: u64) -> SyntheticMfInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = |_, _| -> f64 { Distribution::<f64>::sample(&StandardNormal, &mut rng) };
    let u = Matrix::from_fn(cfg.rows, cfg.rank, &mut gauss);
    let v = Matrix::from_fn(cfg.cols, cfg.rank, &mut gauss);
    let ground_truth = u.matmul_t(&v);

    let total = cfg.rows * cfg.cols;
    let n_missing = (cfg.missing * total as f64).round() as usize;
    let n_outliers = ((cfg.outliers * total as f64).round() as usize).min(total - n_missing);
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut rng);

    let mut noise = vec![EntryNoise::Gaussian; total];
    for &i in &order[..n_missing] {
        noise[i] = EntryNoise::Missing;
    }
    for &i in &order[n_missing..n_missing + n_outliers] {
        noise[i] = EntryNoise::Outlier;
    }

    let small = Normal::new(0.0, cfg.noise_std).expect("finite std");
    let mut observed = ground_truth.clone();
    let data = observed.as_mut_slice();
    for (i, kind) in noise.iter().enumerate() {
        match kind {
            EntryNoise::Missing => data[i] = 0.0,
            EntryNoise::Outlier => data[i] += rng.random_range(-cfg.outlier_scale..=cfg.outlier_scale),
            EntryNoise::Gaussian => data[i] += small.sample(&mut rng),
        }
    }
    let mask = noise.iter().map(|n| *n != EntryNoise::Missing).collect();
    SyntheticMfInstance {
        ground_truth,
        observed,
        mask,
        noise,
    }
}
