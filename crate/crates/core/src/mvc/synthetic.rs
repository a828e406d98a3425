use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::MultiViewDataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Gaussian blobs observed through several views, with a fraction of
/// (view, sample) pairs replaced by wide noise.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticMvcConfig {
    pub n: usize,
    pub k: usize,
    pub dims: Vec<usize>,
    /// Standard deviation of the cluster centers per coordinate.
    pub separation: f64,
    pub noise_std: f64,
    /// Fraction of samples corrupted in each view, chosen independently per view.
    pub corrupt_fraction: f64,
    pub corrupt_std: f64,
}

impl Default for SyntheticMvcConfig {
    fn default() -> Self {
        Self {
            n: 150,
            k: 3,
            dims: vec![10, 12, 8],
            separation: 1.5,
            noise_std: 1.0,
            corrupt_fraction: 0.1,
            corrupt_std: 6.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticMvcInstance {
    pub data: MultiViewDataset,
    pub truth: Vec<usize>,
    /// Corrupted sample indices per view, sorted.
    pub corrupted: Vec<Vec<usize>>,
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    Distribution::<f64>::sample(&StandardNormal, rng)
}

pub fn generate_multiview(cfg: &SyntheticMvcConfig, seed: u64) -> Result<SyntheticMvcInstance> {
    if cfg.k == 0 || cfg.n < cfg.k || cfg.dims.is_empty() || cfg.dims.contains(&0) {
        return Err(Error::invalid("synthetic multi-view config needs n >= k >= 1 and nonempty views"));
    }
    if !(0.0..=1.0).contains(&cfg.corrupt_fraction) {
        return Err(Error::invalid("corrupt_fraction must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut truth: Vec<usize> = (0..cfg.n).map(|i| i % cfg.k).collect();
    truth.shuffle(&mut rng);

    let n_bad = (cfg.corrupt_fraction * cfg.n as f64).round() as usize;
    let mut views = Vec::with_capacity(cfg.dims.len());
    let mut corrupted = Vec::with_capacity(cfg.dims.len());
    for &d in &cfg.dims {
        let centers: Vec<Vec<f64>> = (0..cfg.k)
            .map(|_| (0..d).map(|_| cfg.separation * gauss(&mut rng)).collect())
            .collect();
        let mut x = Matrix::from_fn(d, cfg.n, |_, _| 0.0);
        for (j, &c) in truth.iter().enumerate() {
            for i in 0..d {
                x[(i, j)] = centers[c][i] + cfg.noise_std * gauss(&mut rng);
            }
        }
        let mut idx: Vec<usize> = (0..cfg.n).collect();
        idx.shuffle(&mut rng);
        let mut bad = idx[..n_bad].to_vec();
        bad.sort_unstable();
        for &j in &bad {
            let shift = rng.random_range(-1.0..1.0) * cfg.corrupt_std;
            for i in 0..d {
                x[(i, j)] = shift + cfg.corrupt_std * gauss(&mut rng);
            }
        }
        views.push(x);
        corrupted.push(bad);
    }
    Ok(SyntheticMvcInstance {
        data: MultiViewDataset::new(views)?,
        truth,
        corrupted,
    })
}
