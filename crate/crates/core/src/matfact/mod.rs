//! Robust low-rank matrix factorization: synthetic corrupted data, a weighted
//! L1 factorization solver, and reconstruction error metrics.

mod solver;
mod synthetic;

pub use solver::{mf_objective, weighted_l1_mf, MfFit, MfOptions};
pub use synthetic::{
    generate_synthetic, generate_synthetic_with, EntryNoise, SyntheticMfConfig, SyntheticMfInstance,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::spl::WeightedModel;

/// A partially observed matrix to be factorized at a given rank.
#[derive(Clone, Debug)]
pub struct MfProblem {
    observed: Matrix,
    mask: Vec<bool>,
    rank: usize,
    l2_reg: f64,
    /// Observed (row, col) pairs in row-major order; the sample index.
    entries: Vec<(usize, usize)>,
    by_row: Vec<Vec<usize>>,
    by_col: Vec<Vec<usize>>,
}

impl MfProblem {
    pub fn new(observed: Matrix, mask: Vec<bool>, rank: usize, l2_reg: f64) -> Result<Self> {
        let (m, n) = observed.shape();
        if mask.len() != m * n {
            return Err(Error::dim(format!("mask has {} entries for a {m}x{n} matrix", mask.len())));
        }
        if rank == 0 || rank > m.min(n) {
            return Err(Error::invalid(format!("rank {rank} outside 1..={}", m.min(n))));
        }
        if !(l2_reg.is_finite() && l2_reg >= 0.0) {
            return Err(Error::invalid(format!("l2_reg must be nonnegative, got {l2_reg}")));
        }
        let mut entries = Vec::new();
        let mut by_row = vec![Vec::new(); m];
        let mut by_col = vec![Vec::new(); n];
        for i in 0..m {
            for j in 0..n {
                if mask[i * n + j] {
                    by_row[i].push(entries.len());
                    by_col[j].push(entries.len());
                    entries.push((i, j));
                }
            }
        }
        if entries.is_empty() {
            return Err(Error::invalid("no observed entries"));
        }
        Ok(Self {
            observed,
            mask,
            rank,
            l2_reg,
            entries,
            by_row,
            by_col,
        })
    }

    pub fn from_instance(inst: &SyntheticMfInstance, rank: usize, l2_reg: f64) -> Result<Self> {
        Self::new(inst.observed.clone(), inst.mask.clone(), rank, l2_reg)
    }

    pub fn observed(&self) -> &Matrix {
        &self.observed
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn l2_reg(&self) -> f64 {
        self.l2_reg
    }

    pub fn shape(&self) -> (usize, usize) {
        self.observed.shape()
    }

    pub fn observed_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    /// Fewer observations than free parameters; the factorization is then
    /// not identifiable.
    pub fn underdetermined(&self) -> bool {
        let (m, n) = self.shape();
        self.entries.len() < self.rank * (m + n)
    }

    pub(crate) fn row_entries(&self, i: usize) -> &[usize] {
        &self.by_row[i]
    }

    pub(crate) fn col_entries(&self, j: usize) -> &[usize] {
        &self.by_col[j]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MfFactors {
    pub u: Matrix,
    pub v: Matrix,
}

impl MfFactors {
    pub fn new(u: Matrix, v: Matrix) -> Result<Self> {
        if u.cols() != v.cols() {
            return Err(Error::dim(format!(
                "factor ranks differ: {} vs {}",
                u.cols(),
                v.cols()
            )));
        }
        Ok(Self { u, v })
    }

    /// Entrywise `scale · N(0, 1)` factors for an m×n problem at rank r.
    pub fn random(m: usize, n: usize, r: usize, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |_, _| -> f64 { scale * Distribution::<f64>::sample(&StandardNormal, &mut rng) };
        let u = Matrix::from_fn(m, r, &mut draw);
        let v = Matrix::from_fn(n, r, &mut draw);
        Self { u, v }
    }

    pub fn reconstruct(&self) -> Matrix {
        self.u.matmul_t(&self.v)
    }

    pub fn squared_norm(&self) -> f64 {
        self.u.frobenius_norm_sq() + self.v.frobenius_norm_sq()
    }
}

/// `|Y_ij − (UVᵀ)_ij|` over observed entries in row-major order.
pub fn mf_losses(prob: &MfProblem, f: &MfFactors) -> Vec<f64> {
    let y = prob.observed();
    prob.entries
        .iter()
        .map(|&(i, j)| (y[(i, j)] - crate::numerics::dot(f.u.row(i), f.v.row(j))).abs())
        .collect()
}

fn residual_matrix(y0: &Matrix, f: &MfFactors) -> Result<Matrix> {
    let (m, n) = y0.shape();
    if f.u.rows() != m || f.v.rows() != n {
        return Err(Error::dim(format!(
            "factors give {}x{}, ground truth is {m}x{n}",
            f.u.rows(),
            f.v.rows()
        )));
    }
    Ok(y0.sub(&f.reconstruct()))
}

/// `‖Y₀ − UVᵀ‖_F / √(mn)` over all entries, observed or not.
pub fn rmse(y0: &Matrix, f: &MfFactors) -> Result<f64> {
    let r = residual_matrix(y0, f)?;
    Ok((r.frobenius_norm_sq() / r.as_slice().len() as f64).sqrt())
}

/// Mean absolute entrywise error over all entries.
pub fn mae(y0: &Matrix, f: &MfFactors) -> Result<f64> {
    let r = residual_matrix(y0, f)?;
    Ok(r.as_slice().iter().map(|x| x.abs()).sum::<f64>() / r.as_slice().len() as f64)
}

/// The weighted L1 factorization as a pace-loop model; samples are the
/// observed entries.
#[derive(Clone, Debug)]
pub struct MfModel {
    pub problem: MfProblem,
    /// Solver budget of each weighted fit inside the pace loop.
    pub options: MfOptions,
    /// When set, the initial factors are the unweighted fit from a random
    /// start under these options, so the pace loop starts from the baseline.
    pub warm_up: Option<MfOptions>,
    /// Standard deviation of the random initial factors.
    pub init_scale: f64,
    warm_cache: Option<(u64, MfOptions, MfFactors)>,
}

impl MfModel {
    pub fn new(problem: MfProblem) -> Self {
        Self {
            problem,
            options: MfOptions::default(),
            warm_up: None,
            init_scale: 1.0,
            warm_cache: None,
        }
    }

    /// The unweighted solve from the seeded random start.
    pub fn baseline(&self, seed: u64, opts: &MfOptions) -> Result<MfFactors> {
        let (m, n) = self.problem.shape();
        let start = MfFactors::random(m, n, self.problem.rank(), self.init_scale, seed);
        let ones = vec![1.0; self.problem.observed_count()];
        Ok(weighted_l1_mf(&self.problem, &ones, &start, opts)?.factors)
    }
}

impl WeightedModel for MfModel {
    type Params = MfFactors;

    fn n_samples(&self) -> usize {
        self.problem.observed_count()
    }

    fn initial_params(&mut self, seed: u64) -> Result<MfFactors> {
        match self.warm_up {
            Some(opts) => {
                if let Some((s, o, f)) = &self.warm_cache {
                    if *s == seed && *o == opts {
                        return Ok(f.clone());
                    }
                }
                let f = self.baseline(seed, &opts)?;
                self.warm_cache = Some((seed, opts, f.clone()));
                Ok(f)
            }
            None => {
                let (m, n) = self.problem.shape();
                Ok(MfFactors::random(m, n, self.problem.rank(), self.init_scale, seed))
            }
        }
    }

    fn fit_weighted(&mut self, weights: &[f64], start: &MfFactors) -> Result<MfFactors> {
        Ok(weighted_l1_mf(&self.problem, weights, start, &self.options)?.factors)
    }

    fn per_sample_losses(&self, params: &MfFactors) -> Result<Vec<f64>> {
        Ok(mf_losses(&self.problem, params))
    }

    fn regularization(&self, params: &MfFactors) -> f64 {
        self.problem.l2_reg() * params.squared_norm()
    }
}
