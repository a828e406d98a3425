use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{LabeledDataset, Standardizer};
use crate::error::{Error, Result};

/// Negates exactly `round(fraction·n)` labels chosen uniformly without
/// replacement. Returns the noisy copy and the flipped indices (sorted).
pub fn flip_labels(data: &LabeledDataset, fraction: f64, seed: u64) -> Result<(LabeledDataset, Vec<usize>)> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::invalid(format!("flip fraction must lie in [0, 1), got {fraction}")));
    }
    let n = data.len();
    let count = (fraction * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flipped = index::sample(&mut rng, n, count).into_vec();
    flipped.sort_unstable();
    let mut labels = data.labels().to_vec();
    for &i in &flipped {
        labels[i] = -labels[i];
    }
    Ok((data.with_labels(labels), flipped))
}

/// Fold index per sample: each class is shuffled, then dealt round-robin,
/// the negatives continuing where the positives stopped. Fold sizes differ
/// by at most one and so do per-fold class counts.
pub fn stratified_folds(labels: &[f64], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || k > labels.len() {
        return Err(Error::invalid(format!("k = {k} folds for {} samples", labels.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] > 0.0).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] <= 0.0).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut fold = vec![0; labels.len()];
    for (slot, &i) in pos.iter().chain(&neg).enumerate() {
        fold[i] = slot % k;
    }
    Ok(fold)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CvOptions {
    pub k: usize,
    pub seed: u64,
    /// Fraction of each training split whose labels are flipped.
    pub train_noise: f64,
    /// Standardize features with training-split statistics.
    pub standardize: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            k: 10,
            seed: 0,
            train_noise: 0.0,
            standardize: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvReport {
    pub accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation across folds.
    pub std: f64,
}

impl CvReport {
    pub fn from_accuracies(accuracies: Vec<f64>) -> Self {
        let k = accuracies.len() as f64;
        let mean = accuracies.iter().sum::<f64>() / k;
        let var = if accuracies.len() > 1 {
            accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        Self {
            accuracies,
            mean,
            std: var.sqrt(),
        }
    }
}

/// Seed of the label noise injected into training split `fold`.
pub(crate) fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(fold as u64 + 1)
}

/// Runs `pipeline(train, test, fold)` on every split; it returns ±1
/// predictions for the rows of `test`, which are scored against the clean
/// held-out labels.
pub fn kfold_cv<F>(data: &LabeledDataset, opts: &CvOptions, mut pipeline: F) -> Result<CvReport>
where
    F: FnMut(&LabeledDataset, &LabeledDataset, usize) -> Result<Vec<f64>>,
{
    let folds = stratified_folds(data.labels(), opts.k, opts.seed)?;
    let mut accuracies = Vec::with_capacity(opts.k);
    for f in 0..opts.k {
        let train_idx: Vec<usize> = (0..data.len()).filter(|&i| folds[i] != f).collect();
        let test_idx: Vec<usize> = (0..data.len()).filter(|&i| folds[i] == f).collect();
        let mut train = data
            .subset(&train_idx)
            .map_err(|e| Error::Degenerate(format!("training split {f}: {e}")))?;
        let mut test = data.subset_unchecked(&test_idx);
        if opts.standardize {
            let s = Standardizer::fit(train.features());
            train = LabeledDataset::new(s.apply(train.features()), train.labels().to_vec())?;
            test = LabeledDataset::unchecked(s.apply(test.features()), test.labels().to_vec())?;
        }
        if opts.train_noise > 0.0 {
            train = flip_labels(&train, opts.train_noise, fold_seed(opts.seed, f))?.0;
            if train.positives() == 0 || train.positives() == train.len() {
                return Err(Error::Degenerate(format!("training split {f} lost a class to label noise")));
            }
        }
        let pred = pipeline(&train, &test, f)?;
        if pred.len() != test.len() {
            return Err(Error::dim(format!(
                "pipeline returned {} predictions for {} held-out rows",
                pred.len(),
                test.len()
            )));
        }
        let hits = pred.iter().zip(test.labels()).filter(|(p, y)| p == y).count();
        accuracies.push(hits as f64 / test.len() as f64);
    }
    Ok(CvReport::from_accuracies(accuracies))
}
