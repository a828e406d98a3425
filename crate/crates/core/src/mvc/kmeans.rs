use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

const MAX_LLOYD: usize = 300;

#[derive(Clone, Debug, PartialEq)]
pub struct KmeansResult {
    pub labels: Vec<usize>,
    /// Within-cluster sum of squares of the returned partition.
    pub wcss: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means over the columns of `points`: k-means++ seeding, Lloyd
/// iterations, best of `restarts` by within-cluster sum of squares.
pub fn kmeans(points: &Matrix, clusters: usize, seed: u64, restarts: usize) -> Result<KmeansResult> {
    let n = points.cols();
    if clusters == 0 || clusters > n {
        return Err(Error::invalid(format!("{clusters} clusters for {n} points")));
    }
    let pts: Vec<Vec<f64>> = (0..n).map(|j| points.col(j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KmeansResult> = None;
    for _ in 0..restarts.max(1) {
        let centers = plus_plus(&pts, clusters, &mut rng);
        let (labels, history) = lloyd(&pts, centers, MAX_LLOYD);
        let wcss = *history.last().expect("at least one assignment");
        if best.as_ref().is_none_or(|b| wcss < b.wcss) {
            best = Some(KmeansResult { labels, wcss });
        }
    }
    Ok(best.expect("one restart"))
}

fn plus_plus(pts: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = pts.len();
    let mut centers = vec![pts[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = pts.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if r < *d {
                    idx = i;
                    break;
                }
                r -= d;
            }
            idx
        } else {
            // all remaining points coincide with a center
            rng.random_range(0..n)
        };
        centers.push(pts[pick].clone());
        for (d, p) in d2.iter_mut().zip(pts) {
            *d = d.min(sq_dist(p, &centers[centers.len() - 1]));
        }
    }
    centers
}

/// Lloyd iterations from the given centers. Returns the final labels and the
/// within-cluster sum of squares after every assignment step.
pub fn lloyd(pts: &[Vec<f64>], mut centers: Vec<Vec<f64>>, max_iter: usize) -> (Vec<usize>, Vec<f64>) {
    let k = centers.len();
    let dim = pts.first().map_or(0, Vec::len);
    let mut labels = vec![usize::MAX; pts.len()];
    let mut history = Vec::new();
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for (i, p) in pts.iter().enumerate() {
            let (c, _) = centers
                .iter()
                .enumerate()
                .map(|(c, m)| (c, sq_dist(p, m)))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        repair_empty(pts, &mut labels, &centers, k);
        history.push(wcss_of(pts, &labels, &centers));
        if !changed && history.len() > 1 {
            break;
        }
        // update step
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in pts.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        history.push(wcss_of(pts, &labels, &centers));
    }
    (labels, history)
}

fn wcss_of(pts: &[Vec<f64>], labels: &[usize], centers: &[Vec<f64>]) -> f64 {
    pts.iter().zip(labels).map(|(p, &l)| sq_dist(p, &centers[l])).sum()
}

/// Moves the point farthest from its center in the largest cluster into each
/// empty cluster.
fn repair_empty(pts: &[Vec<f64>], labels: &mut [usize], centers: &[Vec<f64>], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let largest = (0..k).max_by_key(|&c| (counts[c], std::cmp::Reverse(c))).expect("k >= 1");
        if counts[largest] < 2 {
            return;
        }
        let far = (0..pts.len())
            .filter(|&i| labels[i] == largest)
            .max_by(|&a, &b| {
                sq_dist(&pts[a], &centers[largest])
                    .total_cmp(&sq_dist(&pts[b], &centers[largest]))
                    .then(b.cmp(&a))
            })
            .expect("nonempty cluster");
        labels[far] = empty;
    }
}
