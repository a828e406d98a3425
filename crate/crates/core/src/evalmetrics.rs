//! Clustering agreement measures: ACC, NMI, adjusted Rand, pairwise F-score,
//! purity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Cluster assignments in `[0, k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLabels {
    assignments: Vec<usize>,
    k: usize,
}

impl ClusterLabels {
    pub fn new(assignments: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(&bad) = assignments.iter().find(|&&a| a >= k) {
            return Err(Error::invalid(format!("label {bad} outside [0, {k})")));
        }
        Ok(Self { assignments, k })
    }

    /// Cluster count taken as one more than the largest label.
    pub fn from_assignments(assignments: Vec<usize>) -> Self {
        let k = assignments.iter().max().map_or(0, |m| m + 1);
        Self { assignments, k }
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

/// Permutation `π` minimizing `Σᵢ cost[i][π(i)]`; among optimal permutations
/// the lexicographically smallest is returned.
pub fn hungarian(cost: &Matrix) -> Result<Vec<usize>> {
    if !cost.is_square() {
        return Err(Error::dim(format!("assignment needs a square matrix, got {:?}", cost.shape())));
    }
    if !cost.is_finite() {
        return Err(Error::invalid("assignment cost must be finite"));
    }
    let n = cost.rows();
    let c: Vec<Vec<f64>> = (0..n).map(|i| cost.row(i).to_vec()).collect();
    let rows: Vec<usize> = (0..n).collect();
    let cols: Vec<usize> = (0..n).collect();
    let best = assign(&c, &rows, &cols).0;
    let scale = c.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let tol = 1e-12 * scale * n as f64;

    // Fix rows in order, each to the smallest column that keeps the optimum.
    let mut perm = vec![0; n];
    let mut free_cols = cols;
    let mut fixed = 0.0;
    for i in 0..n {
        let rest: Vec<usize> = (i + 1..n).collect();
        let choice = free_cols
            .iter()
            .position(|&j| {
                let others: Vec<usize> = free_cols.iter().copied().filter(|&c2| c2 != j).collect();
                fixed + c[i][j] + assign(&c, &rest, &others).0 <= best + tol
            })
            .unwrap_or(0);
        let j = free_cols.remove(choice);
        fixed += c[i][j];
        perm[i] = j;
    }
    Ok(perm)
}

/// Minimum-cost assignment of `rows` onto `cols` (equal lengths) with the
/// shortest-augmenting-path Hungarian method. Returns the cost and, for each
/// listed row, the index into `cols`.
fn assign(c: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> (f64, Vec<usize>) {
    let n = rows.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let at = |i: usize, j: usize| c[rows[i - 1]][cols[j - 1]];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    // owner[j] = row matched to column j (1-based, 0 = none)
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = at(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut of_row = vec![0; n];
    for j in 1..=n {
        of_row[owner[j] - 1] = j - 1;
    }
    let total = (0..n).map(|i| c[rows[i]][cols[of_row[i]]]).sum();
    (total, of_row)
}

struct Contingency {
    table: Vec<Vec<usize>>,
    pred_sizes: Vec<usize>,
    truth_sizes: Vec<usize>,
    n: usize,
}

fn contingency(pred: &ClusterLabels, truth: &ClusterLabels) -> Result<Contingency> {
    if pred.len() != truth.len() {
        return Err(Error::dim(format!(
            "{} predicted labels for {} true labels",
            pred.len(),
            truth.len()
        )));
    }
    let mut table = vec![vec![0usize; truth.k]; pred.k];
    for (&p, &t) in pred.assignments.iter().zip(&truth.assignments) {
        table[p][t] += 1;
    }
    let pred_sizes = table.iter().map(|r| r.iter().sum()).collect();
    let truth_sizes = (0..truth.k).map(|t| table.iter().map(|r| r[t]).sum()).collect();
    Ok(Contingency {
        table,
        pred_sizes,
        truth_sizes,
        n: pred.len(),
    })
}

fn pairs(x: usize) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

fn entropy(sizes: &[usize], n: usize) -> f64 {
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

/// Whether the two partitions coincide up to relabeling.
fn same_partition(c: &Contingency) -> bool {
    c.table.iter().all(|r| r.iter().filter(|&&x| x > 0).count() <= 1)
        && (0..c.truth_sizes.len()).all(|t| c.table.iter().filter(|r| r[t] > 0).count() <= 1)
}

/// Fraction of samples matched under the best one-to-one label mapping.
pub fn acc(pred: &ClusterLabels, truth: &ClusterLabels) -> Result<f64> {
    let c = contingency(pred, truth)?;
    if c.n == 0 {
        return Ok(1.0);
    }
    let size = pred.k.max(truth.k);
    let cost = Matrix::from_fn(size, size, |i, j| {
        if i < pred.k && j < truth.k {
            -(c.table[i][j] as f64)
        } else {
            0.0
        }
    });
    let perm = hungarian(&cost)?;
    let matched: f64 = perm.iter().enumerate().map(|(i, &j)| -cost[(i, j)]).sum();
    Ok(matched / c.n as f64)
}

/// Mutual information over the geometric mean of the two entropies.
pub fn nmi(pred: &ClusterLabels, truth: &ClusterLabels) -> Result<f64> {
    let c = contingency(pred, truth)?;
    if same_partition(&c) {
        return Ok(1.0);
    }
    let hp = entropy(&c.pred_sizes, c.n);
    let ht = entropy(&c.truth_sizes, c.n);
    if hp == 0.0 || ht == 0.0 {
        return Ok(0.0);
    }
    let n = c.n as f64;
    let mut mi = 0.0;
    for (i, row) in c.table.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (c.pred_sizes[i] as f64 * c.truth_sizes[j] as f64)).ln();
            }
        }
    }
    Ok((mi / (hp * ht).sqrt()).clamp(0.0, 1.0))
}

/// Rand index adjusted for chance under the permutation model.
pub fn adjusted_rand(pred: &ClusterLabels, truth: &ClusterLabels) -> Result<f64> {
    let c = contingency(pred, truth)?;
    let index: f64 = c.table.iter().flatten().map(|&x| pairs(x)).sum();
    let a: f64 = c.pred_sizes.iter().map(|&x| pairs(x)).sum();
    let b: f64 = c.truth_sizes.iter().map(|&x| pairs(x)).sum();
    let total = pairs(c.n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = a * b / total;
    let max_index = 0.5 * (a + b);
    if max_index == expected {
        return Ok(if same_partition(&c) { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max_index - expected))
}

/// Pairwise F-score: harmonic mean of the precision and recall of
/// same-cluster pairs.
pub fn fscore(pred: &ClusterLabels, truth: &ClusterLabels) -> Result<f64> {
    let c = contingency(pred, truth)?;
    let together: f64 = c.table.iter().flatten().map(|&x| pairs(x)).sum();
    let pred_pairs: f64 = c.pred_sizes.iter().map(|&x| pairs(x)).sum();
    let truth_pairs: f64 = c.truth_sizes.iter().map(|&x| pairs(x)).sum();
    if pred_pairs == 0.0 && truth_pairs == 0.0 {
        return Ok(1.0);
    }
    if pred_pairs == 0.0 || truth_pairs == 0.0 || together == 0.0 {
        return Ok(0.0);
    }
    let precision = together / pred_pairs;
    let recall = together / truth_pairs;
    Ok(2.0 * precision * recall / (precision + recall))
}

pub fn purity(pred: &ClusterLabels, truth: &ClusterLabels) -> Result<f64> {
    let c = contingency(pred, truth)?;
    if c.n == 0 {
        return Ok(1.0);
    }
    let hit: usize = c.table.iter().map(|r| r.iter().copied().max().unwrap_or(0)).sum();
    Ok(hit as f64 / c.n as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub acc: f64,
    pub nmi: f64,
    pub ar: f64,
    pub fscore: f64,
    pub purity: f64,
}

impl MetricsReport {
    pub fn evaluate(pred: &ClusterLabels, truth: &ClusterLabels) -> Result<Self> {
        Ok(Self {
            acc: acc(pred, truth)?,
            nmi: nmi(pred, truth)?,
            ar: adjusted_rand(pred, truth)?,
            fscore: fscore(pred, truth)?,
            purity: purity(pred, truth)?,
        })
    }
}
