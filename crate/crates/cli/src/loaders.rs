//! User-supplied datasets.
//!
//! A multi-view manifest is a TOML file:
//!
//! ```text
//! views = ["view1.csv", "view2.csv"]   # each d_v × n, columns are samples
//! labels = "truth.txt"                 # optional, one integer per line
//! ```
//!
//! Labeled classification data is a CSV with the label (±1 or 0/1) in the
//! first column and features after it, one sample per row.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use splir_core::classify::LabeledDataset;
use splir_core::mvc::MultiViewDataset;
use splir_core::numerics::{read_matrix_csv, write_matrix_csv, Matrix};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    views: Vec<PathBuf>,
    labels: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct LoadedMultiView {
    pub data: MultiViewDataset,
    pub labels: Option<Vec<usize>>,
}

impl fmt::Display for LoadedMultiView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.data.views().iter().map(|v| v.rows().to_string()).collect();
        write!(
            f,
            "{} views, d = [{}], n = {}{}",
            self.data.n_views(),
            dims.join(", "),
            self.data.n_samples(),
            if self.labels.is_some() { ", with labels" } else { "" }
        )
    }
}

fn read_csv(path: &Path) -> Result<Matrix> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_matrix_csv(BufReader::new(file)).with_context(|| format!("in {}", path.display()))
}

pub fn load_multiview(manifest: &Path) -> Result<LoadedMultiView> {
    let text = std::fs::read_to_string(manifest).with_context(|| format!("cannot read manifest {}", manifest.display()))?;
    let m: Manifest = toml::from_str(&text).with_context(|| format!("invalid manifest {}", manifest.display()))?;
    if m.views.is_empty() {
        bail!("manifest {} lists no views", manifest.display());
    }
    let base = manifest.parent().unwrap_or(Path::new(""));
    let paths: Vec<PathBuf> = m.views.iter().map(|p| base.join(p)).collect();
    let mut views = Vec::with_capacity(paths.len());
    for p in &paths {
        let x = read_csv(p)?;
        if let Some(first) = views.first().map(|v: &Matrix| v.cols()) {
            if x.cols() != first {
                bail!(
                    "{} has {} samples but {} has {}",
                    p.display(),
                    x.cols(),
                    paths[0].display(),
                    first
                );
            }
        }
        views.push(x);
    }
    let data = MultiViewDataset::new(views)?;
    let labels = match &m.labels {
        None => None,
        Some(rel) => {
            let p = base.join(rel);
            let labels = read_label_file(&p)?;
            if labels.len() != data.n_samples() {
                bail!("{} has {} labels for {} samples", p.display(), labels.len(), data.n_samples());
            }
            Some(labels)
        }
    };
    Ok(LoadedMultiView { data, labels })
}

fn read_label_file(path: &Path) -> Result<Vec<usize>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: usize = t
            .parse()
            .with_context(|| format!("{}: line {}: label {t:?} is not a nonnegative integer", path.display(), i + 1))?;
        out.push(v);
    }
    Ok(out)
}

/// Writes views, optional labels and a manifest into `dir`; returns the
/// manifest path.
pub fn write_multiview(dir: &Path, data: &MultiViewDataset, labels: Option<&[usize]>) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut views = Vec::new();
    for (v, x) in data.views().iter().enumerate() {
        let name = PathBuf::from(format!("view{}.csv", v + 1));
        write_matrix_csv(x, File::create(dir.join(&name))?)?;
        views.push(name);
    }
    let labels = match labels {
        Some(l) => {
            let name = PathBuf::from("labels.txt");
            let mut f = File::create(dir.join(&name))?;
            for x in l {
                writeln!(f, "{x}")?;
            }
            Some(name)
        }
        None => None,
    };
    let path = dir.join("manifest.toml");
    std::fs::write(&path, toml::to_string(&Manifest { views, labels })?)?;
    Ok(path)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabeledSummary {
    pub n: usize,
    pub d: usize,
    pub positives: usize,
}

impl fmt::Display for LabeledSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n = {}, d = {}, {} positive / {} negative", self.n, self.d, self.positives, self.n - self.positives)
    }
}

pub fn load_labeled(path: &Path) -> Result<(LabeledDataset, LabeledSummary)> {
    let m = read_csv(path)?;
    if m.cols() < 2 {
        bail!("{}: need a label column and at least one feature", path.display());
    }
    let mut labels = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let y = m[(i, 0)];
        if y == 1.0 {
            labels.push(1.0);
        } else if y == -1.0 || y == 0.0 {
            labels.push(-1.0);
        } else {
            bail!("{}: line {}, column 1: label {y} is not ±1 or 0/1", path.display(), i + 1);
        }
    }
    let feats: Vec<usize> = (1..m.cols()).collect();
    let data = LabeledDataset::new(m.select_cols(&feats), labels).with_context(|| format!("in {}", path.display()))?;
    let summary = LabeledSummary {
        n: data.len(),
        d: data.dim(),
        positives: data.positives(),
    };
    Ok((data, summary))
}

/// Writes `data` in the format read by [`load_labeled`].
pub fn write_labeled(path: &Path, data: &LabeledDataset) -> Result<()> {
    let x = data.features();
    let m = Matrix::from_fn(x.rows(), x.cols() + 1, |i, j| if j == 0 { data.labels()[i] } else { x[(i, j - 1)] });
    write_matrix_csv(&m, File::create(path)?)?;
    Ok(())
}
