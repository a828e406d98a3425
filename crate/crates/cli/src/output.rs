use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use splir_core::numerics::format_real;

/// Output files collected in memory and written together with a manifest.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.insert(name.into(), bytes);
    }

    pub fn add_csv(&mut self, name: impl Into<String>, table: Table) {
        self.add(name, table.into_bytes());
    }

    pub fn add_json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
        bytes.push(b'\n');
        self.add(name, bytes);
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn write_all(&self, dir: &Path) -> Result<()> {
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
            }
            std::fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        }
        Ok(())
    }
}

/// A CSV table built row by row; reals are written with full precision.
#[derive(Debug)]
pub struct Table {
    text: String,
}

pub enum Cell<'a> {
    Str(&'a str),
    Int(u64),
    Real(f64),
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
        }
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        let parts: Vec<String> = cells
            .iter()
            .map(|c| match c {
                Cell::Str(s) => s.to_string(),
                Cell::Int(i) => i.to_string(),
                Cell::Real(x) => format_real(*x),
            })
            .collect();
        self.text.push_str(&parts.join(","));
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    experiment: String,
    config_sha256: String,
    seeds: &'a [u64],
    artifacts: Vec<&'a str>,
    notes: BTreeMap<&'static str, &'static str>,
}

pub fn config_hash(canonical: &str) -> String {
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Adds `manifest.json` listing every other artifact.
pub fn add_manifest(artifacts: &mut Artifacts, experiment: &str, canonical_config: &str, seeds: &[u64], notes: BTreeMap<&'static str, &'static str>) {
    let names: Vec<String> = artifacts.names().map(str::to_string).collect();
    let manifest = Manifest {
        experiment: experiment.to_string(),
        config_sha256: config_hash(canonical_config),
        seeds,
        artifacts: names.iter().map(String::as_str).collect(),
        notes,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("serializable");
    bytes.push(b'\n');
    artifacts.add("manifest.json", bytes);
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
