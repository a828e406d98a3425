//! One runner per experiment kind. Each returns its artifacts in memory;
//! the caller adds the manifest and writes everything out.

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use rayon::prelude::*;
use splir_core::PaceSchedule;

use crate::config::TraceMode;
use crate::output::Artifacts;

pub mod classify;
pub mod hq;
pub mod mf;
pub mod mvc;
pub mod regcheck;

#[derive(Debug, Default)]
pub struct ExperimentOutput {
    pub artifacts: Artifacts,
    /// Free-form manifest notes, e.g. which metric variants were used.
    pub notes: BTreeMap<&'static str, &'static str>,
    /// False only for checks that can fail (regcheck).
    pub passed: bool,
}

/// Runs `f` for every seed on `jobs` workers; results come back in seed
/// order regardless of scheduling.
pub fn par_map_seeds<T, F>(seeds: &[u64], jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("cannot start worker pool")?;
    pool.install(|| {
        seeds
            .par_iter()
            .map(|&s| f(s).with_context(|| format!("seed {s}")))
            .collect()
    })
}

pub(crate) fn wants_trace(mode: TraceMode, seed_index: usize) -> bool {
    match mode {
        TraceMode::None => false,
        TraceMode::First => seed_index == 0,
        TraceMode::All => true,
    }
}

pub(crate) fn trace_bytes(trace: &splir_core::SplTrace) -> Vec<u8> {
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).expect("writing to memory");
    buf
}

pub(crate) fn schedule(inner_cap: usize, max_rounds: usize) -> PaceSchedule {
    PaceSchedule {
        inner_cap,
        max_rounds,
        ..PaceSchedule::default()
    }
}
