use std::io::Write;

use serde::Serialize;

use crate::numerics::format_real;

/// One completed pace round (or, for the fixed-λ baseline, one alternation).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplRecord {
    pub round: usize,
    pub lambda: f64,
    pub mean_weight: f64,
    pub min_weight: f64,
    pub max_weight: f64,
    pub objective: f64,
    pub inner_iterations: usize,
    pub losses: Vec<f64>,
}

impl SplRecord {
    pub(crate) fn new(
        round: usize,
        lambda: f64,
        weights: &[f64],
        objective: f64,
        inner_iterations: usize,
        losses: &[f64],
    ) -> Self {
        let n = weights.len().max(1) as f64;
        Self {
            round,
            lambda,
            mean_weight: weights.iter().sum::<f64>() / n,
            min_weight: weights.iter().copied().fold(f64::INFINITY, f64::min),
            max_weight: weights.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            objective,
            inner_iterations,
            losses: losses.to_vec(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SplTrace {
    records: Vec<SplRecord>,
}

impl SplTrace {
    pub(crate) fn push(&mut self, r: SplRecord) {
        self.records.push(r);
    }

    pub fn records(&self) -> &[SplRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&SplRecord> {
        self.records.last()
    }

    /// `round,lambda,mean_weight,min_weight,max_weight,objective` per row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "round,lambda,mean_weight,min_weight,max_weight,objective")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.round,
                format_real(r.lambda),
                format_real(r.mean_weight),
                format_real(r.min_weight),
                format_real(r.max_weight),
                format_real(r.objective)
            )?;
        }
        Ok(())
    }
}
