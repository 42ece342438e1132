//! Evaluation report emitted by `csimeta eval`.

use serde::{Deserialize, Serialize};

use crate::provenance::Provenance;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Percentiles {
    pub p5: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub p95: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    pub mean_sgcs: f64,
    pub percentiles: Percentiles,
    pub count: usize,
    pub feedback_bits: usize,
    pub bits_per_dim: usize,
    pub bypass: bool,
    pub provenance: Provenance,
}

/// Nearest-rank percentile of an unsorted sample set.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = ((q / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

impl EvalReport {
    pub fn from_scores(
        mut scores: Vec<f64>,
        feedback_bits: usize,
        bits_per_dim: usize,
        bypass: bool,
        provenance: Provenance,
    ) -> Self {
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self {
            mean_sgcs: mean,
            percentiles: Percentiles {
                p5: percentile(&scores, 5.0),
                p25: percentile(&scores, 25.0),
                p50: percentile(&scores, 50.0),
                p75: percentile(&scores, 75.0),
                p95: percentile(&scores, 95.0),
            },
            count: scores.len(),
            feedback_bits,
            bits_per_dim,
            bypass,
            provenance,
        }
    }
}
