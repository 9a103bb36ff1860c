use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Descriptive statistics of a score sample. `sd` is the population
/// standard deviation; quartiles interpolate linearly between order
/// statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution<S> {
    pub count: usize,
    pub mean: S,
    pub sd: S,
    pub min: S,
    pub q1: S,
    pub median: S,
    pub q3: S,
    pub max: S,
}

impl<S: Scalar> Distribution<S> {
    pub fn from_samples(samples: &[S]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let n = S::from_count(sorted.len());
        let mean = sorted.iter().fold(S::zero(), |acc, &x| acc + x) / n;
        let var = sorted.iter().fold(S::zero(), |acc, &x| acc + (x - mean) * (x - mean)) / n;
        Some(Distribution {
            count: sorted.len(),
            mean,
            sd: var.sqrt(),
            min: sorted[0],
            q1: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q3: quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
        })
    }
}

fn quantile<S: Scalar>(sorted: &[S], q: f64) -> S {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = S::from_f64_lossy(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
