//! Randomized response over Bloom filter bits.
//!
//! Every bit is flipped independently with probability `eta = 1/(1+e^eps)` and
//! kept with probability `e^eps/(1+e^eps)`, so the likelihood ratio of any
//! output under two filters that differ in one bit is at most `e^eps`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bloom::BloomFilter;
use crate::error::{Error, Result};
use crate::seed;

/// Flip probability for budget `epsilon`.
///
/// `epsilon = 0` is accepted (every bit becomes a fair coin) but logged, since
/// the output carries no information about the input.
pub fn flip_probability(epsilon: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::param(format!("epsilon must be non-negative, got {epsilon}")));
    }
    if epsilon == 0.0 {
        log::warn!("epsilon = 0: perturbed filters are pure noise");
    }
    Ok(1.0 / (1.0 + epsilon.exp()))
}

/// Probability of observing output bit `output` given input bit `input`.
pub fn bit_output_probability(epsilon: f64, input: bool, output: bool) -> Result<f64> {
    let eta = flip_probability(epsilon)?;
    Ok(if input == output { 1.0 - eta } else { eta })
}

/// Exact probability that `perturb` maps `input` to `output`.
pub fn filter_output_probability(
    epsilon: f64,
    input: &BloomFilter,
    output: &BloomFilter,
) -> Result<f64> {
    let eta = flip_probability(epsilon)?;
    let flips = input.hamming(output)? as i32;
    let keeps = input.len() as i32 - flips;
    Ok(eta.powi(flips) * (1.0 - eta).powi(keeps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub seed: u64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, seed: u64) -> Result<Self> {
        flip_probability(epsilon)?;
        Ok(PrivacyParams { epsilon, seed })
    }

    /// Derived from `epsilon` on every call.
    pub fn eta(&self) -> f64 {
        1.0 / (1.0 + self.epsilon.exp())
    }
}

/// Flips each bit with probability `eta`. The random stream is selected by
/// `(privacy.seed, record_index)`, so the result does not depend on the order
/// in which records are processed.
pub fn perturb(bf: &BloomFilter, privacy: &PrivacyParams, record_index: u64) -> BloomFilter {
    let eta = privacy.eta();
    let mut rng = seed::substream(privacy.seed, record_index);
    let mut out = bf.clone();
    for i in 0..out.len() {
        if rng.gen::<f64>() < eta {
            out.flip(i);
        }
    }
    out
}

/// What one provider ships to the linkage unit, plus an evaluation-only
/// ground-truth sidecar that is never written into the exchange file.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub provider_id: String,
    pub ell: usize,
    pub epsilon: f64,
    pub filters: Vec<BloomFilter>,
    pub ground_truth: Option<Vec<String>>,
}

impl EncodedDataset {
    pub fn new(provider_id: impl Into<String>, epsilon: f64, filters: Vec<BloomFilter>) -> Result<Self> {
        let ell = common_length(&filters)?;
        Ok(EncodedDataset {
            provider_id: provider_id.into(),
            ell,
            epsilon,
            filters,
            ground_truth: None,
        })
    }

    pub fn with_ground_truth(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.filters.len() {
            return Err(Error::param(format!(
                "ground truth has {} ids for {} filters",
                ids.len(),
                self.filters.len()
            )));
        }
        self.ground_truth = Some(ids);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }
}

pub(crate) fn common_length(filters: &[BloomFilter]) -> Result<usize> {
    let first = filters
        .first()
        .ok_or_else(|| Error::param("at least one filter is required"))?;
    for f in filters {
        if f.len() != first.len() {
            return Err(Error::LengthMismatch {
                expected: first.len(),
                actual: f.len(),
            });
        }
    }
    Ok(first.len())
}

/// Perturbs every filter, using its position as the record index.
pub fn perturb_dataset(
    provider_id: &str,
    filters: &[BloomFilter],
    privacy: &PrivacyParams,
) -> Result<EncodedDataset> {
    common_length(filters)?;
    let perturbed = filters
        .iter()
        .enumerate()
        .map(|(i, bf)| perturb(bf, privacy, i as u64))
        .collect();
    EncodedDataset::new(provider_id, privacy.epsilon, perturbed)
}
