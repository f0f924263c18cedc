//! Clustering of pooled filters and selection of the cluster count.

pub mod kmeans;
pub mod metrics;
pub mod purity;
pub mod references;
pub mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldp::EncodedDataset;

pub use kmeans::{kmeans, kmeans_from, KMeansResult, KMeansSettings, Points};
pub use metrics::{calinski_harabasz, silhouette, DistanceMatrix};
pub use purity::{purity, PurityScores};
pub use references::{make_references, Pool, PointRole, ReferenceConfig, ReferenceLayout, ReferenceMethod, ReferenceSet};
pub use sweep::{argmax_k, argmax_k_by, silhouette_select, sweep_k, KRange, PuritySweep, SweepEntry, TieBreak};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct EstimatorSettings {
    /// Cluster counts to try; `None` means `[2, min(|X| - 1, N + n_ref)]`.
    pub k_range: Option<KRange>,
    #[serde(default)]
    pub kmeans: KMeansSettings,
    /// Tie rule for `k_star` among equal purity totals.
    #[serde(default)]
    pub tie_break: TieBreak,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CardinalityReport {
    pub method: ReferenceMethod,
    pub p_flip: f64,
    /// Cluster count with the highest total reference purity.
    pub k_star: usize,
    /// Clusters at `k_star` that contain at least one input record; this is
    /// the cardinality estimate (reference-only clusters are not entities).
    pub cardinality: usize,
    pub k_silhouette: Option<usize>,
    pub k_ch: Option<usize>,
    pub n_inputs: usize,
    pub n_references: usize,
    pub n_dummies: usize,
    pub k_true: Option<usize>,
    pub error: Option<usize>,
    pub error_rate: Option<f64>,
    pub sweep: PuritySweep,
}

/// `(|estimate - truth|, |estimate - truth| / truth)`.
pub fn error_against(estimate: usize, k_true: usize) -> (usize, f64) {
    let error = estimate.abs_diff(k_true);
    (error, error as f64 / k_true as f64)
}

/// Plants references, pools them with the inputs and sweeps k.
pub fn estimate_cardinality(
    inputs: &[EncodedDataset],
    cfg: &ReferenceConfig,
    settings: &EstimatorSettings,
    k_true: Option<usize>,
) -> Result<CardinalityReport> {
    if k_true == Some(0) {
        return Err(Error::param("ground-truth cardinality must be positive"));
    }
    let refs = make_references(inputs, cfg)?;
    let pool = Pool::build(inputs, &refs, cfg.exclude_sampled_originals);
    let points = Points::from_filters(&pool.filters)?;
    let n_inputs: usize = inputs.iter().map(|d| d.len()).sum();
    let k_range = settings
        .k_range
        .unwrap_or_else(|| KRange::new(2.min(pool.len()), (pool.len() - 1).max(1).min(n_inputs + refs.len())));
    let ks = k_range.values(pool.len())?;
    let is_input: Vec<bool> = (0..pool.len()).map(|p| pool.is_input(p)).collect();
    let sweep = sweep_k(&points, &pool.layout(), &is_input, &ks, &settings.kmeans, settings.tie_break)?;
    let k_star = sweep.k_star;
    let cardinality = sweep
        .entries
        .iter()
        .find(|e| e.k == k_star)
        .map(|e| e.input_clusters)
        .ok_or_else(|| Error::Invariant("k_star missing from its own sweep".into()))?;
    let (error, error_rate) = match k_true {
        Some(t) => {
            let (e, r) = error_against(cardinality, t);
            (Some(e), Some(r))
        }
        None => (None, None),
    };
    Ok(CardinalityReport {
        method: cfg.method,
        p_flip: cfg.p_flip,
        k_star,
        cardinality,
        k_silhouette: sweep.k_silhouette,
        k_ch: sweep.k_ch,
        n_inputs,
        n_references: refs.len(),
        n_dummies: refs.dummies.len(),
        k_true,
        error,
        error_rate,
        sweep,
    })
}
