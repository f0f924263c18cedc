//! The method x epsilon x p_flip x repetition experiment matrix.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use ppcard_core::clustering::{error_against, silhouette_select, KMeansSettings, KRange, Points, ReferenceMethod};
use ppcard_core::EncodedDataset;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::pipeline::{self, Providers, Selection};
use crate::seeds;

pub const GRID_COLUMNS: [&str; 12] = [
    "method",
    "epsilon",
    "p_flip",
    "rep",
    "k_star",
    "error",
    "error_rate",
    "k_silhouette",
    "silhouette_error_rate",
    "cardinality",
    "k_true",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub method: ReferenceMethod,
    pub epsilon: f64,
    pub p_flip: f64,
    pub rep: usize,
    pub k_star: Option<usize>,
    pub error: Option<usize>,
    pub error_rate: Option<f64>,
    /// Silhouette baseline on the inputs alone (shared by every cell with
    /// the same `epsilon` and `rep`).
    pub k_silhouette: Option<usize>,
    pub silhouette_error_rate: Option<f64>,
    pub cardinality: Option<usize>,
    pub k_true: Option<usize>,
    /// `ok`, or the error that stopped this cell.
    pub status: String,
}

impl GridRow {
    fn fields(&self) -> [String; 12] {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        [
            self.method.to_string(),
            self.epsilon.to_string(),
            self.p_flip.to_string(),
            self.rep.to_string(),
            opt(self.k_star),
            opt(self.error),
            opt(self.error_rate),
            opt(self.k_silhouette),
            opt(self.silhouette_error_rate),
            opt(self.cardinality),
            opt(self.k_true),
            self.status.clone(),
        ]
    }
}

struct Setting {
    epsilon: f64,
    rep: usize,
    inputs: CliResult<Vec<EncodedDataset>>,
    baseline: Option<CliResult<usize>>,
}

fn baseline_k(cfg: &ExperimentConfig, inputs: &[EncodedDataset], epsilon: f64, rep: usize) -> CliResult<usize> {
    let filters: Vec<_> = inputs.iter().flat_map(|d| d.filters.iter().cloned()).collect();
    let n = filters.len();
    if n < 3 {
        return Err(CliError::data("silhouette baseline needs at least 3 records"));
    }
    let range = cfg.estimator.k_range.unwrap_or_else(|| KRange::new(2, n - 1));
    let ks: Vec<usize> = range.values(n)?.into_iter().filter(|&k| k >= 2 && k < n).collect();
    if ks.is_empty() {
        return Err(CliError::config("k range has no value valid for the silhouette baseline"));
    }
    let points = Points::from_filters(&filters)?;
    let settings = KMeansSettings {
        seed: seeds::baseline(cfg.seed, epsilon, rep),
        ..cfg.estimator.kmeans
    };
    Ok(silhouette_select(&points, &ks, &settings)?.k)
}

/// Runs every grid cell. Rows come back ordered by method, epsilon, p_flip
/// and repetition, in the order these appear in the config.
pub fn run_grid(cfg: &ExperimentConfig) -> CliResult<Vec<GridRow>> {
    cfg.validate()?;
    let providers: Providers = pipeline::load_providers(cfg)?;
    let k_true = providers.k_true();
    let encoded = pipeline::encode_all(cfg, &providers)?;
    let flips = cfg.p_flip.values()?;

    let pairs: Vec<(f64, usize)> = cfg
        .epsilons
        .iter()
        .flat_map(|&e| (0..cfg.repetitions).map(move |r| (e, r)))
        .collect();
    let settings: Vec<Setting> = pairs
        .into_par_iter()
        .map(|(epsilon, rep)| {
            let inputs = pipeline::perturb_all(cfg, &providers, &encoded, epsilon, rep);
            let baseline = match (&inputs, cfg.baseline) {
                (Ok(inp), true) => Some(baseline_k(cfg, inp, epsilon, rep)),
                _ => None,
            };
            Setting { epsilon, rep, inputs, baseline }
        })
        .collect();
    let find = |e: f64, r: usize| {
        settings
            .iter()
            .find(|s| s.epsilon.to_bits() == e.to_bits() && s.rep == r)
            .expect("setting computed")
    };

    let mut cells = Vec::new();
    for &method in &cfg.methods {
        for &epsilon in &cfg.epsilons {
            for &p_flip in &flips {
                for rep in 0..cfg.repetitions {
                    cells.push(Selection { method, epsilon, p_flip, rep });
                }
            }
        }
    }
    let rows = cells
        .par_iter()
        .map(|sel| {
            let setting = find(sel.epsilon, sel.rep);
            let (k_silhouette, silhouette_error_rate) = match (&setting.baseline, k_true) {
                (Some(Ok(k)), Some(t)) => (Some(*k), Some(error_against(*k, t).1)),
                (Some(Ok(k)), None) => (Some(*k), None),
                _ => (None, None),
            };
            let mut row = GridRow {
                method: sel.method,
                epsilon: sel.epsilon,
                p_flip: sel.p_flip,
                rep: sel.rep,
                k_star: None,
                error: None,
                error_rate: None,
                k_silhouette,
                silhouette_error_rate,
                cardinality: None,
                k_true,
                status: "ok".into(),
            };
            let result = match &setting.inputs {
                Ok(inputs) => pipeline::link(cfg, sel, inputs, k_true),
                Err(e) => Err(CliError { kind: e.kind, message: e.message.clone() }),
            };
            match result {
                Ok(r) => {
                    row.k_star = Some(r.k_star);
                    row.cardinality = Some(r.cardinality);
                    row.error = r.error;
                    row.error_rate = r.error_rate;
                }
                Err(e) => {
                    log::warn!("grid cell {sel:?} failed: {e}");
                    row.status = format!("error: {e}");
                }
            }
            if let Some(Err(e)) = &setting.baseline {
                if row.status == "ok" {
                    row.status = format!("baseline error: {e}");
                }
            }
            row
        })
        .collect();
    Ok(rows)
}

pub fn write_grid(path: &Path, rows: &[GridRow]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::from(e).at(dir))?;
    }
    let csv_err = |e: csv::Error| CliError::data(e.to_string()).at(path);
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(GRID_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.fields()).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::from(e).at(path))
}

/// Smallest error rate over p_flip for each `(method, epsilon, rep)`.
pub fn min_error_by_setting(rows: &[GridRow]) -> Vec<(ReferenceMethod, f64, usize, Option<f64>)> {
    let mut out: Vec<(ReferenceMethod, f64, usize, Option<f64>)> = Vec::new();
    for r in rows {
        let key = (r.method, r.epsilon.to_bits(), r.rep);
        match out.iter_mut().find(|o| (o.0, o.1.to_bits(), o.2) == key) {
            Some(o) => {
                o.3 = match (o.3, r.error_rate) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                }
            }
            None => out.push((r.method, r.epsilon, r.rep, r.error_rate)),
        }
    }
    out
}
