//! End-to-end runs: providers encode and perturb, the linkage unit pools the
//! exchange files and estimates the cardinality.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Serialize;

use ppcard_core::clustering::{estimate_cardinality, CardinalityReport, ReferenceConfig, ReferenceMethod};
use ppcard_core::datagen::GenerationManifest;
use ppcard_core::{perturb_dataset, EncodedDataset, Encoder, PlainRecord, PrivacyParams, RecordSchema};

use crate::config::{DatasetSource, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::{io, seeds};

/// Plaintext inputs, one entry per provider.
#[derive(Debug, Clone)]
pub struct Providers {
    pub schema: RecordSchema,
    pub providers: Vec<(String, Vec<PlainRecord>)>,
    pub manifest: Option<GenerationManifest>,
}

impl Providers {
    /// Number of distinct entity ids, if every record has one.
    pub fn k_true(&self) -> Option<usize> {
        count_entities(self.providers.iter().flat_map(|(_, r)| r.iter().map(|r| r.entity_id.clone())))
    }
}

fn count_entities(ids: impl Iterator<Item = Option<String>>) -> Option<usize> {
    let mut seen = BTreeSet::new();
    for id in ids {
        seen.insert(id?);
    }
    (!seen.is_empty()).then_some(seen.len())
}

pub fn load_providers(cfg: &ExperimentConfig) -> CliResult<Providers> {
    match &cfg.dataset {
        DatasetSource::Generated { .. } => {
            let spec = cfg.dataset.bundle_spec(cfg.seed).expect("generated source");
            let (bundle, manifest) = spec.generate()?;
            Ok(Providers {
                schema: RecordSchema::voter(),
                providers: bundle.providers,
                manifest: Some(manifest),
            })
        }
        DatasetSource::Files { schema, records } => {
            if records.is_empty() {
                return Err(CliError::config("dataset lists no record files"));
            }
            let schema = io::read_schema(schema)?;
            let mut providers = Vec::new();
            for path in records {
                let id = provider_id(path);
                if providers.iter().any(|(p, _): &(String, _)| *p == id) {
                    return Err(CliError::config(format!("two record files map to provider {id:?}")));
                }
                providers.push((id, io::read_records(path, &schema)?));
            }
            Ok(Providers { schema, providers, manifest: None })
        }
    }
}

/// Provider id from a file name: the stem, restricted to `[A-Za-z0-9_-]`.
pub fn provider_id(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let id: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if id.is_empty() {
        "provider".into()
    } else {
        id
    }
}

/// Encodes every provider's records once (encoding is deterministic).
pub fn encode_all(cfg: &ExperimentConfig, providers: &Providers) -> CliResult<Vec<Vec<ppcard_core::BloomFilter>>> {
    let encoder = Encoder::new(providers.schema.clone(), cfg.encoding.clone())?;
    providers
        .providers
        .iter()
        .map(|(id, recs)| {
            recs.iter()
                .enumerate()
                .map(|(i, r)| {
                    encoder
                        .encode(r)
                        .map_err(|e| CliError::data(format!("provider {id}, record {}: {e}", i + 1)))
                })
                .collect()
        })
        .collect()
}

/// Applies each provider's LDP perturbation for one `(epsilon, rep)` setting.
pub fn perturb_all(
    cfg: &ExperimentConfig,
    providers: &Providers,
    encoded: &[Vec<ppcard_core::BloomFilter>],
    epsilon: f64,
    rep: usize,
) -> CliResult<Vec<EncodedDataset>> {
    providers
        .providers
        .iter()
        .zip(encoded)
        .map(|((id, _), filters)| {
            let privacy = PrivacyParams::new(epsilon, seeds::perturbation(cfg.seed, epsilon, rep, id))?;
            Ok(perturb_dataset(id, filters, &privacy)?)
        })
        .collect()
}

/// One point of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Selection {
    pub method: ReferenceMethod,
    pub epsilon: f64,
    pub p_flip: f64,
    pub rep: usize,
}

impl Selection {
    /// First method, first epsilon and grid start of the config.
    pub fn first(cfg: &ExperimentConfig) -> Self {
        Selection {
            method: cfg.methods[0],
            epsilon: cfg.epsilons[0],
            p_flip: cfg.p_flip.start,
            rep: 0,
        }
    }

    pub fn reference_config(&self, cfg: &ExperimentConfig) -> ReferenceConfig {
        ReferenceConfig {
            method: self.method,
            pick_ratio: cfg.references.pick_ratio,
            dummy_ratio: cfg.references.dummy_ratio,
            p_flip: self.p_flip,
            seed: seeds::references(cfg.seed, self.method, self.epsilon, self.p_flip, self.rep),
            exclude_sampled_originals: cfg.references.exclude_sampled_originals,
        }
    }
}

/// The linkage-unit step on already perturbed inputs.
pub fn link(
    cfg: &ExperimentConfig,
    sel: &Selection,
    inputs: &[EncodedDataset],
    k_true: Option<usize>,
) -> CliResult<CardinalityReport> {
    let mut settings = cfg.estimator;
    settings.kmeans.seed = seeds::kmeans(cfg.seed, sel.method, sel.epsilon, sel.p_flip, sel.rep);
    Ok(estimate_cardinality(inputs, &sel.reference_config(cfg), &settings, k_true)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportFile<'a> {
    pub k_star: usize,
    pub cardinality: usize,
    pub k_silhouette: Option<usize>,
    pub k_ch: Option<usize>,
    pub k_true: Option<usize>,
    pub error: Option<usize>,
    pub error_rate: Option<f64>,
    pub n_inputs: usize,
    pub n_references: usize,
    pub n_dummies: usize,
    pub selection: Selection,
    pub inputs: Vec<String>,
    pub config: &'a ExperimentConfig,
}

impl<'a> ReportFile<'a> {
    pub fn new(r: &CardinalityReport, sel: Selection, inputs: Vec<String>, config: &'a ExperimentConfig) -> Self {
        ReportFile {
            k_star: r.k_star,
            cardinality: r.cardinality,
            k_silhouette: r.k_silhouette,
            k_ch: r.k_ch,
            k_true: r.k_true,
            error: r.error,
            error_rate: r.error_rate,
            n_inputs: r.n_inputs,
            n_references: r.n_references,
            n_dummies: r.n_dummies,
            selection: sel,
            inputs,
            config,
        }
    }
}

/// Files written by [`run_pipeline`].
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub exchange_files: Vec<PathBuf>,
    pub truth_files: Vec<PathBuf>,
    pub report: PathBuf,
    pub sweep: PathBuf,
    pub cardinality: CardinalityReport,
}

pub fn exchange_path(out: &Path, provider: &str) -> PathBuf {
    out.join("exchange").join(format!("{provider}.bf"))
}

pub fn truth_path(out: &Path, provider: &str) -> PathBuf {
    out.join("truth").join(format!("{provider}.txt"))
}

/// Writes each provider's exchange file (and ground-truth sidecar, if the
/// records carry entity ids) for one `(epsilon, rep)` setting.
pub fn provider_stage(
    cfg: &ExperimentConfig,
    providers: &Providers,
    epsilon: f64,
    rep: usize,
    out: &Path,
) -> CliResult<(Vec<PathBuf>, Vec<PathBuf>)> {
    let encoded = encode_all(cfg, providers)?;
    let perturbed = perturb_all(cfg, providers, &encoded, epsilon, rep)?;
    let mut exchange_files = Vec::new();
    let mut truth_files = Vec::new();
    for ((id, recs), ds) in providers.providers.iter().zip(&perturbed) {
        let p = exchange_path(out, id);
        io::write_exchange(&p, ds)?;
        exchange_files.push(p);
        let ids: Option<Vec<String>> = recs.iter().map(|r| r.entity_id.clone()).collect();
        if let Some(ids) = ids {
            let t = truth_path(out, id);
            io::write_truth(&t, &ids)?;
            truth_files.push(t);
        }
    }
    Ok((exchange_files, truth_files))
}

/// Ground-truth cardinality from sidecar files; evaluation only.
pub fn k_true_from_truth(files: &[PathBuf]) -> CliResult<Option<usize>> {
    if files.is_empty() {
        return Ok(None);
    }
    let mut ids = Vec::new();
    for f in files {
        ids.extend(io::read_truth(f)?.into_iter().map(Some));
    }
    Ok(count_entities(ids.into_iter()))
}

/// Linkage unit: reads only exchange files, writes `report.json` and
/// `sweep.csv` into `out`.
pub fn linkage_stage(
    cfg: &ExperimentConfig,
    sel: &Selection,
    exchange_files: &[PathBuf],
    k_true: Option<usize>,
    out: &Path,
) -> CliResult<(CardinalityReport, PathBuf, PathBuf)> {
    if exchange_files.is_empty() {
        return Err(CliError::config("no exchange files given"));
    }
    let inputs = exchange_files
        .iter()
        .map(|p| io::read_exchange(p))
        .collect::<CliResult<Vec<_>>>()?;
    let report = link(cfg, sel, &inputs, k_true)?;
    let names = exchange_files
        .iter()
        .map(|p| p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned()))
        .collect();
    let report_path = out.join("report.json");
    let sweep_path = out.join("sweep.csv");
    io::write_json(&report_path, &ReportFile::new(&report, *sel, names, cfg))?;
    io::write_sweep(&sweep_path, &report.sweep)?;
    Ok((report, report_path, sweep_path))
}

/// Full run for one selection: data, provider stage, linkage stage.
pub fn run_pipeline(cfg: &ExperimentConfig, sel: &Selection) -> CliResult<PipelineOutput> {
    cfg.validate()?;
    let out = cfg.output_dir();
    let providers = load_providers(cfg)?;
    if let Some(m) = &providers.manifest {
        io::write_json(&out.join("manifest.json"), m)?;
    }
    let (exchange_files, truth_files) = provider_stage(cfg, &providers, sel.epsilon, sel.rep, &out)?;
    let k_true = k_true_from_truth(&truth_files)?;
    let (cardinality, report, sweep) = linkage_stage(cfg, sel, &exchange_files, k_true, &out)?;
    Ok(PipelineOutput {
        exchange_files,
        truth_files,
        report,
        sweep,
        cardinality,
    })
}
