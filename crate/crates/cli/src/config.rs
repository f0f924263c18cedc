//! Experiment configuration, loaded from JSON or TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ppcard_core::clustering::{EstimatorSettings, ReferenceMethod};
use ppcard_core::datagen::{BundleSpec, DuplicateCount};
use ppcard_core::EncodingParams;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetSource {
    /// Synthetic voter-style records.
    Generated {
        #[serde(default = "default_entities")]
        entities: usize,
        #[serde(default)]
        duplicates: DuplicateCount,
        #[serde(default)]
        corruption_fraction: f64,
        #[serde(default = "default_providers")]
        num_providers: usize,
        /// Defaults to a seed derived from the master seed.
        #[serde(default)]
        seed: Option<u64>,
    },
    /// One CSV per provider plus a schema sidecar.
    Files { schema: PathBuf, records: Vec<PathBuf> },
}

fn default_entities() -> usize {
    171
}

fn default_providers() -> usize {
    2
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Generated {
            entities: default_entities(),
            duplicates: DuplicateCount::default(),
            corruption_fraction: 0.0,
            num_providers: default_providers(),
            seed: None,
        }
    }
}

impl DatasetSource {
    pub fn bundle_spec(&self, master_seed: u64) -> Option<BundleSpec> {
        match *self {
            DatasetSource::Generated {
                entities,
                duplicates,
                corruption_fraction,
                num_providers,
                seed,
            } => Some(BundleSpec {
                entities,
                duplicates,
                corruption_fraction,
                num_providers,
                seed: seed.unwrap_or_else(|| crate::seeds::dataset(master_seed)),
            }),
            DatasetSource::Files { .. } => None,
        }
    }
}

/// Inclusive `start..=stop` grid with the given step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlipGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for FlipGrid {
    fn default() -> Self {
        FlipGrid { start: 0.10, stop: 0.30, step: 0.01 }
    }
}

impl FlipGrid {
    pub fn single(p: f64) -> Self {
        FlipGrid { start: p, stop: p, step: 1.0 }
    }

    /// Grid values, computed as `start + i * step` and rounded to 1e-9 so
    /// that CSV output does not carry accumulation noise.
    pub fn values(&self) -> CliResult<Vec<f64>> {
        if !(self.step > 0.0) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::config("p_flip grid needs finite bounds and step > 0"));
        }
        if self.start > self.stop {
            return Err(CliError::config("p_flip grid start exceeds stop"));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| ((self.start + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceDefaults {
    pub pick_ratio: f64,
    pub dummy_ratio: f64,
    #[serde(default)]
    pub exclude_sampled_originals: bool,
}

impl Default for ReferenceDefaults {
    fn default() -> Self {
        ReferenceDefaults {
            pick_ratio: 0.1,
            dummy_ratio: 0.1,
            exclude_sampled_originals: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub dataset: DatasetSource,
    pub encoding: EncodingParams,
    pub epsilons: Vec<f64>,
    pub p_flip: FlipGrid,
    pub methods: Vec<ReferenceMethod>,
    pub references: ReferenceDefaults,
    pub estimator: EstimatorSettings,
    pub repetitions: usize,
    /// Also run the silhouette baseline on the inputs alone.
    pub baseline: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            out_dir: None,
            dataset: DatasetSource::default(),
            encoding: EncodingParams::default(),
            epsilons: vec![1.0, 2.0, 3.0, 4.0, 5.0, 10.0],
            p_flip: FlipGrid::default(),
            methods: vec![ReferenceMethod::A, ReferenceMethod::B],
            references: ReferenceDefaults::default(),
            estimator: EstimatorSettings::default(),
            repetitions: 1,
            baseline: true,
        }
    }
}

impl ExperimentConfig {
    /// Reads `.json` or `.toml` (by extension; anything else is tried as TOML).
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config: {e}")).at(path))?;
        let cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| CliError::config(e.to_string()).at(path))?
        } else {
            toml::from_str(&text).map_err(|e| CliError::config(e.to_string()).at(path))?
        };
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.encoding.validate()?;
        if self.epsilons.is_empty() {
            return Err(CliError::config("epsilon list is empty"));
        }
        for &e in &self.epsilons {
            ppcard_core::flip_probability(e)?;
        }
        if self.methods.is_empty() {
            return Err(CliError::config("method list is empty"));
        }
        if self.repetitions == 0 {
            return Err(CliError::config("repetitions must be at least 1"));
        }
        for p in self.p_flip.values()? {
            if !(0.0..=0.5).contains(&p) {
                return Err(CliError::config(format!("p_flip {p} outside [0, 0.5]")));
            }
        }
        let r = &self.references;
        if !(r.pick_ratio > 0.0 && r.pick_ratio <= 1.0) || !(r.dummy_ratio > 0.0) {
            return Err(CliError::config("need 0 < pick_ratio <= 1 and dummy_ratio > 0"));
        }
        if let DatasetSource::Generated { entities, num_providers, corruption_fraction, .. } = self.dataset {
            if entities == 0 || num_providers == 0 {
                return Err(CliError::config("generated dataset needs entities and providers"));
            }
            if !(0.0..=1.0).contains(&corruption_fraction) {
                return Err(CliError::config("corruption_fraction must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("ppcard-out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_grid_has_twenty_one_points() {
        let v = FlipGrid::default().values().unwrap();
        assert_eq!(v.len(), 21);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[7], 0.17);
        assert_eq!(v[20], 0.3);
        assert_eq!(FlipGrid::single(0.2).values().unwrap(), vec![0.2]);
        assert!(FlipGrid { start: 0.1, stop: 0.3, step: 0.0 }.values().is_err());
    }

    #[test]
    fn toml_and_json_agree() {
        let t = r#"
            seed = 7
            epsilons = [2.0, 3.0]
            methods = ["A"]
            [dataset]
            kind = "generated"
            entities = 20
            [p_flip]
            start = 0.1
            stop = 0.2
            step = 0.05
        "#;
        let a: ExperimentConfig = toml::from_str(t).unwrap();
        let j = r#"{"seed":7,"epsilons":[2.0,3.0],"methods":["A"],
            "dataset":{"kind":"generated","entities":20},
            "p_flip":{"start":0.1,"stop":0.2,"step":0.05}}"#;
        let b: ExperimentConfig = serde_json::from_str(j).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.encoding, EncodingParams::default());
        a.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(toml::from_str::<ExperimentConfig>("sed = 1").is_err());
        let cfg = ExperimentConfig { repetitions: 0, ..Default::default() };
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
        let cfg = ExperimentConfig { epsilons: vec![-1.0], ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
