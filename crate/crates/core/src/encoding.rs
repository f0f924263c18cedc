//! Record-level Bloom filter encoding.
//!
//! Each attribute value is tokenized (q-grams for strings, a grid of
//! neighbouring values for numbers, the literal value for categories), every
//! token is tagged with its attribute name, and the tagged tokens are mapped
//! into one shared filter with `k` hashed indices.

use std::collections::BTreeSet;
use std::hash::Hasher;

use serde::{Deserialize, Serialize};
use siphasher::sip::SipHasher24;

use crate::bloom::BloomFilter;
use crate::error::{Error, Result};
use crate::seed::splitmix64;

pub const DEFAULT_HASH_SEED: u64 = 0x5eed_b100_f117_e125;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingParams {
    /// Gram size in characters.
    pub q: usize,
    /// Filter length in bits.
    pub ell: usize,
    pub num_hashes: usize,
    pub hash_seed: u64,
    /// Half-width of the neighbourhood encoded for numeric attributes.
    pub numeric_interval: f64,
    pub numeric_step: f64,
}

impl Default for EncodingParams {
    fn default() -> Self {
        EncodingParams {
            q: 2,
            ell: 200,
            num_hashes: 20,
            hash_seed: DEFAULT_HASH_SEED,
            numeric_interval: 0.0,
            numeric_step: 1.0,
        }
    }
}

impl EncodingParams {
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::param("q must be at least 1"));
        }
        if self.ell == 0 {
            return Err(Error::param("ell must be at least 1"));
        }
        if self.num_hashes == 0 {
            return Err(Error::param("num_hashes must be at least 1"));
        }
        if !(self.numeric_interval >= 0.0) || !self.numeric_interval.is_finite() {
            return Err(Error::param("numeric_interval must be finite and non-negative"));
        }
        if !(self.numeric_step > 0.0) || !self.numeric_step.is_finite() {
            return Err(Error::param("numeric_step must be finite and positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    String,
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

/// Ordered attribute list. This is also the JSON sidecar format:
/// `{"attributes": [{"name": "given_name", "kind": "string"}, ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema")]
pub struct RecordSchema {
    attributes: Vec<Attribute>,
}

#[derive(Deserialize)]
struct RawSchema {
    attributes: Vec<Attribute>,
}

impl TryFrom<RawSchema> for RecordSchema {
    type Error = Error;

    fn try_from(raw: RawSchema) -> Result<Self> {
        RecordSchema::new(raw.attributes)
    }
}

impl RecordSchema {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::Schema("schema needs at least one attribute".into()));
        }
        let mut seen = BTreeSet::new();
        for a in &attributes {
            if a.name.is_empty() {
                return Err(Error::Schema("attribute names must be nonempty".into()));
            }
            if !seen.insert(a.name.as_str()) {
                return Err(Error::Schema(format!("duplicate attribute {:?}", a.name)));
            }
        }
        Ok(RecordSchema { attributes })
    }

    /// The five-attribute voter-style schema used throughout the experiments.
    pub fn voter() -> Self {
        let attr = |name: &str, kind| Attribute {
            name: name.to_string(),
            kind,
        };
        RecordSchema::new(vec![
            attr("given_name", AttributeKind::String),
            attr("surname", AttributeKind::String),
            attr("suburb", AttributeKind::String),
            attr("postcode", AttributeKind::String),
            attr("gender", AttributeKind::Categorical),
        ])
        .expect("static schema is valid")
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlainRecord {
    pub values: Vec<String>,
    /// Ground truth for evaluation. Never encoded.
    pub entity_id: Option<String>,
}

impl PlainRecord {
    pub fn new(values: Vec<String>, entity_id: Option<String>) -> Self {
        PlainRecord { values, entity_id }
    }
}

/// All contiguous length-`q` substrings of the trimmed, lowercased value.
pub fn extract_qgrams(value: &str, q: usize) -> BTreeSet<String> {
    let normalized: Vec<char> = value.trim().to_lowercase().chars().collect();
    if q == 0 || normalized.len() < q {
        return BTreeSet::new();
    }
    normalized.windows(q).map(|w| w.iter().collect()).collect()
}

/// Number of decimals needed to render multiples of `step` exactly.
fn step_decimals(step: f64) -> usize {
    (0..=12)
        .find(|&d| {
            let scaled = step * 10f64.powi(d as i32);
            (scaled - scaled.round()).abs() < 1e-9 * scaled.abs().max(1.0)
        })
        .unwrap_or(12)
}

/// Tokens for every grid value within `interval` of `value`, the grid being
/// anchored at `value` with spacing `step`.
pub fn neighbor_tokens(value: f64, interval: f64, step: f64) -> BTreeSet<String> {
    let decimals = step_decimals(step);
    let reach = (interval / step + 1e-9).floor() as i64;
    (-reach..=reach)
        .map(|i| {
            let v = value + i as f64 * step;
            let s = format!("{v:.decimals$}");
            if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
                s.trim_start_matches('-').to_string()
            } else {
                s
            }
        })
        .collect()
}

/// Maps tagged tokens to `k` filter positions, one keyed SipHash per
/// position: `index_i = sip(key_i, token) mod ell`.
#[derive(Debug, Clone)]
pub struct TokenHasher {
    keys: Vec<(u64, u64)>,
    ell: usize,
}

impl TokenHasher {
    pub fn new(params: &EncodingParams) -> Self {
        let mut state = params.hash_seed;
        let keys = (0..params.num_hashes)
            .map(|_| (splitmix64(&mut state), splitmix64(&mut state)))
            .collect();
        TokenHasher { keys, ell: params.ell }
    }

    pub fn indices<'a>(&'a self, token: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.keys.iter().map(move |&(k0, k1)| {
            let mut h = SipHasher24::new_with_keys(k0, k1);
            h.write(token.as_bytes());
            (h.finish() % self.ell as u64) as usize
        })
    }

    pub fn insert(&self, bf: &mut BloomFilter, token: &str) {
        for i in self.indices(token) {
            bf.set(i);
        }
    }

    pub fn contains(&self, bf: &BloomFilter, token: &str) -> bool {
        self.indices(token).all(|i| bf.get(i))
    }
}

/// Encodes records of one schema under fixed parameters.
#[derive(Debug, Clone)]
pub struct Encoder {
    schema: RecordSchema,
    params: EncodingParams,
    hasher: TokenHasher,
}

impl Encoder {
    pub fn new(schema: RecordSchema, params: EncodingParams) -> Result<Self> {
        params.validate()?;
        let hasher = TokenHasher::new(&params);
        Ok(Encoder {
            schema,
            params,
            hasher,
        })
    }

    pub fn schema(&self) -> &RecordSchema {
        &self.schema
    }

    pub fn params(&self) -> &EncodingParams {
        &self.params
    }

    /// The attribute-tagged tokens of a record, e.g. `given_name:pe`.
    pub fn tokens(&self, record: &PlainRecord) -> Result<BTreeSet<String>> {
        if record.values.len() != self.schema.len() {
            return Err(Error::Schema(format!(
                "record has {} values, schema has {} attributes",
                record.values.len(),
                self.schema.len()
            )));
        }
        let mut out = BTreeSet::new();
        for (attr, value) in self.schema.attributes().iter().zip(&record.values) {
            let raw: BTreeSet<String> = match attr.kind {
                AttributeKind::String => extract_qgrams(value, self.params.q),
                AttributeKind::Numeric => {
                    let trimmed = value.trim();
                    if trimmed.is_empty() {
                        BTreeSet::new()
                    } else {
                        let v: f64 = trimmed.parse().map_err(|_| {
                            Error::Schema(format!(
                                "attribute {:?} expects a number, got {value:?}",
                                attr.name
                            ))
                        })?;
                        neighbor_tokens(v, self.params.numeric_interval, self.params.numeric_step)
                    }
                }
                AttributeKind::Categorical => {
                    let v = value.trim().to_lowercase();
                    if v.is_empty() {
                        BTreeSet::new()
                    } else {
                        BTreeSet::from([v])
                    }
                }
            };
            out.extend(raw.into_iter().map(|t| format!("{}:{t}", attr.name)));
        }
        Ok(out)
    }

    pub fn encode(&self, record: &PlainRecord) -> Result<BloomFilter> {
        let mut bf = BloomFilter::zeros(self.params.ell);
        for token in self.tokens(record)? {
            self.hasher.insert(&mut bf, &token);
        }
        Ok(bf)
    }
}

/// Convenience wrapper building a one-shot [`Encoder`].
pub fn encode_record(
    record: &PlainRecord,
    schema: &RecordSchema,
    params: &EncodingParams,
) -> Result<BloomFilter> {
    Encoder::new(schema.clone(), params.clone())?.encode(record)
}

/// Dice coefficient `2|a∧b| / (|a|+|b|)`; two empty filters score 1.
pub fn dice_similarity(a: &BloomFilter, b: &BloomFilter) -> Result<f64> {
    let common = a.and_count(b)?;
    let total = a.count_ones() + b.count_ones();
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * common as f64 / total as f64)
}

/// Expected false-positive rate `(1 - e^{-kn/ell})^k` after `n` insertions.
pub fn expected_fpr(params: &EncodingParams, n: usize) -> f64 {
    let k = params.num_hashes as f64;
    (1.0 - (-k * n as f64 / params.ell as f64).exp()).powf(k)
}
