//! Synthetic voter-style datasets with ground truth, duplicates and
//! character-edit corruption.

pub mod lexicon;

use rand::seq::{index::sample, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{AttributeKind, PlainRecord, RecordSchema};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditOp {
    Insert,
    Delete,
    Substitute,
    Transpose,
}

impl EditOp {
    pub const ALL: [EditOp; 4] = [EditOp::Insert, EditOp::Delete, EditOp::Substitute, EditOp::Transpose];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionConfig {
    /// Share of duplicate records that receive edits.
    pub record_corruption_fraction: f64,
    /// Inclusive range of edits applied to a corrupted record.
    pub edits_per_record: (usize, usize),
    pub edit_ops: Vec<EditOp>,
    pub seed: u64,
}

impl CorruptionConfig {
    pub fn clean(seed: u64) -> Self {
        Self::with_fraction(0.0, seed)
    }

    pub fn with_fraction(fraction: f64, seed: u64) -> Self {
        CorruptionConfig {
            record_corruption_fraction: fraction,
            edits_per_record: (1, 2),
            edit_ops: EditOp::ALL.to_vec(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.record_corruption_fraction) {
            return Err(Error::param("record_corruption_fraction must be in [0, 1]"));
        }
        if self.record_corruption_fraction > 0.0 && self.edit_ops.is_empty() {
            return Err(Error::param("corruption needs at least one edit operation"));
        }
        let (lo, hi) = self.edits_per_record;
        if lo == 0 || lo > hi {
            return Err(Error::param("edits_per_record must be a range with 1 <= lo <= hi"));
        }
        Ok(())
    }
}

/// Number of extra copies emitted per entity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DuplicateCount {
    Fixed(usize),
    /// Uniform over the inclusive range.
    Uniform(usize, usize),
}

impl Default for DuplicateCount {
    fn default() -> Self {
        DuplicateCount::Fixed(1)
    }
}

impl DuplicateCount {
    fn sample(&self, rng: &mut impl Rng) -> usize {
        match *self {
            DuplicateCount::Fixed(n) => n,
            DuplicateCount::Uniform(lo, hi) => rng.gen_range(lo..=hi.max(lo)),
        }
    }
}

/// Generation settings echoed next to the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationManifest {
    pub entities: usize,
    pub k_true: usize,
    pub entity_seed: u64,
    pub duplicates: DuplicateCount,
    pub corruption: CorruptionConfig,
    pub num_providers: usize,
    pub split_seed: u64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub providers: Vec<(String, Vec<PlainRecord>)>,
    pub k_true: usize,
}

impl DatasetBundle {
    pub fn record_count(&self) -> usize {
        self.providers.iter().map(|(_, r)| r.len()).sum()
    }
}

/// `n` distinct entities over [`RecordSchema::voter`].
pub fn generate_entities(n: usize, seed: u64) -> Result<Vec<PlainRecord>> {
    if n == 0 {
        return Err(Error::param("need at least one entity"));
    }
    let mut rng = seed::rng(seed);
    let width = n.to_string().len().max(5);
    Ok((0..n)
        .map(|i| {
            let pick = |rng: &mut rand_chacha::ChaCha8Rng, list: &[&str]| {
                list[rng.gen_range(0..list.len())].to_string()
            };
            let given = pick(&mut rng, lexicon::GIVEN_NAMES);
            let surname = pick(&mut rng, lexicon::SURNAMES);
            let suburb = pick(&mut rng, lexicon::SUBURBS);
            let postcode = format!("{:05}", rng.gen_range(27006..=28909));
            let gender = if rng.gen::<bool>() { "m" } else { "f" }.to_string();
            PlainRecord::new(
                vec![given, surname, suburb, postcode, gender],
                Some(format!("ent{i:0width$}")),
            )
        })
        .collect())
}

const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

pub fn insert_char(s: &str, pos: usize, c: char) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    chars.insert(pos.min(chars.len()), c);
    chars.into_iter().collect()
}

pub fn delete_char(s: &str, pos: usize) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    if pos < chars.len() {
        chars.remove(pos);
    }
    chars.into_iter().collect()
}

pub fn substitute_char(s: &str, pos: usize, c: char) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    if pos < chars.len() {
        chars[pos] = c;
    }
    chars.into_iter().collect()
}

/// Swaps the characters at `pos` and `pos + 1`.
pub fn transpose_chars(s: &str, pos: usize) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    if pos + 1 < chars.len() {
        chars.swap(pos, pos + 1);
    }
    chars.into_iter().collect()
}

fn random_letter_except(rng: &mut impl Rng, not: Option<char>) -> char {
    loop {
        let c = ALPHABET[rng.gen_range(0..ALPHABET.len())] as char;
        if Some(c) != not {
            return c;
        }
    }
}

/// Applies one random edit that changes `s`, or returns `None` if `op`
/// cannot change it (e.g. deleting from or transposing an empty string).
fn random_edit(s: &str, op: EditOp, rng: &mut impl Rng) -> Option<String> {
    let chars: Vec<char> = s.chars().collect();
    let len = chars.len();
    match op {
        EditOp::Insert => {
            let pos = rng.gen_range(0..=len);
            Some(insert_char(s, pos, random_letter_except(rng, None)))
        }
        EditOp::Delete if len > 0 => Some(delete_char(s, rng.gen_range(0..len))),
        EditOp::Substitute if len > 0 => {
            let pos = rng.gen_range(0..len);
            Some(substitute_char(s, pos, random_letter_except(rng, Some(chars[pos]))))
        }
        EditOp::Transpose => {
            let spots: Vec<usize> = (0..len.saturating_sub(1)).filter(|&i| chars[i] != chars[i + 1]).collect();
            spots.choose(rng).map(|&pos| transpose_chars(s, pos))
        }
        _ => None,
    }
}

fn corrupt_record(record: &PlainRecord, string_attrs: &[usize], cfg: &CorruptionConfig, rng: &mut impl Rng) -> PlainRecord {
    let mut out = record.clone();
    let (lo, hi) = cfg.edits_per_record;
    let edits = rng.gen_range(lo..=hi);
    let mut applied = 0;
    let mut attempts = 0;
    // keep going until the requested edits landed and the record changed
    while (applied < edits || out.values == record.values) && attempts < 1000 {
        attempts += 1;
        let attr = *string_attrs.choose(rng).expect("string attributes present");
        let op = *cfg.edit_ops.choose(rng).expect("edit ops present");
        if let Some(v) = random_edit(&out.values[attr], op, rng) {
            out.values[attr] = v;
            applied += 1;
        }
    }
    out
}

/// Emits each entity followed by its duplicates; an exact
/// `round(fraction * duplicates)` of the duplicates are corrupted.
pub fn duplicate_and_corrupt(
    entities: &[PlainRecord],
    schema: &RecordSchema,
    duplicates: DuplicateCount,
    cfg: &CorruptionConfig,
) -> Result<Vec<PlainRecord>> {
    cfg.validate()?;
    if entities.is_empty() {
        return Err(Error::param("need at least one entity"));
    }
    let string_attrs: Vec<usize> = schema
        .attributes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.kind == AttributeKind::String)
        .map(|(i, _)| i)
        .collect();
    if cfg.record_corruption_fraction > 0.0 && string_attrs.is_empty() {
        return Err(Error::param("corruption needs at least one string attribute"));
    }

    let mut rng = seed::rng(seed::derive(cfg.seed, &[0]));
    let mut out = Vec::new();
    let mut dup_positions = Vec::new();
    for e in entities {
        if e.values.len() != schema.len() {
            return Err(Error::Schema("entity does not match schema".into()));
        }
        out.push(e.clone());
        for _ in 0..duplicates.sample(&mut rng) {
            dup_positions.push(out.len());
            out.push(e.clone());
        }
    }
    let target = (cfg.record_corruption_fraction * dup_positions.len() as f64).round() as usize;
    let mut chosen = sample(&mut rng, dup_positions.len(), target).into_vec();
    chosen.sort_unstable();
    for idx in chosen {
        let pos = dup_positions[idx];
        let mut erng = seed::rng(seed::derive(cfg.seed, &[1, pos as u64]));
        out[pos] = corrupt_record(&out[pos], &string_attrs, cfg, &mut erng);
    }
    Ok(out)
}

/// Shuffles the records and deals them round-robin to `num_providers`
/// providers named `p0`, `p1`, ...
pub fn split_providers(records: Vec<PlainRecord>, num_providers: usize, seed: u64) -> Result<DatasetBundle> {
    if num_providers == 0 {
        return Err(Error::param("need at least one provider"));
    }
    let mut ids: Vec<&str> = records
        .iter()
        .map(|r| {
            r.entity_id
                .as_deref()
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::param("every generated record needs an entity id"))
        })
        .collect::<Result<_>>()?;
    ids.sort_unstable();
    ids.dedup();
    let k_true = ids.len();

    let mut records = records;
    records.shuffle(&mut seed::rng(seed));
    let mut providers: Vec<(String, Vec<PlainRecord>)> =
        (0..num_providers).map(|p| (format!("p{p}"), Vec::new())).collect();
    for (i, r) in records.into_iter().enumerate() {
        providers[i % num_providers].1.push(r);
    }
    Ok(DatasetBundle { providers, k_true })
}

/// Entities, duplicates, corruption and provider split in one call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleSpec {
    pub entities: usize,
    pub duplicates: DuplicateCount,
    pub corruption_fraction: f64,
    pub num_providers: usize,
    pub seed: u64,
}

impl BundleSpec {
    pub fn clean(entities: usize, seed: u64) -> Self {
        BundleSpec {
            entities,
            duplicates: DuplicateCount::Fixed(1),
            corruption_fraction: 0.0,
            num_providers: 2,
            seed,
        }
    }

    pub fn generate(&self) -> Result<(DatasetBundle, GenerationManifest)> {
        let schema = RecordSchema::voter();
        let entity_seed = seed::derive(self.seed, &[10]);
        let split_seed = seed::derive(self.seed, &[12]);
        let corruption = CorruptionConfig::with_fraction(self.corruption_fraction, seed::derive(self.seed, &[11]));
        let entities = generate_entities(self.entities, entity_seed)?;
        let records = duplicate_and_corrupt(&entities, &schema, self.duplicates, &corruption)?;
        let bundle = split_providers(records, self.num_providers, split_seed)?;
        let manifest = GenerationManifest {
            entities: self.entities,
            k_true: bundle.k_true,
            entity_seed,
            duplicates: self.duplicates,
            corruption,
            num_providers: self.num_providers,
            split_seed,
            notes: vec![
                "duplicate count and provider split are generator defaults, not measured values".into(),
                "corruption uses character edits only".into(),
            ],
        };
        Ok((bundle, manifest))
    }
}
