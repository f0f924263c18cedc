//! Reference filters with labelled dummy copies, and the pooled point set
//! the linkage unit clusters.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bloom::BloomFilter;
use crate::error::{Error, Result};
use crate::ldp::EncodedDataset;
use crate::seed;

/// How reference filters are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReferenceMethod {
    /// Uniformly random fake filters (every bit a fair coin).
    A,
    /// Copies of filters sampled without replacement from the pooled inputs.
    B,
}

impl std::fmt::Display for ReferenceMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReferenceMethod::A => "A",
            ReferenceMethod::B => "B",
        })
    }
}

impl std::str::FromStr for ReferenceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(ReferenceMethod::A),
            "B" | "b" => Ok(ReferenceMethod::B),
            other => Err(Error::param(format!("unknown reference method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    pub method: ReferenceMethod,
    /// `n_ref = max(1, round(pick_ratio * N))`.
    pub pick_ratio: f64,
    /// Total dummies `max(n_ref, round(dummy_ratio * N))`.
    pub dummy_ratio: f64,
    pub p_flip: f64,
    pub seed: u64,
    /// Drop the pooled originals that Method B references were copied from.
    #[serde(default)]
    pub exclude_sampled_originals: bool,
}

impl ReferenceConfig {
    pub fn new(method: ReferenceMethod, p_flip: f64, seed: u64) -> Self {
        ReferenceConfig {
            method,
            pick_ratio: 0.1,
            dummy_ratio: 0.1,
            p_flip,
            seed,
            exclude_sampled_originals: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pick_ratio > 0.0 && self.pick_ratio <= 1.0) {
            return Err(Error::param(format!("pick_ratio must be in (0, 1], got {}", self.pick_ratio)));
        }
        if !(self.dummy_ratio > 0.0) || !self.dummy_ratio.is_finite() {
            return Err(Error::param(format!("dummy_ratio must be positive, got {}", self.dummy_ratio)));
        }
        if !(0.0..=0.5).contains(&self.p_flip) {
            return Err(Error::param(format!("p_flip must be in [0, 0.5], got {}", self.p_flip)));
        }
        Ok(())
    }

    pub fn reference_count(&self, pool_size: usize) -> usize {
        ((self.pick_ratio * pool_size as f64).round() as usize).max(1)
    }

    pub fn dummy_count(&self, pool_size: usize) -> usize {
        let n_ref = self.reference_count(pool_size);
        ((self.dummy_ratio * pool_size as f64).round() as usize).max(n_ref)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    pub references: Vec<BloomFilter>,
    /// For Method B, the pooled input position each reference was copied from.
    pub sources: Vec<Option<usize>>,
    /// `(reference id, filter)` pairs.
    pub dummies: Vec<(usize, BloomFilter)>,
}

impl ReferenceSet {
    pub fn len(&self) -> usize {
        self.references.len()
    }

    pub fn is_empty(&self) -> bool {
        self.references.is_empty()
    }

    pub fn dummies_per_reference(&self) -> Vec<usize> {
        let mut counts = vec![0; self.references.len()];
        for (r, _) in &self.dummies {
            counts[*r] += 1;
        }
        counts
    }
}

fn flip_each(bf: &BloomFilter, p: f64, rng: &mut impl Rng) -> BloomFilter {
    let mut out = bf.clone();
    if p > 0.0 {
        for i in 0..out.len() {
            if rng.gen::<f64>() < p {
                out.flip(i);
            }
        }
    }
    out
}

/// Splits `total` as evenly as possible over `parts`, earlier parts first.
pub fn split_evenly(total: usize, parts: usize) -> Vec<usize> {
    let base = total / parts;
    let extra = total % parts;
    (0..parts).map(|i| base + usize::from(i < extra)).collect()
}

pub fn make_references(inputs: &[EncodedDataset], cfg: &ReferenceConfig) -> Result<ReferenceSet> {
    cfg.validate()?;
    let pooled: Vec<&BloomFilter> = inputs.iter().flat_map(|d| d.filters.iter()).collect();
    if pooled.is_empty() {
        return Err(Error::param("cannot build references from an empty pool"));
    }
    let ell = pooled[0].len();
    if let Some(bad) = pooled.iter().find(|f| f.len() != ell) {
        return Err(Error::LengthMismatch {
            expected: ell,
            actual: bad.len(),
        });
    }
    let n = pooled.len();
    let n_ref = cfg.reference_count(n);

    let mut rng = seed::rng(seed::derive(cfg.seed, &[0]));
    let (references, sources): (Vec<BloomFilter>, Vec<Option<usize>>) = match cfg.method {
        ReferenceMethod::A => (0..n_ref)
            .map(|_| {
                let bits: Vec<bool> = (0..ell).map(|_| rng.gen::<bool>()).collect();
                (BloomFilter::from_bits(&bits), None)
            })
            .unzip(),
        ReferenceMethod::B => {
            if n_ref > n {
                return Err(Error::param(format!("{n_ref} references requested from a pool of {n}")));
            }
            let mut picks = sample(&mut rng, n, n_ref).into_vec();
            picks.sort_unstable();
            picks.into_iter().map(|i| (pooled[i].clone(), Some(i))).unzip()
        }
    };

    let per_ref = split_evenly(cfg.dummy_count(n), n_ref);
    let mut dummies = Vec::with_capacity(per_ref.iter().sum());
    for (r, (reference, &count)) in references.iter().zip(&per_ref).enumerate() {
        let mut drng = seed::rng(seed::derive(cfg.seed, &[1, r as u64]));
        for _ in 0..count {
            dummies.push((r, flip_each(reference, cfg.p_flip, &mut drng)));
        }
    }
    Ok(ReferenceSet {
        references,
        sources,
        dummies,
    })
}

/// What a pooled point is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointRole {
    Input { dataset: usize, index: usize },
    Reference(usize),
    Dummy(usize),
}

/// The clustering input: references, then dummies, then every input filter.
#[derive(Debug, Clone)]
pub struct Pool {
    pub filters: Vec<BloomFilter>,
    pub roles: Vec<PointRole>,
}

/// Pool positions of each reference and of its dummies.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceLayout {
    pub reference_points: Vec<usize>,
    pub dummy_points: Vec<Vec<usize>>,
}

impl Pool {
    pub fn build(inputs: &[EncodedDataset], refs: &ReferenceSet, exclude_sampled_originals: bool) -> Self {
        let mut filters = Vec::new();
        let mut roles = Vec::new();
        for (r, f) in refs.references.iter().enumerate() {
            filters.push(f.clone());
            roles.push(PointRole::Reference(r));
        }
        for (r, f) in &refs.dummies {
            filters.push(f.clone());
            roles.push(PointRole::Dummy(*r));
        }
        let excluded: std::collections::BTreeSet<usize> = if exclude_sampled_originals {
            refs.sources.iter().flatten().copied().collect()
        } else {
            Default::default()
        };
        let mut pooled_pos = 0;
        for (d, ds) in inputs.iter().enumerate() {
            for (i, f) in ds.filters.iter().enumerate() {
                if !excluded.contains(&pooled_pos) {
                    filters.push(f.clone());
                    roles.push(PointRole::Input { dataset: d, index: i });
                }
                pooled_pos += 1;
            }
        }
        Pool { filters, roles }
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn layout(&self) -> ReferenceLayout {
        let n_ref = self
            .roles
            .iter()
            .filter(|r| matches!(r, PointRole::Reference(_)))
            .count();
        let mut reference_points = vec![usize::MAX; n_ref];
        let mut dummy_points = vec![Vec::new(); n_ref];
        for (p, role) in self.roles.iter().enumerate() {
            match *role {
                PointRole::Reference(r) => reference_points[r] = p,
                PointRole::Dummy(r) => dummy_points[r].push(p),
                PointRole::Input { .. } => {}
            }
        }
        ReferenceLayout {
            reference_points,
            dummy_points,
        }
    }

    pub fn is_input(&self, p: usize) -> bool {
        matches!(self.roles[p], PointRole::Input { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(n: usize, ell: usize) -> EncodedDataset {
        let filters = (0..n)
            .map(|i| BloomFilter::from_indices(ell, [i % ell, (i * 7) % ell]).unwrap())
            .collect();
        EncodedDataset::new("p", 2.0, filters).unwrap()
    }

    #[test]
    fn default_ratios_at_full_scale() {
        let cfg = ReferenceConfig::new(ReferenceMethod::A, 0.2, 1);
        let refs = make_references(&[dataset(200, 200)], &cfg).unwrap();
        assert_eq!(refs.len(), 20);
        assert_eq!(refs.dummies.len(), 20);
        assert!(refs.dummies_per_reference().iter().all(|&c| c == 1));
    }

    #[test]
    fn zero_flip_dummies_copy_reference() {
        for method in [ReferenceMethod::A, ReferenceMethod::B] {
            let cfg = ReferenceConfig {
                dummy_ratio: 0.35,
                ..ReferenceConfig::new(method, 0.0, 4)
            };
            let refs = make_references(&[dataset(60, 64), dataset(40, 64)], &cfg).unwrap();
            assert_eq!(refs.len(), 10);
            assert_eq!(refs.dummies_per_reference(), vec![4, 4, 4, 4, 4, 3, 3, 3, 3, 3]);
            for (r, d) in &refs.dummies {
                assert_eq!(d, &refs.references[*r]);
            }
        }
    }

    #[test]
    fn method_a_is_fair_coin() {
        let cfg = ReferenceConfig {
            pick_ratio: 1.0,
            ..ReferenceConfig::new(ReferenceMethod::A, 0.1, 2)
        };
        let refs = make_references(&[dataset(1000, 200)], &cfg).unwrap();
        let mean = refs.references.iter().map(|r| r.count_ones()).sum::<usize>() as f64 / 1000.0;
        assert!((mean - 100.0).abs() < 5.0, "{mean}");
    }

    #[test]
    fn method_b_copies_inputs_without_replacement() {
        let inputs = [dataset(30, 64), dataset(20, 64)];
        let cfg = ReferenceConfig {
            pick_ratio: 0.5,
            ..ReferenceConfig::new(ReferenceMethod::B, 0.1, 9)
        };
        let refs = make_references(&inputs, &cfg).unwrap();
        let pooled: Vec<_> = inputs.iter().flat_map(|d| d.filters.clone()).collect();
        let mut srcs: Vec<usize> = refs.sources.iter().map(|s| s.unwrap()).collect();
        for (r, &s) in refs.references.iter().zip(&srcs) {
            assert_eq!(r, &pooled[s]);
        }
        srcs.dedup();
        assert_eq!(srcs.len(), 25);
    }

    #[test]
    fn rejects_bad_configs() {
        let ds = [dataset(10, 16)];
        let mut cfg = ReferenceConfig::new(ReferenceMethod::A, 0.6, 0);
        assert!(make_references(&ds, &cfg).is_err());
        cfg.p_flip = 0.1;
        cfg.pick_ratio = 0.0;
        assert!(make_references(&ds, &cfg).is_err());
        cfg.pick_ratio = 0.1;
        cfg.dummy_ratio = 0.0;
        assert!(make_references(&ds, &cfg).is_err());
        cfg.dummy_ratio = 0.1;
        assert!(make_references(&[], &cfg).is_err());
    }

    #[test]
    fn pool_layout_and_exclusion() {
        let inputs = [dataset(20, 32)];
        let cfg = ReferenceConfig {
            pick_ratio: 0.1,
            dummy_ratio: 0.2,
            ..ReferenceConfig::new(ReferenceMethod::B, 0.1, 3)
        };
        let refs = make_references(&inputs, &cfg).unwrap();
        let pool = Pool::build(&inputs, &refs, false);
        assert_eq!(pool.len(), 2 + 4 + 20);
        let layout = pool.layout();
        assert_eq!(layout.reference_points, vec![0, 1]);
        assert_eq!(layout.dummy_points, vec![vec![2, 3], vec![4, 5]]);
        let slim = Pool::build(&inputs, &refs, true);
        assert_eq!(slim.len(), 2 + 4 + 18);
    }

    #[test]
    fn deterministic() {
        let cfg = ReferenceConfig::new(ReferenceMethod::B, 0.25, 77);
        let a = make_references(&[dataset(50, 64)], &cfg).unwrap();
        let b = make_references(&[dataset(50, 64)], &cfg).unwrap();
        assert_eq!(a, b);
    }
}
