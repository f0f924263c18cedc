//! Sweeping the cluster count and selecting `K*`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

use super::kmeans::{kmeans, kmeans_from, split_best, KMeansResult, KMeansSettings, Points};
use super::metrics::{calinski_harabasz, min_centroid_distance, silhouette, DistanceMatrix};
use super::purity::purity;
use super::references::ReferenceLayout;

/// Inclusive range of cluster counts with an optional stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KRange {
    pub start: usize,
    pub end: usize,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

impl KRange {
    pub fn new(start: usize, end: usize) -> Self {
        KRange { start, end, stride: 1 }
    }

    pub fn single(k: usize) -> Self {
        KRange::new(k, k)
    }

    /// The values in the range that are valid for `n` points.
    pub fn values(&self, n: usize) -> Result<Vec<usize>> {
        if self.stride == 0 {
            return Err(Error::param("k stride must be positive"));
        }
        if self.start == 0 || self.start > self.end || self.end > n {
            return Err(Error::param(format!(
                "k range [{}, {}] must lie within [1, {n}]",
                self.start, self.end
            )));
        }
        Ok((self.start..=self.end).step_by(self.stride).collect())
    }
}

/// Per-point class used when counting the clusters that hold real records.
pub type InputMask = [bool];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub k: usize,
    pub purity: f64,
    pub per_reference: Vec<f64>,
    pub inertia: f64,
    pub silhouette: Option<f64>,
    pub calinski_harabasz: Option<f64>,
    pub min_centroid_distance: Option<f64>,
    /// Nonempty clusters containing at least one input record.
    pub input_clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PuritySweep {
    pub entries: Vec<SweepEntry>,
    pub k_star: usize,
    pub k_silhouette: Option<usize>,
    pub k_ch: Option<usize>,
}

/// Which k wins when several attain the maximum score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    Smallest,
    /// The end of the plateau: the largest k before the score drops.
    #[default]
    Largest,
}

/// Maximiser of `score` over the entries; ties go to the smallest k.
pub fn argmax_k<T>(entries: &[T], k_of: impl Fn(&T) -> usize, score: impl Fn(&T) -> Option<f64>) -> Option<usize> {
    argmax_k_by(entries, k_of, score, TieBreak::Smallest)
}

pub fn argmax_k_by<T>(
    entries: &[T],
    k_of: impl Fn(&T) -> usize,
    score: impl Fn(&T) -> Option<f64>,
    tie: TieBreak,
) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for e in entries {
        if let Some(s) = score(e) {
            let k = k_of(e);
            let better = match best {
                None => true,
                Some((bs, bk)) => {
                    s > bs
                        || (s == bs
                            && match tie {
                                TieBreak::Smallest => k < bk,
                                TieBreak::Largest => k > bk,
                            })
                }
            };
            if better {
                best = Some((s, k));
            }
        }
    }
    best.map(|(_, k)| k)
}

/// Seed used for the k-means run at cluster count `k`.
pub fn seed_for_k(base: u64, k: usize) -> u64 {
    seed::derive(base, &[k as u64])
}

pub(crate) fn count_input_clusters(result: &KMeansResult, is_input: &InputMask) -> usize {
    let mut seen = vec![false; result.k];
    for (p, &c) in result.assignments.iter().enumerate() {
        if is_input[p] {
            seen[c] = true;
        }
    }
    seen.into_iter().filter(|&s| s).count()
}

/// Clusterings for every k in `ks`, in the order given. With
/// `warm_start`, each k after the smallest starts from the previous
/// solution with its best cluster bisected (repeatedly, for strides above
/// one); otherwise every k is seeded independently.
pub fn run_all(points: &Points, ks: &[usize], settings: &KMeansSettings) -> Result<Vec<KMeansResult>> {
    if !settings.warm_start {
        return ks
            .par_iter()
            .map(|&k| {
                let run = KMeansSettings {
                    seed: seed_for_k(settings.seed, k),
                    ..*settings
                };
                kmeans(points, k, &run)
            })
            .collect();
    }
    let mut order: Vec<usize> = (0..ks.len()).collect();
    order.sort_by_key(|&i| ks[i]);
    let mut out: Vec<Option<KMeansResult>> = vec![None; ks.len()];
    let mut prev: Option<KMeansResult> = None;
    for i in order {
        let k = ks[i];
        let res = match prev.take() {
            Some(p) if p.k < k => {
                let mut cur = p;
                while cur.k < k {
                    let init = split_best(points, &cur);
                    cur = kmeans_from(points, &init, settings)?;
                }
                cur
            }
            Some(p) if p.k == k => p,
            _ => kmeans(points, k, &KMeansSettings { seed: seed_for_k(settings.seed, k), ..*settings })?,
        };
        out[i] = Some(res.clone());
        prev = Some(res);
    }
    Ok(out.into_iter().map(|r| r.expect("every k visited")).collect())
}

/// Runs k-means for every k in `ks` and scores each clustering. `k_star`
/// maximises total purity with ties resolved by `tie`; the silhouette and
/// Calinski-Harabasz picks resolve ties to the smallest k.
pub fn sweep_k(
    points: &Points,
    layout: &ReferenceLayout,
    is_input: &InputMask,
    ks: &[usize],
    settings: &KMeansSettings,
    tie: TieBreak,
) -> Result<PuritySweep> {
    if ks.is_empty() {
        return Err(Error::param("k range is empty"));
    }
    if is_input.len() != points.len() {
        return Err(Error::param("input mask does not match the points"));
    }
    let n = points.len();
    let points = &points.clone().with_pairwise();
    let dm = DistanceMatrix::new(points);
    let runs = run_all(points, ks, settings)?;
    let entries = runs
        .par_iter()
        .map(|res| {
            let k = res.k;
            let scores = purity(layout, &res.assignments, k)?;
            let internal = k >= 2 && k < n;
            Ok(SweepEntry {
                k,
                purity: scores.total,
                per_reference: scores.per_reference,
                inertia: res.inertia,
                silhouette: if internal {
                    Some(silhouette(&dm, &res.assignments, k)?)
                } else {
                    None
                },
                calinski_harabasz: if internal {
                    Some(calinski_harabasz(points, &res.assignments, k)?)
                } else {
                    None
                },
                min_centroid_distance: min_centroid_distance(res),
                input_clusters: count_input_clusters(res, is_input),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let k_star = argmax_k_by(&entries, |e| e.k, |e| Some(e.purity), tie).expect("nonempty sweep");
    Ok(PuritySweep {
        k_silhouette: argmax_k(&entries, |e| e.k, |e| e.silhouette),
        k_ch: argmax_k(&entries, |e| e.k, |e| e.calinski_harabasz),
        entries,
        k_star,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SilhouetteSelection {
    pub k: usize,
    pub scores: Vec<(usize, f64)>,
}

/// Elbow-style baseline: the k in `ks` with the highest mean silhouette.
pub fn silhouette_select(points: &Points, ks: &[usize], settings: &KMeansSettings) -> Result<SilhouetteSelection> {
    if ks.is_empty() {
        return Err(Error::param("k range is empty"));
    }
    let n = points.len();
    if let Some(&bad) = ks.iter().find(|&&k| k < 2 || k + 1 > n) {
        return Err(Error::param(format!("silhouette needs 2 <= k <= {}, got {bad}", n.saturating_sub(1))));
    }
    let points = &points.clone().with_pairwise();
    let dm = DistanceMatrix::new(points);
    let scores = run_all(points, ks, settings)?
        .par_iter()
        .map(|res| Ok((res.k, silhouette(&dm, &res.assignments, res.k)?)))
        .collect::<Result<Vec<_>>>()?;
    let k = argmax_k(&scores, |s| s.0, |s| Some(s.1)).expect("nonempty");
    Ok(SilhouetteSelection { k, scores })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_smallest_k_on_ties() {
        let rows = [(2, 1.0), (3, 3.0), (4, 3.0), (5, 2.0)];
        assert_eq!(argmax_k(&rows, |r| r.0, |r| Some(r.1)), Some(3));
        let rev = [(5, 3.0), (4, 3.0)];
        assert_eq!(argmax_k(&rev, |r| r.0, |r| Some(r.1)), Some(4));
        let none: [(usize, f64); 0] = [];
        assert_eq!(argmax_k(&none, |r| r.0, |r| Some(r.1)), None);
        let big = |rows: &[(usize, f64)]| argmax_k_by(rows, |r| r.0, |r| Some(r.1), TieBreak::Largest);
        assert_eq!(big(&rows), Some(4));
        assert_eq!(big(&rev), Some(5));
        assert_eq!(big(&[(2, 1.0), (3, 0.5)]), Some(2));
    }

    #[test]
    fn k_range_validation() {
        assert_eq!(KRange::new(2, 6).values(10).unwrap(), vec![2, 3, 4, 5, 6]);
        assert_eq!(KRange { start: 2, end: 9, stride: 3 }.values(10).unwrap(), vec![2, 5, 8]);
        assert!(KRange::new(0, 3).values(10).is_err());
        assert!(KRange::new(4, 3).values(10).is_err());
        assert!(KRange::new(2, 11).values(10).is_err());
        assert!(KRange { start: 1, end: 2, stride: 0 }.values(10).is_err());
    }

    fn block_points(groups: &[usize], copies: usize, dim: usize) -> Points {
        let mut rows = Vec::new();
        for &start in groups {
            for _ in 0..copies {
                let mut row = vec![0f32; dim];
                row[start..start + 10].iter_mut().for_each(|v| *v = 1.0);
                rows.push(row);
            }
        }
        Points::from_rows(&rows).unwrap()
    }

    // Ten well-separated groups: a reference plus two dummies that each
    // differ from it in one bit.
    fn reference_groups() -> (Points, ReferenceLayout, Vec<usize>) {
        let dim = 200;
        let mut rows = Vec::new();
        let mut layout = ReferenceLayout {
            reference_points: Vec::new(),
            dummy_points: Vec::new(),
        };
        let mut truth = Vec::new();
        for g in 0..10 {
            let mut base = vec![0f32; dim];
            base[g * 20..g * 20 + 12].iter_mut().for_each(|v| *v = 1.0);
            layout.reference_points.push(rows.len());
            rows.push(base.clone());
            let mut dums = Vec::new();
            for d in 0..2 {
                let mut row = base.clone();
                row[g * 20 + 14 + d] = 1.0;
                dums.push(rows.len());
                rows.push(row);
            }
            layout.dummy_points.push(dums);
            truth.extend([g; 3]);
        }
        (Points::from_rows(&rows).unwrap(), layout, truth)
    }

    #[test]
    fn constructed_groups_give_k_star_ten() {
        let (pts, layout, truth) = reference_groups();
        let mask = vec![false; pts.len()];
        let ks: Vec<usize> = (2..=30).collect();
        for tie in [TieBreak::Smallest, TieBreak::Largest] {
            let sw = sweep_k(&pts, &layout, &mask, &ks, &KMeansSettings::default(), tie).unwrap();
            assert_eq!(sw.k_star, 10);
            let best = sw.entries.iter().find(|e| e.k == 10).unwrap();
            assert_eq!(best.purity, 10.0);
            assert!(sw.entries.iter().all(|e| e.k == 10 || e.purity < 10.0));
            // re-scanning the table reproduces the choice
            let max = sw.entries.iter().map(|e| e.purity).fold(f64::MIN, f64::max);
            assert_eq!(sw.entries.iter().filter(|e| e.purity == max).count(), 1);
        }
        // brute-force check that the k = 10 clustering is pure and complete
        let res = kmeans(&pts, 10, &KMeansSettings { seed: seed_for_k(0, 10), ..Default::default() }).unwrap();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                assert_eq!(res.assignments[i] == res.assignments[j], truth[i] == truth[j]);
            }
        }
    }

    #[test]
    fn singleton_range_returns_its_k() {
        let (pts, layout, _) = reference_groups();
        let mask = vec![false; pts.len()];
        for k in [1, 10, 17, 30] {
            let sw = sweep_k(&pts, &layout, &mask, &[k], &KMeansSettings::default(), TieBreak::Smallest).unwrap();
            assert_eq!(sw.k_star, k);
            assert_eq!(sw.entries.len(), 1);
        }
        assert!(sweep_k(&pts, &layout, &mask, &[], &KMeansSettings::default(), TieBreak::Smallest).is_err());
        assert!(sweep_k(&pts, &layout, &mask[1..], &[3], &KMeansSettings::default(), TieBreak::Smallest).is_err());
    }

    #[test]
    fn identical_points_tie_everywhere() {
        let rows = vec![vec![1.0f32; 16]; 12];
        let pts = Points::from_rows(&rows).unwrap();
        let layout = ReferenceLayout {
            reference_points: vec![0],
            dummy_points: vec![vec![1, 2]],
        };
        let mask = vec![false; 12];
        let ks = [2, 3, 4, 5];
        let small = sweep_k(&pts, &layout, &mask, &ks, &KMeansSettings::default(), TieBreak::Smallest).unwrap();
        let large = sweep_k(&pts, &layout, &mask, &ks, &KMeansSettings::default(), TieBreak::Largest).unwrap();
        assert!(small.entries.iter().all(|e| e.purity == small.entries[0].purity));
        assert_eq!(small.k_star, 2);
        assert_eq!(large.k_star, 5);
    }

    #[test]
    fn silhouette_picks_two_separated_groups() {
        let pts = block_points(&[0, 50], 5, 80);
        let sel = silhouette_select(&pts, &[2, 3, 4, 5, 6], &KMeansSettings::default()).unwrap();
        assert_eq!(sel.k, 2);
        assert!(silhouette_select(&pts, &[1, 2], &KMeansSettings::default()).is_err());
    }
}
