//! Internal clustering-quality scores used by the elbow-style baselines.

use crate::error::{Error, Result};

use super::kmeans::{sq_dist, KMeansResult, Points};

/// Returned instead of infinity when all within-cluster dispersion vanishes.
pub const CH_CAP: f64 = 1e12;

/// Pairwise Euclidean distances, stored as a full `n x n` matrix.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f32>,
}

impl DistanceMatrix {
    pub fn new(points: &Points) -> Self {
        let n = points.len();
        let mut d = vec![0f32; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = points.sq_dist_between(i, j).sqrt();
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        DistanceMatrix { n, d }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.d[i * self.n + j]
    }
}

/// Mean silhouette coefficient. Points in singleton clusters score 0.
pub fn silhouette(dm: &DistanceMatrix, labels: &[usize], k: usize) -> Result<f64> {
    let n = dm.len();
    if labels.len() != n {
        return Err(Error::param("label count does not match the distance matrix"));
    }
    if k < 2 {
        return Err(Error::param("silhouette needs k >= 2"));
    }
    let mut sizes = vec![0usize; k];
    for &l in labels {
        if l >= k {
            return Err(Error::param(format!("label {l} out of range for k={k}")));
        }
        sizes[l] += 1;
    }
    let mut sums = vec![0f64; k];
    let mut total = 0f64;
    for i in 0..n {
        let own = labels[i];
        if sizes[own] <= 1 {
            continue;
        }
        sums.fill(0.0);
        for j in 0..n {
            sums[labels[j]] += dm.get(i, j) as f64;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if !b.is_finite() {
            continue;
        }
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

/// Calinski-Harabasz index from labels: between-cluster dispersion over
/// `k - 1` divided by within-cluster dispersion over `n - k`.
pub fn calinski_harabasz(points: &Points, labels: &[usize], k: usize) -> Result<f64> {
    let n = points.len();
    if k < 2 || k >= n {
        return Err(Error::param(format!("Calinski-Harabasz needs 2 <= k < {n}, got {k}")));
    }
    if labels.len() != n {
        return Err(Error::param("label count does not match the points"));
    }
    let dim = points.dim();
    let mut means = vec![0f64; k * dim];
    let mut sizes = vec![0usize; k];
    let mut overall = vec![0f64; dim];
    for (i, &l) in labels.iter().enumerate() {
        if l >= k {
            return Err(Error::param(format!("label {l} out of range for k={k}")));
        }
        sizes[l] += 1;
        for (d, &x) in points.row(i).iter().enumerate() {
            means[l * dim + d] += x as f64;
            overall[d] += x as f64;
        }
    }
    overall.iter_mut().for_each(|v| *v /= n as f64);
    for c in 0..k {
        if sizes[c] > 0 {
            means[c * dim..(c + 1) * dim]
                .iter_mut()
                .for_each(|v| *v /= sizes[c] as f64);
        }
    }
    let mut between = 0f64;
    for c in 0..k {
        let sq: f64 = means[c * dim..(c + 1) * dim]
            .iter()
            .zip(&overall)
            .map(|(m, o)| (m - o) * (m - o))
            .sum();
        between += sizes[c] as f64 * sq;
    }
    let mut within = 0f64;
    for (i, &l) in labels.iter().enumerate() {
        within += points
            .row(i)
            .iter()
            .zip(&means[l * dim..(l + 1) * dim])
            .map(|(&x, m)| (x as f64 - m) * (x as f64 - m))
            .sum::<f64>();
    }
    if within <= 1e-12 {
        return Ok(CH_CAP);
    }
    Ok(((between / (k - 1) as f64) / (within / (n - k) as f64)).min(CH_CAP))
}

/// Smallest Euclidean distance between two centroids of nonempty clusters.
pub fn min_centroid_distance(result: &KMeansResult) -> Option<f64> {
    let sizes = result.cluster_sizes();
    let live: Vec<usize> = (0..result.k).filter(|&c| sizes[c] > 0).collect();
    let mut best: Option<f64> = None;
    for (x, &a) in live.iter().enumerate() {
        for &b in &live[x + 1..] {
            let d = (sq_dist(result.centroid(a), result.centroid(b)) as f64).sqrt();
            best = Some(best.map_or(d, |v: f64| v.min(d)));
        }
    }
    best
}
