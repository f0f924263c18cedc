//! Lloyd's k-means on bit vectors embedded in real space.
//!
//! Seeding is greedy k-means++ (several D²-sampled candidates per centre,
//! keeping the one that lowers the potential most). The assignment step uses
//! Hamerly's bounds so that points whose nearest centre provably did not
//! change are skipped.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bloom::BloomFilter;
use crate::error::{Error, Result};
use crate::seed;

/// Row-major dense matrix of points, optionally carrying the full matrix of
/// pairwise squared distances (used by seeding when many k are tried on the
/// same points).
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    data: Vec<f32>,
    n: usize,
    dim: usize,
    pairwise: Option<Vec<f32>>,
    support: Option<Vec<Support>>,
}

/// The coordinates of a 0/1 row that need visiting: its ones, or its zeros
/// when there are fewer of those.
#[derive(Debug, Clone, PartialEq)]
struct Support {
    zeros: bool,
    idx: Vec<u32>,
}

fn binary_support(data: &[f32], dim: usize) -> Option<Vec<Support>> {
    if data.iter().any(|&x| x != 0.0 && x != 1.0) {
        return None;
    }
    Some(
        data.chunks_exact(dim)
            .map(|row| {
                let ones = row.iter().filter(|&&x| x == 1.0).count();
                let zeros = 2 * ones > dim;
                let want = if zeros { 0.0 } else { 1.0 };
                let idx = (0..dim as u32).filter(|&d| row[d as usize] == want).collect();
                Support { zeros, idx }
            })
            .collect(),
    )
}

impl Points {
    pub fn from_filters(filters: &[BloomFilter]) -> Result<Self> {
        let dim = crate::ldp::common_length(filters)?;
        let mut data = vec![0f32; filters.len() * dim];
        for (row, f) in data.chunks_exact_mut(dim).zip(filters) {
            f.write_dense(row);
        }
        let support = binary_support(&data, dim);
        Ok(Points {
            data,
            n: filters.len(),
            dim,
            pairwise: None,
            support,
        })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || dim == 0 {
            return Err(Error::param("points must be nonempty"));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::param("rows must share one dimension"));
        }
        let data = rows.concat();
        let support = binary_support(&data, dim);
        Ok(Points {
            data,
            n: rows.len(),
            dim,
            pairwise: None,
            support,
        })
    }

    /// Precomputes all pairwise squared distances.
    pub fn with_pairwise(mut self) -> Self {
        let n = self.n;
        let mut m = vec![0f32; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = sq_dist(self.row(i), self.row(j));
                m[i * n + j] = d;
                m[j * n + i] = d;
            }
        }
        self.pairwise = Some(m);
        self
    }

    /// Squared distance between points `i` and `j`.
    #[inline]
    pub fn sq_dist_between(&self, i: usize, j: usize) -> f32 {
        match &self.pairwise {
            Some(m) => m[i * self.n + j],
            None => sq_dist(self.row(i), self.row(j)),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

#[inline]
pub fn sq_dist(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0f32; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            let d = x[l] - y[l];
            acc[l] += d * d;
        }
    }
    let mut tail = 0f32;
    for (x, y) in ra.iter().zip(rb) {
        let d = x - y;
        tail += d * d;
    }
    acc.iter().sum::<f32>() + tail
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansSettings {
    pub max_iter: usize,
    /// Convergence threshold on the summed squared centroid movement.
    pub tol: f64,
    pub seed: u64,
    /// Independent restarts; the lowest-inertia run is kept.
    pub n_init: usize,
    /// After Lloyd converges, try merge-one/split-one moves that lower the
    /// inertia further.
    pub refine: bool,
    /// In a sweep over k, start each k from the previous solution.
    pub warm_start: bool,
}

impl Default for KMeansSettings {
    fn default() -> Self {
        KMeansSettings {
            max_iter: 300,
            tol: 1e-4,
            seed: 0,
            n_init: 1,
            refine: true,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub k: usize,
    pub assignments: Vec<usize>,
    /// Row-major `k x dim` centroid matrix.
    pub centroids: Vec<f32>,
    pub dim: usize,
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
}

impl KMeansResult {
    pub fn centroid(&self, c: usize) -> &[f32] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

fn kmeans_plus_plus(points: &Points, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let n = points.len();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let mut centers = Vec::with_capacity(k);
    let first = rng.gen_range(0..n);
    centers.push(first);
    let mut closest: Vec<f32> = (0..n).map(|i| points.sq_dist_between(i, first)).collect();
    let mut cumulative = vec![0f64; n];
    let mut candidate_d = vec![0f32; n];
    let mut best_d = vec![0f32; n];
    while centers.len() < k {
        let mut total = 0f64;
        for (c, &d) in cumulative.iter_mut().zip(&closest) {
            total += d as f64;
            *c = total;
        }
        if total <= 0.0 {
            // every point coincides with a centre; any choice is as good
            let pick = (0..n)
                .find(|i| !centers.contains(i))
                .expect("k <= n leaves an unused point");
            centers.push(pick);
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for _ in 0..trials {
            let target = rng.gen::<f64>() * total;
            let cand = cumulative.partition_point(|&c| c <= target).min(n - 1);
            let mut potential = 0f64;
            for i in 0..n {
                let d = points.sq_dist_between(i, cand).min(closest[i]);
                candidate_d[i] = d;
                potential += d as f64;
            }
            if best.is_none_or(|(p, _)| potential < p) {
                best = Some((potential, cand));
                std::mem::swap(&mut best_d, &mut candidate_d);
            }
        }
        let (_, pick) = best.expect("at least one trial");
        centers.push(pick);
        std::mem::swap(&mut closest, &mut best_d);
    }
    centers
}

struct Nearest {
    best: usize,
    best_d2: f32,
    second_d2: f32,
}

/// Point-to-centroid squared distances. For 0/1 points,
/// `|x - c|^2 = sum(c^2) + sum over ones of x of (1 - 2c)`, and the sum over
/// ones equals the total minus the sum over zeros, so only the shorter index
/// list of each point is visited.
struct Dist<'a> {
    points: &'a Points,
    sq: Vec<f64>,
    w: Vec<f64>,
    wsum: Vec<f64>,
}

impl<'a> Dist<'a> {
    fn new(points: &'a Points, centroids: &[f32]) -> Self {
        let mut d = Dist {
            points,
            sq: Vec::new(),
            w: Vec::new(),
            wsum: Vec::new(),
        };
        d.refresh(centroids);
        d
    }

    fn refresh(&mut self, centroids: &[f32]) {
        if self.points.support.is_none() {
            return;
        }
        let dim = self.points.dim;
        self.w.clear();
        self.w.extend(centroids.iter().map(|&c| 1.0 - 2.0 * c as f64));
        self.sq = centroids
            .chunks_exact(dim)
            .map(|c| c.iter().map(|&x| x as f64 * x as f64).sum())
            .collect();
        self.wsum = self.w.chunks_exact(dim).map(|w| w.iter().sum()).collect();
    }

    #[inline]
    fn get(&self, i: usize, c: usize, centroids: &[f32]) -> f32 {
        let dim = self.points.dim;
        match &self.points.support {
            Some(sup) => {
                let s = &sup[i];
                let w = &self.w[c * dim..(c + 1) * dim];
                let part: f64 = s.idx.iter().map(|&d| w[d as usize]).sum();
                let lin = if s.zeros { self.wsum[c] - part } else { part };
                (self.sq[c] + lin).max(0.0) as f32
            }
            None => sq_dist(self.points.row(i), &centroids[c * dim..(c + 1) * dim]),
        }
    }

    fn nearest_two(&self, i: usize, centroids: &[f32]) -> Nearest {
        let k = centroids.len() / self.points.dim;
        let mut out = Nearest {
            best: 0,
            best_d2: f32::INFINITY,
            second_d2: f32::INFINITY,
        };
        for c in 0..k {
            let d = self.get(i, c, centroids);
            if d < out.best_d2 {
                out.second_d2 = out.best_d2;
                out.best_d2 = d;
                out.best = c;
            } else if d < out.second_d2 {
                out.second_d2 = d;
            }
        }
        out
    }
}


/// Runs k-means with `1 <= k <= points.len()`.
pub fn kmeans(points: &Points, k: usize, settings: &KMeansSettings) -> Result<KMeansResult> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::param(format!("k must be in [1, {n}], got {k}")));
    }
    if settings.n_init == 0 {
        return Err(Error::param("n_init must be at least 1"));
    }
    let mut best = lloyd(points, k, settings, settings.seed);
    for run in 1..settings.n_init {
        let cand = lloyd(points, k, settings, seed::derive(settings.seed, &[run as u64]));
        if cand.inertia < best.inertia {
            best = cand;
        }
    }
    Ok(best)
}

fn lloyd(points: &Points, k: usize, settings: &KMeansSettings, run_seed: u64) -> KMeansResult {
    let dim = points.dim();
    let mut rng = seed::rng(run_seed);
    let seeds = kmeans_plus_plus(points, k, &mut rng);
    let mut centroids = Vec::with_capacity(k * dim);
    for &s in &seeds {
        centroids.extend_from_slice(points.row(s));
    }
    let mut res = lloyd_from(points, k, centroids, settings);
    if settings.refine {
        refine(points, &mut res, settings);
    }
    res
}

/// Runs Lloyd (and the refinement, if enabled) from the given `k x dim`
/// centroid matrix instead of seeding.
pub fn kmeans_from(points: &Points, init: &[f32], settings: &KMeansSettings) -> Result<KMeansResult> {
    let dim = points.dim();
    if init.is_empty() || init.len() % dim != 0 {
        return Err(Error::param("initial centroids must be a nonempty k x dim matrix"));
    }
    let k = init.len() / dim;
    if k > points.len() {
        return Err(Error::param(format!("k must be in [1, {}], got {k}", points.len())));
    }
    let mut res = lloyd_from(points, k, init.to_vec(), settings);
    if settings.refine {
        refine(points, &mut res, settings);
    }
    Ok(res)
}

/// Centroids for `k + 1` clusters: the cluster whose bisection lowers the
/// inertia most is replaced by its two halves.
pub fn split_best(points: &Points, res: &KMeansResult) -> Vec<f32> {
    let dim = res.dim;
    let mut members = vec![Vec::new(); res.k];
    for (i, &a) in res.assignments.iter().enumerate() {
        members[a].push(i);
    }
    let best = members
        .iter()
        .enumerate()
        .filter_map(|(c, m)| best_split(points, m, res.centroid(c)).map(|(g, ca, cb)| (g, c, ca, cb)))
        .max_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)));
    let mut out = res.centroids.clone();
    match best {
        Some((_, c, ca, cb)) => {
            out[c * dim..(c + 1) * dim].copy_from_slice(&ca);
            out.extend_from_slice(&cb);
        }
        None => {
            // every cluster is a set of identical points; the extra centre
            // starts empty and is re-seeded by Lloyd
            out.extend_from_slice(res.centroid(0));
        }
    }
    out
}

fn mean_of(points: &Points, members: &[usize]) -> Vec<f32> {
    let dim = points.dim();
    let mut acc = vec![0f64; dim];
    for &i in members {
        for (a, &x) in acc.iter_mut().zip(points.row(i)) {
            *a += x as f64;
        }
    }
    let inv = 1.0 / members.len().max(1) as f64;
    acc.into_iter().map(|a| (a * inv) as f32).collect()
}

fn sse_of(points: &Points, members: &[usize], centre: &[f32]) -> f64 {
    members.iter().map(|&i| sq_dist(points.row(i), centre) as f64).sum()
}

/// Best two-way split of one cluster: `(gain, centre_a, centre_b)`.
fn best_split(points: &Points, members: &[usize], centre: &[f32]) -> Option<(f64, Vec<f32>, Vec<f32>)> {
    if members.len() < 2 {
        return None;
    }
    let far = |from: &[f32]| {
        members
            .iter()
            .copied()
            .max_by(|&x, &y| sq_dist(points.row(x), from).total_cmp(&sq_dist(points.row(y), from)).then(y.cmp(&x)))
            .expect("nonempty")
    };
    let p = far(centre);
    let q = far(points.row(p));
    if sq_dist(points.row(p), points.row(q)) == 0.0 {
        return None;
    }
    let mut ca = points.row(p).to_vec();
    let mut cb = points.row(q).to_vec();
    let mut parts = (Vec::new(), Vec::new());
    for _ in 0..10 {
        let (a, b): (Vec<usize>, Vec<usize>) = members
            .iter()
            .partition(|&&i| sq_dist(points.row(i), &ca) <= sq_dist(points.row(i), &cb));
        if a.is_empty() || b.is_empty() || (a == parts.0 && b == parts.1) {
            break;
        }
        ca = mean_of(points, &a);
        cb = mean_of(points, &b);
        parts = (a, b);
    }
    if parts.0.is_empty() {
        return None;
    }
    let gain = sse_of(points, members, centre) - sse_of(points, &parts.0, &ca) - sse_of(points, &parts.1, &cb);
    Some((gain, ca, cb))
}

/// Greedy local search: merge the two clusters whose union costs least and
/// split the cluster whose best bisection gains most, when the gain exceeds
/// the cost; then re-run Lloyd. Several disjoint moves are tried at once
/// first, then the single best one; stops when neither lowers the inertia.
fn refine(points: &Points, res: &mut KMeansResult, settings: &KMeansSettings) {
    let k = res.k;
    let dim = res.dim;
    if k < 3 || k >= points.len() {
        return;
    }
    for _ in 0..k {
        let mut members = vec![Vec::new(); k];
        for (i, &a) in res.assignments.iter().enumerate() {
            members[a].push(i);
        }
        let mut merges: Vec<(f64, usize, usize)> = Vec::new();
        for a in 0..k {
            if members[a].is_empty() {
                continue;
            }
            for b in a + 1..k {
                if members[b].is_empty() {
                    continue;
                }
                let (na, nb) = (members[a].len() as f64, members[b].len() as f64);
                merges.push((na * nb / (na + nb) * sq_dist(res.centroid(a), res.centroid(b)) as f64, a, b));
            }
        }
        let mut splits: Vec<(f64, usize, Vec<f32>, Vec<f32>)> = members
            .iter()
            .enumerate()
            .filter_map(|(c, m)| best_split(points, m, res.centroid(c)).map(|(g, ca, cb)| (g, c, ca, cb)))
            .collect();
        merges.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        splits.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

        // pair cheap merges with valuable splits, each cluster used once
        let mut used = vec![false; k];
        let mut moves = Vec::new();
        let mut si = 0;
        for &(cost, a, b) in &merges {
            if used[a] || used[b] {
                continue;
            }
            while si < splits.len() && (used[splits[si].1] || splits[si].1 == a || splits[si].1 == b) {
                si += 1;
            }
            let Some(sp) = splits.get(si) else { break };
            if sp.0 <= cost * (1.0 + 1e-9) + 1e-9 {
                break;
            }
            used[a] = true;
            used[b] = true;
            used[sp.1] = true;
            moves.push((a, b, si));
            si += 1;
        }
        if moves.is_empty() {
            return;
        }
        let apply = |moves: &[(usize, usize, usize)]| {
            let mut centroids = res.centroids.clone();
            for &(a, b, si) in moves {
                let (_, c, ca, cb) = &splits[si];
                let mut union = members[a].clone();
                union.extend_from_slice(&members[b]);
                centroids[a * dim..(a + 1) * dim].copy_from_slice(&mean_of(points, &union));
                centroids[b * dim..(b + 1) * dim].copy_from_slice(ca);
                centroids[c * dim..(c + 1) * dim].copy_from_slice(cb);
            }
            lloyd_from(points, k, centroids, settings)
        };
        let improves = |cand: &KMeansResult| cand.inertia < res.inertia - 1e-9 * res.inertia.max(1.0);
        let mut cand = apply(&moves);
        if !improves(&cand) && moves.len() > 1 {
            cand = apply(&moves[..1]);
        }
        if !improves(&cand) {
            return;
        }
        let mut history = std::mem::take(&mut res.inertia_history);
        history.extend_from_slice(&cand.inertia_history);
        let iterations = res.iterations + cand.iterations;
        *res = cand;
        res.inertia_history = history;
        res.iterations = iterations;
    }
}

fn lloyd_from(points: &Points, k: usize, mut centroids: Vec<f32>, settings: &KMeansSettings) -> KMeansResult {
    let n = points.len();
    let dim = points.dim();

    let mut assign = vec![0usize; n];
    let mut upper = vec![0f32; n];
    let mut lower = vec![0f32; n];
    let mut dist = Dist::new(points, &centroids);
    let full_assign = |dist: &Dist, centroids: &[f32], assign: &mut [usize], upper: &mut [f32], lower: &mut [f32]| {
        for i in 0..n {
            let nn = dist.nearest_two(i, centroids);
            assign[i] = nn.best;
            upper[i] = nn.best_d2.sqrt();
            lower[i] = nn.second_d2.sqrt();
        }
    };
    full_assign(&dist, &centroids, &mut assign, &mut upper, &mut lower);

    let inertia_of = |centroids: &[f32], assign: &[usize]| -> f64 {
        (0..n)
            .map(|i| sq_dist(points.row(i), &centroids[assign[i] * dim..(assign[i] + 1) * dim]) as f64)
            .sum()
    };
    let mut history = vec![inertia_of(&centroids, &assign)];

    let mut sums = vec![0f64; k * dim];
    let mut counts = vec![0usize; k];
    let mut new_centroids = vec![0f32; k * dim];
    let mut moved = vec![0f32; k];
    let mut half_gap = vec![0f32; k];
    let mut iterations = 0;

    for _ in 0..settings.max_iter {
        iterations += 1;
        sums.fill(0.0);
        counts.fill(0);
        for i in 0..n {
            let a = assign[i];
            counts[a] += 1;
            for (s, &x) in sums[a * dim..(a + 1) * dim].iter_mut().zip(points.row(i)) {
                *s += x as f64;
            }
        }
        for c in 0..k {
            let dst = &mut new_centroids[c * dim..(c + 1) * dim];
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                for (d, &s) in dst.iter_mut().zip(&sums[c * dim..(c + 1) * dim]) {
                    *d = (s * inv) as f32;
                }
            } else {
                dst.copy_from_slice(&centroids[c * dim..(c + 1) * dim]);
            }
        }

        // Re-seed empty clusters on the points farthest from their centres.
        let empties: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        let reseeded = !empties.is_empty();
        if reseeded {
            let mut far: Vec<(f32, usize)> = (0..n)
                .filter(|&i| counts[assign[i]] > 1)
                .map(|i| {
                    let a = assign[i];
                    (sq_dist(points.row(i), &new_centroids[a * dim..(a + 1) * dim]), i)
                })
                .collect();
            far.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
            let mut taken = 0;
            for c in empties {
                // one point per donor cluster keeps every donor nonempty
                while taken < far.len() {
                    let (_, i) = far[taken];
                    taken += 1;
                    let a = assign[i];
                    if counts[a] > 1 {
                        counts[a] -= 1;
                        counts[c] += 1;
                        new_centroids[c * dim..(c + 1) * dim].copy_from_slice(points.row(i));
                        break;
                    }
                }
            }
        }

        let mut shift = 0f64;
        for c in 0..k {
            let d2 = sq_dist(&centroids[c * dim..(c + 1) * dim], &new_centroids[c * dim..(c + 1) * dim]);
            moved[c] = d2.sqrt();
            shift += d2 as f64;
        }
        std::mem::swap(&mut centroids, &mut new_centroids);
        dist.refresh(&centroids);

        if reseeded {
            full_assign(&dist, &centroids, &mut assign, &mut upper, &mut lower);
        } else {
            let max_move = moved.iter().copied().fold(0f32, f32::max);
            for c in 0..k {
                let cent = &centroids[c * dim..(c + 1) * dim];
                let mut m = f32::INFINITY;
                for o in 0..k {
                    if o != c {
                        m = m.min(sq_dist(cent, &centroids[o * dim..(o + 1) * dim]));
                    }
                }
                half_gap[c] = 0.5 * m.sqrt();
            }
            for i in 0..n {
                let a = assign[i];
                upper[i] += moved[a];
                lower[i] -= max_move;
                // small slack absorbs f32 rounding in the bounds
                let bound = half_gap[a].max(lower[i]) - 1e-4;
                if upper[i] <= bound {
                    continue;
                }
                upper[i] = dist.get(i, a, &centroids).sqrt();
                if upper[i] <= bound {
                    continue;
                }
                let nn = dist.nearest_two(i, &centroids);
                assign[i] = nn.best;
                upper[i] = nn.best_d2.sqrt();
                lower[i] = nn.second_d2.sqrt();
            }
        }
        history.push(inertia_of(&centroids, &assign));
        if shift < settings.tol {
            break;
        }
    }

    let inertia = inertia_of(&centroids, &assign);
    KMeansResult {
        k,
        assignments: assign,
        centroids,
        dim,
        inertia,
        iterations,
        inertia_history: history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block_groups(copies: usize) -> (Points, Vec<usize>) {
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for (g, start) in [0usize, 50, 100].into_iter().enumerate() {
            for c in 0..copies {
                let mut row = vec![0f32; 160];
                for v in row.iter_mut().skip(start).take(10) {
                    *v = 1.0;
                }
                // one distinguishing noise bit per copy
                row[start + 20 + c] = 1.0;
                rows.push(row);
                truth.push(g);
            }
        }
        (Points::from_rows(&rows).unwrap(), truth)
    }

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    fn random_binary(n: usize, dim: usize, seed: u64) -> Points {
        use rand::Rng;
        let mut rng = seed::rng(seed);
        let rows: Vec<Vec<f32>> = (0..n)
            .map(|_| (0..dim).map(|_| if rng.gen_bool(0.3) { 1.0 } else { 0.0 }).collect())
            .collect();
        Points::from_rows(&rows).unwrap()
    }

    #[test]
    fn inertia_history_is_nonincreasing_and_labels_are_nearest() {
        for s in 0..5 {
            let pts = random_binary(80, 40, s);
            for k in [2, 7, 25, 60] {
                let res = kmeans(&pts, k, &KMeansSettings { seed: s, ..Default::default() }).unwrap();
                for w in res.inertia_history.windows(2) {
                    assert!(w[1] <= w[0] + 1e-3, "k={k}: {:?}", res.inertia_history);
                }
                for i in 0..pts.len() {
                    let own = sq_dist(pts.row(i), res.centroid(res.assignments[i]));
                    for c in 0..k {
                        assert!(own <= sq_dist(pts.row(i), res.centroid(c)) + 1e-4);
                    }
                }
                let direct: f64 = (0..pts.len())
                    .map(|i| sq_dist(pts.row(i), res.centroid(res.assignments[i])) as f64)
                    .sum();
                assert!((direct - res.inertia).abs() < 1e-6 * direct.max(1.0));
            }
        }
    }

    #[test]
    fn refinement_never_raises_inertia() {
        for s in 0..5 {
            let pts = random_binary(90, 30, 100 + s).with_pairwise();
            for k in [5, 20, 45] {
                let plain = kmeans(&pts, k, &KMeansSettings { seed: s, refine: false, ..Default::default() }).unwrap();
                let refined = kmeans(&pts, k, &KMeansSettings { seed: s, ..Default::default() }).unwrap();
                assert!(refined.inertia <= plain.inertia + 1e-9);
            }
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let pts = random_binary(60, 30, 9);
        let st = KMeansSettings { seed: 4, n_init: 3, ..Default::default() };
        assert_eq!(kmeans(&pts, 12, &st).unwrap(), kmeans(&pts, 12, &st).unwrap());
        assert!(kmeans(&pts, 3, &KMeansSettings { n_init: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn recovers_block_groups() {
        let (pts, truth) = block_groups(4);
        for s in 0..10 {
            let res = kmeans(&pts, 3, &KMeansSettings { seed: s, ..Default::default() }).unwrap();
            assert!(same_partition(&res.assignments, &truth), "seed {s}");
        }
    }

    #[test]
    fn k_equals_n_gives_zero_inertia() {
        let (pts, _) = block_groups(3);
        let res = kmeans(&pts, pts.len(), &KMeansSettings::default()).unwrap();
        assert_eq!(res.inertia, 0.0);
        let mut labels = res.assignments.clone();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), pts.len());
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let (pts, _) = block_groups(2);
        let res = kmeans(&pts, 1, &KMeansSettings::default()).unwrap();
        let n = pts.len() as f64;
        let mut total_var = 0.0;
        for d in 0..pts.dim() {
            let mean = (0..pts.len()).map(|i| pts.row(i)[d] as f64).sum::<f64>() / n;
            assert!((res.centroid(0)[d] as f64 - mean).abs() < 1e-6);
            total_var += (0..pts.len()).map(|i| (pts.row(i)[d] as f64 - mean).powi(2)).sum::<f64>();
        }
        assert!((res.inertia - total_var).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_k() {
        let (pts, _) = block_groups(1);
        assert!(kmeans(&pts, 0, &KMeansSettings::default()).is_err());
        assert!(kmeans(&pts, 4, &KMeansSettings::default()).is_err());
    }

    #[test]
    fn identical_points_do_not_break_seeding() {
        let rows = vec![vec![1.0f32, 0.0, 1.0]; 6];
        let pts = Points::from_rows(&rows).unwrap();
        let res = kmeans(&pts, 4, &KMeansSettings::default()).unwrap();
        assert_eq!(res.inertia, 0.0);
    }
}
