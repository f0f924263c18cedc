//! Closed-form probability that a filter and its perturbed copy stay within a
//! Euclidean distance `r` of each other, plus a Monte-Carlo estimator.
//!
//! The squared distance between a binary filter and its perturbation is the
//! number of flipped bits, `Binomial(ell, eta)`. The closed form replaces it
//! with a normal distribution of mean `ell*eta` and variance
//! `ell*eta*(1-eta)`:
//!
//! `P(d <= r) = 1/2 + 1/2 * erf((r^2 - ell*eta) / sqrt(2*ell*eta*(1-eta)))`

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erf;

use crate::bloom::BloomFilter;
use crate::error::{Error, Result};
use crate::ldp::{flip_probability, perturb, PrivacyParams};

/// A distance threshold, either in absolute Euclidean units or as a fraction
/// of the filter length (`r = frac * ell`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Absolute(f64),
    Fraction(f64),
}

impl Threshold {
    pub fn absolute(self, ell: usize) -> f64 {
        match self {
            Threshold::Absolute(r) => r,
            Threshold::Fraction(f) => f * ell as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryPoint {
    pub epsilon: f64,
    pub r: f64,
    pub r_frac: f64,
    pub ell: usize,
    pub p_closed: f64,
    pub p_mc: Option<f64>,
    pub mu: f64,
    pub sigma: f64,
}

fn check(ell: usize, r: f64) -> Result<()> {
    if ell == 0 {
        return Err(Error::param("ell must be at least 1"));
    }
    if r.is_nan() || r < 0.0 {
        return Err(Error::param(format!("threshold r must be non-negative, got {r}")));
    }
    Ok(())
}

/// Mean and standard deviation of the squared distance.
pub fn distance_moments(ell: usize, epsilon: f64) -> Result<(f64, f64)> {
    let eta = flip_probability(epsilon)?;
    let l = ell as f64;
    Ok((l * eta, (l * eta * (1.0 - eta)).sqrt()))
}

pub fn same_cluster_probability(ell: usize, epsilon: f64, r: f64) -> Result<f64> {
    check(ell, r)?;
    let (mu, sigma) = distance_moments(ell, epsilon)?;
    if sigma == 0.0 {
        // no flips can happen: the distance is exactly zero
        return Ok(1.0);
    }
    let z = (r * r - mu) / (sigma * std::f64::consts::SQRT_2);
    Ok((0.5 + 0.5 * erf(z)).clamp(0.0, 1.0))
}

/// Fraction of `trials` perturbations of a fixed filter that land within `r`.
pub fn monte_carlo_same_cluster(
    ell: usize,
    epsilon: f64,
    r: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    check(ell, r)?;
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    let privacy = PrivacyParams::new(epsilon, seed)?;
    let base = BloomFilter::zeros(ell);
    let r2 = r * r;
    let hits = (0..trials as u64)
        .filter(|&t| {
            let d2 = perturb(&base, &privacy, t).count_ones() as f64;
            d2 <= r2 + 1e-9
        })
        .count();
    Ok(hits as f64 / trials as f64)
}

#[derive(Debug, Clone, Copy)]
pub struct MonteCarlo {
    pub trials: usize,
    pub seed: u64,
}

/// Evaluates the closed form (and optionally Monte-Carlo) on an `epsilon x r`
/// grid. Rows are ordered by epsilon, then by threshold.
pub fn emit_curves(
    epsilons: &[f64],
    thresholds: &[Threshold],
    ell: usize,
    mc: Option<MonteCarlo>,
) -> Result<Vec<TheoryPoint>> {
    if epsilons.is_empty() || thresholds.is_empty() {
        return Err(Error::param("epsilon and threshold grids must be nonempty"));
    }
    let cells: Vec<(usize, f64, Threshold)> = epsilons
        .iter()
        .enumerate()
        .flat_map(|(ei, &e)| thresholds.iter().map(move |&t| (ei, e, t)))
        .collect();
    cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(_, epsilon, t))| {
            let r = t.absolute(ell);
            let (mu, sigma) = distance_moments(ell, epsilon)?;
            let p_mc = match mc {
                Some(m) => Some(monte_carlo_same_cluster(
                    ell,
                    epsilon,
                    r,
                    m.trials,
                    crate::seed::derive(m.seed, &[idx as u64]),
                )?),
                None => None,
            };
            Ok(TheoryPoint {
                epsilon,
                r,
                r_frac: r / ell as f64,
                ell,
                p_closed: same_cluster_probability(ell, epsilon, r)?,
                p_mc,
                mu,
                sigma,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert_eq!(same_cluster_probability(200, f64::INFINITY, 0.0).unwrap(), 1.0);
        assert_eq!(same_cluster_probability(200, 800.0, 3.0).unwrap(), 1.0);
        let p = same_cluster_probability(200, 2.0, 24f64.sqrt()).unwrap();
        assert!((p - 0.514).abs() < 1e-3, "{p}");
        assert!(same_cluster_probability(200, 1.0, 0.0).unwrap() < 1e-8);
        assert!(same_cluster_probability(200, 1.0, -1.0).is_err());
    }

    #[test]
    fn moments() {
        let (mu, sigma) = distance_moments(200, 2.0).unwrap();
        assert!((mu - 23.8406).abs() < 1e-3);
        assert!((sigma * sigma - 20.999).abs() < 1e-2);
    }

    #[test]
    fn monte_carlo_no_noise() {
        assert_eq!(monte_carlo_same_cluster(200, 50.0, 0.0, 10_000, 1).unwrap(), 1.0);
        assert!(monte_carlo_same_cluster(200, 1.0, 1.0, 0, 1).is_err());
    }

    #[test]
    fn thresholds() {
        assert_eq!(Threshold::Fraction(0.02).absolute(200), 4.0);
        assert_eq!(Threshold::Absolute(3.5).absolute(200), 3.5);
    }

    #[test]
    fn curves_are_monotone() {
        let eps: Vec<f64> = (1..=10).map(f64::from).collect();
        let rs = [Threshold::Absolute(5.0)];
        let pts = emit_curves(&eps, &rs, 200, None).unwrap();
        assert_eq!(pts.len(), 10);
        assert!(pts.iter().all(|p| p.p_mc.is_none()));
        assert!(pts.windows(2).all(|w| w[1].p_closed >= w[0].p_closed));

        let rs: Vec<Threshold> = (0..30).map(|i| Threshold::Absolute(i as f64 * 0.5)).collect();
        let pts = emit_curves(&[2.0], &rs, 200, None).unwrap();
        assert!(pts.windows(2).all(|w| w[1].p_closed >= w[0].p_closed));
        assert!(emit_curves(&[], &rs, 200, None).is_err());
    }

    #[test]
    fn curves_with_monte_carlo() {
        let pts = emit_curves(
            &[2.0],
            &[Threshold::Fraction(0.02)],
            200,
            Some(MonteCarlo { trials: 200, seed: 3 }),
        )
        .unwrap();
        assert!(pts[0].p_mc.is_some());
        assert_eq!(pts[0].r, 4.0);
    }
}
