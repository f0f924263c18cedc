//! Reference purity of a clustering.
//!
//! For reference `i` sitting in cluster `c`:
//!
//! `purity_i = n_dum_c / (n_dum + n_c - 1 - n_dum_c)`
//!
//! where `n_dum_c` counts its dummies inside `c`, `n_dum` all its dummies and
//! `n_c` the size of `c`. The score is 1 exactly when the cluster holds the
//! reference and all of its dummies and nothing else.

use serde::Serialize;

use crate::error::{Error, Result};

use super::references::ReferenceLayout;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurityScores {
    pub per_reference: Vec<f64>,
    pub total: f64,
}

pub fn purity(layout: &ReferenceLayout, assignments: &[usize], k: usize) -> Result<PurityScores> {
    if let Some(&bad) = assignments.iter().find(|&&a| a >= k) {
        return Err(Error::param(format!("cluster label {bad} out of range for k={k}")));
    }
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    let n = assignments.len();
    let mut per_reference = Vec::with_capacity(layout.reference_points.len());
    for (i, (&rp, dummies)) in layout
        .reference_points
        .iter()
        .zip(&layout.dummy_points)
        .enumerate()
    {
        if dummies.is_empty() {
            return Err(Error::param(format!("reference {i} has no dummies")));
        }
        if rp >= n || dummies.iter().any(|&d| d >= n) {
            return Err(Error::param(format!("reference {i} points outside the assignment")));
        }
        let c = assignments[rp];
        let n_dum = dummies.len();
        let n_dum_c = dummies.iter().filter(|&&d| assignments[d] == c).count();
        let denom = n_dum + sizes[c] - 1 - n_dum_c;
        per_reference.push(n_dum_c as f64 / denom as f64);
    }
    let total = per_reference.iter().sum();
    Ok(PurityScores {
        per_reference,
        total,
    })
}
