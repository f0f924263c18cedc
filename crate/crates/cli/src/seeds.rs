//! Seeds for every random stage, all derived from one master seed.

use ppcard_core::clustering::ReferenceMethod;
use ppcard_core::seed::derive;

pub fn dataset(master: u64) -> u64 {
    derive(master, &[1])
}

/// LDP seed of provider `provider` at one `(epsilon, repetition)` setting.
/// Every method and p_flip in a grid sees the same perturbed data.
pub fn perturbation(master: u64, epsilon: f64, rep: usize, provider: &str) -> u64 {
    derive(master, &[2, epsilon.to_bits(), rep as u64, label(provider)])
}

/// FNV-1a of the provider id.
fn label(id: &str) -> u64 {
    id.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

fn method_code(m: ReferenceMethod) -> u64 {
    match m {
        ReferenceMethod::A => 0,
        ReferenceMethod::B => 1,
    }
}

pub fn references(master: u64, method: ReferenceMethod, epsilon: f64, p_flip: f64, rep: usize) -> u64 {
    derive(master, &[3, method_code(method), epsilon.to_bits(), p_flip.to_bits(), rep as u64])
}

pub fn kmeans(master: u64, method: ReferenceMethod, epsilon: f64, p_flip: f64, rep: usize) -> u64 {
    derive(master, &[4, method_code(method), epsilon.to_bits(), p_flip.to_bits(), rep as u64])
}

pub fn baseline(master: u64, epsilon: f64, rep: usize) -> u64 {
    derive(master, &[5, epsilon.to_bits(), rep as u64])
}
