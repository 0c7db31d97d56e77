//! Mating selection and real-coded variation operators on slope genotypes.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Draws two indices uniformly with replacement and returns the one with the
/// lower fitness (the first drawn on ties).
pub fn binary_tournament<R: Rng + ?Sized>(fitness: &[f64], rng: &mut R) -> Result<usize> {
    if fitness.is_empty() {
        return Err(Error::Config("tournament over an empty archive".into()));
    }
    let a = rng.random_range(0..fitness.len());
    let b = rng.random_range(0..fitness.len());
    Ok(if fitness[b] < fitness[a] { b } else { a })
}

/// Whole-arithmetic blend `β·p1 + (1−β)·p2`, clamped to `bounds`.
pub fn blend(p1: &[f64], p2: &[f64], beta: f64, bounds: (f64, f64)) -> Vec<f64> {
    p1.iter()
        .zip(p2)
        .map(|(a, b)| (b + beta * (a - b)).clamp(bounds.0, bounds.1))
        .collect()
}

/// [`blend`] with `β ~ U[0, 1]` drawn once per child.
pub fn crossover<R: Rng + ?Sized>(
    p1: &[f64],
    p2: &[f64],
    bounds: (f64, f64),
    rng: &mut R,
) -> Vec<f64> {
    let beta: f64 = rng.random_range(0.0..=1.0);
    blend(p1, p2, beta, bounds)
}

/// Independent Gaussian perturbation of every coordinate, clamped to `bounds`.
pub fn mutate<R: Rng + ?Sized>(p: &[f64], sigma: f64, bounds: (f64, f64), rng: &mut R) -> Vec<f64> {
    p.iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(rng);
            (v + sigma * z).clamp(bounds.0, bounds.1)
        })
        .collect()
}
