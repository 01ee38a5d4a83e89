//! Seedable samplers. Everything is driven by `ChaCha8Rng`, which produces the same
//! stream on every platform for a given seed.

use std::f64::consts::TAU;

use nalgebra::{SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, ComplexMatrix3, ComplexMatrix9, ComplexVector3, C64};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for restart `index` under a base seed.
pub fn substream(seed: u64, index: u64) -> Rng64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index + 1);
    r
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector<const N: usize>(rng: &mut impl Rng) -> SVector<C64, N> {
    SVector::from_fn(|_, _| gaussian(rng))
}

/// Uniformly distributed unit vector in `C^N`.
pub fn unit_vector<const N: usize>(rng: &mut impl Rng) -> SVector<C64, N> {
    loop {
        let v = gaussian_vector::<N>(rng);
        let n = v.norm();
        if n > 1e-12 {
            return v / c(n, 0.0);
        }
    }
}

pub fn unit_vector3(rng: &mut impl Rng) -> ComplexVector3 {
    unit_vector::<3>(rng)
}

/// Ginibre matrix with standard complex Gaussian entries.
pub fn ginibre<const N: usize>(rng: &mut impl Rng) -> SMatrix<C64, N, N> {
    SMatrix::from_fn(|_, _| gaussian(rng))
}

pub fn matrix3(rng: &mut impl Rng) -> ComplexMatrix3 {
    ginibre::<3>(rng)
}

pub fn matrix9(rng: &mut impl Rng) -> ComplexMatrix9 {
    ginibre::<9>(rng)
}

pub fn hermitian9(rng: &mut impl Rng) -> ComplexMatrix9 {
    let g = matrix9(rng);
    (g + g.adjoint()) * c(0.5, 0.0)
}

pub fn hermitian3(rng: &mut impl Rng) -> ComplexMatrix3 {
    let g = matrix3(rng);
    (g + g.adjoint()) * c(0.5, 0.0)
}

pub fn phases(rng: &mut impl Rng) -> [f64; 3] {
    [
        rng.random::<f64>() * TAU,
        rng.random::<f64>() * TAU,
        rng.random::<f64>() * TAU,
    ]
}

/// Probability vector with `n` strictly positive weights (flat Dirichlet).
pub fn simplex_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-12)
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let a = matrix3(&mut rng(7));
        let b = matrix3(&mut rng(7));
        assert_eq!(a, b);
        assert_ne!(a, matrix3(&mut rng(8)));
    }

    #[test]
    fn substreams_differ() {
        let a = unit_vector3(&mut substream(3, 0));
        let b = unit_vector3(&mut substream(3, 1));
        assert_ne!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_one() {
        let w = simplex_weights(&mut rng(1), 9);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(w.iter().all(|&x| x > 0.0));
    }
}
