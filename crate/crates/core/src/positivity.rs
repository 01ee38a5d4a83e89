//! Block positivity, complete positivity, PPT and witness evaluation.
//!
//! Block positivity of a Hermitian `C` means `⟨x⊗y|C|x⊗y⟩ ≥ 0` for all product
//! vectors. It is probed by alternating minimisation: with `y` fixed the best `x` is a
//! minimal eigenvector of `compress_right(C, y)`, with `x` fixed the best `y` is a
//! minimal eigenvector of `compress_left(C, x)`. A non-negative result is a
//! certificate that no violation was found, not a proof.

use rand::Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choi::{
    apply_to_blocks, choi_vector, compress_left, compress_right, hs_inner, partial_transpose,
    product_expectation, LinearMapM3,
};
use crate::error::{Error, Result};
use crate::linalg::{
    c, check_hermitian, ensure_finite, expectation, kron, min_eigenpair3, min_eigenvalue,
    singular_values, ComplexMatrix3, ComplexMatrix9, ComplexVector3, ComplexVector9,
};
use crate::random::{rng, simplex_weights, substream, unit_vector, unit_vector3, Rng64};
use crate::state::DensityMatrix9;

/// Default tolerance for declaring a Choi matrix block positive.
pub const BLOCK_POSITIVITY_TOL: f64 = 1e-8;

/// Unit vectors `x`, `y` spanning the product vector `x ⊗ y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductVector {
    pub x: ComplexVector3,
    pub y: ComplexVector3,
}

impl ProductVector {
    pub fn new(x: ComplexVector3, y: ComplexVector3) -> Result<Self> {
        for v in [&x, &y] {
            if (v.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "product factor has norm {}",
                    v.norm()
                )));
            }
        }
        Ok(Self { x, y })
    }

    pub fn value(&self, choi: &ComplexMatrix9) -> f64 {
        product_expectation(choi, &self.x, &self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityVerdict {
    pub min_value: f64,
    pub argmin: ProductVector,
    pub restarts_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizerOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop a start once one sweep improves the value by less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 200,
            tol: 1e-12,
            seed: 0,
        }
    }
}

/// One alternating descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct Descent {
    pub point: ProductVector,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Value after every sweep; non-increasing up to rounding.
    pub history: Vec<f64>,
}

/// Alternating minimal-eigenvector descent from the starting `y`.
pub fn alternating_descent(
    choi: &ComplexMatrix9,
    y0: ComplexVector3,
    max_iters: usize,
    tol: f64,
) -> Descent {
    let mut y = y0.normalize();
    let (_, mut x) = min_eigenpair3(&compress_right(choi, &y));
    let mut value = f64::INFINITY;
    let mut history = Vec::with_capacity(max_iters.min(256));
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let (_, nx) = min_eigenpair3(&compress_right(choi, &y));
        x = nx;
        let (v, ny) = min_eigenpair3(&compress_left(choi, &x));
        y = ny;
        let improvement = value - v;
        value = v.min(value);
        history.push(value);
        if improvement < tol {
            converged = true;
            break;
        }
    }
    let point = ProductVector { x, y };
    let value = point.value(choi);
    Descent {
        point,
        value,
        iterations,
        converged,
        history,
    }
}

/// Multi-start minimisation of `⟨x⊗y|C|x⊗y⟩` over unit product vectors.
///
/// Start `i` draws its initial `y` from `substream(seed, i)`; the best start wins with
/// ties broken by the lower index, so the result does not depend on thread count.
pub fn product_min(choi: &ComplexMatrix9, opts: &MinimizerOptions) -> Result<PositivityVerdict> {
    ensure_finite(choi)?;
    check_hermitian(choi)?;
    if opts.restarts == 0 {
        return Err(Error::Domain("restarts must be at least 1".into()));
    }
    let run = |i: usize| {
        let mut r = substream(opts.seed, i as u64);
        alternating_descent(choi, unit_vector3(&mut r), opts.max_iters, opts.tol)
    };
    #[cfg(feature = "parallel")]
    let runs: Vec<Descent> = (0..opts.restarts).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<Descent> = (0..opts.restarts).map(run).collect();

    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .map(|(_, d)| d)
        .expect("at least one restart");
    Ok(PositivityVerdict {
        min_value: best.value,
        argmin: best.point,
        restarts_used: opts.restarts,
        converged: best.converged,
    })
}

pub fn is_block_positive(choi: &ComplexMatrix9, tol: f64) -> Result<bool> {
    is_block_positive_with(choi, tol, &MinimizerOptions::default())
}

pub fn is_block_positive_with(
    choi: &ComplexMatrix9,
    tol: f64,
    opts: &MinimizerOptions,
) -> Result<bool> {
    Ok(product_min(choi, opts)?.min_value >= -tol)
}

/// CP ⟺ the Choi matrix is positive semidefinite.
pub fn is_completely_positive(choi: &ComplexMatrix9, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(choi)? >= -tol)
}

pub fn partial_transpose_min_eigenvalue(rho: &ComplexMatrix9) -> Result<f64> {
    ensure_finite(rho)?;
    check_hermitian(rho)?;
    min_eigenvalue(&partial_transpose(rho))
}

pub fn is_ppt(rho: &ComplexMatrix9, tol: f64) -> Result<bool> {
    Ok(partial_transpose_min_eigenvalue(rho)? >= -tol)
}

/// `(id ⊗ Φ)(I ⊗ B) ρ (I ⊗ B)†`.
pub fn witness_output(
    phi: &LinearMapM3,
    b: &ComplexMatrix3,
    rho: &DensityMatrix9,
) -> ComplexMatrix9 {
    let k = kron(&ComplexMatrix3::identity(), b);
    apply_to_blocks(phi, &(k * rho.matrix() * k.adjoint()))
}

/// Smallest eigenvalue of the witness output; negative values detect entanglement.
pub fn witness_apply(phi: &LinearMapM3, b: &ComplexMatrix3, rho: &DensityMatrix9) -> Result<f64> {
    if !phi.is_hermiticity_preserving() {
        return Err(Error::InvalidMap(
            "witness map must preserve Hermiticity".into(),
        ));
    }
    min_eigenvalue(&witness_output(phi, b, rho))
}

/// `⟨Ψ, Φ⟩'' = Tr(C_Ψ C_Φ†)`, real for Hermiticity-preserving maps.
pub fn pairing(psi: &LinearMapM3, phi: &LinearMapM3) -> Result<f64> {
    for m in [psi, phi] {
        if !m.is_hermiticity_preserving() {
            return Err(Error::InvalidMap(
                "pairing needs Hermiticity-preserving maps".into(),
            ));
        }
    }
    Ok(hs_inner(psi.choi(), phi.choi()).re)
}

/// Dual form of the witness test: the minimum over `samples` random unit-norm `A` of
/// `⟨Ad_{B†} ∘ Φ* ∘ Ad_A, Ψ⟩'' / Tr C_Ψ`. Its sign agrees with
/// `witness_apply(Φ, B, C_Ψ / Tr C_Ψ)` once enough `A` are sampled.
pub fn dual_pairing_min(
    phi: &LinearMapM3,
    b: &ComplexMatrix3,
    psi: &LinearMapM3,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let tr = psi.choi().trace().re;
    if !(tr.abs() > 0.0) {
        return Err(Error::Domain("Ψ has a traceless Choi matrix".into()));
    }
    let left = LinearMapM3::conjugation(&b.adjoint()).compose(&phi.adjoint());
    let mut r = rng(seed);
    let mut best = f64::INFINITY;
    for _ in 0..samples {
        let a = unit_norm_matrix(&mut r);
        let value = pairing(&left.compose(&LinearMapM3::conjugation(&a)), psi)? / tr;
        best = best.min(value);
    }
    Ok(best)
}

/// Minimum of `⟨α|C|α⟩` over `samples` random unit `α`: the rank-one pairings
/// `⟨Ad_A, Φ⟩''` with `α` the Choi vector of `A`.
pub fn sampled_rank_one_min(choi: &ComplexMatrix9, samples: usize, seed: u64) -> Result<f64> {
    ensure_finite(choi)?;
    check_hermitian(choi)?;
    let mut r = rng(seed);
    Ok((0..samples)
        .map(|_| expectation(choi, &unit_vector::<9>(&mut r)).re)
        .fold(f64::INFINITY, f64::min))
}

fn unit_norm_matrix(r: &mut impl Rng) -> ComplexMatrix3 {
    let alpha: ComplexVector9 = unit_vector::<9>(r);
    ComplexMatrix3::from_fn(|i, j| alpha[3 * j + i])
}

/// Convex combination of product projectors `Σ α_i |φ_i⟩⟨φ_i| ⊗ |χ_i⟩⟨χ_i|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableSpec {
    pub weights: Vec<f64>,
    pub factors: Vec<ProductVector>,
}

impl SeparableSpec {
    pub fn new(weights: Vec<f64>, factors: Vec<ProductVector>) -> Result<Self> {
        if weights.is_empty() || weights.len() != factors.len() {
            return Err(Error::Domain(
                "weights and factors must be non-empty and match".into(),
            ));
        }
        if weights.iter().any(|&w| !(w > 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return Err(Error::Domain(
                "weights must be positive and sum to 1".into(),
            ));
        }
        Ok(Self { weights, factors })
    }

    pub fn matrix(&self) -> ComplexMatrix9 {
        let mut rho = ComplexMatrix9::zeros();
        for (w, p) in self.weights.iter().zip(&self.factors) {
            let px = p.x * p.x.adjoint();
            let py = p.y * p.y.adjoint();
            rho += kron(&px, &py) * c(*w, 0.0);
        }
        rho
    }

    pub fn density(&self) -> Result<DensityMatrix9> {
        DensityMatrix9::new(self.matrix())
    }
}

/// Random separable state with `k` product terms and flat Dirichlet weights.
pub fn separable_sample(k: usize, seed: u64) -> Result<(SeparableSpec, DensityMatrix9)> {
    if k == 0 {
        return Err(Error::Domain("need at least one product term".into()));
    }
    let mut r = rng(seed);
    separable_sample_with(k, &mut r)
}

pub fn separable_sample_with(k: usize, r: &mut Rng64) -> Result<(SeparableSpec, DensityMatrix9)> {
    let weights = simplex_weights(r, k);
    let factors = (0..k)
        .map(|_| ProductVector {
            x: unit_vector3(r),
            y: unit_vector3(r),
        })
        .collect();
    let spec = SeparableSpec::new(weights, factors)?;
    let rho = spec.density()?;
    Ok((spec, rho))
}

/// `Σ w_i Ad_{A_i}` with rank-one `A_i = u_i v_i†` and flat Dirichlet weights.
pub fn superpositive_sample(n: usize, seed: u64) -> Result<LinearMapM3> {
    if n == 0 {
        return Err(Error::Domain("need at least one rank-one term".into()));
    }
    let mut r = rng(seed);
    let weights = simplex_weights(&mut r, n);
    let mut choi = ComplexMatrix9::zeros();
    for w in weights {
        let (u, v) = (unit_vector3(&mut r), unit_vector3(&mut r));
        let alpha = choi_vector(&(u * v.adjoint()));
        choi += alpha * alpha.adjoint() * c(w, 0.0);
    }
    Ok(LinearMapM3::from_choi(choi))
}

/// Estimated minima of the second singular value of the compressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankProfile {
    /// `min_y σ₂(compress_right(C, y))`.
    pub y_side: f64,
    /// `min_x σ₂(compress_left(C, x))`.
    pub x_side: f64,
}

/// Sampling plus stochastic local refinement of `σ₂` of both compressions over the
/// unit sphere. `σ₂ > 0` everywhere means every compression has rank at least 2.
pub fn compression_rank_profile(
    choi: &ComplexMatrix9,
    samples: usize,
    restarts: usize,
    seed: u64,
) -> Result<RankProfile> {
    ensure_finite(choi)?;
    check_hermitian(choi)?;
    let right = |v: &ComplexVector3| second_singular_value(&compress_right(choi, v));
    let left = |v: &ComplexVector3| second_singular_value(&compress_left(choi, v));
    Ok(RankProfile {
        y_side: sphere_min(&right, samples, restarts, seed),
        x_side: sphere_min(&left, samples, restarts, seed ^ 0x9e37_79b9),
    })
}

fn second_singular_value(m: &ComplexMatrix3) -> f64 {
    singular_values(m)[1]
}

fn sphere_min(
    f: &dyn Fn(&ComplexVector3) -> f64,
    samples: usize,
    restarts: usize,
    seed: u64,
) -> f64 {
    let mut r = rng(seed);
    let mut pool: Vec<(f64, ComplexVector3)> = (0..samples.max(1))
        .map(|_| {
            let v = unit_vector3(&mut r);
            (f(&v), v)
        })
        .collect();
    pool.sort_by(|a, b| a.0.total_cmp(&b.0));
    pool.truncate(restarts.max(1));
    pool.into_iter()
        .map(|(mut best, mut v)| {
            let mut step = 0.1;
            for _ in 0..400 {
                let trial = (v + unit_vector3(&mut r) * c(step, 0.0)).normalize();
                let value = f(&trial);
                if value < best {
                    best = value;
                    v = trial;
                } else {
                    step *= 0.97;
                }
                if step < 1e-9 {
                    break;
                }
            }
            best
        })
        .fold(f64::INFINITY, f64::min)
}
