//! Choi matrices of linear maps `M₃ → M₃` and the operations that transport along
//! the Choi–Jamiołkowski isomorphism.
//!
//! `C_Φ = Σ_ij e_ij ⊗ Φ(e_ij)` carries no normalisation, so the identity map has
//! trace 3 and `⟨C_id, C_id⟩ = 9`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::linalg::{
    c, ensure_finite, kron, matrix_unit, pair, ComplexMatrix3, ComplexMatrix9, ComplexVector3,
    ComplexVector9, C64, ZERO,
};
use crate::random;

/// A linear map on `M₃`, stored as its Choi matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMapM3 {
    choi: ComplexMatrix9,
}

impl LinearMapM3 {
    pub fn from_choi(choi: ComplexMatrix9) -> Self {
        Self { choi }
    }

    pub fn identity() -> Self {
        Self::from_choi(choi_identity())
    }

    pub fn transpose() -> Self {
        Self::from_choi(swap_operator())
    }

    /// `Ad_A : X ↦ A X A†`.
    pub fn conjugation(a: &ComplexMatrix3) -> Self {
        Self::from_choi(choi_of_ad(a))
    }

    pub fn choi(&self) -> &ComplexMatrix9 {
        &self.choi
    }

    pub fn into_choi(self) -> ComplexMatrix9 {
        self.choi
    }

    /// `Φ(X)[k,l] = Σ_ij X[i,j] C[(i,k),(j,l)]`.
    pub fn apply(&self, x: &ComplexMatrix3) -> ComplexMatrix3 {
        let mut out = ComplexMatrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let xij = x[(i, j)];
                if xij == ZERO {
                    continue;
                }
                for k in 0..3 {
                    for l in 0..3 {
                        out[(k, l)] += xij * self.choi[(pair(i, k), pair(j, l))];
                    }
                }
            }
        }
        out
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMapM3) -> LinearMapM3 {
        LinearMapM3::from_choi(compose_choi(self, &inner.choi))
    }

    pub fn adjoint(&self) -> LinearMapM3 {
        adjoint_map(self)
    }

    pub fn is_hermiticity_preserving(&self) -> bool {
        crate::linalg::is_hermitian(&self.choi)
    }
}

impl Serialize for LinearMapM3 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(&self.choi).serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearMapM3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = MatrixJson::deserialize(d)?;
        json.to_matrix::<9, 9>()
            .map(LinearMapM3::from_choi)
            .map_err(serde::de::Error::custom)
    }
}

/// Choi matrix of the identity map: `|Ω⟩⟨Ω|` with `Ω = Σ e_i ⊗ e_i`.
pub fn choi_identity() -> ComplexMatrix9 {
    ComplexMatrix9::from_fn(|r, s| {
        let (i, k) = (r / 3, r % 3);
        let (j, l) = (s / 3, s % 3);
        if i == k && j == l {
            c(1.0, 0.0)
        } else {
            ZERO
        }
    })
}

/// The flip operator `e_i ⊗ e_k ↦ e_k ⊗ e_i`, which is also the Choi matrix of the transpose.
pub fn swap_operator() -> ComplexMatrix9 {
    ComplexMatrix9::from_fn(|r, s| {
        let (i, k) = (r / 3, r % 3);
        let (j, l) = (s / 3, s % 3);
        if i == l && j == k {
            c(1.0, 0.0)
        } else {
            ZERO
        }
    })
}

/// Builds `Σ e_ij ⊗ Φ(e_ij)` from an evaluator.
///
/// The evaluator is spot-checked for linearity on random combinations of matrix units
/// and its outputs must be finite.
pub fn choi_of_map<F>(evaluator: F) -> Result<ComplexMatrix9>
where
    F: Fn(&ComplexMatrix3) -> ComplexMatrix3,
{
    let mut images = [[ComplexMatrix3::zeros(); 3]; 3];
    let mut choi = ComplexMatrix9::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let img = evaluator(&matrix_unit(i, j));
            ensure_finite(&img).map_err(|e| Error::InvalidMap(format!("Φ(e_{i}{j}): {e}")))?;
            for k in 0..3 {
                for l in 0..3 {
                    choi[(pair(i, k), pair(j, l))] = img[(k, l)];
                }
            }
            images[i][j] = img;
        }
    }

    let mut rng = random::rng(0x5eed_c401);
    for _ in 0..3 {
        let coeffs = random::matrix3(&mut rng);
        let direct = evaluator(&coeffs);
        ensure_finite(&direct).map_err(|e| Error::InvalidMap(e.to_string()))?;
        let mut combined = ComplexMatrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                combined += images[i][j] * coeffs[(i, j)];
            }
        }
        let scale = 1.0 + combined.norm() + direct.norm();
        if (direct - combined).norm() > 1e-9 * scale {
            return Err(Error::InvalidMap("evaluator is not linear".into()));
        }
    }
    Ok(choi)
}

pub fn map_of_choi(choi: &ComplexMatrix9) -> LinearMapM3 {
    LinearMapM3::from_choi(*choi)
}

/// Hilbert–Schmidt product `Tr(C₁ C₂†)`, conjugate-linear in the second argument.
pub fn hs_inner(c1: &ComplexMatrix9, c2: &ComplexMatrix9) -> C64 {
    c1.iter().zip(c2.iter()).map(|(a, b)| a * b.conj()).sum()
}

/// Hilbert–Schmidt product on `M₃`, `Tr(X Y†)`.
pub fn hs_inner3(x: &ComplexMatrix3, y: &ComplexMatrix3) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}

/// The pairing of maps `Σ_ij Tr(Φ(e_ij) Ψ(e_ij)†)`, evaluated on matrix units.
pub fn map_inner(phi: &LinearMapM3, psi: &LinearMapM3) -> C64 {
    let mut acc = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            let e = matrix_unit(i, j);
            acc += hs_inner3(&phi.apply(&e), &psi.apply(&e));
        }
    }
    acc
}

/// `A X A†`.
pub fn ad_apply(a: &ComplexMatrix3, x: &ComplexMatrix3) -> ComplexMatrix3 {
    a * x * a.adjoint()
}

/// `α = Σ_ij A_ij e_i ⊗ e_j`.
pub fn vectorize(a: &ComplexMatrix3) -> ComplexVector9 {
    ComplexVector9::from_fn(|r, _| a[(r / 3, r % 3)])
}

pub fn unvectorize(alpha: &ComplexVector9) -> ComplexMatrix3 {
    ComplexMatrix3::from_fn(|i, j| alpha[pair(i, j)])
}

/// Vector `α` with `C_{Ad_A} = |α⟩⟨α|`. With the first Choi factor carrying the input
/// index this is `vec(Aᵗ)`.
pub fn choi_vector(a: &ComplexMatrix3) -> ComplexVector9 {
    vectorize(&a.transpose())
}

/// Choi matrix of `Ad_A`, a rank-one projector.
pub fn choi_of_ad(a: &ComplexMatrix3) -> ComplexMatrix9 {
    let alpha = choi_vector(a);
    alpha * alpha.adjoint()
}

/// Adjoint with respect to the Hilbert–Schmidt product on `M₃`, built on matrix units:
/// `Φ*(e_kl)[i,j] = conj(⟨Φ(e_ij), e_kl⟩)`.
pub fn adjoint_map(phi: &LinearMapM3) -> LinearMapM3 {
    let images: Vec<ComplexMatrix3> = (0..9)
        .map(|r| phi.apply(&matrix_unit(r / 3, r % 3)))
        .collect();
    let mut choi = ComplexMatrix9::zeros();
    for k in 0..3 {
        for l in 0..3 {
            let ekl = matrix_unit(k, l);
            for i in 0..3 {
                for j in 0..3 {
                    let value = hs_inner3(&images[pair(i, j)], &ekl).conj();
                    choi[(pair(k, i), pair(l, j))] = value;
                }
            }
        }
    }
    LinearMapM3::from_choi(choi)
}

/// `(I ⊗ Φ) C`: applies `Φ` to every 3×3 block of `C`.
pub fn compose_choi(phi: &LinearMapM3, c_psi: &ComplexMatrix9) -> ComplexMatrix9 {
    apply_to_blocks(phi, c_psi)
}

/// `(id ⊗ Φ) ρ` for an arbitrary 9×9 matrix.
pub fn apply_to_blocks(phi: &LinearMapM3, m: &ComplexMatrix9) -> ComplexMatrix9 {
    let mut out = ComplexMatrix9::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let block: ComplexMatrix3 = m.fixed_view::<3, 3>(3 * i, 3 * j).into_owned();
            out.fixed_view_mut::<3, 3>(3 * i, 3 * j)
                .copy_from(&phi.apply(&block));
        }
    }
    out
}

/// `Ad_{Bᵗ ⊗ A} C`, the Choi matrix of `Ad_A ∘ Φ ∘ Ad_B` when `C = C_Φ`.
pub fn local_conjugate_choi(
    choi: &ComplexMatrix9,
    a: &ComplexMatrix3,
    b: &ComplexMatrix3,
) -> ComplexMatrix9 {
    let k = kron(&b.transpose(), a);
    k * choi * k.adjoint()
}

/// `Ad_{R ⊗ S} C`.
pub fn ad_local(choi: &ComplexMatrix9, r: &ComplexMatrix3, s: &ComplexMatrix3) -> ComplexMatrix9 {
    let k = kron(r, s);
    k * choi * k.adjoint()
}

/// `(id ⊗ t) ρ`: `out[(i,k),(j,l)] = ρ[(i,l),(j,k)]`.
pub fn partial_transpose(rho: &ComplexMatrix9) -> ComplexMatrix9 {
    ComplexMatrix9::from_fn(|r, s| {
        let (i, k) = (r / 3, r % 3);
        let (j, l) = (s / 3, s % 3);
        rho[(pair(i, l), pair(j, k))]
    })
}

/// `⟨· ⊗ y|C|· ⊗ y⟩`: entries `Σ_kl ȳ^k C[(i,k),(j,l)] y^l`.
pub fn compress_right(choi: &ComplexMatrix9, y: &ComplexVector3) -> ComplexMatrix3 {
    ComplexMatrix3::from_fn(|i, j| {
        let mut acc = ZERO;
        for k in 0..3 {
            for l in 0..3 {
                acc += y[k].conj() * choi[(pair(i, k), pair(j, l))] * y[l];
            }
        }
        acc
    })
}

/// `⟨x ⊗ ·|C|x ⊗ ·⟩`: entries `Σ_kl x̄^k C[(k,i),(l,j)] x^l`.
pub fn compress_left(choi: &ComplexMatrix9, x: &ComplexVector3) -> ComplexMatrix3 {
    ComplexMatrix3::from_fn(|i, j| {
        let mut acc = ZERO;
        for k in 0..3 {
            for l in 0..3 {
                acc += x[k].conj() * choi[(pair(k, i), pair(l, j))] * x[l];
            }
        }
        acc
    })
}

/// `⟨x ⊗ y|C|x ⊗ y⟩` (real part; exact for Hermitian `C`).
pub fn product_expectation(choi: &ComplexMatrix9, x: &ComplexVector3, y: &ComplexVector3) -> f64 {
    let v = crate::linalg::kron_vec(x, y);
    v.dotc(&(choi * v)).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{min_eigenvalue, numerical_rank, singular_values, ONE, RANK_TOL};
    use crate::random::{hermitian9, matrix3, matrix9, rng, unit_vector3};
    use approx::assert_abs_diff_eq;

    fn close9(a: &ComplexMatrix9, b: &ComplexMatrix9, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn identity_and_transpose_choi() {
        let id = choi_of_map(|x| *x).unwrap();
        assert_eq!(id, choi_identity());
        for r in 0..9 {
            for s in 0..9 {
                let (i, k, j, l) = (r / 3, r % 3, s / 3, s % 3);
                let expect = if i == k && j == l { 1.0 } else { 0.0 };
                assert_eq!(id[(r, s)], c(expect, 0.0));
            }
        }
        let t = choi_of_map(|x| x.transpose()).unwrap();
        assert_eq!(t, swap_operator());
    }

    #[test]
    fn nonlinear_or_nonfinite_evaluator_rejected() {
        let err = choi_of_map(|x| x.map(|z| z * z)).unwrap_err();
        assert!(matches!(err, Error::InvalidMap(_)));
        let err = choi_of_map(|x| x * c(f64::INFINITY, 0.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidMap(_)));
    }

    #[test]
    fn map_of_identity_choi_is_identity() {
        let phi = map_of_choi(&choi_identity());
        let mut r = rng(1);
        for _ in 0..10 {
            let x = matrix3(&mut r);
            assert_abs_diff_eq!((phi.apply(&x) - x).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn random_choi_round_trip() {
        let mut r = rng(2);
        for _ in 0..20 {
            let choi = hermitian9(&mut r);
            let phi = map_of_choi(&choi);
            let again = choi_of_map(|x| phi.apply(x)).unwrap();
            assert!(close9(&again, &choi, 1e-12));
        }
    }

    #[test]
    fn hs_inner_basic_values() {
        let id = choi_identity();
        assert_eq!(hs_inner(&id, &id), c(9.0, 0.0));
        assert_eq!(hs_inner(&id, &ComplexMatrix9::zeros()), ZERO);
    }

    #[test]
    fn isometry_against_matrix_unit_sum() {
        let mut r = rng(3);
        for _ in 0..50 {
            let phi = map_of_choi(&matrix9(&mut r));
            let psi = map_of_choi(&matrix9(&mut r));
            let lhs = map_inner(&phi, &psi);
            let rhs = hs_inner(phi.choi(), psi.choi());
            assert_abs_diff_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ad_apply_cases() {
        let mut r = rng(4);
        let x = matrix3(&mut r);
        assert_eq!(ad_apply(&ComplexMatrix3::identity(), &x), x);
        let ones = ComplexMatrix3::from_element(ONE);
        assert_eq!(ad_apply(&matrix_unit(0, 0), &ones), matrix_unit(0, 0));
        let h = crate::random::hermitian3(&mut r);
        let a = matrix3(&mut r);
        let out = ad_apply(&a, &h);
        assert_abs_diff_eq!((out - out.adjoint()).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn vectorize_cases() {
        let alpha = vectorize(&ComplexMatrix3::identity());
        let expect = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        for (z, e) in alpha.iter().zip(expect) {
            assert_eq!(*z, c(e, 0.0));
        }
        assert_eq!(vectorize(&matrix_unit(0, 1))[pair(0, 1)], ONE);
        let ad12 = choi_of_ad(&matrix_unit(0, 1));
        assert_eq!(ad12[(pair(1, 0), pair(1, 0))], ONE);
        assert_eq!(ad12.iter().filter(|z| **z != ZERO).count(), 1);
    }

    #[test]
    fn choi_of_ad_is_rank_one_and_matches_evaluator() {
        let mut r = rng(5);
        for _ in 0..20 {
            let a = matrix3(&mut r);
            let ca = choi_of_ad(&a);
            assert_eq!(numerical_rank(&ca, RANK_TOL), 1);
            let via_eval = choi_of_map(|x| ad_apply(&a, x)).unwrap();
            assert!(close9(&ca, &via_eval, 1e-12));
        }
    }

    #[test]
    fn adjoint_of_identity_and_conjugations() {
        let id = LinearMapM3::identity();
        assert!(close9(id.adjoint().choi(), id.choi(), 1e-15));
        let mut r = rng(6);
        for _ in 0..10 {
            let a = matrix3(&mut r);
            let adj = LinearMapM3::conjugation(&a).adjoint();
            let expect = LinearMapM3::conjugation(&a.adjoint());
            assert!(close9(adj.choi(), expect.choi(), 1e-12));
        }
    }

    #[test]
    fn adjoint_is_involution_and_satisfies_pairing_identity() {
        let mut r = rng(7);
        for _ in 0..30 {
            let phi = map_of_choi(&matrix9(&mut r));
            let sigma = map_of_choi(&matrix9(&mut r));
            let psi = map_of_choi(&matrix9(&mut r));
            assert!(close9(phi.adjoint().adjoint().choi(), phi.choi(), 1e-12));
            let lhs = map_inner(&phi.compose(&sigma), &psi);
            let rhs = map_inner(&sigma, &phi.adjoint().compose(&psi));
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn compose_choi_cases() {
        let mut r = rng(8);
        let c_psi = matrix9(&mut r);
        assert_eq!(compose_choi(&LinearMapM3::identity(), &c_psi), c_psi);
        let composed = compose_choi(&LinearMapM3::transpose(), &choi_identity());
        assert_eq!(composed, swap_operator());
        for _ in 0..20 {
            let phi = map_of_choi(&matrix9(&mut r));
            let psi = map_of_choi(&matrix9(&mut r));
            let direct = choi_of_map(|x| phi.apply(&psi.apply(x))).unwrap();
            assert!(close9(&compose_choi(&phi, psi.choi()), &direct, 1e-11));
        }
    }

    #[test]
    fn local_conjugation_identity_and_transport() {
        let mut r = rng(9);
        let choi = matrix9(&mut r);
        let i3 = ComplexMatrix3::identity();
        assert_eq!(local_conjugate_choi(&choi, &i3, &i3), choi);
        for _ in 0..20 {
            let (a, b) = (matrix3(&mut r), matrix3(&mut r));
            let phi = map_of_choi(&matrix9(&mut r));
            let direct = choi_of_map(|x| ad_apply(&a, &phi.apply(&ad_apply(&b, x)))).unwrap();
            assert!(close9(
                &local_conjugate_choi(phi.choi(), &a, &b),
                &direct,
                1e-10
            ));
        }
    }

    #[test]
    fn local_conjugation_preserves_rank_one() {
        let mut r = rng(10);
        let m = matrix3(&mut r);
        let (a, b) = (matrix3(&mut r), matrix3(&mut r));
        let out = local_conjugate_choi(&choi_of_ad(&m), &a, &b);
        assert_eq!(numerical_rank(&out, RANK_TOL), 1);
        // Ad_A ∘ Ad_M ∘ Ad_B = Ad_{AMB}
        assert!(close9(&out, &choi_of_ad(&(a * m * b)), 1e-10));
    }

    #[test]
    fn partial_transpose_cases() {
        let diag = ComplexMatrix9::from_diagonal(&ComplexVector9::from_fn(|r, _| c(r as f64, 0.0)));
        assert_eq!(partial_transpose(&diag), diag);

        let maxent = choi_identity() / c(3.0, 0.0);
        let pt = partial_transpose(&maxent);
        assert!(close9(&pt, &(swap_operator() / c(3.0, 0.0)), 1e-15));
        assert_abs_diff_eq!(min_eigenvalue(&pt).unwrap(), -1.0 / 3.0, epsilon = 1e-12);

        let mut r = rng(11);
        let (u, v) = (matrix3(&mut r), matrix3(&mut r));
        let (ra, rb) = (u * u.adjoint(), v * v.adjoint());
        let prod = kron(&ra, &rb);
        let pt = partial_transpose(&prod);
        assert!(close9(&pt, &kron(&ra, &rb.transpose()), 1e-13));
        assert!(min_eigenvalue(&pt).unwrap() > -1e-12);
        assert!(singular_values(&pt)[8] >= 0.0);
    }

    #[test]
    fn compressions_of_identity() {
        let mut r = rng(12);
        let y = unit_vector3(&mut r);
        let id9 = ComplexMatrix9::identity();
        assert_abs_diff_eq!(
            (compress_right(&id9, &y) - ComplexMatrix3::identity()).norm(),
            0.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            (compress_left(&id9, &y) - ComplexMatrix3::identity()).norm(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn compressions_reproduce_product_expectation() {
        let mut r = rng(13);
        for _ in 0..30 {
            let choi = matrix9(&mut r);
            let (x, y) = (unit_vector3(&mut r), unit_vector3(&mut r));
            let v = crate::linalg::kron_vec(&x, &y);
            // brute-force double sum over all 81 entries
            let mut direct = ZERO;
            for a in 0..9 {
                for b in 0..9 {
                    direct += v[a].conj() * choi[(a, b)] * v[b];
                }
            }
            let via_right = x.dotc(&(compress_right(&choi, &y) * x));
            let via_left = y.dotc(&(compress_left(&choi, &x) * y));
            assert_abs_diff_eq!((via_right - direct).norm(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!((via_left - direct).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn compressions_of_hermitian_are_hermitian() {
        let mut r = rng(14);
        let h = hermitian9(&mut r);
        let y = unit_vector3(&mut r);
        let m = compress_right(&h, &y);
        assert_abs_diff_eq!((m - m.adjoint()).norm(), 0.0, epsilon = 1e-13);
        let m = compress_left(&h, &y);
        assert_abs_diff_eq!((m - m.adjoint()).norm(), 0.0, epsilon = 1e-13);
    }
}
