//! Moduli-preserving linear maps.
//!
//! Two vectors `y, z ∈ Cⁿ` satisfy `|Σ_l y^l e^{iφ_l}| = |Σ_l z^l e^{iφ_l}|` for all
//! phases iff they are proportional by a unimodular factor or each has exactly one
//! nonzero entry of the same modulus. A matrix whose rows pairwise have this property
//! is therefore monomial or has proportional rows.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix3, C64, ZERO};
use crate::random::rng;

/// Default number of phase tuples drawn by [`moduli_equal_oracle`].
pub const PHASE_SAMPLES: usize = 256;

const ORACLE_TOL: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-10;

/// Randomised test of `|Σ y^l e^{iφ_l}| = |Σ z^l e^{iφ_l}|`. The first tuple is all
/// zeros, the rest are uniform. `false` is definitive, `true` means no counterexample
/// was found.
pub fn moduli_equal_oracle(y: &[C64], z: &[C64], phase_samples: usize, seed: u64) -> Result<bool> {
    if y.len() != z.len() {
        return Err(Error::Domain(format!(
            "lengths {} and {} differ",
            y.len(),
            z.len()
        )));
    }
    let scale = 1.0f64.max(norm1(y)).max(norm1(z));
    let mut r = rng(seed);
    let mut phases = vec![0.0; y.len()];
    for sample in 0..phase_samples.max(1) {
        if sample > 0 {
            phases.iter_mut().for_each(|p| *p = r.random::<f64>() * TAU);
        }
        let lhs = phased_sum(y, &phases).norm();
        let rhs = phased_sum(z, &phases).norm();
        if (lhs - rhs).abs() > ORACLE_TOL * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

fn phased_sum(v: &[C64], phases: &[f64]) -> C64 {
    v.iter()
        .zip(phases)
        .map(|(x, p)| x * C64::from_polar(1.0, *p))
        .sum()
}

fn norm1(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).sum()
}

fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn support(v: &[C64], tol: f64) -> Vec<usize> {
    (0..v.len()).filter(|&i| v[i].norm() > tol).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VectorRelation {
    /// `z = factor · y`.
    Proportional {
        factor_re: f64,
        factor_im: f64,
    },
    SingleNonzeroEach {
        y_index: usize,
        z_index: usize,
    },
    Neither,
}

impl VectorRelation {
    pub fn factor(&self) -> Option<C64> {
        match *self {
            VectorRelation::Proportional {
                factor_re,
                factor_im,
            } => Some(c(factor_re, factor_im)),
            _ => None,
        }
    }

    /// Whether the relation implies equal phased moduli for `y` and `z`.
    pub fn preserves_moduli(&self, y: &[C64], z: &[C64]) -> bool {
        let scale = 1.0f64.max(max_abs(y)).max(max_abs(z));
        match *self {
            VectorRelation::Proportional { .. } => {
                (self.factor().unwrap().norm() - 1.0).abs() <= ORACLE_TOL
                    || max_abs(y) <= ZERO_TOL * scale
            }
            VectorRelation::SingleNonzeroEach { y_index, z_index } => {
                (y[y_index].norm() - z[z_index].norm()).abs() <= ORACLE_TOL * scale
            }
            VectorRelation::Neither => false,
        }
    }
}

/// Proportionality is tested first, so a pair of single-nonzero vectors on the same
/// index reports `Proportional`.
pub fn classify_vectors(y: &[C64], z: &[C64]) -> Result<VectorRelation> {
    if y.len() != z.len() {
        return Err(Error::Domain(format!(
            "lengths {} and {} differ",
            y.len(),
            z.len()
        )));
    }
    let scale = max_abs(y).max(max_abs(z));
    if scale == 0.0 {
        return Ok(VectorRelation::Proportional {
            factor_re: 1.0,
            factor_im: 0.0,
        });
    }
    let tol = ZERO_TOL * scale;
    let pivot = (0..y.len())
        .max_by(|&i, &j| y[i].norm().total_cmp(&y[j].norm()))
        .unwrap();
    if y[pivot].norm() > tol {
        let factor = z[pivot] / y[pivot];
        let off = y
            .iter()
            .zip(z)
            .map(|(a, b)| (b - factor * a).norm())
            .fold(0.0, f64::max);
        if off <= tol * (1.0 + factor.norm()) {
            return Ok(VectorRelation::Proportional {
                factor_re: factor.re,
                factor_im: factor.im,
            });
        }
    }
    let (sy, sz) = (support(y, tol), support(z, tol));
    if sy.len() == 1 && sz.len() == 1 {
        return Ok(VectorRelation::SingleNonzeroEach {
            y_index: sy[0],
            z_index: sz[0],
        });
    }
    Ok(VectorRelation::Neither)
}

/// `P[i][π(i)] = 1`, so `(P y)_i = y_{π(i)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation(pub [usize; 3]);

impl Permutation {
    pub const IDENTITY: Permutation = Permutation([0, 1, 2]);
    pub const TRANSPOSITIONS: [Permutation; 3] = [
        Permutation([0, 2, 1]),
        Permutation([2, 1, 0]),
        Permutation([1, 0, 2]),
    ];
    pub const CYCLES: [Permutation; 2] = [Permutation([2, 0, 1]), Permutation([1, 2, 0])];

    pub fn all() -> [Permutation; 6] {
        let [t0, t1, t2] = Self::TRANSPOSITIONS;
        let [c0, c1] = Self::CYCLES;
        [Self::IDENTITY, t0, t1, t2, c0, c1]
    }

    pub fn new(images: [usize; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &i in &images {
            if i > 2 || seen[i] {
                return Err(Error::Domain(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Self(images))
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = [0; 3];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p] = i;
        }
        Permutation(inv)
    }

    pub fn is_even(&self) -> bool {
        let p = self.0;
        let inversions = (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count();
        inversions % 2 == 0
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn matrix(&self) -> ComplexMatrix3 {
        ComplexMatrix3::from_fn(|i, j| if self.0[i] == j { c(1.0, 0.0) } else { ZERO })
    }

    /// One-based cycle notation, e.g. `(1 3 2)` or `(2 3)`.
    pub fn cycle_notation(&self) -> String {
        if self.is_identity() {
            return "id".into();
        }
        let mut seen = [false; 3];
        let mut parts = Vec::new();
        for start in 0..3 {
            if seen[start] || self.0[start] == start {
                continue;
            }
            let mut cyc = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cyc.push((i + 1).to_string());
                i = self.0[i];
            }
            parts.push(format!("({})", cyc.join(" ")));
        }
        parts.concat()
    }
}

/// `S = diag(ζ) · P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonomialFactors {
    pub permutation: Permutation,
    pub zeta: [C64; 3],
}

impl MonomialFactors {
    pub fn recompose(&self) -> ComplexMatrix3 {
        ComplexMatrix3::from_diagonal(&self.zeta.into()) * self.permutation.matrix()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModuliClass {
    Monomial(MonomialFactors),
    ProportionalRows { rows: (usize, usize) },
    Generic,
}

impl ModuliClass {
    pub fn kind(&self) -> &'static str {
        match self {
            ModuliClass::Monomial(_) => "MONOMIAL",
            ModuliClass::ProportionalRows { .. } => "PROPORTIONAL_ROWS",
            ModuliClass::Generic => "GENERIC",
        }
    }
}

fn rows(x: &ComplexMatrix3) -> [[C64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| x[(i, j)]))
}

pub fn classify_matrix(x: &ComplexMatrix3) -> ModuliClass {
    let rs = rows(x);
    for i in 0..3 {
        for j in i + 1..3 {
            if matches!(
                classify_vectors(&rs[i], &rs[j]).expect("equal lengths"),
                VectorRelation::Proportional { .. }
            ) {
                return ModuliClass::ProportionalRows { rows: (i, j) };
            }
        }
    }
    let tol = ZERO_TOL * x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut images = [0; 3];
    let mut zeta = [ZERO; 3];
    for (i, row) in rs.iter().enumerate() {
        let s = support(row, tol);
        if s.len() != 1 {
            return ModuliClass::Generic;
        }
        images[i] = s[0];
        zeta[i] = row[s[0]];
    }
    // rows are pairwise non-proportional, so the columns are distinct
    ModuliClass::Monomial(MonomialFactors {
        permutation: Permutation(images),
        zeta,
    })
}

pub fn monomial_decompose(s: &ComplexMatrix3) -> Option<MonomialFactors> {
    match classify_matrix(s) {
        ModuliClass::Monomial(f) => Some(f),
        _ => None,
    }
}

/// Row-pair moduli check of the whole matrix: every pair of rows passes the oracle.
pub fn rows_preserve_moduli(x: &ComplexMatrix3, phase_samples: usize, seed: u64) -> bool {
    let rs = rows(x);
    (0..3).all(|i| {
        (i + 1..3).all(|j| {
            moduli_equal_oracle(&rs[i], &rs[j], phase_samples, seed).expect("equal lengths")
        })
    })
}

/// Cross-check of the classification against the randomised oracle: for every row
/// pair the classified relation predicts the oracle outcome, and a `GENERIC` matrix
/// fails the oracle on at least one pair.
pub fn classification_agrees_with_oracle(
    x: &ComplexMatrix3,
    phase_samples: usize,
    seed: u64,
) -> bool {
    let rs = rows(x);
    let mut any_failure = false;
    for i in 0..3 {
        for j in i + 1..3 {
            let relation = classify_vectors(&rs[i], &rs[j]).expect("equal lengths");
            let oracle =
                moduli_equal_oracle(&rs[i], &rs[j], phase_samples, seed).expect("equal lengths");
            any_failure |= !oracle;
            if relation.preserves_moduli(&rs[i], &rs[j]) != oracle {
                return false;
            }
        }
    }
    !matches!(classify_matrix(x), ModuliClass::Generic) || any_failure
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian, matrix3, phases};
    use proptest::prelude::{prop_assert_eq, proptest, Just, Strategy};

    fn v(xs: &[f64]) -> Vec<C64> {
        xs.iter().map(|&x| c(x, 0.0)).collect()
    }

    #[test]
    fn oracle_cases() {
        let y = v(&[1.0, -2.0, 0.5]);
        assert!(moduli_equal_oracle(&y, &y, 256, 0).unwrap());
        assert!(moduli_equal_oracle(&v(&[1.0, 0.0, 0.0]), &v(&[0.0, 1.0, 0.0]), 256, 0).unwrap());
        // decided already by the all-zero phase tuple: 2 against 4
        assert!(!moduli_equal_oracle(&v(&[1.0, 1.0, 0.0]), &v(&[2.0, 2.0, 0.0]), 1, 0).unwrap());
        assert!(moduli_equal_oracle(&y, &v(&[1.0]), 4, 0).is_err());
    }

    #[test]
    fn vector_classification_cases() {
        let r = classify_vectors(&v(&[1.0, 2.0, 3.0]), &v(&[2.0, 4.0, 6.0])).unwrap();
        assert_eq!(r.factor(), Some(c(2.0, 0.0)));
        assert_eq!(
            classify_vectors(&v(&[0.0, 5.0, 0.0]), &v(&[5.0, 0.0, 0.0])).unwrap(),
            VectorRelation::SingleNonzeroEach {
                y_index: 1,
                z_index: 0
            }
        );
        let mut rr = rng(1);
        let g: Vec<C64> = (0..3).map(|_| gaussian(&mut rr)).collect();
        let h: Vec<C64> = (0..3).map(|_| gaussian(&mut rr)).collect();
        assert_eq!(classify_vectors(&g, &h).unwrap(), VectorRelation::Neither);
        assert!(!moduli_equal_oracle(&g, &h, 256, 2).unwrap());
    }

    #[test]
    fn matrix_classification_cases() {
        match classify_matrix(&ComplexMatrix3::identity()) {
            ModuliClass::Monomial(f) => assert!(f.permutation.is_identity()),
            other => panic!("{other:?}"),
        }
        let m = ComplexMatrix3::from_fn(|i, j| {
            let re = [[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 0.0, 1.0]][i][j];
            c(re, 0.0)
        });
        assert_eq!(
            classify_matrix(&m),
            ModuliClass::ProportionalRows { rows: (0, 1) }
        );
        assert_eq!(classify_matrix(&matrix3(&mut rng(3))), ModuliClass::Generic);
        assert!(monomial_decompose(&matrix3(&mut rng(3))).is_none());
    }

    #[test]
    fn explicit_permutation_matrices_decompose() {
        let zeta = [c(0.5, 0.2), c(-1.0, 0.0), c(0.0, 2.0)];
        let d = ComplexMatrix3::from_diagonal(&zeta.into());
        let grid = |rows: [[f64; 3]; 3]| ComplexMatrix3::from_fn(|i, j| c(rows[i][j], 0.0));
        let cases = [
            (grid([[1., 0., 0.], [0., 0., 1.], [0., 1., 0.]]), [0, 2, 1]),
            (grid([[0., 0., 1.], [1., 0., 0.], [0., 1., 0.]]), [2, 0, 1]),
            (grid([[0., 1., 0.], [0., 0., 1.], [1., 0., 0.]]), [1, 2, 0]),
        ];
        for (p, images) in cases {
            let f = monomial_decompose(&(d * p)).unwrap();
            assert_eq!(f.permutation, Permutation(images));
            assert_eq!(f.zeta, zeta);
            assert_eq!(f.recompose(), d * p);
            assert_eq!(f.permutation.matrix(), p);
        }
        assert_eq!(Permutation([2, 0, 1]).cycle_notation(), "(1 3 2)");
        assert_eq!(Permutation([0, 2, 1]).cycle_notation(), "(2 3)");
    }

    #[test]
    fn permutation_parity() {
        assert!(Permutation::IDENTITY.is_even());
        assert!(Permutation::CYCLES.iter().all(Permutation::is_even));
        assert!(Permutation::TRANSPOSITIONS.iter().all(|p| !p.is_even()));
        for p in Permutation::all() {
            assert_eq!(
                p.matrix() * p.inverse().matrix(),
                ComplexMatrix3::identity()
            );
        }
        assert!(Permutation::new([0, 0, 1]).is_err());
    }

    fn unimodular(r: &mut impl Rng) -> C64 {
        C64::from_polar(1.0, r.random::<f64>() * TAU)
    }

    #[test]
    fn classification_agrees_on_structured_and_random_pairs() {
        let mut r = rng(4);
        for k in 0..1000 {
            let y: Vec<C64> = (0..3).map(|_| gaussian(&mut r)).collect();
            let z: Vec<C64> = match k % 4 {
                0 => y.iter().map(|x| x * unimodular(&mut r)).collect(),
                1 => {
                    let f = unimodular(&mut r);
                    y.iter().map(|x| x * f).collect()
                }
                2 => {
                    let f = c(1.0 + r.random::<f64>(), 0.0);
                    y.iter().map(|x| x * f).collect()
                }
                _ => (0..3).map(|_| gaussian(&mut r)).collect(),
            };
            let relation = classify_vectors(&y, &z).unwrap();
            let oracle = moduli_equal_oracle(&y, &z, 256, k).unwrap();
            assert_eq!(relation.preserves_moduli(&y, &z), oracle, "case {k}");
        }
        let ph = phases(&mut r);
        let y = v(&[0.0, 0.0, 2.0]);
        let z = vec![C64::from_polar(2.0, ph[0]), ZERO, ZERO];
        assert!(classify_vectors(&y, &z).unwrap().preserves_moduli(&y, &z));
    }

    proptest! {
        #[test]
        fn recompose_is_identity_on_monomials(
            images in Just([0usize, 1, 2]).prop_shuffle(),
            re in proptest::array::uniform3(0.1f64..3.0),
            arg in proptest::array::uniform3(0.0f64..TAU),
        ) {
            let f = MonomialFactors {
                permutation: Permutation(images),
                zeta: std::array::from_fn(|i| C64::from_polar(re[i], arg[i])),
            };
            let back = monomial_decompose(&f.recompose()).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
