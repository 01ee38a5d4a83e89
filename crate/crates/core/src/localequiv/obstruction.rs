//! Modulus chains that rule out monomial candidates.
//!
//! Write the transport matrix as `M = R† = diag(ζ)·P` with `(M y)_i = ζ_i y_{π(i)}` and
//! let `w_i = |ζ_i|²`. The `t1` family vanishing at index `k` is sent to a vector
//! vanishing at `m = π⁻¹(k)`, so it has to land on the `t2` family vanishing at `m`.
//! Comparing moduli at positions `m+1` and `m+2` (mod 3) gives one relation per `k`:
//!
//! * even `π` (identity, 3-cycles): `w_{m+1}·t1 = w_{m+2}·t2`, whose product over
//!   `k` forces `t1³ = t2³`;
//! * odd `π` (transpositions): `w_{m+1} = t1·t2·w_{m+2}`, whose product forces
//!   `(t1·t2)³ = 1`, impossible on `[0, 1)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::moduli::Permutation;
use super::transport::{transport_report, TransportReport};
use crate::error::{Error, Result};
use crate::hakye::HaKyeParams;
use crate::linalg::{c, ComplexMatrix3};
use crate::random::rng;

pub const TAG_TRANSPOSITION: &str = "Eq76";
pub const TAG_CYCLE: &str = "Eq91";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ObstructionStatus {
    Contradiction,
    Consistent,
}

/// `lhs_coeff · w_{lhs} = rhs_coeff · w_{rhs}` (zero-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightRelation {
    pub lhs: usize,
    pub lhs_coeff: f64,
    pub rhs: usize,
    pub rhs_coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcedRelation {
    pub tag: String,
    pub permutation: Permutation,
    /// Human-readable forced identity, e.g. `t1*t2 = 1`.
    pub relation: String,
    pub lhs: f64,
    pub rhs: f64,
    pub weight_relations: Vec<WeightRelation>,
    pub status: ObstructionStatus,
    pub note: String,
}

impl ForcedRelation {
    pub fn is_contradiction(&self) -> bool {
        self.status == ObstructionStatus::Contradiction
    }
}

fn weight_relations(t1: f64, t2: f64, p: &Permutation) -> Vec<WeightRelation> {
    let inv = p.inverse();
    (0..3)
        .map(|k| {
            let m = inv.apply(k);
            let (a, b) = ((m + 1) % 3, (m + 2) % 3);
            if p.is_even() {
                WeightRelation {
                    lhs: a,
                    lhs_coeff: t1,
                    rhs: b,
                    rhs_coeff: t2,
                }
            } else {
                WeightRelation {
                    lhs: a,
                    lhs_coeff: 1.0,
                    rhs: b,
                    rhs_coeff: t1 * t2,
                }
            }
        })
        .collect()
}

fn check_domain(t1: f64, t2: f64) -> Result<()> {
    HaKyeParams::new(t1)?;
    HaKyeParams::new(t2)?;
    Ok(())
}

/// The chain for `M = diag(ζ)·P` with `P` a transposition.
pub fn transposition_obstruction(t1: f64, t2: f64, p: Permutation) -> Result<ForcedRelation> {
    check_domain(t1, t2)?;
    if p.is_even() {
        return Err(Error::Domain(format!(
            "{} is not a transposition",
            p.cycle_notation()
        )));
    }
    let product = t1 * t2;
    let (status, note) = match (t1 == 0.0, t2 == 0.0) {
        (true, true) => (
            ObstructionStatus::Consistent,
            "degenerate: at t = 0 the vanishing families are basis vectors and the modulus chain does not apply"
                .to_string(),
        ),
        (true, false) | (false, true) => (
            ObstructionStatus::Contradiction,
            "support mismatch: one side has families with two zero entries, the other with one".to_string(),
        ),
        (false, false) => (
            ObstructionStatus::Contradiction,
            format!("product of the weight relations forces t1*t2 = 1, but t1*t2 = {product}"),
        ),
    };
    Ok(ForcedRelation {
        tag: TAG_TRANSPOSITION.into(),
        permutation: p,
        relation: "t1*t2 = 1".into(),
        lhs: product,
        rhs: 1.0,
        weight_relations: weight_relations(t1, t2, &p),
        status,
        note,
    })
}

/// The chain for `M = diag(ζ)·P` with `P` a 3-cycle or the identity.
pub fn cycle_obstruction(t1: f64, t2: f64, p: Permutation) -> Result<ForcedRelation> {
    check_domain(t1, t2)?;
    if !p.is_even() {
        return Err(Error::Domain(format!(
            "{} is not a 3-cycle or the identity",
            p.cycle_notation()
        )));
    }
    let (lhs, rhs) = (t1.powi(3), t2.powi(3));
    let (status, note) = if t1 == t2 {
        (
            ObstructionStatus::Consistent,
            "weight relations reduce to |ζ_i| = |ζ_j|".to_string(),
        )
    } else {
        (
            ObstructionStatus::Contradiction,
            format!("product of the weight relations forces t1^3 = t2^3, but {lhs} != {rhs}"),
        )
    };
    Ok(ForcedRelation {
        tag: TAG_CYCLE.into(),
        permutation: p,
        relation: "t1^3 = t2^3".into(),
        lhs,
        rhs,
        weight_relations: weight_relations(t1, t2, &p),
        status,
        note,
    })
}

pub fn obstruction(t1: f64, t2: f64, p: Permutation) -> Result<ForcedRelation> {
    if p.is_even() {
        cycle_obstruction(t1, t2, p)
    } else {
        transposition_obstruction(t1, t2, p)
    }
}

/// Numerical corroboration of one branch. Any admissible `M` maps the equal-moduli
/// family (no zero entries) onto the equal-moduli family, which forces `|ζ_i|` to be
/// constant; the candidate `diag(e^{iθ})·P` with random phases is therefore the only
/// one left to test, and the transport check must fail exactly when the branch
/// reports a contradiction.
pub fn branch_candidate(p: Permutation, seed: u64) -> ComplexMatrix3 {
    let mut r = rng(seed);
    let d = ComplexMatrix3::from_fn(|i, j| {
        if i == j {
            c(0.0, r.random::<f64>() * std::f64::consts::TAU).exp()
        } else {
            c(0.0, 0.0)
        }
    });
    d * p.matrix()
}

pub fn branch_cross_check(
    t1: f64,
    t2: f64,
    p: Permutation,
    phase_samples: usize,
    seed: u64,
) -> Result<TransportReport> {
    let m = branch_candidate(p, seed);
    transport_report(t1, t2, &m.adjoint(), phase_samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn transposition_examples() {
        let r = transposition_obstruction(0.2, 0.5, Permutation::TRANSPOSITIONS[0]).unwrap();
        assert!(r.is_contradiction());
        assert_eq!(r.tag, "Eq76");
        assert!((r.lhs - 0.1).abs() < 1e-15 && r.rhs == 1.0);
        let same = transposition_obstruction(0.9, 0.9, Permutation::TRANSPOSITIONS[1]).unwrap();
        assert!(same.is_contradiction());
        assert!((same.lhs - 0.81).abs() < 1e-15);
        assert!(transposition_obstruction(0.2, 1.0 / 0.2, Permutation::TRANSPOSITIONS[0]).is_err());
        assert!(transposition_obstruction(0.2, 0.5, Permutation::IDENTITY).is_err());
        let degenerate =
            transposition_obstruction(0.0, 0.0, Permutation::TRANSPOSITIONS[2]).unwrap();
        assert_eq!(degenerate.status, ObstructionStatus::Consistent);
        assert!(
            transposition_obstruction(0.0, 0.4, Permutation::TRANSPOSITIONS[2])
                .unwrap()
                .is_contradiction()
        );
    }

    #[test]
    fn cycle_examples() {
        let r = cycle_obstruction(0.2, 0.5, Permutation::CYCLES[0]).unwrap();
        assert!(r.is_contradiction());
        assert_eq!(r.tag, "Eq91");
        assert_eq!(
            cycle_obstruction(0.3, 0.3, Permutation::CYCLES[1])
                .unwrap()
                .status,
            ObstructionStatus::Consistent
        );
        assert!(cycle_obstruction(0.0, 0.5, Permutation::IDENTITY)
            .unwrap()
            .is_contradiction());
        assert!(cycle_obstruction(0.2, 0.5, Permutation::TRANSPOSITIONS[0]).is_err());
    }

    #[test]
    fn relations_match_the_printed_cycle_chain() {
        // π = (2,0,1): |ζ1|² t2 = |ζ3|² t1, |ζ2|² t2 = |ζ1|² t1, |ζ3|² t2 = |ζ2|² t1
        let (t1, t2) = (0.3, 0.7);
        let mut rel = weight_relations(t1, t2, &Permutation([2, 0, 1]));
        rel.sort_by_key(|r| r.rhs);
        let expect = [(2, 0), (0, 1), (1, 2)];
        for (r, (lhs, rhs)) in rel.iter().zip(expect) {
            assert_eq!((r.lhs, r.rhs), (lhs, rhs));
            assert_eq!((r.lhs_coeff, r.rhs_coeff), (t1, t2));
        }
    }

    #[test]
    fn branches_agree_with_transport() {
        for (t1, t2) in [(0.2, 0.5), (0.0, 0.6), (0.8, 0.4), (0.5, 0.5)] {
            for p in Permutation::all() {
                let rel = obstruction(t1, t2, p).unwrap();
                let rep = branch_cross_check(t1, t2, p, 16, 7).unwrap();
                assert_eq!(
                    rep.holds,
                    !rel.is_contradiction(),
                    "{t1} {t2} {}",
                    p.cycle_notation()
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn relations_are_solvable_only_when_forced_identity_holds(
            t1 in 0.01f64..0.99, t2 in 0.01f64..0.99, which in 0usize..6,
        ) {
            let p = Permutation::all()[which];
            let rel = obstruction(t1, t2, p).unwrap();
            // product of coefficient ratios is 1 iff a positive weight solution exists
            let ratio: f64 = rel.weight_relations.iter().map(|w| w.lhs_coeff / w.rhs_coeff).product();
            let solvable = (ratio - 1.0).abs() < 1e-12;
            prop_assert_eq!(solvable, !rel.is_contradiction());
        }
    }
}
