//! Necessary condition on the singular sets.
//!
//! If `C_{Φ_{t1}} = Ad_{R⊗S} C_{Φ_{t2}}` then the compression pinning the first factor
//! transforms as `M_{t1}(y) = S M_{t2}(R†y) S†`, so `F_{t1}(y) = 0 ⟺ F_{t2}(R†y) = 0`:
//! `R†` must carry every singular family of `t1` into the singular set of `t2`.

use rand::Rng;

use super::moduli::{rows_preserve_moduli, PHASE_SAMPLES};
use crate::error::{Error, Result};
use crate::hakye::HaKyeParams;
use crate::linalg::{singular_values, ComplexMatrix3};
use crate::random::{phases, rng};

/// Threshold on `|F_{t2}|` at the normalised transported vector.
pub const TRANSPORT_TOL: f64 = 1e-8;

/// Detailed outcome of [`singular_set_transport_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport {
    pub holds: bool,
    /// Largest `|F_{t2}(R†y / ‖R†y‖)|` over all sampled family points.
    pub max_abs_f: f64,
    /// Whether the rows of `R†` pass the equal-moduli condition.
    pub equal_moduli_rows: bool,
}

/// Samples `phase_samples` points of every singular family of `t1` and checks that
/// `R†` maps them onto zeros of `F_{t2}`; for the equal-moduli family this also
/// requires the rows of `R†` to have equal phased moduli.
pub fn singular_set_transport_check(
    t1: f64,
    t2: f64,
    r: &ComplexMatrix3,
    phase_samples: usize,
    seed: u64,
) -> Result<bool> {
    Ok(transport_report(t1, t2, r, phase_samples, seed)?.holds)
}

pub fn transport_report(
    t1: f64,
    t2: f64,
    r: &ComplexMatrix3,
    phase_samples: usize,
    seed: u64,
) -> Result<TransportReport> {
    let p1 = HaKyeParams::new(t1)?;
    let p2 = HaKyeParams::new(t2)?;
    crate::linalg::ensure_finite(r)?;
    let sv = singular_values(r);
    if !(sv[2] > 1e-12 * sv[0]) {
        return Err(Error::Singular);
    }
    let m = r.adjoint();
    let mut gen = rng(seed);
    let mut max_abs_f = 0.0f64;
    for family in p1.families() {
        for sample in 0..phase_samples.max(1) {
            let ph = if sample == 0 {
                [0.0; 3]
            } else {
                phases(&mut gen)
            };
            let z = m * family.y(ph);
            max_abs_f = max_abs_f.max(p2.f_det(&z.normalize()).abs());
        }
    }
    let equal_moduli_rows = rows_preserve_moduli(&m, PHASE_SAMPLES, gen.random());
    Ok(TransportReport {
        holds: max_abs_f < TRANSPORT_TOL && equal_moduli_rows,
        max_abs_f,
        equal_moduli_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::localequiv::moduli::Permutation;
    use crate::random::matrix3;
    use std::f64::consts::TAU;

    fn unimodular_cycle(p: Permutation, seed: u64) -> ComplexMatrix3 {
        let mut r = rng(seed);
        let d = ComplexMatrix3::from_fn(|i, j| {
            if i == j {
                c(0.0, r.random::<f64>() * TAU).exp()
            } else {
                c(0.0, 0.0)
            }
        });
        d * p.matrix()
    }

    #[test]
    fn identity_and_cycles_preserve_the_singular_set() {
        assert!(
            singular_set_transport_check(0.4, 0.4, &ComplexMatrix3::identity(), 32, 1).unwrap()
        );
        for t in [0.0, 0.25, 0.5, 0.75] {
            for (k, p) in Permutation::CYCLES.into_iter().enumerate() {
                let m = unimodular_cycle(p, k as u64);
                assert!(
                    singular_set_transport_check(t, t, &m.adjoint(), 32, 2).unwrap(),
                    "t={t}"
                );
                // the orientation does not matter for a cycle with unimodular weights
                assert!(
                    singular_set_transport_check(t, t, &m, 32, 2).unwrap(),
                    "t={t}"
                );
            }
        }
    }

    #[test]
    fn different_parameters_fail() {
        let rep = transport_report(0.2, 0.5, &ComplexMatrix3::identity(), 16, 0).unwrap();
        assert!(!rep.holds && rep.max_abs_f > 1e-3 && rep.equal_moduli_rows);
        assert!(!singular_set_transport_check(0.3, 0.3, &matrix3(&mut rng(3)), 16, 0).unwrap());
        for p in Permutation::TRANSPOSITIONS {
            assert!(!singular_set_transport_check(0.3, 0.3, &p.matrix(), 16, 0).unwrap());
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let mut m = ComplexMatrix3::identity();
        m[(2, 2)] = c(0.0, 0.0);
        assert!(matches!(
            singular_set_transport_check(0.1, 0.1, &m, 4, 0),
            Err(Error::Singular)
        ));
    }
}
