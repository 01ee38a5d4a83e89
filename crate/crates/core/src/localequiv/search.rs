//! Numerical search for `R, S` with `C1 = Ad_{R⊗S} C2`.
//!
//! Both sides are normalised to trace 6 (`N(X) = 6X / Tr X`), which removes the scale
//! of `R ⊗ S`; the residual `‖N(C1) − N(Ad_{R⊗S} C2)‖_F` is minimised by
//! Levenberg–Marquardt over the 36 real parameters of `(R, S)` with an analytic
//! Jacobian. This is heuristic corroboration only: a large residual is not a proof.

use nalgebra::{DMatrix, DVector};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, check_hermitian, ensure_finite, kron, matrix_unit, singular_values, ComplexMatrix3,
    ComplexMatrix9,
};
use crate::random::{matrix3, substream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 64,
            iters: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub r: ComplexMatrix3,
    pub s: ComplexMatrix3,
    pub residual: f64,
    /// Index of the restart that produced the best residual (0 starts at `R = S = I`).
    pub best_start: usize,
}

/// `6X / Tr X`.
pub fn trace_normalize(x: &ComplexMatrix9) -> Option<ComplexMatrix9> {
    let tr = x.trace().re;
    (tr.abs() > 1e-300).then(|| x * c(6.0 / tr, 0.0))
}

/// `‖N(C1) − N(Ad_{R⊗S} C2)‖_F`, infinite when the transformed trace vanishes.
pub fn equivalence_residual(
    c1: &ComplexMatrix9,
    c2: &ComplexMatrix9,
    r: &ComplexMatrix3,
    s: &ComplexMatrix3,
) -> f64 {
    let k = kron(r, s);
    match (
        trace_normalize(c1),
        trace_normalize(&(k * c2 * k.adjoint())),
    ) {
        (Some(a), Some(b)) => (a - b).norm(),
        _ => f64::INFINITY,
    }
}

fn unpack(p: &DVector<f64>) -> (ComplexMatrix3, ComplexMatrix3) {
    let m = |off: usize| {
        ComplexMatrix3::from_fn(|i, j| c(p[off + 2 * (3 * i + j)], p[off + 2 * (3 * i + j) + 1]))
    };
    (m(0), m(18))
}

fn pack(r: &ComplexMatrix3, s: &ComplexMatrix3) -> DVector<f64> {
    let mut p = DVector::zeros(36);
    for (off, m) in [(0, r), (18, s)] {
        for i in 0..3 {
            for j in 0..3 {
                p[off + 2 * (3 * i + j)] = m[(i, j)].re;
                p[off + 2 * (3 * i + j) + 1] = m[(i, j)].im;
            }
        }
    }
    p
}

struct Problem {
    target: ComplexMatrix9,
    c2: ComplexMatrix9,
}

impl Problem {
    fn residual(&self, p: &DVector<f64>) -> Option<DVector<f64>> {
        let (r, s) = unpack(p);
        let k = kron(&r, &s);
        let n = trace_normalize(&(k * self.c2 * k.adjoint()))?;
        Some(flatten(&(n - self.target)))
    }

    fn residual_and_jacobian(&self, p: &DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let (r, s) = unpack(p);
        let k = kron(&r, &s);
        let c2k = self.c2 * k.adjoint();
        let m = k * c2k;
        let tau = m.trace().re;
        if tau.abs() < 1e-300 {
            return None;
        }
        let res = flatten(&(m * c(6.0 / tau, 0.0) - self.target));
        let mut jac = DMatrix::zeros(162, 36);
        for q in 0..36 {
            let (block, entry, imag) = (q / 18, (q % 18) / 2, q % 2 == 1);
            let unit =
                matrix_unit(entry / 3, entry % 3) * if imag { c(0.0, 1.0) } else { c(1.0, 0.0) };
            let dk = if block == 0 {
                kron(&unit, &s)
            } else {
                kron(&r, &unit)
            };
            let x = dk * c2k;
            let dm = x + x.adjoint();
            let dtau = dm.trace().re;
            let dn = (dm * c(1.0 / tau, 0.0) - m * c(dtau / (tau * tau), 0.0)) * c(6.0, 0.0);
            jac.set_column(q, &flatten(&dn));
        }
        Some((res, jac))
    }
}

fn flatten(m: &ComplexMatrix9) -> DVector<f64> {
    DVector::from_iterator(162, m.iter().map(|z| z.re).chain(m.iter().map(|z| z.im)))
}

/// Rescales both factors to unit largest singular value; the residual is unchanged.
fn gauge(r: &ComplexMatrix3, s: &ComplexMatrix3) -> (ComplexMatrix3, ComplexMatrix3) {
    let scale = |m: &ComplexMatrix3| {
        let top = singular_values(m)[0];
        if top > 0.0 {
            m / c(top, 0.0)
        } else {
            *m
        }
    };
    (scale(r), scale(s))
}

fn levenberg_marquardt(
    problem: &Problem,
    start: DVector<f64>,
    iters: usize,
) -> (DVector<f64>, f64) {
    let mut p = start;
    let mut cost = match problem.residual(&p) {
        Some(r) => r.norm_squared(),
        None => return (p, f64::INFINITY),
    };
    let mut lambda = 1e-3;
    for _ in 0..iters {
        if cost < 1e-30 {
            break;
        }
        let Some((res, jac)) = problem.residual_and_jacobian(&p) else {
            break;
        };
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &res;
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for d in 0..36 {
                a[(d, d)] += lambda * (jtj[(d, d)] + 1e-12);
            }
            let Some(step) = a.cholesky().map(|ch| ch.solve(&(-&grad))) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &p + &step;
            match problem.residual(&trial) {
                Some(r) if r.norm_squared() < cost => {
                    let (rn, sn) = unpack(&trial);
                    let (rn, sn) = gauge(&rn, &sn);
                    p = pack(&rn, &sn);
                    cost = problem
                        .residual(&p)
                        .map_or(f64::INFINITY, |r| r.norm_squared());
                    lambda = (lambda / 3.0).max(1e-15);
                    improved = true;
                    break;
                }
                _ => lambda *= 4.0,
            }
        }
        if !improved {
            break;
        }
    }
    (p, cost.sqrt())
}

/// Multi-start search; start 0 is `R = S = I`, the others are Ginibre matrices drawn
/// from `substream(seed, i)`. Best residual wins, ties broken by start index.
pub fn numeric_search_equiv(
    c1: &ComplexMatrix9,
    c2: &ComplexMatrix9,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    for m in [c1, c2] {
        ensure_finite(m)?;
        check_hermitian(m)?;
    }
    let target = trace_normalize(c1).ok_or_else(|| Error::Domain("C1 has zero trace".into()))?;
    if trace_normalize(c2).is_none() {
        return Err(Error::Domain("C2 has zero trace".into()));
    }
    let problem = Problem { target, c2: *c2 };
    let restarts = opts.restarts.max(1);
    let run = |i: usize| {
        let (r0, s0) = if i == 0 {
            (ComplexMatrix3::identity(), ComplexMatrix3::identity())
        } else {
            let mut g = substream(opts.seed, i as u64);
            (matrix3(&mut g), matrix3(&mut g))
        };
        let (r0, s0) = gauge(&r0, &s0);
        let (p, residual) = levenberg_marquardt(&problem, pack(&r0, &s0), opts.iters);
        (i, p, residual)
    };
    #[cfg(feature = "parallel")]
    let runs: Vec<_> = (0..restarts).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<_> = (0..restarts).map(run).collect();
    let (best_start, p, _) = runs
        .into_iter()
        .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)))
        .expect("at least one start");
    let (r, s) = unpack(&p);
    let (r, s) = gauge(&r, &s);
    let residual = equivalence_residual(c1, c2, &r, &s);
    Ok(SearchResult {
        r,
        s,
        residual,
        best_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choi::ad_local;
    use crate::hakye::choi_hakye;
    use crate::random::rng;

    #[test]
    fn equal_parameters_are_found_at_identity() {
        let c = choi_hakye(0.4).unwrap();
        let res = numeric_search_equiv(
            &c,
            &c,
            &SearchOptions {
                restarts: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(res.residual < 1e-8);
        assert_eq!(res.best_start, 0);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut g = rng(5);
        let problem = Problem {
            target: trace_normalize(&choi_hakye(0.3).unwrap()).unwrap(),
            c2: choi_hakye(0.6).unwrap(),
        };
        let p = pack(&matrix3(&mut g), &matrix3(&mut g));
        let (_, jac) = problem.residual_and_jacobian(&p).unwrap();
        let h = 1e-6;
        for q in [0, 7, 18, 35] {
            let mut up = p.clone();
            up[q] += h;
            let mut down = p.clone();
            down[q] -= h;
            let fd =
                (problem.residual(&up).unwrap() - problem.residual(&down).unwrap()) / (2.0 * h);
            let diff = (&fd - jac.column(q)).norm();
            assert!(diff < 1e-6 * (1.0 + fd.norm()), "column {q}: {diff}");
        }
    }

    #[test]
    fn planted_solution_is_recovered() {
        let mut g = rng(21);
        let c2 = choi_hakye(0.35).unwrap();
        let (r0, s0) = (matrix3(&mut g), matrix3(&mut g));
        let c1 = ad_local(&c2, &r0, &s0);
        let res = numeric_search_equiv(
            &c1,
            &c2,
            &SearchOptions {
                restarts: 16,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(res.residual < 1e-6, "{}", res.residual);
        assert!((singular_values(&res.r)[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn different_parameters_keep_a_gap() {
        let res = numeric_search_equiv(
            &choi_hakye(0.2).unwrap(),
            &choi_hakye(0.5).unwrap(),
            &SearchOptions {
                restarts: 8,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(res.residual > 1e-3, "{}", res.residual);
    }
}
