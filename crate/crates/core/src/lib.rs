//! Choi–Jamiołkowski calculus for linear maps on 3×3 complex matrices.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] – fixed-size complex matrices, Hermitian spectra, numerical rank.
//! * [`choi`] – Choi matrices, the Hilbert–Schmidt pairing of maps, adjoints,
//!   composition, local conjugation, partial transpose and compressions.
//! * [`hakye`] – the Ha–Kye family `Φ_t` of extreme positive maps together with the
//!   determinant function of its compressions and the exact singular structure.
//! * [`positivity`] – block positivity by alternating eigenvector minimisation,
//!   complete positivity, PPT, witnesses and random separable states.
//! * [`localequiv`] – moduli-preserving matrices and the obstruction chain showing
//!   that distinct members of the Ha–Kye family are not locally equivalent.
//!
//! Matrices on `C³ ⊗ C³` use the composite index `(i, k) ↦ 3i + k` (zero based),
//! with `i` labelling the first tensor factor, so that
//! `C[(i,k),(j,l)] = Φ(e_ij)[k,l]`.

// `!(x > y)` is used deliberately so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod choi;
pub mod error;
pub mod hakye;
pub mod io;
pub mod linalg;
pub mod localequiv;
pub mod positivity;
pub mod random;
pub mod state;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix3, ComplexMatrix9, ComplexVector3, ComplexVector9, C64};
