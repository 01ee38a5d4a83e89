use serde::{Deserialize, Serialize};

use crate::choi::choi_identity;
use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::linalg::{c, check_hermitian, kron, min_eigenvalue, ComplexMatrix9, ComplexVector3};

/// Tolerance on trace and negative eigenvalues when validating states.
pub const STATE_TOL: f64 = 1e-9;

/// A two-qutrit density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix9 {
    matrix: ComplexMatrix9,
}

impl DensityMatrix9 {
    pub fn new(matrix: ComplexMatrix9) -> Result<Self> {
        Self::with_tolerance(matrix, STATE_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix9, tol: f64) -> Result<Self> {
        check_hermitian(&matrix)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let min = min_eigenvalue(&matrix)?;
        if min < -tol {
            return Err(Error::InvalidDensity(format!(
                "minimum eigenvalue {min:.3e} is negative"
            )));
        }
        Ok(Self { matrix })
    }

    /// `|Ω⟩⟨Ω|/3` with `Ω = Σ e_i ⊗ e_i`.
    pub fn maximally_entangled() -> Self {
        Self {
            matrix: choi_identity() / c(3.0, 0.0),
        }
    }

    /// Pure product state `|x⟩⟨x| ⊗ |y⟩⟨y|` for unit `x`, `y`.
    pub fn product(x: &ComplexVector3, y: &ComplexVector3) -> Result<Self> {
        let px = x * x.adjoint();
        let py = y * y.adjoint();
        Self::new(kron(&px, &py))
    }

    pub fn matrix(&self) -> &ComplexMatrix9 {
        &self.matrix
    }
}

impl Serialize for DensityMatrix9 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(&self.matrix).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix9 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = MatrixJson::deserialize(d)?;
        let m = json.to_matrix::<9, 9>().map_err(serde::de::Error::custom)?;
        DensityMatrix9::new(m).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{rng, unit_vector3};

    #[test]
    fn maximally_entangled_is_valid() {
        let rho = DensityMatrix9::maximally_entangled();
        assert!(DensityMatrix9::new(*rho.matrix()).is_ok());
    }

    #[test]
    fn rejects_wrong_trace_and_negative_spectrum() {
        let m = ComplexMatrix9::identity();
        assert!(matches!(
            DensityMatrix9::new(m),
            Err(Error::InvalidDensity(_))
        ));
        let mut m = ComplexMatrix9::identity() / c(9.0, 0.0);
        m[(0, 0)] = c(-0.5, 0.0);
        m[(1, 1)] = c(0.5 + 1.0 / 9.0, 0.0);
        assert!(matches!(
            DensityMatrix9::new(m),
            Err(Error::InvalidDensity(_))
        ));
    }

    #[test]
    fn product_state_is_valid() {
        let mut r = rng(3);
        let (x, y) = (unit_vector3(&mut r), unit_vector3(&mut r));
        assert!(DensityMatrix9::product(&x, &y).is_ok());
    }
}
