//! JSON exchange format for complex matrices:
//! `{"rows": N, "cols": N, "re": [[...]], "im": [[...]]}`, row-major.

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, ensure_finite, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> Self {
        let re = (0..R)
            .map(|i| (0..C).map(|j| m[(i, j)].re).collect())
            .collect();
        let im = (0..R)
            .map(|i| (0..C).map(|j| m[(i, j)].im).collect())
            .collect();
        Self {
            rows: R,
            cols: C,
            re,
            im,
        }
    }

    /// Converts to a fixed-size matrix, rejecting ragged arrays, wrong shapes and NaN/Inf.
    pub fn to_matrix<const R: usize, const C: usize>(&self) -> Result<SMatrix<C64, R, C>> {
        let shape_err = || Error::Shape {
            expected_rows: R,
            expected_cols: C,
            rows: self.rows,
            cols: self.cols,
        };
        if self.rows != R || self.cols != C {
            return Err(shape_err());
        }
        if self.re.len() != R || self.im.len() != R {
            return Err(shape_err());
        }
        if self
            .re
            .iter()
            .chain(self.im.iter())
            .any(|row| row.len() != C)
        {
            return Err(shape_err());
        }
        let m = SMatrix::<C64, R, C>::from_fn(|i, j| c(self.re[i][j], self.im[i][j]));
        ensure_finite(&m)?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexMatrix3, ComplexMatrix9};

    #[test]
    fn round_trip_through_json_text() {
        let m = ComplexMatrix3::from_fn(|i, j| c(i as f64 + 0.1, j as f64 * 1e-17 - 3.0));
        let text = serde_json::to_string(&MatrixJson::from_matrix(&m)).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_matrix::<3, 3>().unwrap(), m);
    }

    #[test]
    fn wrong_shape_is_rejected() {
        let j = MatrixJson::from_matrix(&ComplexMatrix3::identity());
        assert!(matches!(j.to_matrix::<9, 9>(), Err(Error::Shape { .. })));
        let _ = ComplexMatrix9::identity();
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut j = MatrixJson::from_matrix(&ComplexMatrix3::identity());
        j.im[1].pop();
        assert!(matches!(j.to_matrix::<3, 3>(), Err(Error::Shape { .. })));
    }
}
