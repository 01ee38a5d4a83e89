//! Dense complex matrices of size 3 and 9 and the few spectral routines built on them.

use nalgebra::{DMatrix, DVector, Matrix3, SMatrix, SVector, SymmetricEigen, Vector3};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type ComplexVector3 = SVector<C64, 3>;
pub type ComplexVector9 = SVector<C64, 9>;
pub type ComplexMatrix3 = SMatrix<C64, 3, 3>;
pub type ComplexMatrix9 = SMatrix<C64, 9, 9>;

/// Relative tolerance for Hermiticity, scaled by the Frobenius norm.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Default relative cut-off for singular values in [`numerical_rank`].
pub const RANK_TOL: f64 = 1e-9;

pub const ZERO: C64 = Complex { re: 0.0, im: 0.0 };
pub const ONE: C64 = Complex { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Composite index of `e_i ⊗ e_k` in `C⁹`.
#[inline]
pub const fn pair(i: usize, k: usize) -> usize {
    3 * i + k
}

/// The matrix unit `e_ij`.
pub fn matrix_unit(i: usize, j: usize) -> ComplexMatrix3 {
    let mut m = ComplexMatrix3::zeros();
    m[(i, j)] = ONE;
    m
}

pub fn basis3(i: usize) -> ComplexVector3 {
    let mut v = ComplexVector3::zeros();
    v[i] = ONE;
    v
}

/// `a ⊗ b` with the first factor as the outer (block) index.
pub fn kron(a: &ComplexMatrix3, b: &ComplexMatrix3) -> ComplexMatrix9 {
    ComplexMatrix9::from_fn(|r, s| a[(r / 3, s / 3)] * b[(r % 3, s % 3)])
}

pub fn kron_vec(x: &ComplexVector3, y: &ComplexVector3) -> ComplexVector9 {
    ComplexVector9::from_fn(|r, _| x[r / 3] * y[r % 3])
}

pub fn ensure_finite<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> Result<()> {
    for col in 0..C {
        for row in 0..R {
            let z = m[(row, col)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
        }
    }
    Ok(())
}

/// `‖M − M†‖_F`.
pub fn hermitian_deviation<const N: usize>(m: &SMatrix<C64, N, N>) -> f64 {
    (m - m.adjoint()).norm()
}

/// Fails unless `‖M − M†‖_F ≤ 1e-10 · ‖M‖_F`.
pub fn check_hermitian<const N: usize>(m: &SMatrix<C64, N, N>) -> Result<()> {
    ensure_finite(m)?;
    let deviation = hermitian_deviation(m);
    let allowed = HERMITIAN_TOL * m.norm();
    if deviation > allowed {
        return Err(Error::NotHermitian { deviation, allowed });
    }
    Ok(())
}

pub fn is_hermitian<const N: usize>(m: &SMatrix<C64, N, N>) -> bool {
    check_hermitian(m).is_ok()
}

fn to_dynamic<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> DMatrix<C64> {
    DMatrix::from_iterator(R, C, m.iter().copied())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl HermitianSpectrum {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn min_vector(&self) -> DVector<C64> {
        self.vectors.column(0).into_owned()
    }
}

/// Spectrum of a Hermitian matrix. The input is symmetrised before decomposition.
pub fn eigh<const N: usize>(h: &SMatrix<C64, N, N>) -> Result<HermitianSpectrum> {
    check_hermitian(h)?;
    let sym = to_dynamic(&((h + h.adjoint()) * c(0.5, 0.0)));
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(N, N, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok(HermitianSpectrum { values, vectors })
}

pub fn min_eigenvalue<const N: usize>(h: &SMatrix<C64, N, N>) -> Result<f64> {
    Ok(eigh(h)?.min())
}

/// Smallest eigenpair of a Hermitian 3×3 matrix, without validation.
///
/// Used in inner loops where the input is Hermitian by construction.
pub fn min_eigenpair3(h: &ComplexMatrix3) -> (f64, ComplexVector3) {
    let sym: Matrix3<C64> = (h + h.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut k = 0;
    for i in 1..3 {
        if eig.eigenvalues[i] < eig.eigenvalues[k] {
            k = i;
        }
    }
    let v: Vector3<C64> = eig.eigenvectors.column(k).into_owned();
    (eig.eigenvalues[k], v.normalize())
}

/// Singular values in descending order.
pub fn singular_values<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> Vec<f64> {
    let mut s: Vec<f64> = to_dynamic(m).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `tol · σ_max`.
pub fn numerical_rank<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>, tol: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > tol * top).count()
}

/// Hermitian inner product `⟨u|v⟩`, conjugate-linear in the first argument.
pub fn braket<const N: usize>(u: &SVector<C64, N>, v: &SVector<C64, N>) -> C64 {
    u.dotc(v)
}

/// `⟨v|M|v⟩`.
pub fn expectation<const N: usize>(m: &SMatrix<C64, N, N>, v: &SVector<C64, N>) -> C64 {
    v.dotc(&(m * v))
}

pub fn trace<const N: usize>(m: &SMatrix<C64, N, N>) -> C64 {
    m.trace()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn real3(rows: [[f64; 3]; 3]) -> ComplexMatrix3 {
        ComplexMatrix3::from_fn(|i, j| c(rows[i][j], 0.0))
    }

    #[test]
    fn diagonal_spectrum_and_rank() {
        let h = real3([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]]);
        assert_abs_diff_eq!(min_eigenvalue(&h).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(numerical_rank(&h, RANK_TOL), 3);
    }

    #[test]
    fn laplacian_of_triangle_is_singular() {
        let h = real3([[2.0, -1.0, -1.0], [-1.0, 2.0, -1.0], [-1.0, -1.0, 2.0]]);
        assert_abs_diff_eq!(min_eigenvalue(&h).unwrap(), 0.0, epsilon = 1e-14);
        assert_eq!(numerical_rank(&h, RANK_TOL), 2);
    }

    #[test]
    fn swap_over_three_has_eigenvalue_minus_third() {
        let swap = ComplexMatrix9::from_fn(|r, s| {
            let (i, k) = (r / 3, r % 3);
            let (j, l) = (s / 3, s % 3);
            if i == l && j == k {
                c(1.0 / 3.0, 0.0)
            } else {
                ZERO
            }
        });
        assert_abs_diff_eq!(min_eigenvalue(&swap).unwrap(), -1.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut h = ComplexMatrix3::identity();
        h[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            min_eigenvalue(&h),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn nan_is_rejected() {
        let mut h = ComplexMatrix3::identity();
        h[(2, 1)] = c(f64::NAN, 0.0);
        assert_eq!(
            check_hermitian(&h),
            Err(Error::NonFinite { row: 2, col: 1 })
        );
    }

    #[test]
    fn min_eigenpair_matches_eigh() {
        let h = ComplexMatrix3::from_fn(|i, j| {
            let z = c((i + 2 * j) as f64, (i as f64) - (j as f64));
            if i == j {
                c(z.re, 0.0)
            } else {
                z
            }
        });
        let h = (h + h.adjoint()) * c(0.5, 0.0);
        let (val, vec) = min_eigenpair3(&h);
        assert_abs_diff_eq!(val, min_eigenvalue(&h).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!((h * vec - vec * c(val, 0.0)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn kron_matches_vector_kron() {
        let x = ComplexVector3::new(c(1.0, 0.5), c(0.0, -1.0), c(2.0, 0.0));
        let y = ComplexVector3::new(c(0.3, 0.0), c(-1.0, 1.0), c(0.0, 0.2));
        let m = kron(&(x * x.adjoint()), &(y * y.adjoint()));
        let v = kron_vec(&x, &y);
        assert_abs_diff_eq!((m - v * v.adjoint()).norm(), 0.0, epsilon = 1e-13);
    }
}
