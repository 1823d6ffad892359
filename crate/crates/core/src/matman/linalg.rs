//! Dense helpers shared by the exponential maps: a field abstraction over
//! `f64` / `Complex64`, a scaling-and-squaring matrix exponential, polar
//! projection and orthogonal completion.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Scalar field of a matrix manifold: the reals or the complex numbers.
pub trait FieldScalar:
    ComplexField<RealField = f64> + Copy + Send + Sync + std::fmt::Debug + 'static
{
    const IS_COMPLEX: bool;

    fn to_complex(self) -> Complex64;

    /// Drops the imaginary part for real fields.
    fn from_complex(c: Complex64) -> Self;

    fn from_parts(re: f64, im: f64) -> Self;

    /// A centred Gaussian entry whose real (and, over C, imaginary) part has
    /// variance `var`.
    fn gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Self {
        let s = var.sqrt();
        let re: f64 = rng.sample(StandardNormal);
        if Self::IS_COMPLEX {
            let im: f64 = rng.sample(StandardNormal);
            Self::from_parts(s * re, s * im)
        } else {
            Self::from_parts(s * re, 0.0)
        }
    }
}

impl FieldScalar for f64 {
    const IS_COMPLEX: bool = false;

    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    fn from_complex(c: Complex64) -> Self {
        c.re
    }

    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
}

impl FieldScalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn to_complex(self) -> Complex64 {
        self
    }

    fn from_complex(c: Complex64) -> Self {
        c
    }

    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
}

pub(crate) fn to_complex_matrix<T: FieldScalar>(m: &DMatrix<T>) -> DMatrix<Complex64> {
    m.map(|v| v.to_complex())
}

pub(crate) fn from_complex_matrix<T: FieldScalar>(m: &DMatrix<Complex64>) -> DMatrix<T> {
    m.map(T::from_complex)
}

pub(crate) fn gaussian_matrix<T: FieldScalar, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    var: f64,
    rng: &mut R,
) -> DMatrix<T> {
    // column-major fill keeps the draw order stable across nalgebra versions
    let mut m = DMatrix::<T>::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = T::gaussian(rng, var);
        }
    }
    m
}

/// Frobenius norm `sqrt(Re tr(A* A))`.
pub fn frobenius<T: FieldScalar>(m: &DMatrix<T>) -> f64 {
    m.iter().map(|v| v.modulus_squared()).sum::<f64>().sqrt()
}

/// `‖X + X*‖_F`: zero exactly for skew-(Hermitian) matrices.
pub fn skew_residual<T: FieldScalar>(x: &DMatrix<T>) -> f64 {
    frobenius(&(x + x.adjoint()))
}

/// `‖A* A − I‖_F`.
pub fn orthonormality_residual<T: FieldScalar>(a: &DMatrix<T>) -> f64 {
    let k = a.ncols();
    frobenius(&(a.adjoint() * a - DMatrix::<T>::identity(k, k)))
}

fn one_norm<T: FieldScalar>(m: &DMatrix<T>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 1/2, the
/// series is summed until the next term is below round-off, and the result
/// is squared `s` times.
pub fn expm<T: FieldScalar>(a: &DMatrix<T>) -> DMatrix<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * T::from_real(0.5f64.powi(squarings));

    let mut result = DMatrix::<T>::identity(n, n);
    let mut term = DMatrix::<T>::identity(n, n);
    for k in 1..=40 {
        term = &term * &scaled * T::from_real(1.0 / k as f64);
        result += &term;
        if one_norm(&term) <= 1e-18 * one_norm(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Nearest matrix with orthonormal columns (polar factor `U V*` of the SVD).
pub fn polar<T: FieldScalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    if a.nrows() < a.ncols() {
        return Err(Error::Projection(format!(
            "{}x{} matrix cannot have orthonormal columns",
            a.nrows(),
            a.ncols()
        )));
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-8 * smax.max(1.0)) || !smin.is_finite() {
        return Err(Error::Projection(format!(
            "matrix is rank deficient (smallest singular value {smin:.3e})"
        )));
    }
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    Ok(u * v_t)
}

/// Orthonormal basis of the orthogonal complement of the columns of `y`.
///
/// `y` must have orthonormal columns; the result is `n × (n − k)`. Computed
/// from a Householder QR of `[y | I_n]`, whose first `k` columns span `y`.
pub fn orthogonal_complement<T: FieldScalar>(y: &DMatrix<T>) -> DMatrix<T> {
    let (n, k) = y.shape();
    if k >= n {
        return DMatrix::<T>::zeros(n, 0);
    }
    let mut stacked = DMatrix::<T>::zeros(n, n + k);
    stacked.view_mut((0, 0), (n, k)).copy_from(y);
    stacked
        .view_mut((0, k), (n, n))
        .copy_from(&DMatrix::<T>::identity(n, n));
    let q = stacked.qr().q();
    q.columns(k, n - k).into_owned()
}

/// Completes `a` (orthonormal `n × k`) to `Q = [a a']` with `Q* Q = I` and
/// `det Q = 1`, so that `Q I_{n,k} = a`.
pub fn special_completion<T: FieldScalar>(a: &DMatrix<T>) -> DMatrix<T> {
    let (n, k) = a.shape();
    let comp = orthogonal_complement(a);
    let mut q = DMatrix::<T>::zeros(n, n);
    q.view_mut((0, 0), (n, k)).copy_from(a);
    if k < n {
        q.view_mut((0, k), (n, n - k)).copy_from(&comp);
        let det = q.determinant().to_complex();
        let modulus = det.norm();
        if modulus > 0.0 {
            // scale the last column by conj(det)/|det| so the determinant becomes 1
            let fix = T::from_complex(det.conj() / modulus);
            let mut last = q.column_mut(n - 1);
            last *= fix;
        }
    }
    q
}

/// Hermitian part `(H + H*)/2`.
pub(crate) fn hermitian_part(h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (h + h.adjoint()) * Complex64::new(0.5, 0.0)
}
