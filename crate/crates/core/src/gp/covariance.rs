use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{euclidean_heat_kernel, circle_heat_kernel, Manifold, ManifoldPoint};
use crate::heatkernel::EmpiricalKernel;

/// A covariance function on inputs of type `X`.
pub trait Kernel<X: ?Sized>: Sync {
    fn eval(&self, a: &X, b: &X) -> Result<f64>;
}

impl Kernel<ManifoldPoint> for EmpiricalKernel {
    fn eval(&self, a: &ManifoldPoint, b: &ManifoldPoint) -> Result<f64> {
        self.density(a, b)
    }
}

/// Exact heat kernels of flat spaces and the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormKernel {
    Euclidean { t: f64 },
    Circle { t: f64 },
}

impl Kernel<ManifoldPoint> for ClosedFormKernel {
    fn eval(&self, a: &ManifoldPoint, b: &ManifoldPoint) -> Result<f64> {
        let d = a.distance(b)?;
        match (*self, *a.manifold()) {
            (ClosedFormKernel::Euclidean { t }, Manifold::Euclidean { dim }) => euclidean_heat_kernel(d, t, dim),
            (ClosedFormKernel::Circle { t }, Manifold::Circle { circumference }) => {
                circle_heat_kernel(d, t, circumference)
            }
            (_, m) => Err(Error::Unsupported {
                manifold: m.to_string(),
                what: "closed-form heat kernel".into(),
            }),
        }
    }
}

/// `exp(−‖a − b‖² / (2 ℓ²))` on Euclidean vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfKernel {
    pub lengthscale: f64,
}

impl Kernel<DVector<f64>> for RbfKernel {
    fn eval(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch(a.len(), b.len()));
        }
        let d2 = (a - b).norm_squared();
        Ok((-d2 / (2.0 * self.lengthscale * self.lengthscale)).exp())
    }
}

/// `[k(x_i, x_j)]`, evaluated on the upper triangle and mirrored.
pub fn kernel_matrix<X: Sync, K: Kernel<X> + ?Sized>(kernel: &K, xs: &[X]) -> Result<DMatrix<f64>> {
    let n = xs.len();
    let rows = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| kernel.eval(&xs[i], &xs[j])).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            m[(i, i + off)] = v;
            m[(i + off, i)] = v;
        }
    }
    Ok(m)
}

/// `[k(a_i, b_j)]`.
pub fn cross_matrix<X: Sync, K: Kernel<X> + ?Sized>(kernel: &K, a: &[X], b: &[X]) -> Result<DMatrix<f64>> {
    let rows = a
        .par_iter()
        .map(|x| b.iter().map(|y| kernel.eval(x, y)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut m = DMatrix::zeros(a.len(), b.len());
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// Eigenvalue below which a symmetric matrix is repaired.
pub const PSD_TOL: f64 = 1e-10;

/// Relative diagonal jitter added after clipping.
pub const REPAIR_JITTER: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Repaired {
    pub matrix: DMatrix<f64>,
    pub min_eigenvalue_before: f64,
    /// Whether eigenvalues were clipped (and jitter added).
    pub repaired: bool,
}

/// Symmetrises `m`; if its smallest eigenvalue is below `−PSD_TOL`, clips the
/// negative eigenvalues to 0 and adds `1e-8 · trace / n` to the diagonal.
/// Matrices that are already PSD pass through, so repair is idempotent.
pub fn repair_psd(m: &DMatrix<f64>) -> Result<Repaired> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::LengthMismatch(m.nrows(), m.ncols()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("covariance has non-finite entries".into()));
    }
    let sym = (m + m.transpose()) * 0.5;
    if n == 0 {
        return Ok(Repaired {
            matrix: sym,
            min_eigenvalue_before: 0.0,
            repaired: false,
        });
    }
    let eig = sym.clone().symmetric_eigen();
    let min = eig.eigenvalues.min();
    if min >= -PSD_TOL {
        return Ok(Repaired {
            matrix: sym,
            min_eigenvalue_before: min,
            repaired: false,
        });
    }
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let mut out = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    out = (&out + out.transpose()) * 0.5;
    let jitter = REPAIR_JITTER * out.trace().max(0.0) / n as f64;
    for i in 0..n {
        out[(i, i)] += jitter;
    }
    Ok(Repaired {
        matrix: out,
        min_eigenvalue_before: min,
        repaired: true,
    })
}

/// `σ_h² · p̂_t(x_i, x_j)`, repaired to be PSD.
pub fn build_covariance<K: Kernel<ManifoldPoint> + ?Sized>(
    kernel: &K,
    locations: &[ManifoldPoint],
    sigma_h2: f64,
) -> Result<Repaired> {
    if !(sigma_h2 > 0.0) {
        return Err(Error::Domain(format!("signal variance must be positive, got {sigma_h2}")));
    }
    let p = kernel_matrix(kernel, locations)?;
    let mut r = repair_psd(&p)?;
    r.matrix *= sigma_h2;
    r.min_eigenvalue_before *= sigma_h2;
    Ok(r)
}
