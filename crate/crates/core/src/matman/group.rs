use nalgebra::DMatrix;
use num_complex::Complex64;

use super::geodesic::GeodesicSpec;
use super::linalg::{to_complex_matrix, FieldScalar};
use crate::error::{Error, Result};

/// `A exp(X)` for a point `A` of SO(n), SU(n) or U(n) and a skew-(Hermitian)
/// Lie-algebra coordinate `X`.
pub fn exp_group<T: FieldScalar>(a: &DMatrix<T>, x: &DMatrix<T>) -> Result<DMatrix<T>> {
    Ok(GeodesicSpec::group(a, x)?.point_at(1.0))
}

/// Geodesic distance on a matrix group with the trace metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupDistance {
    pub distance: f64,
    /// Some eigenvalue of `A* B` sits on the branch cut of the logarithm.
    pub cut_locus: bool,
}

/// Eigenvalue distance from −1 below which the cut-locus flag is raised.
pub const CUT_LOCUS_TOL: f64 = 1e-12;

/// `sqrt(Σ |log λ_j|²)` over the eigenvalues of `A* B`.
pub fn dist_group<T: FieldScalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<GroupDistance> {
    if a.shape() != b.shape() || !a.is_square() {
        return Err(Error::ShapeMismatch {
            manifold: "matrix group".into(),
            reason: format!("{:?} vs {:?}", a.shape(), b.shape()),
        });
    }
    let p = to_complex_matrix(&(a.adjoint() * b));
    let eig = nalgebra::Schur::try_new(p, 1e-15, 10_000)
        .and_then(|s| s.eigenvalues())
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let mut sum = 0.0;
    let mut cut_locus = false;
    for lambda in eig.iter() {
        if (lambda + Complex64::new(1.0, 0.0)).norm() < CUT_LOCUS_TOL {
            cut_locus = true;
            sum += std::f64::consts::PI * std::f64::consts::PI;
        } else {
            let arg = lambda.arg();
            sum += arg * arg;
        }
    }
    Ok(GroupDistance {
        distance: sum.sqrt(),
        cut_locus,
    })
}
