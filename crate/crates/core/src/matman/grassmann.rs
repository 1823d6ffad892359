use nalgebra::{DMatrix};

use super::geodesic::GeodesicSpec;
use super::linalg::FieldScalar;
use crate::error::{Error, Result};

/// Grassmann exponential at the representative `Y` along horizontal `Δ`.
pub fn exp_grassmann<T: FieldScalar>(y: &DMatrix<T>, delta: &DMatrix<T>) -> Result<DMatrix<T>> {
    Ok(GeodesicSpec::grassmann(y, delta)?.point_at(1.0))
}

/// Principal angles between the column spans of `a` and `b`, ascending.
pub fn principal_angles<T: FieldScalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<Vec<f64>> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            manifold: "Grassmannian".into(),
            reason: format!("{:?} vs {:?}", a.shape(), b.shape()),
        });
    }
    let m = a.adjoint() * b;
    let cos = m.clone().svd(false, false).singular_values;
    // sines from the component of b orthogonal to a keep small angles accurate
    let perp = b - a * m;
    let sin = perp.svd(false, false).singular_values;
    let k = a.ncols();
    let mut c: Vec<f64> = cos.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let mut s: Vec<f64> = sin.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    c.sort_by(|x, y| y.total_cmp(x));
    s.sort_by(|x, y| x.total_cmp(y));
    s.resize(k, 0.0);
    let angles = c
        .iter()
        .zip(s.iter())
        .map(|(&ci, &si)| if ci > 0.9 { si.asin() } else { ci.acos() })
        .collect();
    Ok(angles)
}

/// `sqrt(Σ θ_j²)` over the principal angles.
pub fn dist_grassmann<T: FieldScalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<f64> {
    Ok(principal_angles(a, b)?
        .iter()
        .map(|t| t * t)
        .sum::<f64>()
        .sqrt())
}
