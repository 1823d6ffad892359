use nalgebra::DMatrix;

use super::geodesic::GeodesicSpec;
use super::linalg::FieldScalar;
use crate::error::Result;

/// Canonical-metric Stiefel exponential `A M(1) + Q N(1)`.
pub fn exp_stiefel<T: FieldScalar>(a: &DMatrix<T>, delta: &DMatrix<T>) -> Result<DMatrix<T>> {
    Ok(GeodesicSpec::stiefel(a, delta)?.point_at(1.0))
}
