//! Exponential maps, geodesics and geodesic distances on matrix manifolds.

mod geodesic;
mod grassmann;
mod group;
pub mod linalg;
mod sphere;
mod stiefel;

pub use geodesic::{GeodesicSpec, SKEW_TOL};
pub use grassmann::{dist_grassmann, exp_grassmann, principal_angles};
pub use group::{dist_group, exp_group, GroupDistance, CUT_LOCUS_TOL};
pub use linalg::{
    expm, frobenius, orthogonal_complement, orthonormality_residual, polar, skew_residual,
    special_completion, FieldScalar,
};
pub use sphere::{dist_projective, dist_sphere, exp_cproj, exp_sphere};
pub use stiefel::exp_stiefel;
