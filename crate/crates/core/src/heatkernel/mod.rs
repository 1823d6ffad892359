//! Monte-Carlo heat-kernel estimation from simulated Brownian endpoints.
//!
//! The ball estimator counts endpoints within `eps` of a target point; the
//! strip estimator, for kernels that depend only on distance, counts
//! endpoints whose distance from the start lies within `eps` of `d0`, which
//! collects far more hits for the same number of paths.

mod efficiency;
mod estimate;
pub mod export;
mod interp;
mod kernel;
mod pairwise;
mod profile;
mod quotient;

pub use efficiency::{efficiency_ladder, efficiency_ratio, log_log_slope, EfficiencyReport};
pub use estimate::{
    ball_estimate, ball_estimate_from_paths, ball_hits, default_eps, default_grid, simulate_for_times,
    strip_estimate, strip_estimate_from_paths, strip_profiles, validate_grid, KernelEstimate, McSettings,
};
pub use interp::MonotoneCubic;
pub use kernel::{EmpiricalKernel, KernelMeta};
pub use pairwise::{pairwise_ball_matrices, pairwise_ball_matrix, PairwiseMatrix};
pub use profile::{DiagonalSource, DistanceProfile, ProfilePoint, MIN_DIAGONAL_HITS};
pub use quotient::{antipodal_images, circle_images, fold_antipodal, quotient_kernel};
