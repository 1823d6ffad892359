//! Gaussian-process regression on manifolds with a Monte-Carlo heat-kernel
//! covariance.
//!
//! Brownian motion is simulated as a geodesic random walk ([`brownian`]),
//! the transition density is estimated by counting path endpoints in small
//! balls or distance strips ([`heatkernel`]) and the resulting kernel is used
//! as a GP covariance ([`gp`]). [`geometry`] and [`matman`] provide the
//! manifolds, exponential maps and distances; [`cli`] drives the experiments.

pub mod brownian;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod gp;
pub mod heatkernel;
pub mod matman;

pub use error::{Error, Result};
pub use geometry::{Field, Manifold, ManifoldPoint, Rep, TangentVector};
