use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Manifold, ManifoldPoint};

use super::pairwise::PairwiseMatrix;
use super::profile::DistanceProfile;

/// A Monte-Carlo heat-kernel estimate usable as a covariance function.
#[derive(Debug, Clone, PartialEq)]
pub enum EmpiricalKernel {
    Profile(DistanceProfile),
    Pairwise(PairwiseMatrix),
}

/// Metadata carried into model summaries.
#[derive(Debug, Clone, Serialize)]
pub struct KernelMeta {
    pub mode: &'static str,
    pub manifold: String,
    pub t: f64,
    pub eps: f64,
    pub delta: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl EmpiricalKernel {
    pub fn t(&self) -> f64 {
        match self {
            EmpiricalKernel::Profile(p) => p.t,
            EmpiricalKernel::Pairwise(m) => m.t,
        }
    }

    pub fn manifold(&self) -> &Manifold {
        match self {
            EmpiricalKernel::Profile(p) => &p.manifold,
            EmpiricalKernel::Pairwise(m) => &m.manifold,
        }
    }

    pub fn meta(&self) -> KernelMeta {
        match self {
            EmpiricalKernel::Profile(p) => KernelMeta {
                mode: "distance_profile",
                manifold: p.manifold.to_string(),
                t: p.t,
                eps: p.eps,
                delta: p.delta,
                n_paths: p.n_paths,
                seed: p.seed,
            },
            EmpiricalKernel::Pairwise(m) => KernelMeta {
                mode: "pairwise_matrix",
                manifold: m.manifold.to_string(),
                t: m.t,
                eps: m.eps,
                delta: m.delta,
                n_paths: m.n_paths,
                seed: m.seed,
            },
        }
    }

    /// Estimated `p_t(a, b)`.
    pub fn density(&self, a: &ManifoldPoint, b: &ManifoldPoint) -> Result<f64> {
        match self {
            EmpiricalKernel::Profile(p) => {
                if !p.has_support() {
                    return Err(Error::NoHits {
                        what: format!("every strip of the distance profile at t={}", p.t),
                    });
                }
                if a == b {
                    return Ok(p.diagonal_density());
                }
                Ok(p.density_at(p.manifold.distance(a, b)?))
            }
            EmpiricalKernel::Pairwise(m) => {
                let (i, j) = match (m.index_of(a), m.index_of(b)) {
                    (Some(i), Some(j)) => (i, j),
                    _ => {
                        return Err(Error::UncoveredPair(
                            "the pairwise matrix only covers its own locations; re-estimate including the new points"
                                .into(),
                        ))
                    }
                };
                if m.hits[(i, j)] == 0 {
                    return Err(Error::NoHits {
                        what: format!("pairwise entry ({i}, {j}) at t={}", m.t),
                    });
                }
                Ok(m.density[(i, j)])
            }
        }
    }
}
