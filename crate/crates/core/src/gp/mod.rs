//! Gaussian-process regression with heat-kernel covariances, and the RBF
//! baseline on Euclidean embeddings.

mod baseline;
mod covariance;
mod model;

pub use baseline::{hermitian_projector_embedding, projector, EmbeddingBaseline, Transform};
pub use covariance::{
    build_covariance, cross_matrix, kernel_matrix, repair_psd, ClosedFormKernel, Kernel, RbfKernel, Repaired,
    PSD_TOL, REPAIR_JITTER,
};
pub use model::{rmse, FitOptions, GpModel, GridScore, ModelSummary, Prediction};

use crate::geometry::ManifoldPoint;

/// Training data for regression on a manifold.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub locations: Vec<ManifoldPoint>,
    pub responses: Vec<f64>,
}

impl Dataset {
    pub fn new(locations: Vec<ManifoldPoint>, responses: Vec<f64>) -> crate::Result<Self> {
        if locations.len() != responses.len() {
            return Err(crate::Error::LengthMismatch(locations.len(), responses.len()));
        }
        if let Some(first) = locations.first() {
            if locations.iter().any(|p| p.manifold() != first.manifold()) {
                return Err(crate::Error::InvalidManifold("locations lie on different manifolds".into()));
            }
        }
        Ok(Self { locations, responses })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }
}
