use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::geometry::Manifold;

use super::estimate::KernelEstimate;
use super::interp::MonotoneCubic;

/// Minimum hits for an estimate to anchor the near end of the profile.
pub const MIN_DIAGONAL_HITS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub d0: f64,
    pub density: f64,
    pub stderr: f64,
    pub hits: usize,
    pub volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalSource {
    /// Ball estimate at the start point.
    Ball,
    /// Too few ball hits; the profile is extended flat to `d = 0`.
    Extrapolated,
}

/// Estimated heat kernel as a function of distance, with an interpolant.
///
/// Leading grid points with fewer than [`MIN_DIAGONAL_HITS`] hits are left
/// out of the interpolant, since their density is unresolved; later points
/// are all kept, zeros included, as the kernel decays with distance.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProfile {
    pub manifold: Manifold,
    pub t: f64,
    pub eps: f64,
    pub delta: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub points: Vec<ProfilePoint>,
    pub diagonal: KernelEstimate,
    pub diagonal_source: DiagonalSource,
    interp: MonotoneCubic,
}

impl DistanceProfile {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        manifold: Manifold,
        t: f64,
        eps: f64,
        delta: f64,
        n_paths: usize,
        seed: u64,
        points: Vec<ProfilePoint>,
        diagonal: KernelEstimate,
    ) -> Self {
        let diagonal_source = if diagonal.hits >= MIN_DIAGONAL_HITS {
            DiagonalSource::Ball
        } else {
            DiagonalSource::Extrapolated
        };
        let mut xs = Vec::with_capacity(points.len() + 1);
        let mut ys = Vec::with_capacity(points.len() + 1);
        if diagonal_source == DiagonalSource::Ball {
            xs.push(0.0);
            ys.push(diagonal.density);
        }
        let first = points
            .iter()
            .position(|p| p.hits >= MIN_DIAGONAL_HITS)
            .or_else(|| points.iter().position(|p| p.hits > 0));
        if let Some(first) = first {
            for p in &points[first..] {
                if p.d0 > *xs.last().unwrap_or(&f64::NEG_INFINITY) {
                    xs.push(p.d0);
                    ys.push(p.density);
                }
            }
        }
        let interp = MonotoneCubic::new(xs, ys);
        Self {
            manifold,
            t,
            eps,
            delta,
            n_paths,
            seed,
            points,
            diagonal,
            diagonal_source,
            interp,
        }
    }

    /// At least one grid point (or the diagonal) was resolved.
    pub fn has_support(&self) -> bool {
        !self.interp.is_empty()
    }

    /// Interpolated density at distance `d`, floored at 0.
    pub fn density_at(&self, d: f64) -> f64 {
        self.interp.eval(d).max(0.0)
    }

    /// Density used on the covariance diagonal.
    pub fn diagonal_density(&self) -> f64 {
        match self.diagonal_source {
            DiagonalSource::Ball => self.diagonal.density,
            DiagonalSource::Extrapolated => self.density_at(0.0),
        }
    }

    /// Grid point whose `d0` is within `1e-9` of `d`.
    pub fn point_near(&self, d: f64) -> Option<&ProfilePoint> {
        self.points.iter().find(|p| (p.d0 - d).abs() <= 1e-9)
    }

    /// Indices of grid points without hits.
    pub fn no_hit_points(&self) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.hits == 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// The densities at grid points with at least [`MIN_DIAGONAL_HITS`] hits
    /// reject a constant profile: their chi-squared statistic about the
    /// weighted mean exceeds the 0.999 quantile.
    pub fn is_resolved(&self) -> bool {
        let hit: Vec<&ProfilePoint> = self.points.iter().filter(|p| p.hits >= MIN_DIAGONAL_HITS).collect();
        if hit.len() < 2 {
            return false;
        }
        let w: Vec<f64> = hit.iter().map(|p| p.stderr.powi(-2)).collect();
        let mean = hit.iter().zip(&w).map(|(p, w)| w * p.density).sum::<f64>() / w.iter().sum::<f64>();
        let chi2: f64 = hit.iter().zip(&w).map(|(p, w)| w * (p.density - mean).powi(2)).sum();
        let dof = (hit.len() - 1) as f64;
        match ChiSquared::new(dof) {
            Ok(dist) => chi2 > dist.inverse_cdf(0.999),
            Err(_) => false,
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.d0).collect()
    }
}
