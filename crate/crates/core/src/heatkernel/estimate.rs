use rayon::prelude::*;

use crate::brownian::{simulate_paths, PathSet, SimulationPlan};
use crate::error::{Error, Result};
use crate::geometry::{Manifold, ManifoldPoint};

use super::profile::{DistanceProfile, ProfilePoint};

/// Monte-Carlo effort: paths, random-walk steps up to the largest time, seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub n_paths: usize,
    pub steps: usize,
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            n_paths: 20_000,
            steps: 100,
            seed: 0,
        }
    }
}

/// A density estimate `k / (N V)` with standard error `sqrt(k) / (N V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEstimate {
    pub density: f64,
    pub stderr: f64,
    pub hits: usize,
    pub n_paths: usize,
    pub volume: f64,
}

impl KernelEstimate {
    pub fn from_count(hits: usize, n_paths: usize, volume: f64) -> Self {
        let scale = 1.0 / (n_paths as f64 * volume);
        Self {
            density: hits as f64 * scale,
            stderr: (hits as f64).sqrt() * scale,
            hits,
            n_paths,
            volume,
        }
    }

    /// No endpoint fell in the window: the density is unresolved.
    pub fn no_hits(&self) -> bool {
        self.hits == 0
    }
}

/// Simulates from `x` up to the largest of `times`, recording each of them.
pub fn simulate_for_times(x: &ManifoldPoint, times: &[f64], settings: &McSettings) -> Result<PathSet> {
    if times.is_empty() {
        return Err(Error::EmptyInput("diffusion times"));
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted.dedup();
    let t_max = *sorted.last().expect("non-empty");
    let plan = SimulationPlan::new(x.clone(), t_max, settings.steps, settings.n_paths, settings.seed)?
        .with_checkpoints(sorted)?;
    simulate_paths(&plan)
}

pub(crate) fn checkpoint(paths: &PathSet, t: f64) -> Result<usize> {
    paths.checkpoint_index(t).ok_or_else(|| {
        Error::InvalidPlan(format!("time {t} is not a recorded checkpoint ({:?})", paths.times))
    })
}

/// Number of endpoints at checkpoint `t` within ball distance `eps` of `y`.
pub fn ball_hits(paths: &PathSet, t: f64, y: &ManifoldPoint, eps: f64) -> Result<usize> {
    let c = checkpoint(paths, t)?;
    let manifold = *paths.manifold();
    let hits = paths
        .paths
        .par_iter()
        .map(|p| manifold.ball_distance(y, &p.points[c]).map(|d| usize::from(d < eps)))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(hits)
}

/// Ball estimate of `p_t(x, y)` from paths started at `x`.
pub fn ball_estimate_from_paths(paths: &PathSet, t: f64, y: &ManifoldPoint, eps: f64) -> Result<KernelEstimate> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("ball radius must be positive, got {eps}")));
    }
    let hits = ball_hits(paths, t, y, eps)?;
    Ok(KernelEstimate::from_count(hits, paths.n_paths(), paths.manifold().ball_volume(eps)))
}

/// Ball estimate of `p_t(x, y)` from `settings.n_paths` fresh paths.
pub fn ball_estimate(
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    t: f64,
    eps: f64,
    settings: &McSettings,
) -> Result<KernelEstimate> {
    let paths = simulate_for_times(x, &[t], settings)?;
    ball_estimate_from_paths(&paths, t, y, eps)
}

/// Checks the strip grid: increasing, `d0 ≥ eps`, strips pairwise disjoint and
/// inside the diameter.
pub fn validate_grid(manifold: &Manifold, grid: &[f64], eps: f64) -> Result<()> {
    if !manifold.is_distance_kernel() {
        return Err(Error::Unsupported {
            manifold: manifold.to_string(),
            what: "strip estimation (kernel is not a function of distance)".into(),
        });
    }
    if grid.is_empty() {
        return Err(Error::EmptyInput("strip grid"));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("strip half-width must be positive, got {eps}")));
    }
    let slack = 1e-12;
    for (i, &d) in grid.iter().enumerate() {
        if !(d >= eps - slack) {
            return Err(Error::Domain(format!("grid point {d} is closer than eps={eps} to 0")));
        }
        if let Some(diam) = manifold.diameter() {
            if d > diam - eps + slack {
                return Err(Error::Domain(format!(
                    "grid point {d} is closer than eps={eps} to the diameter {diam}"
                )));
            }
        }
        if i > 0 && !(d - grid[i - 1] >= 2.0 * eps - slack) {
            return Err(Error::Domain(format!(
                "strips around {} and {d} overlap (spacing must be >= 2 eps = {})",
                grid[i - 1],
                2.0 * eps
            )));
        }
    }
    Ok(())
}

/// Default strip grid: 25 equispaced disjoint strips covering `(0, diameter)`.
pub fn default_grid(diameter: f64, eps: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| eps + (diameter - 2.0 * eps) * (i as f64 + 0.5) / points as f64)
        .collect()
}

/// Default strip half-width for a compact distance-kernel manifold.
///
/// `diameter / 60` keeps 25 strips of width `2 eps` disjoint inside `(0, diameter)`.
pub fn default_eps(manifold: &Manifold) -> Option<f64> {
    manifold.diameter().map(|d| d / 60.0)
}

/// Strip profile at checkpoint `t` of paths started at `paths.start`.
pub fn strip_estimate_from_paths(paths: &PathSet, grid: &[f64], t: f64, eps: f64) -> Result<DistanceProfile> {
    let manifold = *paths.manifold();
    validate_grid(&manifold, grid, eps)?;
    let c = checkpoint(paths, t)?;
    let x = &paths.start;
    let mut dists = paths
        .paths
        .par_iter()
        .map(|p| manifold.distance(x, &p.points[c]))
        .collect::<Result<Vec<f64>>>()?;
    dists.sort_by(|a, b| a.total_cmp(b));
    let n = paths.n_paths();
    let count = |lo: f64, hi: f64| {
        // open window (lo, hi)
        dists.partition_point(|&d| d < hi) - dists.partition_point(|&d| d <= lo)
    };
    let points = grid
        .iter()
        .map(|&d0| {
            let volume = manifold.strip_volume(d0, eps)?;
            let hits = count(d0 - eps, d0 + eps);
            let e = KernelEstimate::from_count(hits, n, volume);
            Ok(ProfilePoint {
                d0,
                density: e.density,
                stderr: e.stderr,
                hits,
                volume,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let diag_hits = dists.partition_point(|&d| d < eps);
    let diagonal = KernelEstimate::from_count(diag_hits, n, manifold.ball_volume(eps));
    Ok(DistanceProfile::new(
        manifold,
        t,
        eps,
        paths.delta,
        n,
        paths.seed,
        points,
        diagonal,
    ))
}

/// Strip profile of `p_t(x, ·)` from fresh paths.
pub fn strip_estimate(
    x: &ManifoldPoint,
    grid: &[f64],
    t: f64,
    eps: f64,
    settings: &McSettings,
) -> Result<DistanceProfile> {
    validate_grid(x.manifold(), grid, eps)?;
    let paths = simulate_for_times(x, &[t], settings)?;
    strip_estimate_from_paths(&paths, grid, t, eps)
}

/// Strip profiles at several times from one batch of paths.
pub fn strip_profiles(
    x: &ManifoldPoint,
    grid: &[f64],
    times: &[f64],
    eps: f64,
    settings: &McSettings,
) -> Result<Vec<DistanceProfile>> {
    validate_grid(x.manifold(), grid, eps)?;
    let paths = simulate_for_times(x, times, settings)?;
    times
        .iter()
        .map(|&t| strip_estimate_from_paths(&paths, grid, t, eps))
        .collect()
}
