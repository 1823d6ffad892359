use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::brownian::derive_seed;
use crate::error::{Error, Result};
use crate::geometry::{Manifold, ManifoldPoint};

use super::estimate::{checkpoint, simulate_for_times, McSettings};

/// Symmetric matrix of ball estimates `p_t(x_i, x_j)` over a set of locations.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    pub manifold: Manifold,
    pub t: f64,
    pub eps: f64,
    pub delta: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub locations: Vec<ManifoldPoint>,
    pub density: DMatrix<f64>,
    pub stderr: DMatrix<f64>,
    /// Hits pooled over `(i, j)` and `(j, i)` off the diagonal.
    pub hits: DMatrix<usize>,
}

impl PairwiseMatrix {
    /// Position of `p` among the locations (exact representative match).
    pub fn index_of(&self, p: &ManifoldPoint) -> Option<usize> {
        self.locations.iter().position(|q| q == p)
    }

    /// Entries with no hits in either direction.
    pub fn no_hit_entries(&self) -> Vec<(usize, usize)> {
        let n = self.locations.len();
        let mut out = vec![];
        for i in 0..n {
            for j in i..n {
                if self.hits[(i, j)] == 0 {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Ball-estimated kernel matrices at each of `times`.
///
/// Row `i` comes from one batch of paths started at `x_i`; the matrix is
/// symmetrised by averaging the `(i, j)` and `(j, i)` estimates.
pub fn pairwise_ball_matrices(
    locations: &[ManifoldPoint],
    times: &[f64],
    eps: f64,
    settings: &McSettings,
) -> Result<Vec<PairwiseMatrix>> {
    let first = locations.first().ok_or(Error::EmptyInput("locations"))?;
    let manifold = *first.manifold();
    if locations.iter().any(|p| p.manifold() != &manifold) {
        return Err(Error::InvalidManifold("locations lie on different manifolds".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("ball radius must be positive, got {eps}")));
    }
    let n = locations.len();
    let volume = manifold.ball_volume(eps);
    // raw[t][i][j] = hits of row i's paths in the ball around x_j
    let mut raw = vec![DMatrix::<usize>::zeros(n, n); times.len()];
    let mut delta = 0.0;
    for (i, x) in locations.iter().enumerate() {
        let row_settings = McSettings {
            seed: derive_seed(settings.seed, i as u64),
            ..*settings
        };
        let paths = simulate_for_times(x, times, &row_settings)?;
        delta = paths.delta;
        for (ti, &t) in times.iter().enumerate() {
            let c = checkpoint(&paths, t)?;
            let counts = paths
                .paths
                .par_iter()
                .map(|p| {
                    let z = &p.points[c];
                    locations
                        .iter()
                        .map(|y| manifold.ball_distance(y, z).map(|d| usize::from(d < eps)))
                        .collect::<Result<Vec<usize>>>()
                })
                .try_reduce(
                    || vec![0; n],
                    |a, b| Ok(a.iter().zip(&b).map(|(u, v)| u + v).collect()),
                )?;
            for (j, k) in counts.into_iter().enumerate() {
                raw[ti][(i, j)] = k;
            }
        }
    }
    let n_paths = settings.n_paths as f64;
    let out = times
        .iter()
        .zip(raw)
        .map(|(&t, counts)| {
            let mut density = DMatrix::zeros(n, n);
            let mut stderr = DMatrix::zeros(n, n);
            let mut hits = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let scale = 1.0 / (n_paths * volume);
                    if i == j {
                        let k = counts[(i, i)];
                        density[(i, i)] = k as f64 * scale;
                        stderr[(i, i)] = (k as f64).sqrt() * scale;
                        hits[(i, i)] = k;
                    } else {
                        let (a, b) = (counts[(i, j)] as f64, counts[(j, i)] as f64);
                        density[(i, j)] = 0.5 * (a + b) * scale;
                        stderr[(i, j)] = 0.5 * (a + b).sqrt() * scale;
                        hits[(i, j)] = counts[(i, j)] + counts[(j, i)];
                    }
                }
            }
            PairwiseMatrix {
                manifold,
                t,
                eps,
                delta,
                n_paths: settings.n_paths,
                seed: settings.seed,
                locations: locations.to_vec(),
                density,
                stderr,
                hits,
            }
        })
        .collect();
    Ok(out)
}

/// Ball-estimated kernel matrix at a single time.
pub fn pairwise_ball_matrix(
    locations: &[ManifoldPoint],
    t: f64,
    eps: f64,
    settings: &McSettings,
) -> Result<PairwiseMatrix> {
    Ok(pairwise_ball_matrices(locations, &[t], eps, settings)?.remove(0))
}
