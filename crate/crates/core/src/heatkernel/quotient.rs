use std::f64::consts::PI;

use super::profile::DistanceProfile;

/// Kernel on a quotient `M / G` from a distance kernel on the cover:
/// `p(d) = Σ_g p_M(d_g)` where `images(d)` lists the cover distances `d_g`.
pub fn quotient_kernel<F, G>(base: F, images: G) -> impl Fn(f64) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> Vec<f64>,
{
    move |d| images(d).into_iter().map(&base).sum()
}

/// Cover distances of a pair at distance `d` in `P^n_R = S^n / {±1}`.
pub fn antipodal_images(d: f64) -> Vec<f64> {
    vec![d, PI - d]
}

/// Cover distances of a pair at arclength `d` on `R / L Z`, truncated at `|j| ≤ j_max`.
pub fn circle_images(circumference: f64, j_max: i64) -> impl Fn(f64) -> Vec<f64> {
    move |d| {
        (-j_max..=j_max)
            .map(|j| (d + j as f64 * circumference).abs())
            .collect()
    }
}

/// Real-projective density at `d` with standard error, folded from a sphere
/// profile evaluated exactly at its grid points `d` and `π − d`.
pub fn fold_antipodal(sphere: &DistanceProfile, d: f64) -> Option<(f64, f64)> {
    let a = sphere.point_near(d)?;
    let b = sphere.point_near(PI - d)?;
    Some((a.density + b.density, (a.stderr.powi(2) + b.stderr.powi(2)).sqrt()))
}
