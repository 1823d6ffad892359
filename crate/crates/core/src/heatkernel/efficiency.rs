use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ManifoldPoint;

use super::estimate::{ball_hits, checkpoint, simulate_for_times, validate_grid, McSettings};

/// Strip versus ball hit counts for one window half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub eps: f64,
    pub d0: f64,
    pub strip_hits: usize,
    pub ball_hits: usize,
    /// `strip_hits / ball_hits`; `None` when no path hit the ball (censored).
    pub ratio: Option<f64>,
    /// Delta-method standard error of `ratio`.
    pub ratio_stderr: Option<f64>,
    /// `Vol(strip) / Vol(ball)`, the ratio expected when the kernel is flat on both.
    pub volume_ratio: f64,
}

impl EfficiencyReport {
    /// Empirical ratio is at least the volume ratio minus three standard errors.
    pub fn meets_volume_bound(&self) -> bool {
        match (self.ratio, self.ratio_stderr) {
            (Some(r), Some(se)) => r >= self.volume_ratio - 3.0 * se,
            _ => false,
        }
    }
}

fn report(eps: f64, d0: f64, strip_hits: usize, ball: usize, volume_ratio: f64) -> EfficiencyReport {
    let (ratio, ratio_stderr) = if ball == 0 {
        (None, None)
    } else {
        // the ball lies inside the strip (triangle inequality), so the ratio is
        // 1 + k_rest / k_ball with roughly independent Poisson counts
        let kb = ball as f64;
        let rest = strip_hits.saturating_sub(ball) as f64;
        let q = rest / kb;
        let se = q * (1.0 / rest.max(1.0) + 1.0 / kb).sqrt();
        (Some(strip_hits as f64 / kb), Some(se))
    };
    EfficiencyReport {
        eps,
        d0,
        strip_hits,
        ball_hits: ball,
        ratio,
        ratio_stderr,
        volume_ratio,
    }
}

/// Strip/ball hit ratios at `y` for each half-width in `eps_ladder`, all from
/// one batch of paths started at `x`.
pub fn efficiency_ladder(
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    t: f64,
    eps_ladder: &[f64],
    settings: &McSettings,
) -> Result<Vec<EfficiencyReport>> {
    let manifold = *x.manifold();
    let d0 = x.distance(y)?;
    for &eps in eps_ladder {
        validate_grid(&manifold, &[d0], eps)?;
    }
    let paths = simulate_for_times(x, &[t], settings)?;
    let c = checkpoint(&paths, t)?;
    let dists = paths
        .paths
        .iter()
        .map(|p| manifold.distance(x, &p.points[c]))
        .collect::<Result<Vec<f64>>>()?;
    eps_ladder
        .iter()
        .map(|&eps| {
            let strip = dists.iter().filter(|&&d| (d - d0).abs() < eps).count();
            let ball = ball_hits(&paths, t, y, eps)?;
            let volume_ratio = manifold.strip_volume(d0, eps)? / manifold.ball_volume(eps);
            Ok(report(eps, d0, strip, ball, volume_ratio))
        })
        .collect()
}

/// Strip/ball hit ratio for a single half-width.
pub fn efficiency_ratio(
    x: &ManifoldPoint,
    y: &ManifoldPoint,
    t: f64,
    eps: f64,
    settings: &McSettings,
) -> Result<EfficiencyReport> {
    Ok(efficiency_ladder(x, y, t, &[eps], settings)?.remove(0))
}

/// Least-squares slope of `log ratio` against `log eps` over uncensored rows.
pub fn log_log_slope(rows: &[EfficiencyReport]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.ratio.filter(|&v| v > 0.0).map(|v| (r.eps.ln(), v.ln())))
        .collect();
    if pts.len() < 2 {
        return Err(Error::NoHits {
            what: "log-log slope (fewer than two uncensored ratios)".into(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all eps values are equal".into()));
    }
    Ok(sxy / sxx)
}
