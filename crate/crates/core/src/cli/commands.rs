use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::brownian::{derive_seed, simulate_paths, SimulationPlan};
use crate::error::{Error, Result};
use crate::geometry::{circle_heat_kernel, euclidean_heat_kernel, Manifold, ManifoldPoint, Rep, TangentVector};
use crate::heatkernel::{
    ball_estimate_from_paths, default_grid, efficiency_ladder, export, log_log_slope, pairwise_ball_matrix,
    simulate_for_times, strip_estimate_from_paths, validate_grid, EfficiencyReport,
};
use crate::matman::orthogonal_complement;

use super::config::{Config, Method};
use super::output::{csv_bytes, opt, write_bytes, write_json, RunMeta};

/// Half-width that keeps `points` strips disjoint inside `(0, range)`.
pub fn strip_eps(range: f64, points: usize) -> f64 {
    range / (2.4 * points as f64)
}

/// A canonical base point: the origin, angle 0 or the first basis vector.
pub fn base_point(m: &Manifold) -> Result<ManifoldPoint> {
    m.validate()?;
    let (rows, cols) = m.rep_shape();
    let rep = match *m {
        Manifold::Circle { .. } => Rep::Real(DMatrix::zeros(1, 1)),
        Manifold::Euclidean { .. } => Rep::Real(DMatrix::zeros(rows, 1)),
        _ => {
            if m.field() == crate::geometry::Field::Complex {
                Rep::Complex(DMatrix::<Complex64>::identity(rows, cols))
            } else {
                Rep::Real(DMatrix::<f64>::identity(rows, cols))
            }
        }
    };
    ManifoldPoint::new(*m, rep)
}

/// The point at distance `d` from the base point along a fixed unit direction.
pub fn point_at_distance(x: &ManifoldPoint, d: f64) -> Result<ManifoldPoint> {
    let m = *x.manifold();
    let rep = match (m, x.rep()) {
        (Manifold::Euclidean { .. } | Manifold::Circle { .. }, Rep::Real(a)) => {
            let mut w = DMatrix::zeros(a.nrows(), 1);
            w[0] = d;
            Rep::Real(w)
        }
        (Manifold::Sphere { .. } | Manifold::RealProjective { .. }, Rep::Real(a)) => {
            Rep::Real(DMatrix::from_column_slice(a.nrows(), 1, (orthogonal_complement(a).column(0) * d).as_slice()))
        }
        (Manifold::ComplexProjective { .. }, Rep::Complex(a)) => {
            Rep::Complex(DMatrix::from_column_slice(a.nrows(), 1, (orthogonal_complement(a).column(0) * Complex64::new(d, 0.0)).as_slice()))
        }
        _ => {
            return Err(Error::Unsupported {
                manifold: m.to_string(),
                what: "placing a target at a prescribed distance".into(),
            })
        }
    };
    let v = TangentVector::new(x.clone(), rep)?;
    let y = m.exp(&v)?;
    m.project(y.rep())
}

#[derive(Serialize)]
struct EstimateSummary {
    meta: RunMeta,
    t: f64,
    method: Method,
    ball_eps: Option<f64>,
    strip_max_rel_err: Option<f64>,
    strip_rmse: Option<f64>,
    ball_max_rel_err: Option<f64>,
    ball_rmse: Option<f64>,
    strip_no_hit_points: Vec<f64>,
    ball_no_hit_points: Vec<f64>,
}

/// One row of the estimator comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub d0: f64,
    pub truth: Option<f64>,
    pub strip: Option<(f64, f64, usize)>,
    pub ball: Option<(f64, f64, usize)>,
}

/// Estimator comparison produced by `estimate` on a distance-kernel manifold.
#[derive(Debug, Clone)]
pub struct EstimateOutcome {
    pub rows: Vec<ComparisonRow>,
    pub eps: f64,
    pub ball_eps: f64,
}

fn closed_form(m: &Manifold, d: f64, t: f64) -> Option<f64> {
    match *m {
        Manifold::Euclidean { dim } => euclidean_heat_kernel(d, t, dim).ok(),
        Manifold::Circle { circumference } => circle_heat_kernel(d, t, circumference).ok(),
        _ => None,
    }
}

fn error_stats(rows: &[ComparisonRow], pick: impl Fn(&ComparisonRow) -> Option<f64>) -> (Option<f64>, Option<f64>) {
    let pairs: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| Some((pick(r)?, r.truth?)))
        .collect();
    if pairs.is_empty() {
        return (None, None);
    }
    let max_rel = pairs
        .iter()
        .map(|(e, t)| (e - t).abs() / t)
        .fold(0.0, f64::max);
    let rmse = (pairs.iter().map(|(e, t)| (e - t).powi(2)).sum::<f64>() / pairs.len() as f64).sqrt();
    (Some(max_rel), Some(rmse))
}

pub fn cmd_estimate(cfg: &Config) -> Result<Option<EstimateOutcome>> {
    let m = cfg.manifold.unwrap_or(Manifold::Euclidean { dim: 1 });
    let e = &cfg.estimate;
    let settings = cfg.mc_settings();
    let mut meta = RunMeta::new("estimate", m.to_string(), cfg.seed, settings.n_paths, settings.steps);
    meta.delta = Some(e.t / settings.steps as f64);

    if !m.is_distance_kernel() {
        let eps = cfg.mc.eps.unwrap_or(0.1);
        meta.eps = Some(eps);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1));
        let locations = (0..e.locations)
            .map(|_| m.random_point(&mut rng))
            .collect::<Result<Vec<_>>>()?;
        eprintln!("estimate: pairwise ball matrix on {m} over {} locations", locations.len());
        let matrix = pairwise_ball_matrix(&locations, e.t, eps, &settings)?;
        write_bytes(&cfg.out, "pairwise.csv", &export::pairwise_csv(&matrix)?)?;
        write_bytes(&cfg.out, "pairwise.json", &export::pairwise_sidecar(&matrix)?)?;
        let missing = matrix.no_hit_entries();
        if !missing.is_empty() {
            return Err(Error::NoHits {
                what: format!("{} pairwise entries {:?}", missing.len(), missing),
            });
        }
        return Ok(None);
    }

    let range = m
        .diameter()
        .or(e.grid_max)
        .unwrap_or(3.0 * e.t.sqrt());
    let eps = cfg.mc.eps.unwrap_or_else(|| strip_eps(range, e.grid_points));
    let ball_eps = e.ball_eps.unwrap_or(eps);
    meta.eps = Some(eps);
    let grid = e.grid.clone().unwrap_or_else(|| default_grid(range, eps, e.grid_points));
    let do_strip = matches!(e.method, Method::Strip | Method::Both);
    let do_ball = matches!(e.method, Method::Ball | Method::Both);
    if do_strip {
        validate_grid(&m, &grid, eps).map_err(|err| Error::Config(format!("strip grid: {err}")))?;
    }

    let x = base_point(&m)?;
    eprintln!("estimate: {} paths on {m} to t={}", settings.n_paths, e.t);
    let paths = simulate_for_times(&x, &[e.t], &settings)?;

    let profile = if do_strip {
        let p = strip_estimate_from_paths(&paths, &grid, e.t, eps)?;
        write_bytes(&cfg.out, "profile.csv", &export::profile_csv(&p)?)?;
        Some(p)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &d0) in grid.iter().enumerate() {
        let strip = profile.as_ref().map(|p| {
            let q = p.points[i];
            (q.density, q.stderr, q.hits)
        });
        let ball = if do_ball {
            let y = point_at_distance(&x, d0)?;
            let b = ball_estimate_from_paths(&paths, e.t, &y, ball_eps)?;
            Some((b.density, b.stderr, b.hits))
        } else {
            None
        };
        rows.push(ComparisonRow {
            d0,
            truth: closed_form(&m, d0, e.t),
            strip,
            ball,
        });
    }

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.d0.to_string(),
                opt(r.truth),
                opt(r.strip.map(|s| s.0)),
                opt(r.strip.map(|s| s.1)),
                r.strip.map(|s| s.2.to_string()).unwrap_or_default(),
                opt(r.ball.map(|s| s.0)),
                opt(r.ball.map(|s| s.1)),
                r.ball.map(|s| s.2.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    write_bytes(
        &cfg.out,
        "comparison.csv",
        &csv_bytes(
            &["d0", "truth", "strip", "strip_stderr", "strip_hits", "ball", "ball_stderr", "ball_hits"],
            &table,
        )?,
    )?;

    let (strip_max_rel_err, strip_rmse) = error_stats(&rows, |r| r.strip.map(|s| s.0));
    let (ball_max_rel_err, ball_rmse) = error_stats(&rows, |r| r.ball.map(|s| s.0));
    let strip_missing: Vec<f64> = rows.iter().filter(|r| r.strip.is_some_and(|s| s.2 == 0)).map(|r| r.d0).collect();
    let ball_missing: Vec<f64> = rows.iter().filter(|r| r.ball.is_some_and(|s| s.2 == 0)).map(|r| r.d0).collect();
    write_json(
        &cfg.out,
        "summary.json",
        &EstimateSummary {
            meta,
            t: e.t,
            method: e.method,
            ball_eps: do_ball.then_some(ball_eps),
            strip_max_rel_err,
            strip_rmse,
            ball_max_rel_err,
            ball_rmse,
            strip_no_hit_points: strip_missing.clone(),
            ball_no_hit_points: ball_missing.clone(),
        },
    )?;
    if !strip_missing.is_empty() || !ball_missing.is_empty() {
        eprintln!(
            "warning: no hits at strip distances {strip_missing:?} and ball distances {ball_missing:?}; \
             increase --paths or --eps"
        );
    }
    let all_strip_empty = do_strip && strip_missing.len() == rows.len();
    let all_ball_empty = do_ball && ball_missing.len() == rows.len();
    if all_strip_empty || all_ball_empty {
        return Err(Error::NoHits {
            what: "every grid point".into(),
        });
    }
    Ok(Some(EstimateOutcome { rows, eps, ball_eps }))
}

#[derive(Serialize)]
struct EfficiencySummary {
    meta: RunMeta,
    t: f64,
    d0: f64,
    intrinsic_dim: usize,
    expected_slope: f64,
    slope: Option<f64>,
    rows: Vec<EfficiencyReport>,
}

/// Strip/ball hit ratios over the eps ladder and their log-log slope.
pub fn cmd_efficiency(cfg: &Config) -> Result<(Vec<EfficiencyReport>, Option<f64>)> {
    let m = cfg.manifold.unwrap_or(Manifold::Euclidean { dim: 3 });
    let f = &cfg.efficiency;
    let settings = cfg.mc_settings();
    let x = base_point(&m)?;
    let y = point_at_distance(&x, f.d0)?;
    eprintln!("efficiency: {} paths on {m}, eps ladder {:?}", settings.n_paths, f.eps_ladder);
    let rows = efficiency_ladder(&x, &y, f.t, &f.eps_ladder, &settings).map_err(|err| match err {
        Error::Domain(msg) => Error::Config(format!("efficiency: {msg}")),
        other => other,
    })?;
    let slope = log_log_slope(&rows).ok();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.eps.to_string(),
                r.d0.to_string(),
                r.strip_hits.to_string(),
                r.ball_hits.to_string(),
                opt(r.ratio),
                opt(r.ratio_stderr),
                r.volume_ratio.to_string(),
                if r.ratio.is_none() { "censored".into() } else { r.meets_volume_bound().to_string() },
            ]
        })
        .collect();
    write_bytes(
        &cfg.out,
        "efficiency.csv",
        &csv_bytes(
            &["eps", "d0", "strip_hits", "ball_hits", "ratio", "ratio_stderr", "volume_ratio", "meets_bound"],
            &table,
        )?,
    )?;
    let mut meta = RunMeta::new("efficiency", m.to_string(), cfg.seed, settings.n_paths, settings.steps);
    meta.delta = Some(f.t / settings.steps as f64);
    write_json(
        &cfg.out,
        "efficiency.json",
        &EfficiencySummary {
            meta,
            t: f.t,
            d0: f.d0,
            intrinsic_dim: m.intrinsic_dim(),
            expected_slope: 1.0 - m.intrinsic_dim() as f64,
            slope,
            rows: rows.clone(),
        },
    )?;
    Ok((rows, slope))
}

#[derive(Serialize)]
struct SimulateSummary {
    meta: RunMeta,
    times: Vec<f64>,
}

/// Raw endpoint dump.
pub fn cmd_simulate(cfg: &Config) -> Result<()> {
    let m = cfg.manifold.unwrap_or(Manifold::Sphere { dim: 2 });
    let s = &cfg.simulate;
    let x = base_point(&m)?;
    let mut plan = SimulationPlan::new(x, s.t, cfg.mc.steps, cfg.mc.paths, cfg.seed)
        .map_err(|e| Error::Config(e.to_string()))?;
    if let Some(c) = &s.checkpoints {
        plan = plan.with_checkpoints(c.clone()).map_err(|e| Error::Config(e.to_string()))?;
    }
    eprintln!("simulate: {} paths on {m} to t={}", plan.n_paths, s.t);
    let set = simulate_paths(&plan)?;
    let mut bytes = vec![];
    set.write_csv(&mut bytes)?;
    write_bytes(&cfg.out, "paths.csv", &bytes)?;
    let mut meta = RunMeta::new("simulate", m.to_string(), cfg.seed, plan.n_paths, plan.n_steps());
    meta.delta = Some(plan.delta);
    write_json(
        &cfg.out,
        "paths.json",
        &SimulateSummary {
            meta,
            times: set.times.clone(),
        },
    )?;
    Ok(())
}
