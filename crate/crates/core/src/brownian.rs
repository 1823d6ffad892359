//! Brownian motion as a geodesic random walk: i.i.d. tangent Gaussian steps
//! of variance `delta` pushed through the exponential map.
//!
//! Path `i` draws from the ChaCha8 stream `i` of the plan's seed, so every
//! path is a deterministic function of `(seed, i)` regardless of how the work
//! is scheduled across threads.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::erf::erf;
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};
use crate::geometry::{Manifold, ManifoldPoint, Rep};

/// Default number of steps between re-projections onto the manifold.
pub const REPROJECT_EVERY: usize = 50;

#[derive(Debug, Clone)]
pub struct SimulationPlan {
    pub start: ManifoldPoint,
    pub t_total: f64,
    /// Step variance; the walk takes `t_total / delta` steps.
    pub delta: f64,
    /// Recording times, increasing multiples of `delta`.
    pub checkpoints: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    pub reproject_every: usize,
}

impl SimulationPlan {
    /// Plan with `steps` steps up to `t_total`, recording only the endpoint.
    pub fn new(start: ManifoldPoint, t_total: f64, steps: usize, n_paths: usize, seed: u64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidPlan("need at least one step".into()));
        }
        let plan = Self {
            start,
            t_total,
            delta: t_total / steps as f64,
            checkpoints: vec![t_total],
            n_paths,
            seed,
            reproject_every: REPROJECT_EVERY,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<f64>) -> Result<Self> {
        self.checkpoints = checkpoints;
        self.validate()?;
        Ok(self)
    }

    pub fn manifold(&self) -> &Manifold {
        self.start.manifold()
    }

    pub fn n_steps(&self) -> usize {
        (self.t_total / self.delta).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPlan(m));
        if !(self.t_total > 0.0) || !self.t_total.is_finite() {
            return bad(format!("t_total must be positive, got {}", self.t_total));
        }
        if !(self.delta > 0.0) || self.delta > self.t_total * (1.0 + 1e-12) {
            return bad(format!("need 0 < delta <= t_total, got delta={}", self.delta));
        }
        let ratio = self.t_total / self.delta;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return bad(format!("t_total/delta = {ratio} is not an integer"));
        }
        if self.n_paths == 0 {
            return bad("n_paths must be at least 1".into());
        }
        if self.reproject_every == 0 {
            return bad("reproject_every must be at least 1".into());
        }
        if self.checkpoints.is_empty() {
            return bad("at least one checkpoint is required".into());
        }
        let mut prev = 0usize;
        for &c in &self.checkpoints {
            let j = c / self.delta;
            if !(c > 0.0) || (j - j.round()).abs() > 1e-9 * j.max(1.0) {
                return bad(format!("checkpoint {c} is not a positive multiple of delta={}", self.delta));
            }
            let j = j.round() as usize;
            if j <= prev {
                return bad("checkpoints must be strictly increasing".into());
            }
            if j > self.n_steps() {
                return bad(format!("checkpoint {c} exceeds t_total={}", self.t_total));
            }
            prev = j;
        }
        Ok(())
    }

    fn checkpoint_steps(&self) -> Vec<usize> {
        self.checkpoints
            .iter()
            .map(|c| (c / self.delta).round() as usize)
            .collect()
    }
}

/// Positions of one path at the plan's checkpoints.
#[derive(Debug, Clone)]
pub struct BrownianPath {
    pub index: usize,
    pub seed: u64,
    pub points: Vec<ManifoldPoint>,
}

/// All paths of a plan, ordered by path index.
#[derive(Debug, Clone)]
pub struct PathSet {
    pub start: ManifoldPoint,
    pub times: Vec<f64>,
    pub delta: f64,
    pub seed: u64,
    pub paths: Vec<BrownianPath>,
}

impl PathSet {
    pub fn manifold(&self) -> &Manifold {
        self.start.manifold()
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    /// Index of the checkpoint at time `t` (within 1e-9 relative).
    pub fn checkpoint_index(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&c| (c - t).abs() <= 1e-9 * t.abs().max(1.0))
    }

    pub fn endpoints(&self, checkpoint: usize) -> Vec<&ManifoldPoint> {
        self.paths.iter().map(|p| &p.points[checkpoint]).collect()
    }

    /// CSV dump: path index, checkpoint time, flattened coordinates.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let width = self.start.rep().flatten().len();
        let mut header = vec!["path".to_string(), "t".to_string()];
        header.extend((0..width).map(|i| format!("c{i}")));
        w.write_record(&header)?;
        for path in &self.paths {
            for (t, p) in self.times.iter().zip(&path.points) {
                let mut row = vec![path.index.to_string(), t.to_string()];
                row.extend(p.rep().flatten().iter().map(|v| v.to_string()));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Decorrelated child seed for sub-experiment `stream` (splitmix64 finaliser).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG of path `index` under `seed`.
pub fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn simulate_one(plan: &SimulationPlan, steps: &[usize], index: usize) -> Result<BrownianPath> {
    let manifold = *plan.manifold();
    let mut rng = path_rng(plan.seed, index);
    let mut x: Rep = plan.start.rep().clone();
    let mut points = Vec::with_capacity(steps.len());
    let mut next = 0;
    let total = *steps.last().expect("validated non-empty");
    for step in 1..=total {
        x = manifold.step(&x, plan.delta, &mut rng)?;
        if step % plan.reproject_every == 0 {
            x = manifold.project(&x)?.into_rep();
        }
        if step == steps[next] {
            points.push(ManifoldPoint::unchecked(manifold, x.clone()));
            next += 1;
        }
    }
    Ok(BrownianPath {
        index,
        seed: plan.seed,
        points,
    })
}

/// Simulates `plan.n_paths` independent paths in parallel.
pub fn simulate_paths(plan: &SimulationPlan) -> Result<PathSet> {
    plan.validate()?;
    let steps = plan.checkpoint_steps();
    let paths = (0..plan.n_paths)
        .into_par_iter()
        .map(|i| simulate_one(plan, &steps, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(PathSet {
        start: plan.start.clone(),
        times: plan.checkpoints.clone(),
        delta: plan.delta,
        seed: plan.seed,
        paths,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub delta: f64,
    /// 1-Wasserstein distance between the empirical and exact radial laws.
    pub w1: f64,
    /// Three times an upper bound on the expected W1 of an exact sampler.
    pub mc_bound: f64,
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Exact CDF of the distance from the start after time `t`.
fn radial_cdf(manifold: &Manifold, t: f64) -> Result<(Box<dyn Fn(f64) -> f64>, f64)> {
    match *manifold {
        Manifold::Euclidean { dim } => {
            let a = 0.5 * dim as f64;
            let r_max = t.sqrt() * ((dim as f64).sqrt() + 12.0);
            let f = move |r: f64| {
                let x = r * r / (2.0 * t);
                if x > 0.0 { gamma_lr(a, x) } else { 0.0 }
            };
            Ok((Box::new(f), r_max))
        }
        Manifold::Circle { circumference: l } => {
            let s = t.sqrt();
            let j_max = ((12.0 * s + l) / l).ceil() as i64;
            let f = move |r: f64| {
                (-j_max..=j_max)
                    .map(|j| {
                        let c = j as f64 * l;
                        std_normal_cdf((c + r) / s) - std_normal_cdf((c - r) / s)
                    })
                    .sum::<f64>()
                    .clamp(0.0, 1.0)
            };
            Ok((Box::new(f), 0.5 * l))
        }
        _ => Err(Error::Unsupported {
            manifold: manifold.to_string(),
            what: "convergence probe (no exact radial law)".into(),
        }),
    }
}

/// W1 distance between the empirical law of `samples` and the CDF `f` on
/// `[0, r_max]`, plus `3 ∫ sqrt(F(1 − F) / n)` as a noise scale.
fn wasserstein_to_cdf(samples: &mut [f64], f: &dyn Fn(f64) -> f64, r_max: f64) -> (f64, f64) {
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    let r_max = r_max.max(*samples.last().unwrap_or(&0.0));
    let mut nodes: Vec<f64> = (0..=4000).map(|i| r_max * i as f64 / 4000.0).collect();
    nodes.extend_from_slice(samples);
    nodes.sort_by(|a, b| a.total_cmp(b));
    nodes.dedup();

    let mut w1 = 0.0;
    let mut spread = 0.0;
    let mut below = 0usize;
    let mut prev_r = nodes[0];
    let mut prev_f = f(prev_r);
    for &r in &nodes[1..] {
        while below < samples.len() && samples[below] <= prev_r {
            below += 1;
        }
        let c = below as f64 / n;
        let fr = f(r);
        let h = r - prev_r;
        w1 += 0.5 * h * ((c - prev_f).abs() + (c - fr).abs());
        let sd = |p: f64| (p * (1.0 - p) / n).max(0.0).sqrt();
        spread += 0.5 * h * (sd(prev_f) + sd(fr));
        prev_r = r;
        prev_f = fr;
    }
    (w1, 3.0 * spread)
}

/// W1 distance between simulated and exact endpoint distance laws at time
/// `t`, for each step variance in `deltas`. Supported on `R^d` and the circle.
pub fn convergence_probe(
    manifold: &Manifold,
    t: f64,
    deltas: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<Vec<ProbeRow>> {
    let (cdf, r_max) = radial_cdf(manifold, t)?;
    let (rows, _) = manifold.rep_shape();
    let start = match manifold {
        Manifold::Circle { .. } => manifold.point_from_slice(&[0.0])?,
        _ => manifold.point_from_slice(&vec![0.0; rows])?,
    };
    deltas
        .iter()
        .map(|&delta| {
            let steps = (t / delta).round() as usize;
            let plan = SimulationPlan::new(start.clone(), t, steps.max(1), n_paths, seed)?;
            let set = simulate_paths(&plan)?;
            let mut radii = set
                .endpoints(0)
                .iter()
                .map(|p| start.distance(p))
                .collect::<Result<Vec<_>>>()?;
            let (w1, mc_bound) = wasserstein_to_cdf(&mut radii, cdf.as_ref(), r_max);
            Ok(ProbeRow {
                delta: plan.delta,
                w1,
                mc_bound,
            })
        })
        .collect()
}
