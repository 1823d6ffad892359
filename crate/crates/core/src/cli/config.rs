//! TOML experiment configuration with command-line overrides.
//!
//! ```toml
//! seed = 7
//! out = "results"
//!
//! [mc]
//! paths = 20000
//! steps = 100
//!
//! [manifold]
//! kind = "sphere"
//! dim = 2
//!
//! [estimate]
//! t = 0.5
//! method = "both"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Manifold;
use crate::heatkernel::McSettings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: u64,
    pub out: PathBuf,
    pub mc: McSection,
    /// Manifold for `estimate`, `efficiency` and `simulate`.
    pub manifold: Option<Manifold>,
    pub estimate: EstimateSection,
    pub knot: KnotSection,
    pub projective: ProjectiveSection,
    pub efficiency: EfficiencySection,
    pub simulate: SimulateSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 20240,
            out: PathBuf::from("out"),
            mc: McSection::default(),
            manifold: None,
            estimate: EstimateSection::default(),
            knot: KnotSection::default(),
            projective: ProjectiveSection::default(),
            efficiency: EfficiencySection::default(),
            simulate: SimulateSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub paths: usize,
    pub steps: usize,
    /// Strip half-width / ball radius; a per-command default applies when absent.
    pub eps: Option<f64>,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            paths: 20_000,
            steps: 100,
            eps: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Ball,
    Strip,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateSection {
    pub t: f64,
    pub method: Method,
    /// Explicit strip/ball distances; otherwise `grid_points` equispaced strips.
    pub grid: Option<Vec<f64>>,
    pub grid_points: usize,
    /// Largest distance on non-compact spaces (default `3 sqrt(t)`).
    pub grid_max: Option<f64>,
    /// Ball radius if different from the strip half-width.
    pub ball_eps: Option<f64>,
    /// Random locations for the pairwise matrix on non-distance-kernel manifolds.
    pub locations: usize,
}

impl Default for EstimateSection {
    fn default() -> Self {
        Self {
            t: 1.0,
            method: Method::Both,
            grid: None,
            grid_points: 25,
            grid_max: None,
            ball_eps: None,
            locations: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSource {
    /// Strip-estimated heat kernel from simulated paths.
    Estimated,
    /// Exact wrapped-Gaussian kernel (circle only).
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KnotSection {
    /// `(p, q)` pairs, each coprime.
    pub knots: Vec<[u32; 2]>,
    pub n_train: usize,
    pub n_test: usize,
    pub noise_sd: f64,
    pub replicates: usize,
    /// Symmetric positive-definite matrix of the quadratic response.
    pub matrix: [[f64; 2]; 2],
    pub kernel: KernelSource,
    /// Largest diffusion time in units of `(L / 2π)²`.
    pub t_max: f64,
    /// Diffusion times as multiples of `t_max / steps`.
    pub t_levels: Vec<usize>,
    pub grid_points: usize,
}

impl Default for KnotSection {
    fn default() -> Self {
        Self {
            knots: vec![[2, 3], [4, 3], [9, 8]],
            n_train: 30,
            n_test: 100,
            noise_sd: 0.1,
            replicates: 10,
            matrix: [[1.0, 0.3], [0.3, 0.5]],
            kernel: KernelSource::Estimated,
            t_max: 2.0,
            t_levels: default_levels(),
            grid_points: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectiveSection {
    /// Complex dimension of `P^dim_C`.
    pub dim: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub noise_sd: f64,
    pub replicates: usize,
    /// Scale of the shrunk embedding baseline.
    pub scale: f64,
    pub t_max: f64,
    pub t_levels: Vec<usize>,
    pub grid_points: usize,
}

impl Default for ProjectiveSection {
    fn default() -> Self {
        Self {
            dim: 4,
            n_train: 10,
            n_test: 100,
            noise_sd: 0.1,
            replicates: 10,
            scale: 0.01,
            t_max: 1.0,
            t_levels: default_levels(),
            grid_points: 25,
        }
    }
}

fn default_levels() -> Vec<usize> {
    vec![1, 2, 3, 5, 8, 12, 18, 27, 40, 60, 100]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EfficiencySection {
    pub t: f64,
    pub d0: f64,
    pub eps_ladder: Vec<f64>,
}

impl Default for EfficiencySection {
    fn default() -> Self {
        Self {
            t: 1.0,
            d0: 1.0,
            eps_ladder: vec![0.2, 0.1, 0.05],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub t: f64,
    /// Recording times (multiples of `t / steps`); the endpoint only when absent.
    pub checkpoints: Option<Vec<f64>>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            t: 1.0,
            checkpoints: None,
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub paths: Option<usize>,
    pub steps: Option<usize>,
    pub eps: Option<f64>,
    pub replicates: Option<usize>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("`{name}` must be positive and finite, got {v}")))
    }
}

fn at_least_one(name: &str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(Error::Config(format!("`{name}` must be at least 1")))
    }
}

fn levels(name: &str, v: &[usize]) -> Result<()> {
    if v.is_empty() || v.contains(&0) || v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("`{name}` must be strictly increasing positive integers")));
    }
    Ok(())
}

/// Checks that every level fits in the simulated step count.
pub(crate) fn levels_within_steps(name: &str, v: &[usize], steps: usize) -> Result<()> {
    match v.iter().max() {
        Some(&k) if k > steps => Err(Error::Config(format!(
            "`{name}` must not exceed mc.steps ({steps})"
        ))),
        _ => Ok(()),
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = &o.out {
            self.out = p.clone();
        }
        if let Some(n) = o.paths {
            self.mc.paths = n;
        }
        if let Some(n) = o.steps {
            self.mc.steps = n;
        }
        if let Some(e) = o.eps {
            self.mc.eps = Some(e);
        }
        if let Some(r) = o.replicates {
            self.knot.replicates = r;
            self.projective.replicates = r;
        }
        self.validate()
    }

    pub fn mc_settings(&self) -> McSettings {
        McSettings {
            n_paths: self.mc.paths,
            steps: self.mc.steps,
            seed: self.seed,
        }
    }

    /// Checks every numeric field before any simulation starts.
    pub fn validate(&self) -> Result<()> {
        at_least_one("mc.paths", self.mc.paths)?;
        at_least_one("mc.steps", self.mc.steps)?;
        if let Some(e) = self.mc.eps {
            positive("mc.eps", e)?;
        }
        if let Some(m) = &self.manifold {
            m.validate().map_err(|e| Error::Config(format!("[manifold]: {e}")))?;
        }

        let e = &self.estimate;
        positive("estimate.t", e.t)?;
        at_least_one("estimate.grid_points", e.grid_points)?;
        at_least_one("estimate.locations", e.locations)?;
        if let Some(g) = &e.grid {
            if g.is_empty() {
                return Err(Error::Config("`estimate.grid` must not be empty".into()));
            }
            for &d in g {
                positive("estimate.grid entries", d)?;
            }
        }
        if let Some(v) = e.grid_max {
            positive("estimate.grid_max", v)?;
        }
        if let Some(v) = e.ball_eps {
            positive("estimate.ball_eps", v)?;
        }

        let k = &self.knot;
        if k.knots.is_empty() {
            return Err(Error::Config("`knot.knots` must not be empty".into()));
        }
        for &[p, q] in &k.knots {
            if p == 0 || q == 0 || gcd(p, q) != 1 {
                return Err(Error::Config(format!("knot ({p}, {q}) is not a coprime pair of positive integers")));
            }
        }
        at_least_one("knot.n_train", k.n_train)?;
        at_least_one("knot.n_test", k.n_test)?;
        at_least_one("knot.replicates", k.replicates)?;
        at_least_one("knot.grid_points", k.grid_points)?;
        positive("knot.noise_sd", k.noise_sd)?;
        positive("knot.t_max", k.t_max)?;
        levels("knot.t_levels", &k.t_levels)?;
        let m = k.matrix;
        if m[0][1] != m[1][0] || !(m[0][0] > 0.0) || !(m[0][0] * m[1][1] - m[0][1] * m[1][0] > 0.0) {
            return Err(Error::Config("`knot.matrix` must be symmetric positive definite".into()));
        }

        let p = &self.projective;
        at_least_one("projective.dim", p.dim)?;
        at_least_one("projective.n_train", p.n_train)?;
        at_least_one("projective.n_test", p.n_test)?;
        at_least_one("projective.replicates", p.replicates)?;
        at_least_one("projective.grid_points", p.grid_points)?;
        positive("projective.noise_sd", p.noise_sd)?;
        positive("projective.scale", p.scale)?;
        positive("projective.t_max", p.t_max)?;
        levels("projective.t_levels", &p.t_levels)?;

        let f = &self.efficiency;
        positive("efficiency.t", f.t)?;
        positive("efficiency.d0", f.d0)?;
        if f.eps_ladder.is_empty() {
            return Err(Error::Config("`efficiency.eps_ladder` must not be empty".into()));
        }
        for &v in &f.eps_ladder {
            positive("efficiency.eps_ladder entries", v)?;
        }

        positive("simulate.t", self.simulate.t)?;
        if let Some(c) = &self.simulate.checkpoints {
            for &v in c {
                positive("simulate.checkpoints entries", v)?;
            }
        }
        Ok(())
    }
}
