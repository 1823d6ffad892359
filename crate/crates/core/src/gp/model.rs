use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

use super::covariance::{kernel_matrix, repair_psd, Kernel};

/// Fitting options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Subtract the sample mean before fitting and add it back when predicting.
    pub center: bool,
    /// Search range for `σ_noise² / (σ_h² · mean diag p)`.
    pub noise_ratio_bounds: (f64, f64),
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            center: true,
            noise_ratio_bounds: (1e-8, 1e6),
        }
    }
}

/// Log marginal likelihood of one kernel candidate at its best noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridScore {
    pub param: f64,
    pub log_marginal_likelihood: f64,
    pub sigma_h2: f64,
    pub sigma_noise2: f64,
}

/// A fitted GP: kernel `σ_h² k(·,·)` plus noise `σ_noise²`.
#[derive(Debug, Clone)]
pub struct GpModel<X, K> {
    pub kernel: K,
    /// Label of the selected kernel (diffusion time or length-scale).
    pub param: f64,
    pub sigma_h2: f64,
    pub sigma_noise2: f64,
    pub y_mean: f64,
    pub log_marginal_likelihood: f64,
    /// Whether the kernel matrix needed PSD repair.
    pub repaired: bool,
    pub grid: Vec<GridScore>,
    train: Vec<X>,
    yc: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

/// Posterior mean and covariance at test inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl Prediction {
    pub fn variance(&self) -> DVector<f64> {
        self.cov.diagonal()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub param: f64,
    pub sigma_h2: f64,
    pub sigma_noise2: f64,
    pub y_mean: f64,
    pub log_marginal_likelihood: f64,
    pub repaired: bool,
    pub n_train: usize,
    pub grid: Vec<GridScore>,
}

fn check_data(n_x: usize, y: &[f64]) -> Result<()> {
    if n_x != y.len() {
        return Err(Error::LengthMismatch(n_x, y.len()));
    }
    if n_x == 0 {
        return Err(Error::EmptyInput("training data"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("responses contain non-finite values".into()));
    }
    Ok(())
}

fn centered(y: &[f64], center: bool) -> (f64, DVector<f64>) {
    let mean = if center {
        y.iter().sum::<f64>() / y.len() as f64
    } else {
        0.0
    };
    (mean, DVector::from_iterator(y.len(), y.iter().map(|v| v - mean)))
}

fn cholesky_with_retry(a: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(a.clone()) {
        return Ok(c);
    }
    let n = a.nrows();
    let jitter = 1e-6 * (a.trace() / n as f64).abs().max(f64::MIN_POSITIVE);
    Cholesky::new(a + DMatrix::identity(n, n) * jitter)
        .ok_or_else(|| Error::Numerical("covariance is not positive definite even after jitter".into()))
}

fn log_det(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

/// Concentrated likelihood: for `K = σ_h² (P + r s I)` the optimal
/// `σ_h² = yᵀ(P + r s I)⁻¹y / n`. Returns `(lml, σ_h², σ_n²)`.
fn profile_lml(p: &DMatrix<f64>, scale: f64, y: &DVector<f64>, ratio: f64) -> Option<(f64, f64, f64)> {
    let n = p.nrows();
    let a = p + DMatrix::identity(n, n) * (ratio * scale);
    let chol = Cholesky::new(a)?;
    let q = y.dot(&chol.solve(y)).max(f64::MIN_POSITIVE);
    let sigma_h2 = q / n as f64;
    let nf = n as f64;
    let lml = -0.5 * nf * (2.0 * PI * sigma_h2).ln() - 0.5 * log_det(&chol) - 0.5 * nf;
    lml.is_finite().then_some((lml, sigma_h2, ratio * scale * sigma_h2))
}

/// Golden-section maximisation of `f` on `[lo, hi]`.
pub(crate) fn golden_max(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid scan then golden refinement of a function of one log-parameter.
pub(crate) fn maximise_log(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> (f64, f64) {
    let h = (hi - lo) / steps as f64;
    let (mut best_u, mut best_v) = (lo, f64::NEG_INFINITY);
    for i in 0..=steps {
        let u = lo + h * i as f64;
        let v = f(u);
        if v > best_v {
            best_u = u;
            best_v = v;
        }
    }
    if !best_v.is_finite() {
        return (best_u, best_v);
    }
    let (u, v) = golden_max(f, (best_u - h).max(lo), (best_u + h).min(hi), 40);
    if v >= best_v {
        (u, v)
    } else {
        (best_u, best_v)
    }
}

/// Best noise level for a fixed kernel matrix `p` (already PSD).
fn optimise_noise(p: &DMatrix<f64>, y: &DVector<f64>, opts: &FitOptions) -> Result<(f64, f64, f64)> {
    let n = p.nrows();
    let scale = (p.trace() / n as f64).abs();
    if !(scale > 0.0) {
        return Err(Error::Numerical("kernel matrix has a zero diagonal".into()));
    }
    let (lo, hi) = opts.noise_ratio_bounds;
    let f = |u: f64| profile_lml(p, scale, y, u.exp()).map_or(f64::NEG_INFINITY, |r| r.0);
    let (u, _) = maximise_log(&f, lo.ln(), hi.ln(), 56);
    profile_lml(p, scale, y, u.exp())
        .ok_or_else(|| Error::Numerical("log marginal likelihood is not finite".into()))
}

impl<X: Clone + Sync, K: Kernel<X>> GpModel<X, K> {
    /// `(lml, σ_h², σ_noise²)` at the best noise level for a PSD kernel matrix
    /// and centred responses.
    pub fn best_noise(p: &DMatrix<f64>, yc: &DVector<f64>, opts: &FitOptions) -> Result<(f64, f64, f64)> {
        optimise_noise(p, yc, opts)
    }

    /// Model with given hyperparameters.
    pub fn with_hyperparameters(
        kernel: K,
        param: f64,
        x: &[X],
        y: &[f64],
        sigma_h2: f64,
        sigma_noise2: f64,
        opts: &FitOptions,
    ) -> Result<Self> {
        check_data(x.len(), y)?;
        if !(sigma_h2 > 0.0) || !(sigma_noise2 >= 0.0) {
            return Err(Error::Domain(format!(
                "need sigma_h2 > 0 and sigma_noise2 >= 0, got {sigma_h2}, {sigma_noise2}"
            )));
        }
        let p = repair_psd(&kernel_matrix(&kernel, x)?)?;
        let (y_mean, yc) = centered(y, opts.center);
        Self::assemble(kernel, param, x, yc, y_mean, p.matrix, p.repaired, sigma_h2, sigma_noise2, vec![])
    }

    /// Selects the candidate kernel and `(σ_h², σ_noise²)` maximising the log
    /// marginal likelihood; `param` labels each candidate.
    pub fn fit(x: &[X], y: &[f64], candidates: Vec<(f64, K)>, opts: &FitOptions) -> Result<Self>
    where
        K: Send,
    {
        check_data(x.len(), y)?;
        if candidates.is_empty() {
            return Err(Error::EmptyInput("kernel candidates"));
        }
        let (y_mean, yc) = centered(y, opts.center);
        let scored = candidates
            .into_par_iter()
            .map(|(param, kernel)| {
                let p = repair_psd(&kernel_matrix(&kernel, x)?)?;
                let (lml, sh, sn) = optimise_noise(&p.matrix, &yc, opts)?;
                Ok((param, kernel, p, lml, sh, sn))
            })
            .collect::<Result<Vec<_>>>()?;
        let grid: Vec<GridScore> = scored
            .iter()
            .map(|s| GridScore {
                param: s.0,
                log_marginal_likelihood: s.3,
                sigma_h2: s.4,
                sigma_noise2: s.5,
            })
            .collect();
        let best = scored
            .into_iter()
            .reduce(|a, b| if b.3 > a.3 { b } else { a })
            .expect("non-empty");
        let (param, kernel, p, _, sh, sn) = best;
        Self::assemble(kernel, param, x, yc, y_mean, p.matrix, p.repaired, sh, sn, grid)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        kernel: K,
        param: f64,
        x: &[X],
        yc: DVector<f64>,
        y_mean: f64,
        p: DMatrix<f64>,
        repaired: bool,
        sigma_h2: f64,
        sigma_noise2: f64,
        grid: Vec<GridScore>,
    ) -> Result<Self> {
        let n = x.len();
        let k = p * sigma_h2 + DMatrix::identity(n, n) * sigma_noise2;
        let chol = cholesky_with_retry(k)?;
        let alpha = chol.solve(&yc);
        let nf = n as f64;
        let lml = -0.5 * yc.dot(&alpha) - 0.5 * log_det(&chol) - 0.5 * nf * (2.0 * PI).ln();
        if !lml.is_finite() {
            return Err(Error::Numerical("log marginal likelihood is not finite".into()));
        }
        Ok(Self {
            kernel,
            param,
            sigma_h2,
            sigma_noise2,
            y_mean,
            log_marginal_likelihood: lml,
            repaired,
            grid,
            train: x.to_vec(),
            yc,
            chol,
            alpha,
        })
    }

    pub fn train(&self) -> &[X] {
        &self.train
    }

    /// Lower Cholesky factor of `σ_h² P + σ_noise² I`.
    pub fn factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    pub fn predict_mean(&self, test: &[X]) -> Result<DVector<f64>> {
        Ok(self.posterior(test, false)?.mean)
    }

    /// Posterior mean and covariance; the covariance is symmetrised and its
    /// diagonal clipped at 0.
    pub fn predict(&self, test: &[X]) -> Result<Prediction> {
        self.posterior(test, true)
    }

    /// Conditions on the training data. If the joint train/test kernel matrix
    /// is not PSD, it is repaired as a whole and the training block refactored,
    /// so the prediction is a conditional of one valid Gaussian.
    fn posterior(&self, test: &[X], with_cov: bool) -> Result<Prediction> {
        let n = self.train.len();
        let m = test.len();
        let all: Vec<X> = self.train.iter().chain(test).cloned().collect();
        let joint = repair_psd(&kernel_matrix(&self.kernel, &all)?)?;
        let p = joint.matrix * self.sigma_h2;
        let kx = p.view((n, 0), (m, n)).into_owned();
        let kt = p.view((n, n), (m, m)).into_owned();
        let refactored;
        let (chol, alpha) = if joint.repaired {
            let k = p.view((0, 0), (n, n)) + DMatrix::identity(n, n) * self.sigma_noise2;
            let c = cholesky_with_retry(k)?;
            let a = c.solve(&self.yc);
            refactored = c;
            (&refactored, a)
        } else {
            (&self.chol, self.alpha.clone())
        };
        let mean = (&kx * &alpha).add_scalar(self.y_mean);
        if !with_cov {
            return Ok(Prediction {
                mean,
                cov: DMatrix::zeros(0, 0),
            });
        }
        let v = chol
            .l_dirty()
            .solve_lower_triangular(&kx.transpose())
            .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
        let mut cov = kt - v.transpose() * v;
        cov = (&cov + cov.transpose()) * 0.5;
        for i in 0..cov.nrows() {
            if cov[(i, i)] < 0.0 {
                cov[(i, i)] = 0.0;
            }
        }
        Ok(Prediction { mean, cov })
    }

    pub fn summary(&self) -> ModelSummary {
        ModelSummary {
            param: self.param,
            sigma_h2: self.sigma_h2,
            sigma_noise2: self.sigma_noise2,
            y_mean: self.y_mean,
            log_marginal_likelihood: self.log_marginal_likelihood,
            repaired: self.repaired,
            n_train: self.train.len(),
            grid: self.grid.clone(),
        }
    }
}

/// Root mean squared error.
pub fn rmse(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch(predictions.len(), truth.len()));
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput("predictions"));
    }
    let sse: f64 = predictions.iter().zip(truth).map(|(p, t)| (p - t).powi(2)).sum();
    Ok((sse / predictions.len() as f64).sqrt())
}
