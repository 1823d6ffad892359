use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::brownian::derive_seed;
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Manifold, ManifoldPoint, Rep};
use crate::gp::{hermitian_projector_embedding, rmse, ClosedFormKernel, EmbeddingBaseline, FitOptions, GpModel, Kernel, Transform};
use crate::heatkernel::{default_grid, strip_profiles, EmpiricalKernel, McSettings};

use super::commands::{base_point, strip_eps};
use super::config::{levels_within_steps, Config, KernelSource};
use super::knot::TorusKnot;
use super::output::{csv_bytes, write_bytes, write_json, RunMeta};

/// Sample mean and (n − 1) standard deviation.
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn times_from_levels(t_max: f64, steps: usize, levels: &[usize]) -> Vec<f64> {
    levels.iter().map(|&k| t_max * k as f64 / steps as f64).collect()
}

fn estimated_kernels(
    m: &Manifold,
    times: &[f64],
    grid_points: usize,
    settings: &McSettings,
) -> Result<Vec<(f64, EmpiricalKernel)>> {
    let x = base_point(m)?;
    let diam = m.diameter().expect("compact manifold");
    let eps = strip_eps(diam, grid_points);
    let grid = default_grid(diam, eps, grid_points);
    let profiles = strip_profiles(&x, &grid, times, eps, settings)?;
    let (kept, flat): (Vec<_>, Vec<_>) = profiles.into_iter().partition(|p| p.is_resolved());
    if !flat.is_empty() {
        let ts: Vec<f64> = flat.iter().map(|p| p.t).collect();
        eprintln!("dropping t = {ts:?}: profile is flat within Monte Carlo error");
    }
    if kept.is_empty() {
        return Err(Error::NoHits {
            what: format!("a resolved heat-kernel profile on {m}"),
        });
    }
    Ok(kept.into_iter().map(|p| (p.t, EmpiricalKernel::Profile(p))).collect())
}

fn fit_and_predict<K: Kernel<ManifoldPoint> + Send>(
    train: &[ManifoldPoint],
    y: &[f64],
    test: &[ManifoldPoint],
    candidates: Vec<(f64, K)>,
) -> Result<(DVector<f64>, f64)> {
    let model = GpModel::fit(train, y, candidates, &FitOptions::default())?;
    Ok((model.predict_mean(test)?, model.param))
}

/// RMSEs of one knot replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KnotRow {
    pub p: u32,
    pub q: u32,
    pub replicate: usize,
    pub intrinsic: f64,
    pub extrinsic: f64,
    pub intrinsic_t: f64,
    pub extrinsic_lengthscale: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub label: String,
    pub method: String,
    pub mean_rmse: f64,
    pub sd_rmse: f64,
}

#[derive(Serialize)]
struct KnotReport<'a> {
    meta: RunMeta,
    n_train: usize,
    n_test: usize,
    noise_sd: f64,
    replicates: usize,
    kernel: KernelSource,
    summary: &'a [MethodSummary],
}

fn quadratic(m: &[[f64; 2]; 2], theta: f64) -> f64 {
    let (c, s) = (theta.cos(), theta.sin());
    m[0][0] * c * c + 2.0 * m[0][1] * c * s + m[1][1] * s * s
}

/// Torus-knot regression: intrinsic circle GP against an RBF GP on the
/// embedding in R³, over replicated datasets.
pub fn cmd_knot(cfg: &Config) -> Result<(Vec<KnotRow>, Vec<MethodSummary>)> {
    let k = &cfg.knot;
    let settings = cfg.mc_settings();
    // the same draws are used for every knot so the comparison is paired
    let datasets: Vec<(Vec<f64>, Vec<f64>)> = (0..k.replicates)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1000 + r as u64));
            let theta: Vec<f64> = (0..k.n_train).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
            let noise: Vec<f64> = (0..k.n_train)
                .map(|_| k.noise_sd * rng.sample::<f64, _>(StandardNormal))
                .collect();
            (theta, noise)
        })
        .collect();
    let test_theta: Vec<f64> = (0..k.n_test).map(|i| 2.0 * PI * i as f64 / k.n_test as f64).collect();
    let truth: Vec<f64> = test_theta.iter().map(|&t| quadratic(&k.matrix, t)).collect();

    levels_within_steps("knot.t_levels", &k.t_levels, settings.steps)?;
    let mut rows = vec![];
    let mut summary = vec![];
    for (ki, &[p, q]) in k.knots.iter().enumerate() {
        let knot = TorusKnot::new(p, q);
        let length = knot.length();
        let circle = Manifold::Circle { circumference: length };
        let scale = (length / (2.0 * PI)).powi(2);
        let times = times_from_levels(k.t_max * scale, settings.steps, &k.t_levels);
        eprintln!("knot ({p},{q}): length {length:.4}");
        let estimated = match k.kernel {
            KernelSource::Estimated => Some(estimated_kernels(
                &circle,
                &times,
                k.grid_points,
                &McSettings {
                    seed: derive_seed(cfg.seed, 100 + ki as u64),
                    ..settings
                },
            )?),
            KernelSource::ClosedForm => None,
        };
        let to_point = |theta: f64| {
            ManifoldPoint::new(
                circle,
                Rep::Real(DMatrix::from_element(1, 1, wrap_angle(knot.arclength(theta), length))),
            )
        };
        let embed = |theta: f64| DVector::from_row_slice(&knot.embed(theta));
        let test_pts = test_theta.iter().map(|&t| to_point(t)).collect::<Result<Vec<_>>>()?;
        let test_emb: Vec<DVector<f64>> = test_theta.iter().map(|&t| embed(t)).collect();

        let mut intr = vec![];
        let mut extr = vec![];
        for (r, (theta, noise)) in datasets.iter().enumerate() {
            let y: Vec<f64> = theta
                .iter()
                .zip(noise)
                .map(|(&t, e)| quadratic(&k.matrix, t) + e)
                .collect();
            let train = theta.iter().map(|&t| to_point(t)).collect::<Result<Vec<_>>>()?;
            let (mean, t_sel) = match &estimated {
                Some(kernels) => fit_and_predict(&train, &y, &test_pts, kernels.clone())?,
                None => fit_and_predict(
                    &train,
                    &y,
                    &test_pts,
                    times.iter().map(|&t| (t, ClosedFormKernel::Circle { t })).collect(),
                )?,
            };
            let intrinsic = rmse(mean.as_slice(), &truth)?;
            let emb: Vec<DVector<f64>> = theta.iter().map(|&t| embed(t)).collect();
            let base = EmbeddingBaseline::fit(&emb, &y, Transform::Identity, &FitOptions::default())?;
            let extrinsic = rmse(base.predict_mean(&test_emb)?.as_slice(), &truth)?;
            intr.push(intrinsic);
            extr.push(extrinsic);
            rows.push(KnotRow {
                p,
                q,
                replicate: r,
                intrinsic,
                extrinsic,
                intrinsic_t: t_sel,
                extrinsic_lengthscale: base.lengthscale(),
            });
        }
        for (method, v) in [("intrinsic", &intr), ("extrinsic", &extr)] {
            let (mean_rmse, sd_rmse) = mean_sd(v);
            summary.push(MethodSummary {
                label: format!("({p},{q})"),
                method: method.into(),
                mean_rmse,
                sd_rmse,
            });
        }
    }

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format!("({},{})", r.p, r.q),
                r.replicate.to_string(),
                r.intrinsic.to_string(),
                r.extrinsic.to_string(),
                r.intrinsic_t.to_string(),
                r.extrinsic_lengthscale.to_string(),
            ]
        })
        .collect();
    write_bytes(
        &cfg.out,
        "knot_rmse.csv",
        &csv_bytes(
            &["knot", "replicate", "intrinsic_rmse", "extrinsic_rmse", "intrinsic_t", "extrinsic_lengthscale"],
            &table,
        )?,
    )?;
    write_summary(cfg, "knot_summary.csv", &summary)?;
    let meta = RunMeta::new("knot", "S^1 (knot arclength)".into(), cfg.seed, settings.n_paths, settings.steps);
    write_json(
        &cfg.out,
        "knot_summary.json",
        &KnotReport {
            meta,
            n_train: k.n_train,
            n_test: k.n_test,
            noise_sd: k.noise_sd,
            replicates: k.replicates,
            kernel: k.kernel,
            summary: &summary,
        },
    )?;
    Ok((rows, summary))
}

fn write_summary(cfg: &Config, name: &str, summary: &[MethodSummary]) -> Result<()> {
    let table: Vec<Vec<String>> = summary
        .iter()
        .map(|s| {
            vec![
                s.label.clone(),
                s.method.clone(),
                s.mean_rmse.to_string(),
                s.sd_rmse.to_string(),
            ]
        })
        .collect();
    write_bytes(&cfg.out, name, &csv_bytes(&["dataset", "method", "mean_rmse", "sd_rmse"], &table)?)?;
    Ok(())
}

/// RMSEs of one projective replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectiveRow {
    pub replicate: usize,
    pub intrinsic: f64,
    pub iota: f64,
    pub iota_scaled: f64,
    pub iota_random: f64,
    pub intrinsic_t: f64,
}

#[derive(Serialize)]
struct ProjectiveReport<'a> {
    meta: RunMeta,
    dim: usize,
    n_train: usize,
    n_test: usize,
    noise_sd: f64,
    replicates: usize,
    scale: f64,
    summary: &'a [MethodSummary],
}

fn complex_gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

fn hermitian_form(m: &DMatrix<Complex64>, p: &ManifoldPoint) -> f64 {
    let u = p.rep().as_complex().expect("complex projective point");
    (u.adjoint() * m * u)[(0, 0)].re
}

/// Regression on `P^dim_C`: intrinsic heat-kernel GP against RBF GPs on the
/// projector embedding, unscaled, scaled and randomly mixed.
pub fn cmd_projective(cfg: &Config) -> Result<(Vec<ProjectiveRow>, Vec<MethodSummary>)> {
    let pc = &cfg.projective;
    let settings = cfg.mc_settings();
    let m = Manifold::ComplexProjective { dim: pc.dim };
    levels_within_steps("projective.t_levels", &pc.t_levels, settings.steps)?;
    let times = times_from_levels(pc.t_max, settings.steps, &pc.t_levels);
    eprintln!("projective: estimating the heat kernel of {m} at {} times", times.len());
    let kernels = estimated_kernels(
        &m,
        &times,
        pc.grid_points,
        &McSettings {
            seed: derive_seed(cfg.seed, 7),
            ..settings
        },
    )?;
    let n = pc.dim + 1;
    let mut rows = vec![];
    for r in 0..pc.replicates {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 2000 + r as u64));
        let b = complex_gaussian(n, n, &mut rng);
        let form = &b * b.adjoint() / Complex64::new(n as f64, 0.0);
        let train = (0..pc.n_train).map(|_| m.random_point(&mut rng)).collect::<Result<Vec<_>>>()?;
        let test = (0..pc.n_test).map(|_| m.random_point(&mut rng)).collect::<Result<Vec<_>>>()?;
        let y: Vec<f64> = train
            .iter()
            .map(|p| hermitian_form(&form, p) + pc.noise_sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let truth: Vec<f64> = test.iter().map(|p| hermitian_form(&form, p)).collect();
        let emb_dim = n * n;
        let mixing = DMatrix::from_fn(emb_dim, emb_dim, |_, _| rng.sample::<f64, _>(StandardNormal));

        let (mean, t_sel) = fit_and_predict(&train, &y, &test, kernels.clone())?;
        let intrinsic = rmse(mean.as_slice(), &truth)?;
        let train_emb = train.iter().map(hermitian_projector_embedding).collect::<Result<Vec<_>>>()?;
        let test_emb = test.iter().map(hermitian_projector_embedding).collect::<Result<Vec<_>>>()?;
        let baseline = |transform: Transform| -> Result<f64> {
            let b = EmbeddingBaseline::fit(&train_emb, &y, transform, &FitOptions::default())?;
            rmse(b.predict_mean(&test_emb)?.as_slice(), &truth)
        };
        let iota = baseline(Transform::Identity)?;
        let iota_scaled = baseline(Transform::Scalar(pc.scale))?;
        let iota_random = baseline(Transform::Matrix(mixing))?;
        rows.push(ProjectiveRow {
            replicate: r,
            intrinsic,
            iota,
            iota_scaled,
            iota_random,
            intrinsic_t: t_sel,
        });
    }

    let label = m.to_string();
    let mut summary = vec![];
    let columns: [(&str, fn(&ProjectiveRow) -> f64); 4] = [
        ("intrinsic", |r| r.intrinsic),
        ("iota", |r| r.iota),
        ("iota_scaled", |r| r.iota_scaled),
        ("iota_random", |r| r.iota_random),
    ];
    for (name, get) in columns {
        let v: Vec<f64> = rows.iter().map(get).collect();
        let (mean_rmse, sd_rmse) = mean_sd(&v);
        summary.push(MethodSummary {
            label: label.clone(),
            method: name.into(),
            mean_rmse,
            sd_rmse,
        });
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.replicate.to_string(),
                r.intrinsic.to_string(),
                r.iota.to_string(),
                r.iota_scaled.to_string(),
                r.iota_random.to_string(),
                r.intrinsic_t.to_string(),
            ]
        })
        .collect();
    write_bytes(
        &cfg.out,
        "projective_rmse.csv",
        &csv_bytes(
            &["replicate", "intrinsic_rmse", "iota_rmse", "iota_scaled_rmse", "iota_random_rmse", "intrinsic_t"],
            &table,
        )?,
    )?;
    write_summary(cfg, "projective_summary.csv", &summary)?;
    let mut meta = RunMeta::new("projective", label, cfg.seed, settings.n_paths, settings.steps);
    meta.delta = Some(pc.t_max / settings.steps as f64);
    meta.eps = Some(strip_eps(m.diameter().expect("compact"), pc.grid_points));
    write_json(
        &cfg.out,
        "projective_summary.json",
        &ProjectiveReport {
            meta,
            dim: pc.dim,
            n_train: pc.n_train,
            n_test: pc.n_test,
            noise_sd: pc.noise_sd,
            replicates: pc.replicates,
            scale: pc.scale,
            summary: &summary,
        },
    )?;
    Ok((rows, summary))
}
