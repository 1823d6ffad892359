//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Heat kernel of the unit sphere S² (generator ½Δ) as a partial sum of the
/// Legendre expansion, Legendre polynomials by the three-term recurrence.
pub fn s2_heat_kernel_series(d: f64, t: f64, terms: usize) -> f64 {
    let x = d.cos();
    let (mut p_prev, mut p) = (1.0, x);
    let mut sum = 1.0 / (4.0 * PI);
    for l in 1..=terms {
        let lf = l as f64;
        sum += (2.0 * lf + 1.0) / (4.0 * PI) * (-lf * (lf + 1.0) * t / 2.0).exp() * p;
        let next = ((2.0 * lf + 1.0) * x * p - lf * p_prev) / (lf + 1.0);
        p_prev = p;
        p = next;
    }
    sum
}

/// Circle heat kernel from its Fourier series.
pub fn circle_heat_kernel_fourier(d: f64, t: f64, circumference: f64) -> f64 {
    let mut sum = 1.0 / circumference;
    for k in 1..2000 {
        let w = 2.0 * PI * k as f64 / circumference;
        let envelope = 2.0 / circumference * (-0.5 * w * w * t).exp();
        sum += envelope * (w * d).cos();
        if envelope < 1e-18 {
            break;
        }
    }
    sum
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic 1% critical value of the two-sample KS statistic.
pub fn ks_critical_1pct(na: usize, nb: usize) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    1.628 * ((na + nb) / (na * nb)).sqrt()
}

/// Orthogonal polar factor by the Newton iteration `X ← (X + X^{-T}) / 2`.
pub fn polar_newton(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut x = a.clone();
    for _ in 0..100 {
        let inv_t = x.clone().try_inverse().expect("invertible").transpose();
        let next = (&x + inv_t) * 0.5;
        let done = (&next - &x).norm() < 1e-15;
        x = next;
        if done {
            break;
        }
    }
    x
}

/// Fraction of uniform points on S^dim within distance band `[lo, hi)` of the
/// north pole, times the sphere area.
pub fn mc_sphere_band_volume(dim: usize, lo: f64, hi: f64, n: usize, seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let area = 2.0 * PI.powf(0.5 * (dim as f64 + 1.0)) / statrs::function::gamma::gamma(0.5 * (dim as f64 + 1.0));
    let mut hits = 0usize;
    for _ in 0..n {
        let v: Vec<f64> = (0..=dim).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let d = (v[0] / norm).clamp(-1.0, 1.0).acos();
        if d >= lo && d < hi {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    (area * p, area * (p * (1.0 - p) / n as f64).sqrt())
}

/// Evolves the radial heat equation `u_t = ½ (u_rr + (m−1)/r u_r)` in R^m with
/// explicit finite differences, starting from the exact kernel at `t0`.
/// Returns `u(r, t1)` on the grid `r_i = i h`.
pub fn radial_heat_pde(m: usize, t0: f64, t1: f64, r_max: f64, h: f64) -> Vec<(f64, f64)> {
    let n = (r_max / h).round() as usize;
    let init = |r: f64| (2.0 * PI * t0).powf(-0.5 * m as f64) * (-r * r / (2.0 * t0)).exp();
    let mut u: Vec<f64> = (0..=n).map(|i| init(i as f64 * h)).collect();
    let dt = 0.2 * h * h;
    let steps = ((t1 - t0) / dt).ceil() as usize;
    let dt = (t1 - t0) / steps as f64;
    let mf = m as f64;
    for _ in 0..steps {
        let mut next = u.clone();
        // at r = 0 the Laplacian is m u_rr
        next[0] = u[0] + dt * 0.5 * mf * 2.0 * (u[1] - u[0]) / (h * h);
        for i in 1..n {
            let r = i as f64 * h;
            let urr = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            let ur = (u[i + 1] - u[i - 1]) / (2.0 * h);
            next[i] = u[i] + dt * 0.5 * (urr + (mf - 1.0) / r * ur);
        }
        next[n] = 0.0;
        u = next;
    }
    u.into_iter().enumerate().map(|(i, v)| (i as f64 * h, v)).collect()
}

/// Dense GP posterior computed from the textbook formulas with an explicit inverse.
pub fn dense_gp(
    k_train: &DMatrix<f64>,
    k_cross: &DMatrix<f64>,
    k_test: &DMatrix<f64>,
    noise: f64,
    y: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    let n = k_train.nrows();
    let inv = (k_train + DMatrix::identity(n, n) * noise).try_inverse().expect("invertible");
    let mean = k_cross * &inv * y;
    let cov = k_test - k_cross * &inv * k_cross.transpose();
    (mean, cov)
}

/// Adaptive-free composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

pub fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}
