mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use heatgp::geometry::*;
use heatgp::matman::polar;
use heatgp::{Error, Field, Manifold, ManifoldPoint, Rep, TangentVector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn all_manifolds() -> Vec<Manifold> {
    vec![
        Manifold::Euclidean { dim: 3 },
        Manifold::Circle { circumference: 2.0 * PI },
        Manifold::Sphere { dim: 2 },
        Manifold::Sphere { dim: 5 },
        Manifold::SpecialOrthogonal { n: 3 },
        Manifold::SpecialOrthogonal { n: 4 },
        Manifold::SpecialUnitary { n: 2 },
        Manifold::SpecialUnitary { n: 3 },
        Manifold::Unitary { n: 3 },
        Manifold::Stiefel { k: 1, n: 4, field: Field::Real },
        Manifold::Stiefel { k: 3, n: 3, field: Field::Real },
        Manifold::Stiefel { k: 2, n: 5, field: Field::Real },
        Manifold::Stiefel { k: 2, n: 4, field: Field::Complex },
        Manifold::Grassmannian { k: 2, n: 4, field: Field::Real },
        Manifold::Grassmannian { k: 2, n: 5, field: Field::Complex },
        Manifold::RealProjective { dim: 2 },
        Manifold::ComplexProjective { dim: 3 },
    ]
}

/// Manifolds with a closed-form distance.
fn metric_manifolds() -> Vec<Manifold> {
    all_manifolds()
        .into_iter()
        .filter(|m| !matches!(m, Manifold::Stiefel { k, n, .. } if *k > 1 && *k < *n))
        .collect()
}

fn tangent_of_norm(m: &Manifold, x: &ManifoldPoint, r: f64, rng: &mut impl Rng) -> TangentVector {
    let v = m.sample_tangent(x, 1.0, rng).unwrap();
    let s = r / v.norm();
    v.scaled(s)
}

#[test]
fn euclidean_heat_kernel_examples() {
    let v = euclidean_heat_kernel(0.0, 1.0, 1).unwrap();
    assert!((v - 0.3989422804).abs() < 1e-10);
    let v = euclidean_heat_kernel(1.0, 1.0, 2).unwrap();
    assert!((v - 0.0965323526).abs() < 1e-10);
    assert!(matches!(euclidean_heat_kernel(0.0, 0.0, 1), Err(Error::Domain(_))));
    assert!(matches!(euclidean_heat_kernel(0.0, -1.0, 1), Err(Error::Domain(_))));
}

#[test]
fn euclidean_heat_kernel_r3_matches_pde_integration() {
    let sol = common::radial_heat_pde(3, 0.1, 0.5, 8.0, 0.02);
    let (_, u) = sol.iter().find(|(r, _)| (r - 2.0).abs() < 1e-9).copied().unwrap();
    let v = euclidean_heat_kernel(2.0, 0.5, 3).unwrap();
    assert!((u - v).abs() / v < 2e-3, "pde {u} vs closed form {v}");
}

#[test]
fn euclidean_heat_kernel_semigroup() {
    let (t, s, x) = (0.7, 0.4, 0.9);
    let conv = common::simpson(
        |y| euclidean_heat_kernel(y.abs(), t, 1).unwrap() * euclidean_heat_kernel((y - x).abs(), s, 1).unwrap(),
        -15.0,
        15.0,
        20_000,
    );
    assert!((conv - euclidean_heat_kernel(x, t + s, 1).unwrap()).abs() < 1e-6);
}

#[test]
fn circle_heat_kernel_limits() {
    let l = 2.0 * PI;
    let t = 1e-4;
    let ratio = circle_heat_kernel(0.0, t, l).unwrap() / euclidean_heat_kernel(0.0, t, 1).unwrap();
    assert!((ratio - 1.0).abs() < 1e-12);
    for d in [0.0, 1.0, PI] {
        assert!((circle_heat_kernel(d, 100.0, l).unwrap() - 1.0 / l).abs() < 1e-10);
    }
}

#[test]
fn circle_heat_kernel_matches_fourier_series() {
    for &l in &[2.0 * PI, 5.0, 31.9] {
        for &t in &[0.05, 0.5, 3.0, 40.0] {
            for i in 0..=10 {
                let d = 0.5 * l * i as f64 / 10.0;
                let a = circle_heat_kernel(d, t, l).unwrap();
                let b = common::circle_heat_kernel_fourier(d, t, l);
                assert!((a - b).abs() < 1e-10 * (1.0 + b), "L={l} t={t} d={d}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn circle_heat_kernel_integrates_to_one() {
    let l = 2.0 * PI;
    let n = 2000;
    let h = l / n as f64;
    // periodic integrand: the trapezoid rule is spectrally accurate
    let sum: f64 = (0..n)
        .map(|i| {
            let d = (i as f64 * h).min(l - i as f64 * h);
            circle_heat_kernel(d, 0.3, l).unwrap()
        })
        .sum();
    assert!((sum * h - 1.0).abs() < 1e-8);
}

#[test]
fn volume_formulas() {
    assert!((euclidean_ball_volume(3, 2.0) - 4.0 / 3.0 * PI * 8.0).abs() < 1e-12);
    assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-12);
    assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-12);
    assert!((sphere_cap_volume(2, PI) - 4.0 * PI).abs() < 1e-12);
    assert!((sphere_cap_volume(2, 0.3) - 2.0 * PI * (1.0 - 0.3f64.cos())).abs() < 1e-12);
    let s2 = Manifold::Sphere { dim: 2 };
    let strip = s2.strip_volume(FRAC_PI_2, 0.1).unwrap();
    assert!((strip - 4.0 * PI * 0.1f64.sin()).abs() < 1e-12);
    let cp = Manifold::ComplexProjective { dim: 2 };
    assert!((cp.ball_volume(FRAC_PI_2) - cp.volume().unwrap()).abs() < 1e-12);
    assert!((cp_ball_volume(1, 0.4) - PI * 0.4f64.sin().powi(2)).abs() < 1e-12);
    let rp = Manifold::RealProjective { dim: 2 };
    assert!((rp.ball_volume(FRAC_PI_2) - rp.volume().unwrap()).abs() < 1e-12);
    assert!((sine_power_integral(3, PI) - 4.0 / 3.0).abs() < 1e-12);
    assert!((sine_power_integral(1, 2.0) - (1.0 - 2f64.cos())).abs() < 1e-12);
}

#[test]
fn sphere_strip_volume_matches_monte_carlo() {
    let s2 = Manifold::Sphere { dim: 2 };
    let exact = s2.strip_volume(FRAC_PI_2, 0.1).unwrap();
    let (mc, se) = common::mc_sphere_band_volume(2, FRAC_PI_2 - 0.1, FRAC_PI_2 + 0.1, 4_000_000, 3);
    assert!((mc - exact).abs() / exact <= 0.005, "mc {mc} ± {se} vs {exact}");

    let s4 = Manifold::Sphere { dim: 4 };
    let exact = s4.strip_volume(1.0, 0.2).unwrap();
    let (mc, se) = common::mc_sphere_band_volume(4, 0.8, 1.2, 1_000_000, 4);
    assert!((mc - exact).abs() <= 4.0 * se, "mc {mc} ± {se} vs {exact}");
}

#[test]
fn cp_ball_volume_matches_monte_carlo() {
    let mut rng = common::rng(5);
    let (dim, r, n) = (3usize, 0.7f64, 400_000usize);
    let mut hits = 0usize;
    for _ in 0..n {
        let v: Vec<Complex64> = (0..=dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (v[0].norm() / norm).min(1.0).acos() < r {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let m = Manifold::ComplexProjective { dim };
    let frac = m.ball_volume(r) / m.volume().unwrap();
    assert!((p - frac).abs() < 4.0 * se, "{p} ± {se} vs {frac}");
}

#[test]
fn manifold_validation() {
    assert!(Manifold::Sphere { dim: 0 }.validate().is_err());
    assert!(Manifold::Circle { circumference: -1.0 }.validate().is_err());
    assert!(Manifold::Stiefel { k: 3, n: 2, field: Field::Real }.validate().is_err());
    assert!(Manifold::Grassmannian { k: 2, n: 2, field: Field::Real }.validate().is_err());
    assert!(Manifold::SpecialOrthogonal { n: 1 }.validate().is_err());
    for m in all_manifolds() {
        m.validate().unwrap();
    }
}

#[test]
fn intrinsic_dimensions() {
    assert_eq!(Manifold::SpecialOrthogonal { n: 3 }.intrinsic_dim(), 3);
    assert_eq!(Manifold::SpecialUnitary { n: 2 }.intrinsic_dim(), 3);
    assert_eq!(Manifold::Unitary { n: 3 }.intrinsic_dim(), 9);
    assert_eq!(Manifold::Stiefel { k: 2, n: 5, field: Field::Real }.intrinsic_dim(), 7);
    assert_eq!(Manifold::Grassmannian { k: 2, n: 5, field: Field::Complex }.intrinsic_dim(), 12);
    assert_eq!(Manifold::ComplexProjective { dim: 4 }.intrinsic_dim(), 8);
}

#[test]
fn manifold_serde_round_trip_and_display() {
    for m in all_manifolds() {
        let json = serde_json::to_string(&m).unwrap();
        let back: Manifold = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
    }
    let m: Manifold = toml::from_str("kind = \"grassmannian\"\nk = 2\nn = 4\nfield = \"complex\"").unwrap();
    assert_eq!(m, Manifold::Grassmannian { k: 2, n: 4, field: Field::Complex });
    assert!(toml::from_str::<Manifold>("kind = \"sphere\"\ndim = 2\nextra = 1").is_err());
    assert_eq!(Manifold::Sphere { dim: 2 }.to_string(), "S^2");
    assert_eq!(Manifold::SpecialOrthogonal { n: 3 }.to_string(), "SO(3)");
}

#[test]
fn point_and_tangent_constructors_validate() {
    let s2 = Manifold::Sphere { dim: 2 };
    assert!(matches!(
        s2.point_from_slice(&[1.0, 1.0, 0.0]),
        Err(Error::ConstraintViolation { .. })
    ));
    assert!(matches!(s2.point_from_slice(&[1.0, 0.0]), Err(Error::ShapeMismatch { .. })));
    let x = s2.point_from_slice(&[0.0, 0.0, 1.0]).unwrap();
    let bad = Rep::Real(DMatrix::from_column_slice(3, 1, &[0.0, 0.1, 1.0]));
    assert!(TangentVector::new(x.clone(), bad).is_err());
    let good = Rep::Real(DMatrix::from_column_slice(3, 1, &[0.3, 0.1, 0.0]));
    assert!((TangentVector::new(x, good).unwrap().norm() - 0.1f64.hypot(0.3)).abs() < 1e-15);

    let so3 = Manifold::SpecialOrthogonal { n: 3 };
    let reflection = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, -1.0]));
    assert!(ManifoldPoint::new(so3, Rep::Real(reflection)).is_err());
    assert!(ManifoldPoint::new(so3, Rep::Complex(DMatrix::identity(3, 3))).is_err());
}

#[test]
fn sample_tangent_zero_variance_and_tangency() {
    let mut rng = common::rng(6);
    let so3 = Manifold::SpecialOrthogonal { n: 3 };
    let id = ManifoldPoint::new(so3, Rep::Real(DMatrix::identity(3, 3))).unwrap();
    let z = so3.sample_tangent(&id, 0.0, &mut rng).unwrap();
    assert_eq!(z.norm(), 0.0);
    assert!(so3.sample_tangent(&id, -1.0, &mut rng).is_err());

    let s2 = Manifold::Sphere { dim: 2 };
    let north = s2.point_from_slice(&[0.0, 0.0, 1.0]).unwrap();
    for _ in 0..100 {
        let w = s2.sample_tangent(&north, 1.0, &mut rng).unwrap();
        assert!(w.rep().as_real().unwrap()[2].abs() < 1e-12);
    }
}

#[test]
fn so3_tangent_coordinates_are_standard_normal() {
    // orthonormal coordinates of the trace metric are √2 times the entries
    let mut rng = common::rng(7);
    let so3 = Manifold::SpecialOrthogonal { n: 3 };
    let id = ManifoldPoint::new(so3, Rep::Real(DMatrix::identity(3, 3))).unwrap();
    let n = 100_000;
    let mut cov = DMatrix::<f64>::zeros(3, 3);
    for _ in 0..n {
        let w = so3.sample_tangent(&id, 1.0, &mut rng).unwrap();
        let m = w.rep().as_real().unwrap();
        assert!(m.diagonal().norm() == 0.0);
        let c = nalgebra::Vector3::new(m[(0, 1)], m[(0, 2)], m[(1, 2)]) * 2f64.sqrt();
        cov += c * c.transpose();
    }
    cov /= n as f64;
    assert!((cov - DMatrix::<f64>::identity(3, 3)).amax() < 0.05);
}

#[test]
fn sample_tangent_norm_is_chi_squared() {
    let mut rng = common::rng(8);
    for m in all_manifolds() {
        let x = m.random_point(&mut rng).unwrap();
        let delta = 0.3;
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| m.sample_tangent(&x, delta, &mut rng).unwrap().norm().powi(2))
            .sum::<f64>()
            / n as f64;
        let ratio = mean / (m.intrinsic_dim() as f64 * delta);
        assert!((ratio - 1.0).abs() < 0.03, "{m}: {ratio}");
    }
}

#[test]
fn random_points_satisfy_constraints() {
    let mut rng = common::rng(9);
    for m in all_manifolds() {
        for _ in 0..20 {
            let x = m.random_point(&mut rng).unwrap();
            assert!(x.residual() <= TOL_CONSTRAINT, "{m}: {}", x.residual());
        }
    }
}

#[test]
fn exp_preserves_constraints() {
    let mut rng = common::rng(10);
    for m in all_manifolds() {
        for _ in 0..100 {
            let x = m.random_point(&mut rng).unwrap();
            let r = rng.random::<f64>();
            let w = tangent_of_norm(&m, &x, r, &mut rng);
            let y = m.exp(&w).unwrap();
            assert!(y.residual() <= 1e-10, "{m}: {}", y.residual());
        }
    }
}

#[test]
fn local_isometry() {
    let mut rng = common::rng(11);
    for m in metric_manifolds() {
        for _ in 0..1000 {
            let x = m.random_point(&mut rng).unwrap();
            let r = 0.5 * rng.random::<f64>();
            let w = tangent_of_norm(&m, &x, r, &mut rng);
            let y = m.exp(&w).unwrap();
            let d = m.distance(&x, &y).unwrap();
            assert!((d - w.norm()).abs() <= 1e-6, "{m}: {d} vs {}", w.norm());
        }
    }
}

#[test]
fn stiefel_chordal_proxy_tracks_step_length() {
    let mut rng = common::rng(12);
    let m = Manifold::Stiefel { k: 2, n: 5, field: Field::Real };
    assert!(matches!(
        m.distance(&m.random_point(&mut rng).unwrap(), &m.random_point(&mut rng).unwrap()),
        Err(Error::Unsupported { .. })
    ));
    for _ in 0..200 {
        let x = m.random_point(&mut rng).unwrap();
        let r = 0.1 * rng.random::<f64>();
        let w = tangent_of_norm(&m, &x, r, &mut rng);
        let y = m.exp(&w).unwrap();
        let d = m.ball_distance(&x, &y).unwrap();
        assert!((d - r).abs() <= r.powi(3) + 1e-12, "{d} vs {r}");
    }
}

#[test]
fn symmetry_and_triangle_inequality() {
    let mut rng = common::rng(13);
    for m in metric_manifolds() {
        for _ in 0..1000 {
            let a = m.random_point(&mut rng).unwrap();
            let b = m.random_point(&mut rng).unwrap();
            let c = m.random_point(&mut rng).unwrap();
            let ab = m.distance(&a, &b).unwrap();
            let ba = m.distance(&b, &a).unwrap();
            assert!((ab - ba).abs() <= 1e-12, "{m}");
            let bc = m.distance(&b, &c).unwrap();
            let ac = m.distance(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-9, "{m}: {ac} > {ab} + {bc}");
        }
    }
}

#[test]
fn representative_invariance() {
    let mut rng = common::rng(14);
    let gr = Manifold::Grassmannian { k: 2, n: 5, field: Field::Complex };
    let cp = Manifold::ComplexProjective { dim: 3 };
    let rp = Manifold::RealProjective { dim: 3 };
    for _ in 0..1000 {
        let a = gr.random_point(&mut rng).unwrap();
        let b = gr.random_point(&mut rng).unwrap();
        let g = DMatrix::from_fn(2, 2, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let q = polar(&g).unwrap();
        let bq = ManifoldPoint::new(gr, Rep::Complex(b.rep().as_complex().unwrap() * q)).unwrap();
        let d0 = gr.distance(&a, &b).unwrap();
        assert!((gr.distance(&a, &bq).unwrap() - d0).abs() <= 1e-12);

        let u = cp.random_point(&mut rng).unwrap();
        let v = cp.random_point(&mut rng).unwrap();
        let phase = Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI);
        let vp = ManifoldPoint::new(cp, Rep::Complex(v.rep().as_complex().unwrap() * phase)).unwrap();
        assert!((cp.distance(&u, &vp).unwrap() - cp.distance(&u, &v).unwrap()).abs() <= 1e-12);
        assert!(cp.distance(&v, &vp).unwrap() <= 1e-12);

        let s = rp.random_point(&mut rng).unwrap();
        let t = rp.random_point(&mut rng).unwrap();
        let neg = ManifoldPoint::new(rp, Rep::Real(-t.rep().as_real().unwrap())).unwrap();
        assert!((rp.distance(&s, &neg).unwrap() - rp.distance(&s, &t).unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn diameters_are_attained() {
    let s2 = Manifold::Sphere { dim: 2 };
    let a = s2.point_from_slice(&[1.0, 0.0, 0.0]).unwrap();
    let b = s2.point_from_slice(&[-1.0, 0.0, 0.0]).unwrap();
    assert!((s2.distance(&a, &b).unwrap() - s2.diameter().unwrap()).abs() < 1e-15);
    let c = Manifold::Circle { circumference: 3.0 };
    let p = c.point_from_slice(&[0.2]).unwrap();
    let q = c.point_from_slice(&[1.7]).unwrap();
    assert!((c.distance(&p, &q).unwrap() - 1.5).abs() < 1e-15);
    let r = c.point_from_slice(&[2.9]).unwrap();
    assert!((c.distance(&p, &r).unwrap() - 0.3).abs() < 1e-12);
}

#[test]
fn project_recovers_perturbed_points() {
    let mut rng = common::rng(15);
    for m in all_manifolds() {
        let x = m.random_point(&mut rng).unwrap();
        let noisy = match x.rep() {
            Rep::Real(a) => Rep::Real(a + DMatrix::from_fn(a.nrows(), a.ncols(), |_, _| 1e-7 * rng.sample::<f64, _>(StandardNormal))),
            Rep::Complex(a) => Rep::Complex(a + DMatrix::from_fn(a.nrows(), a.ncols(), |_, _| {
                Complex64::new(1e-7 * rng.sample::<f64, _>(StandardNormal), 1e-7 * rng.sample::<f64, _>(StandardNormal))
            })),
        };
        let p = m.project(&noisy).unwrap();
        assert!(p.residual() <= 1e-12, "{m}");
        assert!((p.rep().frobenius() - x.rep().frobenius()).abs() < 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_sphere_exp_stays_on_sphere(seed in any::<u64>(), r in 0.0f64..6.0, dim in 1usize..6) {
        let m = Manifold::Sphere { dim };
        let mut rng = common::rng(seed);
        let x = m.random_point(&mut rng).unwrap();
        let w = tangent_of_norm(&m, &x, r, &mut rng);
        let y = m.exp(&w).unwrap();
        prop_assert!(y.residual() <= 1e-10);
        prop_assert!(m.distance(&x, &y).unwrap() <= PI + 1e-12);
    }

    #[test]
    fn prop_group_distance_is_left_invariant(seed in any::<u64>(), n in 2usize..5) {
        let m = Manifold::SpecialOrthogonal { n };
        let mut rng = common::rng(seed);
        let a = m.random_point(&mut rng).unwrap();
        let b = m.random_point(&mut rng).unwrap();
        let g = m.random_point(&mut rng).unwrap();
        let ga = ManifoldPoint::new(m, Rep::Real(g.rep().as_real().unwrap() * a.rep().as_real().unwrap())).unwrap();
        let gb = ManifoldPoint::new(m, Rep::Real(g.rep().as_real().unwrap() * b.rep().as_real().unwrap())).unwrap();
        let d = m.distance(&a, &b).unwrap();
        prop_assert!((m.distance(&ga, &gb).unwrap() - d).abs() <= 1e-9);
    }

    #[test]
    fn prop_circle_distance_bounded(a in -50.0f64..50.0, b in -50.0f64..50.0, l in 0.5f64..20.0) {
        let m = Manifold::Circle { circumference: l };
        let p = m.project(&Rep::Real(DMatrix::from_element(1, 1, a))).unwrap();
        let q = m.project(&Rep::Real(DMatrix::from_element(1, 1, b))).unwrap();
        let d = m.distance(&p, &q).unwrap();
        prop_assert!(d >= 0.0 && d <= 0.5 * l + 1e-12);
        prop_assert!(p.residual() == 0.0);
    }
}
