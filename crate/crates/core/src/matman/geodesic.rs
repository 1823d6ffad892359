use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::linalg::{
    expm, from_complex_matrix, hermitian_part, skew_residual, to_complex_matrix, FieldScalar,
};
use crate::error::{Error, Result};

/// Tolerance on `‖X + X*‖_F` accepted by the group exponential.
pub const SKEW_TOL: f64 = 1e-10;

/// A geodesic `t ↦ γ(t)` with the factorisation of its direction cached, so
/// that evaluating many points along it costs one small product each.
#[derive(Debug, Clone)]
pub enum GeodesicSpec<T: FieldScalar> {
    /// `γ(t) = A U diag(e^{-i μ t}) U*` where `iX = U diag(μ) U*`.
    Group {
        base: DMatrix<T>,
        eigvecs: DMatrix<Complex64>,
        eigvals: DVector<f64>,
    },
    /// `γ(t) = A M(t) + Q N(t)` with `[M; N] = exp(t G) I_{2k,k}`.
    Stiefel {
        base: DMatrix<T>,
        q: DMatrix<T>,
        generator: DMatrix<T>,
    },
    /// `γ(t) = (Y V cos(Σt) + U sin(Σt)) V*` for `Δ = U Σ V*`.
    Grassmann {
        base: DMatrix<T>,
        u: DMatrix<T>,
        sigma: DVector<f64>,
        v: DMatrix<T>,
    },
}

impl<T: FieldScalar> GeodesicSpec<T> {
    /// Group geodesic from `A` in direction `A X`, `X` skew-(Hermitian).
    pub fn group(base: &DMatrix<T>, x: &DMatrix<T>) -> Result<Self> {
        let n = base.nrows();
        if !base.is_square() || x.shape() != (n, n) {
            return Err(Error::ShapeMismatch {
                manifold: "matrix group".into(),
                reason: format!("point {:?} and direction {:?}", base.shape(), x.shape()),
            });
        }
        let residual = skew_residual(x);
        if !(residual <= SKEW_TOL) {
            return Err(Error::ConstraintViolation {
                what: "skew-Hermitian tangent coordinate",
                residual,
                tol: SKEW_TOL,
            });
        }
        let h = to_complex_matrix(x) * Complex64::i();
        let eig = hermitian_part(&h).symmetric_eigen();
        Ok(GeodesicSpec::Group {
            base: base.clone(),
            eigvecs: eig.eigenvectors,
            eigvals: eig.eigenvalues,
        })
    }

    /// Stiefel geodesic for the canonical metric from `A` in direction `Δ`.
    pub fn stiefel(base: &DMatrix<T>, delta: &DMatrix<T>) -> Result<Self> {
        let (n, k) = base.shape();
        if delta.shape() != (n, k) || k > n {
            return Err(Error::ShapeMismatch {
                manifold: "Stiefel".into(),
                reason: format!("point {:?} and direction {:?}", base.shape(), delta.shape()),
            });
        }
        let a_star_delta = base.adjoint() * delta;
        let perp = delta - base * &a_star_delta;
        let qr = perp.qr();
        let q = qr.q();
        let r = qr.r();
        let mut generator = DMatrix::<T>::zeros(2 * k, 2 * k);
        generator.view_mut((0, 0), (k, k)).copy_from(&a_star_delta);
        generator.view_mut((0, k), (k, k)).copy_from(&(-r.adjoint()));
        generator.view_mut((k, 0), (k, k)).copy_from(&r);
        Ok(GeodesicSpec::Stiefel {
            base: base.clone(),
            q,
            generator,
        })
    }

    /// Grassmann geodesic from the representative `Y` in horizontal direction `Δ`.
    pub fn grassmann(base: &DMatrix<T>, delta: &DMatrix<T>) -> Result<Self> {
        let (n, k) = base.shape();
        if delta.shape() != (n, k) || k > n {
            return Err(Error::ShapeMismatch {
                manifold: "Grassmannian".into(),
                reason: format!("point {:?} and direction {:?}", base.shape(), delta.shape()),
            });
        }
        let svd = delta.clone().svd(true, true);
        let u = svd.u.expect("u requested");
        let v = svd.v_t.expect("v_t requested").adjoint();
        Ok(GeodesicSpec::Grassmann {
            base: base.clone(),
            u,
            sigma: svd.singular_values,
            v,
        })
    }

    pub fn base(&self) -> &DMatrix<T> {
        match self {
            GeodesicSpec::Group { base, .. }
            | GeodesicSpec::Stiefel { base, .. }
            | GeodesicSpec::Grassmann { base, .. } => base,
        }
    }

    /// `γ(t)`.
    pub fn point_at(&self, t: f64) -> DMatrix<T> {
        match self {
            GeodesicSpec::Group {
                base,
                eigvecs,
                eigvals,
            } => {
                let phases =
                    DVector::from_iterator(eigvals.len(), eigvals.iter().map(|&m| {
                        Complex64::from_polar(1.0, -m * t)
                    }));
                let mut scaled = eigvecs.clone();
                for (j, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= phases[j];
                }
                let e = scaled * eigvecs.adjoint();
                base * from_complex_matrix::<T>(&e)
            }
            GeodesicSpec::Stiefel { base, q, generator } => {
                let k = base.ncols();
                let e = expm(&(generator * T::from_real(t)));
                let m = e.view((0, 0), (k, k));
                let nn = e.view((k, 0), (k, k));
                base * m + q * nn
            }
            GeodesicSpec::Grassmann {
                base,
                u,
                sigma,
                v,
            } => {
                let k = base.ncols();
                let mut yv = base * v;
                let mut us = u.clone();
                for j in 0..k {
                    let s = sigma[j] * t;
                    let mut c = yv.column_mut(j);
                    c *= T::from_real(s.cos());
                    let mut c = us.column_mut(j);
                    c *= T::from_real(s.sin());
                }
                yv += us;
                yv * v.adjoint()
            }
        }
    }

    /// The initial velocity, rebuilt from the cached factors.
    pub fn direction(&self) -> DMatrix<T> {
        match self {
            GeodesicSpec::Group {
                base,
                eigvecs,
                eigvals,
            } => {
                // A X with X = -i U diag(μ) U*
                let mut scaled = eigvecs.clone();
                for (j, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= Complex64::new(0.0, -eigvals[j]);
                }
                base * from_complex_matrix::<T>(&(scaled * eigvecs.adjoint()))
            }
            GeodesicSpec::Stiefel { base, q, generator } => {
                let k = base.ncols();
                base * generator.view((0, 0), (k, k)) + q * generator.view((k, 0), (k, k))
            }
            GeodesicSpec::Grassmann { u, sigma, v, .. } => {
                let mut us = u.clone();
                for (j, mut col) in us.column_iter_mut().enumerate() {
                    col *= T::from_real(sigma[j]);
                }
                us * v.adjoint()
            }
        }
    }
}
