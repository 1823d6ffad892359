//! Manifolds, points and tangent vectors, together with the closed-form
//! kernels and ball/strip volumes that serve as oracles for the estimators.
//!
//! Every manifold is represented by dense matrices: column vectors for
//! Euclidean space, spheres and projective spaces, `n × k` frames for Stiefel
//! and Grassmann manifolds, `n × n` matrices for the groups and a `1 × 1`
//! angle in `[0, L)` for the circle. Group tangent vectors are stored as their
//! Lie-algebra coordinate `X` (the tangent vector at `A` is `A X`).

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta, beta_reg};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::matman::{
    dist_grassmann, dist_group, dist_projective, dist_sphere, exp_group, exp_grassmann,
    exp_sphere, exp_stiefel, frobenius, orthonormality_residual, polar, skew_residual,
    FieldScalar,
};
use crate::matman::linalg::gaussian_matrix;

/// Constraint tolerance accepted when a point is constructed from user data.
pub const TOL_CONSTRAINT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    fn symbol(self) -> &'static str {
        match self {
            Field::Real => "R",
            Field::Complex => "C",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Manifold {
    /// `R^dim`.
    Euclidean { dim: usize },
    /// `R / L Z`.
    Circle { circumference: f64 },
    /// Unit sphere `S^dim ⊂ R^{dim+1}`.
    Sphere { dim: usize },
    SpecialOrthogonal { n: usize },
    SpecialUnitary { n: usize },
    Unitary { n: usize },
    /// Orthonormal `k`-frames in `F^n`.
    Stiefel { k: usize, n: usize, field: Field },
    /// `k`-dimensional subspaces of `F^n`.
    Grassmannian { k: usize, n: usize, field: Field },
    /// `P^dim_R`, lines in `R^{dim+1}`.
    RealProjective { dim: usize },
    /// `P^dim_C`, complex lines in `C^{dim+1}`.
    ComplexProjective { dim: usize },
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Manifold::Euclidean { dim } => write!(f, "R^{dim}"),
            Manifold::Circle { circumference } => write!(f, "S^1(L={circumference})"),
            Manifold::Sphere { dim } => write!(f, "S^{dim}"),
            Manifold::SpecialOrthogonal { n } => write!(f, "SO({n})"),
            Manifold::SpecialUnitary { n } => write!(f, "SU({n})"),
            Manifold::Unitary { n } => write!(f, "U({n})"),
            Manifold::Stiefel { k, n, field } => write!(f, "V_{}({k},{n})", field.symbol()),
            Manifold::Grassmannian { k, n, field } => {
                write!(f, "Gr_{}({k},{n})", field.symbol())
            }
            Manifold::RealProjective { dim } => write!(f, "P^{dim}_R"),
            Manifold::ComplexProjective { dim } => write!(f, "P^{dim}_C"),
        }
    }
}

/// Dense matrix representative over R or C.
#[derive(Debug, Clone, PartialEq)]
pub enum Rep {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl Rep {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Rep::Real(m) => m.shape(),
            Rep::Complex(m) => m.shape(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Rep::Complex(_))
    }

    pub fn as_real(&self) -> Option<&DMatrix<f64>> {
        match self {
            Rep::Real(m) => Some(m),
            Rep::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&DMatrix<Complex64>> {
        match self {
            Rep::Complex(m) => Some(m),
            Rep::Real(_) => None,
        }
    }

    pub fn frobenius(&self) -> f64 {
        match self {
            Rep::Real(m) => frobenius(m),
            Rep::Complex(m) => frobenius(m),
        }
    }

    /// Column-major entries; complex entries contribute `re, im` pairs.
    pub fn flatten(&self) -> Vec<f64> {
        match self {
            Rep::Real(m) => m.as_slice().to_vec(),
            Rep::Complex(m) => m.iter().flat_map(|c| [c.re, c.im]).collect(),
        }
    }
}

/// Scalars that can be packed into a [`Rep`].
pub trait RepScalar: FieldScalar {
    fn wrap(m: DMatrix<Self>) -> Rep;
    fn view(rep: &Rep) -> Option<&DMatrix<Self>>;
}

impl RepScalar for f64 {
    fn wrap(m: DMatrix<Self>) -> Rep {
        Rep::Real(m)
    }

    fn view(rep: &Rep) -> Option<&DMatrix<Self>> {
        rep.as_real()
    }
}

impl RepScalar for Complex64 {
    fn wrap(m: DMatrix<Self>) -> Rep {
        Rep::Complex(m)
    }

    fn view(rep: &Rep) -> Option<&DMatrix<Self>> {
        rep.as_complex()
    }
}

/// A point of a manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint {
    manifold: Manifold,
    rep: Rep,
}

/// A tangent vector together with its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: ManifoldPoint,
    rep: Rep,
}

impl ManifoldPoint {
    /// Validates shape, field and constraint residual (≤ [`TOL_CONSTRAINT`]).
    pub fn new(manifold: Manifold, rep: Rep) -> Result<Self> {
        manifold.validate()?;
        let residual = manifold.constraint_residual(&rep)?;
        if !(residual <= TOL_CONSTRAINT) {
            return Err(Error::ConstraintViolation {
                what: "manifold constraint",
                residual,
                tol: TOL_CONSTRAINT,
            });
        }
        Ok(Self { manifold, rep })
    }

    pub(crate) fn unchecked(manifold: Manifold, rep: Rep) -> Self {
        Self { manifold, rep }
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn rep(&self) -> &Rep {
        &self.rep
    }

    pub fn into_rep(self) -> Rep {
        self.rep
    }

    pub fn residual(&self) -> f64 {
        self.manifold
            .constraint_residual(&self.rep)
            .unwrap_or(f64::INFINITY)
    }

    pub fn distance(&self, other: &ManifoldPoint) -> Result<f64> {
        self.manifold.distance(self, other)
    }
}

impl TangentVector {
    /// Validates shape, field and tangency at `base`.
    pub fn new(base: ManifoldPoint, rep: Rep) -> Result<Self> {
        let residual = base.manifold.tangent_residual(&base.rep, &rep)?;
        let tol = TOL_CONSTRAINT * (1.0 + rep.frobenius());
        if !(residual <= tol) {
            return Err(Error::ConstraintViolation {
                what: "tangent space membership",
                residual,
                tol,
            });
        }
        Ok(Self { base, rep })
    }

    pub(crate) fn unchecked(base: ManifoldPoint, rep: Rep) -> Self {
        Self { base, rep }
    }

    pub fn base(&self) -> &ManifoldPoint {
        &self.base
    }

    pub fn rep(&self) -> &Rep {
        &self.rep
    }

    /// Norm in the manifold's metric.
    pub fn norm(&self) -> f64 {
        self.base.manifold.tangent_norm(&self.base.rep, &self.rep)
    }

    pub fn scaled(&self, s: f64) -> TangentVector {
        let rep = match &self.rep {
            Rep::Real(m) => Rep::Real(m * s),
            Rep::Complex(m) => Rep::Complex(m * Complex64::new(s, 0.0)),
        };
        TangentVector {
            base: self.base.clone(),
            rep,
        }
    }
}

impl Manifold {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidManifold(format!("{self}: {msg}")));
        match *self {
            Manifold::Euclidean { dim } if dim == 0 => bad("dimension must be at least 1"),
            Manifold::Circle { circumference } if !(circumference > 0.0 && circumference.is_finite()) => {
                bad("circumference must be positive and finite")
            }
            Manifold::Sphere { dim } | Manifold::RealProjective { dim } | Manifold::ComplexProjective { dim }
                if dim == 0 =>
            {
                bad("dimension must be at least 1")
            }
            Manifold::SpecialOrthogonal { n } | Manifold::SpecialUnitary { n } if n < 2 => {
                bad("n must be at least 2")
            }
            Manifold::Unitary { n } if n == 0 => bad("n must be at least 1"),
            Manifold::Stiefel { k, n, .. } if k == 0 || k > n => bad("need 1 <= k <= n"),
            Manifold::Grassmannian { k, n, .. } if k == 0 || k >= n => bad("need 1 <= k < n"),
            _ => Ok(()),
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match *self {
            Manifold::Euclidean { dim } => dim,
            Manifold::Circle { .. } => 1,
            Manifold::Sphere { dim } | Manifold::RealProjective { dim } => dim,
            Manifold::ComplexProjective { dim } => 2 * dim,
            Manifold::SpecialOrthogonal { n } => n * (n - 1) / 2,
            Manifold::SpecialUnitary { n } => n * n - 1,
            Manifold::Unitary { n } => n * n,
            Manifold::Stiefel { k, n, field: Field::Real } => n * k - k * (k + 1) / 2,
            Manifold::Stiefel { k, n, field: Field::Complex } => 2 * n * k - k * k,
            Manifold::Grassmannian { k, n, field: Field::Real } => k * (n - k),
            Manifold::Grassmannian { k, n, field: Field::Complex } => 2 * k * (n - k),
        }
    }

    /// Whether the heat kernel depends on the two points only through their distance.
    pub fn is_distance_kernel(&self) -> bool {
        matches!(
            self,
            Manifold::Euclidean { .. }
                | Manifold::Circle { .. }
                | Manifold::Sphere { .. }
                | Manifold::RealProjective { .. }
                | Manifold::ComplexProjective { .. }
        )
    }

    pub fn field(&self) -> Field {
        match *self {
            Manifold::SpecialUnitary { .. }
            | Manifold::Unitary { .. }
            | Manifold::ComplexProjective { .. } => Field::Complex,
            Manifold::Stiefel { field, .. } | Manifold::Grassmannian { field, .. } => field,
            _ => Field::Real,
        }
    }

    /// Shape of the matrix representing a point.
    pub fn rep_shape(&self) -> (usize, usize) {
        match *self {
            Manifold::Euclidean { dim } => (dim, 1),
            Manifold::Circle { .. } => (1, 1),
            Manifold::Sphere { dim }
            | Manifold::RealProjective { dim }
            | Manifold::ComplexProjective { dim } => (dim + 1, 1),
            Manifold::SpecialOrthogonal { n }
            | Manifold::SpecialUnitary { n }
            | Manifold::Unitary { n } => (n, n),
            Manifold::Stiefel { k, n, .. } | Manifold::Grassmannian { k, n, .. } => (n, k),
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, Manifold::Euclidean { .. })
    }

    /// Largest geodesic distance between two points, where known in closed form.
    pub fn diameter(&self) -> Option<f64> {
        match *self {
            Manifold::Circle { circumference } => Some(0.5 * circumference),
            Manifold::Sphere { .. } => Some(PI),
            Manifold::RealProjective { .. } | Manifold::ComplexProjective { .. } => Some(0.5 * PI),
            Manifold::SpecialOrthogonal { n } => Some(PI * ((2 * (n / 2)) as f64).sqrt()),
            Manifold::Unitary { n } => Some(PI * (n as f64).sqrt()),
            Manifold::Grassmannian { k, .. } => Some(0.5 * PI * (k as f64).sqrt()),
            _ => None,
        }
    }

    /// Total Riemannian volume, where known in closed form.
    pub fn volume(&self) -> Option<f64> {
        match *self {
            Manifold::Circle { circumference } => Some(circumference),
            Manifold::Sphere { dim } => Some(sphere_area(dim)),
            Manifold::RealProjective { dim } => Some(0.5 * sphere_area(dim)),
            Manifold::ComplexProjective { dim } => Some(PI.powi(dim as i32) / gamma(dim as f64 + 1.0)),
            _ => None,
        }
    }

    /// Volume of a geodesic ball of radius `eps`.
    ///
    /// Exact for the distance-kernel manifolds; elsewhere the Euclidean
    /// leading term in the intrinsic dimension (relative error `O(eps²)`).
    pub fn ball_volume(&self, eps: f64) -> f64 {
        let eps = eps.max(0.0);
        match *self {
            Manifold::Euclidean { dim } => euclidean_ball_volume(dim, eps),
            Manifold::Circle { circumference } => 2.0 * eps.min(0.5 * circumference),
            Manifold::Sphere { dim } => sphere_cap_volume(dim, eps),
            Manifold::RealProjective { dim } => sphere_cap_volume(dim, eps.min(0.5 * PI)),
            Manifold::ComplexProjective { dim } => cp_ball_volume(dim, eps),
            _ => euclidean_ball_volume(self.intrinsic_dim(), eps),
        }
    }

    /// Volume of the strip `{z : |d(x, z) − d0| < eps}`.
    pub fn strip_volume(&self, d0: f64, eps: f64) -> Result<f64> {
        if !self.is_distance_kernel() {
            return Err(Error::Unsupported {
                manifold: self.to_string(),
                what: "strip volume (kernel is not a function of distance)".into(),
            });
        }
        if !(eps > 0.0) || !(d0 >= 0.0) {
            return Err(Error::Domain(format!("strip needs eps > 0 and d0 >= 0, got eps={eps}, d0={d0}")));
        }
        let inner = if d0 > eps { self.ball_volume(d0 - eps) } else { 0.0 };
        Ok(self.ball_volume(d0 + eps) - inner)
    }

    fn check_rep(&self, rep: &Rep) -> Result<()> {
        if rep.shape() != self.rep_shape() {
            return Err(Error::ShapeMismatch {
                manifold: self.to_string(),
                reason: format!("expected {:?}, got {:?}", self.rep_shape(), rep.shape()),
            });
        }
        if rep.is_complex() != (self.field() == Field::Complex) {
            return Err(Error::ShapeMismatch {
                manifold: self.to_string(),
                reason: format!("expected a {:?} representative", self.field()),
            });
        }
        Ok(())
    }

    pub fn constraint_residual(&self, rep: &Rep) -> Result<f64> {
        self.check_rep(rep)?;
        Ok(match rep {
            Rep::Real(m) => constraint_residual_impl(self, m),
            Rep::Complex(m) => constraint_residual_impl(self, m),
        })
    }

    pub fn tangent_residual(&self, base: &Rep, v: &Rep) -> Result<f64> {
        self.check_rep(base)?;
        self.check_rep(v)?;
        Ok(match (base, v) {
            (Rep::Real(a), Rep::Real(w)) => tangent_residual_impl(self, a, w),
            (Rep::Complex(a), Rep::Complex(w)) => tangent_residual_impl(self, a, w),
            _ => unreachable!("field checked above"),
        })
    }

    pub(crate) fn tangent_norm(&self, base: &Rep, v: &Rep) -> f64 {
        match (base, v) {
            (Rep::Real(a), Rep::Real(w)) => tangent_norm_impl(self, a, w),
            (Rep::Complex(a), Rep::Complex(w)) => tangent_norm_impl(self, a, w),
            _ => f64::NAN,
        }
    }

    /// Nearest point on the manifold to a slightly perturbed representative.
    pub fn project(&self, raw: &Rep) -> Result<ManifoldPoint> {
        self.validate()?;
        self.check_rep(raw)?;
        let rep = match raw {
            Rep::Real(m) => Rep::Real(project_impl(self, m)?),
            Rep::Complex(m) => Rep::Complex(project_impl(self, m)?),
        };
        Ok(ManifoldPoint::unchecked(*self, rep))
    }

    /// A random point: Haar/uniform on compact manifolds, standard normal on `R^d`.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ManifoldPoint> {
        self.validate()?;
        let rep = match self.field() {
            Field::Real => Rep::Real(random_point_impl::<f64, R>(self, rng)?),
            Field::Complex => Rep::Complex(random_point_impl::<Complex64, R>(self, rng)?),
        };
        Ok(ManifoldPoint::unchecked(*self, rep))
    }

    /// Isotropic Gaussian tangent vector at `x`: i.i.d. `N(0, delta)` coordinates
    /// in an orthonormal basis of the tangent space.
    pub fn sample_tangent<R: Rng + ?Sized>(
        &self,
        x: &ManifoldPoint,
        delta: f64,
        rng: &mut R,
    ) -> Result<TangentVector> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::Domain(format!("step variance must be >= 0, got {delta}")));
        }
        self.check_rep(&x.rep)?;
        let rep = match &x.rep {
            Rep::Real(a) => Rep::Real(sample_tangent_impl(self, a, delta, rng)),
            Rep::Complex(a) => Rep::Complex(sample_tangent_impl(self, a, delta, rng)),
        };
        Ok(TangentVector::unchecked(x.clone(), rep))
    }

    /// Exponential map `exp_x(v)` with `x = v.base()`.
    pub fn exp(&self, v: &TangentVector) -> Result<ManifoldPoint> {
        let x = &v.base;
        self.check_rep(&x.rep)?;
        self.check_rep(&v.rep)?;
        let rep = match (&x.rep, &v.rep) {
            (Rep::Real(a), Rep::Real(w)) => Rep::Real(exp_impl(self, a, w)?),
            (Rep::Complex(a), Rep::Complex(w)) => Rep::Complex(exp_impl(self, a, w)?),
            _ => unreachable!("field checked above"),
        };
        Ok(ManifoldPoint::unchecked(*self, rep))
    }

    /// Geodesic distance.
    pub fn distance(&self, a: &ManifoldPoint, b: &ManifoldPoint) -> Result<f64> {
        self.check_rep(&a.rep)?;
        self.check_rep(&b.rep)?;
        match (&a.rep, &b.rep) {
            (Rep::Real(x), Rep::Real(y)) => distance_impl(self, x, y),
            (Rep::Complex(x), Rep::Complex(y)) => distance_impl(self, x, y),
            _ => unreachable!("field checked above"),
        }
    }

    /// Distance used for small-ball membership tests.
    ///
    /// Equals [`Manifold::distance`] except on Stiefel manifolds with
    /// `1 < k < n`, which have no closed-form distance: there the chordal
    /// proxy `sqrt(‖(I − YY*)(Z − Y)‖² + ½‖Y*(Z − Y)‖²)` is used, which matches
    /// the canonical distance to third order.
    pub fn ball_distance(&self, a: &ManifoldPoint, b: &ManifoldPoint) -> Result<f64> {
        match (*self, &a.rep, &b.rep) {
            (Manifold::Stiefel { k, n, .. }, Rep::Real(y), Rep::Real(z)) if k > 1 && k < n => {
                Ok(stiefel_chordal(y, z))
            }
            (Manifold::Stiefel { k, n, .. }, Rep::Complex(y), Rep::Complex(z)) if k > 1 && k < n => {
                Ok(stiefel_chordal(y, z))
            }
            _ => self.distance(a, b),
        }
    }

    /// One random-walk step from `x`: a Gaussian tangent vector of variance
    /// `delta` pushed through the exponential map.
    pub(crate) fn step<R: Rng + ?Sized>(&self, x: &Rep, delta: f64, rng: &mut R) -> Result<Rep> {
        match x {
            Rep::Real(a) => {
                let w = sample_tangent_impl(self, a, delta, rng);
                Ok(Rep::Real(exp_impl(self, a, &w)?))
            }
            Rep::Complex(a) => {
                let w = sample_tangent_impl(self, a, delta, rng);
                Ok(Rep::Complex(exp_impl(self, a, &w)?))
            }
        }
    }

    /// Convenience constructor for real column-vector manifolds and the circle.
    pub fn point_from_slice(&self, coords: &[f64]) -> Result<ManifoldPoint> {
        let (r, c) = self.rep_shape();
        if self.field() != Field::Real || c != 1 || coords.len() != r {
            return Err(Error::ShapeMismatch {
                manifold: self.to_string(),
                reason: format!("cannot build a point from {} real coordinates", coords.len()),
            });
        }
        ManifoldPoint::new(*self, Rep::Real(DMatrix::from_column_slice(r, 1, coords)))
    }
}

fn stiefel_chordal<T: FieldScalar>(y: &DMatrix<T>, z: &DMatrix<T>) -> f64 {
    let d = z - y;
    let ytd = y.adjoint() * &d;
    let perp = &d - y * &ytd;
    let p = frobenius(&perp);
    let t = frobenius(&ytd);
    (p * p + 0.5 * t * t).sqrt()
}

fn vec_norm<T: FieldScalar>(v: &DMatrix<T>) -> f64 {
    frobenius(v)
}

fn constraint_residual_impl<T: FieldScalar>(m: &Manifold, a: &DMatrix<T>) -> f64 {
    if a.iter().any(|v| !v.modulus().is_finite()) {
        return f64::INFINITY;
    }
    match *m {
        Manifold::Euclidean { .. } => 0.0,
        Manifold::Circle { circumference } => {
            let th = a[0].real();
            if th < 0.0 {
                -th
            } else if th >= circumference {
                th - circumference + f64::EPSILON
            } else {
                0.0
            }
        }
        Manifold::Sphere { .. } | Manifold::RealProjective { .. } | Manifold::ComplexProjective { .. } => {
            (vec_norm(a) - 1.0).abs()
        }
        Manifold::SpecialOrthogonal { .. } | Manifold::SpecialUnitary { .. } => {
            let det = a.determinant().to_complex();
            orthonormality_residual(a) + (det - Complex64::new(1.0, 0.0)).norm()
        }
        Manifold::Unitary { .. } | Manifold::Stiefel { .. } | Manifold::Grassmannian { .. } => {
            orthonormality_residual(a)
        }
    }
}

fn tangent_residual_impl<T: FieldScalar>(m: &Manifold, a: &DMatrix<T>, w: &DMatrix<T>) -> f64 {
    match *m {
        Manifold::Euclidean { .. } | Manifold::Circle { .. } => 0.0,
        Manifold::Sphere { .. } | Manifold::RealProjective { .. } | Manifold::ComplexProjective { .. } => {
            (a.adjoint() * w)[0].modulus()
        }
        Manifold::SpecialOrthogonal { .. } | Manifold::Unitary { .. } => skew_residual(w),
        Manifold::SpecialUnitary { .. } => skew_residual(w) + w.trace().modulus(),
        Manifold::Stiefel { .. } => {
            let s = a.adjoint() * w;
            frobenius(&(&s + s.adjoint()))
        }
        Manifold::Grassmannian { .. } => frobenius(&(a.adjoint() * w)),
    }
}

fn tangent_norm_impl<T: FieldScalar>(m: &Manifold, a: &DMatrix<T>, w: &DMatrix<T>) -> f64 {
    match *m {
        Manifold::Stiefel { .. } => {
            let total = frobenius(w);
            let along = frobenius(&(a.adjoint() * w));
            (total * total - 0.5 * along * along).max(0.0).sqrt()
        }
        _ => frobenius(w),
    }
}

fn project_impl<T: FieldScalar>(m: &Manifold, raw: &DMatrix<T>) -> Result<DMatrix<T>> {
    if raw.iter().any(|v| !v.modulus().is_finite()) {
        return Err(Error::Projection("non-finite entries".into()));
    }
    match *m {
        Manifold::Euclidean { .. } => Ok(raw.clone()),
        Manifold::Circle { circumference } => Ok(DMatrix::from_element(
            1,
            1,
            T::from_real(wrap_angle(raw[0].real(), circumference)),
        )),
        Manifold::Sphere { .. } | Manifold::RealProjective { .. } | Manifold::ComplexProjective { .. } => {
            let r = vec_norm(raw);
            if !(r > 1e-8) {
                return Err(Error::Projection("vector has (near) zero norm".into()));
            }
            Ok(raw * T::from_real(1.0 / r))
        }
        Manifold::SpecialOrthogonal { .. } => {
            let q = polar(raw)?;
            if q.determinant().real() < 0.0 {
                return Err(Error::Projection(
                    "matrix is closer to the reflection component O(n) \\ SO(n)".into(),
                ));
            }
            Ok(q)
        }
        Manifold::SpecialUnitary { n } => {
            let q = polar(raw)?;
            Ok(remove_det_phase(q, n))
        }
        Manifold::Unitary { .. } | Manifold::Stiefel { .. } | Manifold::Grassmannian { .. } => polar(raw),
    }
}

/// `A / det(A)^{1/n}` with the principal root, mapping U(n) onto SU(n).
fn remove_det_phase<T: FieldScalar>(q: DMatrix<T>, n: usize) -> DMatrix<T> {
    let det = q.determinant().to_complex();
    let root = Complex64::from_polar(1.0, det.arg() / n as f64);
    q * T::from_complex(root.conj())
}

pub(crate) fn wrap_angle(theta: f64, circumference: f64) -> f64 {
    let r = theta.rem_euclid(circumference);
    if r >= circumference {
        0.0
    } else {
        r
    }
}

fn haar_frame<T: FieldScalar, R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<DMatrix<T>> {
    let g: DMatrix<T> = gaussian_matrix(n, k, 1.0, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        let rjj = r[(j, j)];
        let modulus = rjj.modulus();
        if !(modulus > 0.0) {
            return Err(Error::Numerical("degenerate Gaussian draw".into()));
        }
        let phase = rjj * T::from_real(1.0 / modulus);
        let mut col = q.column_mut(j);
        col *= phase;
    }
    Ok(q)
}

fn random_point_impl<T: FieldScalar, R: Rng + ?Sized>(m: &Manifold, rng: &mut R) -> Result<DMatrix<T>> {
    match *m {
        Manifold::Euclidean { dim } => Ok(gaussian_matrix(dim, 1, 1.0, rng)),
        Manifold::Circle { circumference } => Ok(DMatrix::from_element(
            1,
            1,
            T::from_real(wrap_angle(rng.random::<f64>() * circumference, circumference)),
        )),
        Manifold::Sphere { .. } | Manifold::RealProjective { .. } | Manifold::ComplexProjective { .. } => {
            let (r, _) = m.rep_shape();
            project_impl(m, &gaussian_matrix::<T, R>(r, 1, 1.0, rng))
        }
        Manifold::SpecialOrthogonal { n } => {
            let mut q = haar_frame::<T, R>(n, n, rng)?;
            if q.determinant().real() < 0.0 {
                let mut c = q.column_mut(0);
                c *= T::from_real(-1.0);
            }
            Ok(q)
        }
        Manifold::SpecialUnitary { n } => Ok(remove_det_phase(haar_frame::<T, R>(n, n, rng)?, n)),
        Manifold::Unitary { n } => haar_frame(n, n, rng),
        Manifold::Stiefel { k, n, .. } | Manifold::Grassmannian { k, n, .. } => haar_frame(n, k, rng),
    }
}

/// Skew-(Hermitian) matrix with i.i.d. `N(0, delta)` coordinates in the
/// orthonormal basis of the trace metric `tr(X* Y)`.
fn skew_gaussian<T: FieldScalar, R: Rng + ?Sized>(
    n: usize,
    delta: f64,
    with_diagonal: bool,
    traceless: bool,
    rng: &mut R,
) -> DMatrix<T> {
    let mut x = DMatrix::<T>::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let v = T::gaussian(rng, 0.5 * delta);
            x[(i, j)] = v;
            x[(j, i)] = -v.conjugate();
        }
    }
    if with_diagonal {
        let mut diag: Vec<f64> = (0..n)
            .map(|_| f64::gaussian(rng, delta))
            .collect();
        if traceless {
            let mean = diag.iter().sum::<f64>() / n as f64;
            diag.iter_mut().for_each(|d| *d -= mean);
        }
        for (i, d) in diag.into_iter().enumerate() {
            x[(i, i)] = T::from_parts(0.0, d);
        }
    }
    x
}

fn sample_tangent_impl<T: FieldScalar, R: Rng + ?Sized>(
    m: &Manifold,
    a: &DMatrix<T>,
    delta: f64,
    rng: &mut R,
) -> DMatrix<T> {
    let (rows, cols) = m.rep_shape();
    match *m {
        Manifold::Euclidean { .. } | Manifold::Circle { .. } => gaussian_matrix(rows, cols, delta, rng),
        Manifold::Sphere { .. }
        | Manifold::RealProjective { .. }
        | Manifold::ComplexProjective { .. }
        | Manifold::Grassmannian { .. } => {
            // projecting an ambient Gaussian onto the horizontal space gives the
            // isotropic law on it
            let g: DMatrix<T> = gaussian_matrix(rows, cols, delta, rng);
            let along = a.adjoint() * &g;
            g - a * along
        }
        Manifold::SpecialOrthogonal { n } => skew_gaussian(n, delta, false, false, rng),
        Manifold::Unitary { n } => skew_gaussian(n, delta, true, false, rng),
        Manifold::SpecialUnitary { n } => skew_gaussian(n, delta, true, true, rng),
        Manifold::Stiefel { k, .. } => {
            // canonical metric: the A-component Δ₁ = A*Δ ∈ o(k) or u(k) carries
            // weight ½, so its orthonormal coordinates have twice the entry variance
            let omega: DMatrix<T> = skew_gaussian(k, 2.0 * delta, T::IS_COMPLEX, false, rng);
            let g: DMatrix<T> = gaussian_matrix(rows, cols, delta, rng);
            let along = a.adjoint() * &g;
            a * omega + g - a * along
        }
    }
}

fn exp_impl<T: FieldScalar>(m: &Manifold, a: &DMatrix<T>, w: &DMatrix<T>) -> Result<DMatrix<T>> {
    match *m {
        Manifold::Euclidean { .. } => Ok(a + w),
        Manifold::Circle { circumference } => Ok(DMatrix::from_element(
            1,
            1,
            T::from_real(wrap_angle(a[0].real() + w[0].real(), circumference)),
        )),
        Manifold::Sphere { .. } | Manifold::RealProjective { .. } | Manifold::ComplexProjective { .. } => {
            Ok(exp_sphere(a, w))
        }
        Manifold::SpecialOrthogonal { .. } | Manifold::SpecialUnitary { .. } | Manifold::Unitary { .. } => {
            exp_group(a, w)
        }
        Manifold::Stiefel { .. } => exp_stiefel(a, w),
        Manifold::Grassmannian { .. } => exp_grassmann(a, w),
    }
}

fn distance_impl<T: FieldScalar>(m: &Manifold, a: &DMatrix<T>, b: &DMatrix<T>) -> Result<f64> {
    match *m {
        Manifold::Euclidean { .. } => Ok(frobenius(&(a - b))),
        Manifold::Circle { circumference } => {
            let d = (a[0].real() - b[0].real()).rem_euclid(circumference);
            Ok(d.min(circumference - d))
        }
        Manifold::Sphere { .. } => Ok(dist_sphere(a, b)),
        Manifold::RealProjective { .. } | Manifold::ComplexProjective { .. } => Ok(dist_projective(a, b)),
        Manifold::SpecialOrthogonal { .. } | Manifold::SpecialUnitary { .. } | Manifold::Unitary { .. } => {
            Ok(dist_group(a, b)?.distance)
        }
        Manifold::Stiefel { k, n, .. } => {
            if k == 1 {
                Ok(dist_sphere(a, b))
            } else if k == n {
                Ok(dist_group(a, b)?.distance / std::f64::consts::SQRT_2)
            } else {
                Err(Error::Unsupported {
                    manifold: m.to_string(),
                    what: "closed-form geodesic distance (use ball_distance)".into(),
                })
            }
        }
        Manifold::Grassmannian { .. } => dist_grassmann(a, b),
    }
}

/// `(2πt)^{-dim/2} exp(-d²/(2t))`.
pub fn euclidean_heat_kernel(d: f64, t: f64, dim: usize) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("diffusion time must be positive, got {t}")));
    }
    if dim == 0 || !(d >= 0.0) {
        return Err(Error::Domain(format!("need dim >= 1 and d >= 0, got dim={dim}, d={d}")));
    }
    Ok((2.0 * PI * t).powf(-0.5 * dim as f64) * (-d * d / (2.0 * t)).exp())
}

/// Heat kernel of the circle `R / L Z` by summing images of the line kernel.
pub fn circle_heat_kernel(d: f64, t: f64, circumference: f64) -> Result<f64> {
    if !(circumference > 0.0) || !circumference.is_finite() {
        return Err(Error::Domain(format!("circumference must be positive, got {circumference}")));
    }
    if !(t > 0.0) || !t.is_finite() || !(d >= 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("need t > 0 and d >= 0, got t={t}, d={d}")));
    }
    // images beyond |j| L > d + sqrt(2t ln(1e16 ...)) contribute below 1e-16 each
    let reach = d + (2.0 * t * (40.0 + 0.5 * (1.0 + 1.0 / t).ln())).sqrt();
    let j_max = (reach / circumference).ceil() as i64 + 1;
    let norm = (2.0 * PI * t).sqrt();
    let mut sum = 0.0;
    for j in -j_max..=j_max {
        let x = d + j as f64 * circumference;
        sum += (-x * x / (2.0 * t)).exp();
    }
    Ok(sum / norm)
}

/// Volume of the Euclidean ball of radius `r` in `R^dim`.
pub fn euclidean_ball_volume(dim: usize, r: f64) -> f64 {
    let m = dim as f64;
    (0.5 * m * PI.ln() - ln_gamma(0.5 * m + 1.0)).exp() * r.powi(dim as i32)
}

/// Surface area of the unit sphere `S^dim`.
pub fn sphere_area(dim: usize) -> f64 {
    let m = dim as f64 + 1.0;
    2.0 * PI.powf(0.5 * m) / gamma(0.5 * m)
}

/// `∫_0^r sin^{p}(s) ds` for `0 ≤ r ≤ π`, via the regularized incomplete beta function.
pub fn sine_power_integral(p: usize, r: f64) -> f64 {
    let r = r.clamp(0.0, PI);
    let a = 0.5 * (p as f64 + 1.0);
    let full = beta(a, 0.5);
    let half = |x: f64| {
        let s = x.sin();
        0.5 * full * beta_reg(a, 0.5, (s * s).min(1.0))
    };
    if r <= 0.5 * PI {
        half(r)
    } else {
        full - half(PI - r)
    }
}

/// Volume of the geodesic ball (cap) of radius `r` on the unit sphere `S^dim`.
pub fn sphere_cap_volume(dim: usize, r: f64) -> f64 {
    sphere_area(dim - 1) * sine_power_integral(dim - 1, r.min(PI))
}

/// Volume of a geodesic ball of radius `r` in `P^dim_C` with diameter `π/2`:
/// `π^dim / dim! · sin^{2 dim}(r)`.
pub fn cp_ball_volume(dim: usize, r: f64) -> f64 {
    let r = r.clamp(0.0, 0.5 * PI);
    PI.powi(dim as i32) / gamma(dim as f64 + 1.0) * r.sin().powi(2 * dim as i32)
}
