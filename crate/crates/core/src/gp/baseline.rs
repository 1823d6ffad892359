use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::ManifoldPoint;

use super::covariance::{kernel_matrix, repair_psd, RbfKernel};
use super::model::{maximise_log, FitOptions, GpModel, Prediction};

/// Linear map applied to embedded coordinates before the RBF kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Identity,
    Scalar(f64),
    Matrix(DMatrix<f64>),
}

impl Transform {
    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            Transform::Identity => Ok(v.clone()),
            Transform::Scalar(c) => Ok(v * *c),
            Transform::Matrix(g) => {
                if g.ncols() != v.len() {
                    return Err(Error::LengthMismatch(g.ncols(), v.len()));
                }
                Ok(g * v)
            }
        }
    }
}

/// RBF-kernel GP on (transformed) embedded coordinates, with the
/// length-scale chosen by marginal likelihood.
#[derive(Debug, Clone)]
pub struct EmbeddingBaseline {
    pub transform: Transform,
    pub model: GpModel<DVector<f64>, RbfKernel>,
}

fn median_pairwise_distance(xs: &[DVector<f64>]) -> f64 {
    let mut d: Vec<f64> = vec![];
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            d.push((&xs[i] - &xs[j]).norm());
        }
    }
    d.retain(|v| *v > 0.0);
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(|a, b| a.total_cmp(b));
    d[d.len() / 2]
}

impl EmbeddingBaseline {
    pub fn fit(embedded: &[DVector<f64>], y: &[f64], transform: Transform, opts: &FitOptions) -> Result<Self> {
        let xs = embedded
            .iter()
            .map(|v| transform.apply(v))
            .collect::<Result<Vec<_>>>()?;
        let m = median_pairwise_distance(&xs);
        let mean = if opts.center {
            y.iter().sum::<f64>() / y.len().max(1) as f64
        } else {
            0.0
        };
        let yc = DVector::from_iterator(y.len(), y.iter().map(|v| v - mean));
        let score = |u: f64| -> f64 {
            let kernel = RbfKernel { lengthscale: m * u.exp() };
            let fitted = kernel_matrix(&kernel, &xs)
                .and_then(|p| repair_psd(&p))
                .and_then(|p| GpModel::<DVector<f64>, RbfKernel>::best_noise(&p.matrix, &yc, opts));
            fitted.map_or(f64::NEG_INFINITY, |r| r.0)
        };
        let span = 100f64.ln();
        let (u, _) = maximise_log(&score, -span, span, 40);
        let kernel = RbfKernel { lengthscale: m * u.exp() };
        let model = GpModel::fit(&xs, y, vec![(kernel.lengthscale, kernel)], opts)?;
        Ok(Self { transform, model })
    }

    pub fn lengthscale(&self) -> f64 {
        self.model.kernel.lengthscale
    }

    fn transformed(&self, embedded: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
        embedded.iter().map(|v| self.transform.apply(v)).collect()
    }

    pub fn predict_mean(&self, embedded: &[DVector<f64>]) -> Result<DVector<f64>> {
        self.model.predict_mean(&self.transformed(embedded)?)
    }

    pub fn predict(&self, embedded: &[DVector<f64>]) -> Result<Prediction> {
        self.model.predict(&self.transformed(embedded)?)
    }
}

/// Orthogonal projector `u u*` onto the line through the unit vector `u`.
pub fn projector(u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    u * u.adjoint()
}

/// Real coordinates of the Hermitian projector `u u*`: the diagonal, then
/// `√2 Re` and `√2 Im` of the strict upper triangle, so the Frobenius
/// distance between projectors is the Euclidean distance of the coordinates.
pub fn hermitian_projector_embedding(p: &ManifoldPoint) -> Result<DVector<f64>> {
    let u = p.rep().as_complex().ok_or_else(|| Error::ShapeMismatch {
        manifold: p.manifold().to_string(),
        reason: "projector embedding needs a complex column vector".into(),
    })?;
    if u.ncols() != 1 {
        return Err(Error::ShapeMismatch {
            manifold: p.manifold().to_string(),
            reason: "projector embedding needs a column vector".into(),
        });
    }
    let h = projector(u);
    let n = h.nrows();
    let mut out = Vec::with_capacity(n * n);
    out.extend((0..n).map(|i| h[(i, i)].re));
    let s = std::f64::consts::SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            out.push(s * h[(i, j)].re);
            out.push(s * h[(i, j)].im);
        }
    }
    Ok(DVector::from_vec(out))
}
