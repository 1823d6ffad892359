use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::linalg::{orthogonal_complement, FieldScalar};

fn inner<T: FieldScalar>(u: &DMatrix<T>, v: &DMatrix<T>) -> T {
    u.iter()
        .zip(v.iter())
        .fold(T::zero(), |acc, (a, b)| acc + a.conjugate() * *b)
}

fn norm<T: FieldScalar>(v: &DMatrix<T>) -> f64 {
    v.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt()
}

/// Great-circle step `v cos R + (w / R) sin R`, `R = ‖w‖`.
pub fn exp_sphere<T: FieldScalar>(v: &DMatrix<T>, w: &DMatrix<T>) -> DMatrix<T> {
    let r = norm(w);
    if r == 0.0 {
        return v.clone();
    }
    v * T::from_real(r.cos()) + w * T::from_real(r.sin() / r)
}

/// Angle `arccos ⟨u, v⟩` between unit vectors.
pub fn dist_sphere<T: FieldScalar>(u: &DMatrix<T>, v: &DMatrix<T>) -> f64 {
    let c = inner(u, v).real().clamp(-1.0, 1.0);
    // arccos loses half the digits near ±1; the chord is accurate there
    if c > 0.9 {
        return 2.0 * (0.5 * norm(&(u - v))).min(1.0).asin();
    }
    if c < -0.9 {
        return std::f64::consts::PI - 2.0 * (0.5 * norm(&(u + v))).min(1.0).asin();
    }
    c.acos()
}

/// Distance `arccos |u* v|` between the lines spanned by `u` and `v`.
pub fn dist_projective<T: FieldScalar>(u: &DMatrix<T>, v: &DMatrix<T>) -> f64 {
    let ip = inner(u, v);
    let c = ip.modulus().clamp(0.0, 1.0);
    if c > 0.9 {
        // align the phase of v with u and use the chord
        let phase = if ip.modulus() > 0.0 {
            T::from_complex(ip.to_complex().conj() / ip.modulus())
        } else {
            T::one()
        };
        let chord = norm(&(u - v * phase));
        return 2.0 * (0.5 * chord).min(1.0).asin();
    }
    c.acos()
}

/// Step on the complex projective space from the representative `v` with
/// complex coordinates `eps` in an orthonormal basis of `v^⊥`.
pub fn exp_cproj(v: &DMatrix<Complex64>, eps: &DVector<Complex64>) -> DMatrix<Complex64> {
    let comp = orthogonal_complement(v);
    let w = comp * eps;
    exp_sphere(v, &DMatrix::from_column_slice(w.len(), 1, w.as_slice()))
}
