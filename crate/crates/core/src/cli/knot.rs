use std::f64::consts::PI;

/// The `(p, q)` torus knot `((2 + cos qθ) cos pθ, (2 + cos qθ) sin pθ, sin qθ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusKnot {
    pub p: u32,
    pub q: u32,
}

impl TorusKnot {
    pub fn new(p: u32, q: u32) -> Self {
        Self { p, q }
    }

    pub fn embed(&self, theta: f64) -> [f64; 3] {
        let (p, q) = (self.p as f64, self.q as f64);
        let r = 2.0 + (q * theta).cos();
        [r * (p * theta).cos(), r * (p * theta).sin(), (q * theta).sin()]
    }

    /// `|γ'(θ)| = sqrt(q² + p² (2 + cos qθ)²)`.
    pub fn speed(&self, theta: f64) -> f64 {
        let (p, q) = (self.p as f64, self.q as f64);
        let r = 2.0 + (q * theta).cos();
        (q * q + p * p * r * r).sqrt()
    }

    /// Arclength from `0` to `theta`.
    pub fn arclength(&self, theta: f64) -> f64 {
        let f = |x: f64| self.speed(x);
        // split at the period of the speed so each panel is smooth and short
        let period = 2.0 * PI / self.q as f64;
        let full = (theta / period).floor();
        let rem = theta - full * period;
        let per = adaptive_simpson(&f, 0.0, period, 1e-12);
        full * per + adaptive_simpson(&f, 0.0, rem, 1e-12)
    }

    /// Total length, the circumference of the intrinsic circle.
    pub fn length(&self) -> f64 {
        self.arclength(2.0 * PI)
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + refine(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    refine(f, a, fa, b, fb, m, fm, whole, tol, 40)
}
