//! Stationary-phase composition of generating functions:
//! `(g1 # g2)(m) = Stat_{m', m''} [g1(m') + g2(m'') + S(m, m', m'')]`.
//!
//! All generating functions live on the surface chart of the space (see
//! [`Space::chart_coords`]); the Newton iteration runs in those coordinates.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Complex, Matrix2, Matrix4, SymmetricEigen, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{QuadraticPhase, ScalarField};
use crate::geometry::{det3, Point, Space, SpaceKind, Vec3};
use crate::starprod::normalization;
use crate::triangles::{amplitude, eta_sign, in_w, FLAT_AMPLITUDE};

pub const MAX_NEWTON_ITERATIONS: usize = 50;
pub const GRADIENT_TOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 20;
const HESSIAN_FD_STEP: f64 = 1e-5;

type ValueFn = dyn Fn([f64; 2]) -> f64 + Send + Sync;
type GradFn = dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync;
type HessFn = dyn Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync;

#[derive(Clone)]
pub enum GeneratingFunction {
    Linear([f64; 2]),
    Quadratic(QuadraticPhase),
    Callable { value: Arc<ValueFn>, gradient: Arc<GradFn>, hessian: Arc<HessFn> },
}

impl fmt::Debug for GeneratingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratingFunction::Linear(a) => f.debug_tuple("Linear").field(a).finish(),
            GeneratingFunction::Quadratic(q) => f.debug_tuple("Quadratic").field(q).finish(),
            GeneratingFunction::Callable { .. } => f.write_str("Callable"),
        }
    }
}

/// Chart points at which callable derivatives are checked.
const CHECK_POINTS: [[f64; 2]; 5] = [[0.13, -0.41], [-0.72, 0.25], [0.38, 0.66], [-0.09, -0.83], [0.91, 0.04]];

impl GeneratingFunction {
    pub fn zero() -> Self {
        GeneratingFunction::Linear([0.0, 0.0])
    }

    /// Wraps closures, checking gradient and Hessian against central
    /// differences of the value at five fixed points (tolerance `1e-5`).
    pub fn callable<V, G, H>(value: V, gradient: G, hessian: H) -> Result<Self>
    where
        V: Fn([f64; 2]) -> f64 + Send + Sync + 'static,
        G: Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static,
        H: Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync + 'static,
    {
        let h = 1e-5;
        for x in CHECK_POINTS {
            let g = gradient(x);
            let hs = hessian(x);
            for i in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[i] += h;
                xm[i] -= h;
                let fd = (value(xp) - value(xm)) / (2.0 * h);
                if (fd - g[i]).abs() > 1e-5 * (1.0 + g[i].abs()) {
                    return Err(Error::InvalidSpec(format!("gradient mismatch at {x:?}")));
                }
                let (gp, gm) = (gradient(xp), gradient(xm));
                for j in 0..2 {
                    let fd = (gp[j] - gm[j]) / (2.0 * h);
                    if (fd - hs[j][i]).abs() > 1e-5 * (1.0 + hs[j][i].abs()) {
                        return Err(Error::InvalidSpec(format!("Hessian mismatch at {x:?}")));
                    }
                }
            }
        }
        Ok(GeneratingFunction::Callable {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: Arc::new(hessian),
        })
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        match self {
            GeneratingFunction::Linear(a) => a[0] * x[0] + a[1] * x[1],
            GeneratingFunction::Quadratic(q) => q.eval_chart(x),
            GeneratingFunction::Callable { value, .. } => value(x),
        }
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        match self {
            GeneratingFunction::Linear(a) => *a,
            GeneratingFunction::Quadratic(q) => q.gradient_chart(x),
            GeneratingFunction::Callable { gradient, .. } => gradient(x),
        }
    }

    pub fn hessian(&self, x: [f64; 2]) -> Matrix2<f64> {
        match self {
            GeneratingFunction::Linear(_) => Matrix2::zeros(),
            GeneratingFunction::Quadratic(q) => {
                let h = q.hessian;
                let s = 0.5 * (h[0][1] + h[1][0]);
                Matrix2::new(h[0][0], s, s, h[1][1])
            }
            GeneratingFunction::Callable { hessian, .. } => {
                let h = hessian(x);
                Matrix2::new(h[0][0], h[0][1], h[1][0], h[1][1])
            }
        }
    }

    /// The oscillatory field `exp(i g / hbar)`, when `g` is at most quadratic.
    pub fn to_field(&self, damping: Option<crate::field::Damping>) -> Option<ScalarField> {
        let phase = match self {
            GeneratingFunction::Linear(a) => QuadraticPhase::linear(*a),
            GeneratingFunction::Quadratic(q) => *q,
            GeneratingFunction::Callable { .. } => return None,
        };
        Some(ScalarField::oscillatory(phase, damping))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    pub value: f64,
    pub stationary: (Point, Point),
    pub hessian_signature: i32,
    pub hessian_det: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Midpoint-form phase `S(m, m', m'')` with its gradient in the chart
/// coordinates of `m'` and `m''`.
fn phase_and_gradient(space: &Space, m: &Vec3, c1: [f64; 2], c2: [f64; 2]) -> Option<(f64, Vector4<f64>)> {
    let b = space.chart_point(c1).to_vec();
    let c = space.chart_point(c2).to_vec();
    match space.kind() {
        SpaceKind::Euclidean2 => {
            let (x, y) = (b - m, c - m);
            let s = 2.0 * (x.x * y.y - x.y * y.x);
            Some((s, Vector4::new(2.0 * y.y, -2.0 * y.x, -2.0 * x.y, 2.0 * x.x)))
        }
        kind => {
            let d = det3(m, &b, &c);
            let margin = 1.0 - d * d;
            if margin <= 0.0 {
                return None;
            }
            let (s, ds) = if kind == SpaceKind::Hyperbolic2 {
                (2.0 * d.asin(), 2.0 / margin.sqrt())
            } else {
                let eta = eta_sign(space.inner(m, &b), space.inner(&b, &c), space.inner(&c, m)).value();
                (2.0 * d.atan2(eta * margin.sqrt()), 2.0 * eta / margin.sqrt())
            };
            let db = c.cross(m);
            let dc = m.cross(&b);
            let (t1, t2) = space.chart_tangents(c1);
            let (u1, u2) = space.chart_tangents(c2);
            Some((s, Vector4::new(db.dot(&t1), db.dot(&t2), dc.dot(&u1), dc.dot(&u2)) * ds))
        }
    }
}

struct Objective<'a> {
    space: &'a Space,
    m: Vec3,
    g1: &'a GeneratingFunction,
    g2: &'a GeneratingFunction,
}

impl Objective<'_> {
    fn split(x: &Vector4<f64>) -> ([f64; 2], [f64; 2]) {
        ([x[0], x[1]], [x[2], x[3]])
    }

    fn admissible(&self, x: &Vector4<f64>) -> bool {
        let (c1, c2) = Self::split(x);
        let (b, c) = (self.space.chart_point(c1), self.space.chart_point(c2));
        x.iter().all(|v| v.is_finite()) && in_w(self.space, &Point::from_vec_unchecked(self.m), &b, &c) && {
            let d = det3(&self.m, b.coords(), c.coords());
            self.space.kind() == SpaceKind::Euclidean2 || d * d < 1.0
        }
    }

    fn value(&self, x: &Vector4<f64>) -> Option<f64> {
        let (c1, c2) = Self::split(x);
        let (s, _) = phase_and_gradient(self.space, &self.m, c1, c2)?;
        Some(self.g1.value(c1) + self.g2.value(c2) + s)
    }

    fn gradient(&self, x: &Vector4<f64>) -> Option<Vector4<f64>> {
        let (c1, c2) = Self::split(x);
        let (_, ds) = phase_and_gradient(self.space, &self.m, c1, c2)?;
        let (a, b) = (self.g1.gradient(c1), self.g2.gradient(c2));
        Some(ds + Vector4::new(a[0], a[1], b[0], b[1]))
    }

    fn hessian(&self, x: &Vector4<f64>) -> Option<Matrix4<f64>> {
        let (c1, c2) = Self::split(x);
        let mut h = Matrix4::zeros();
        if self.space.kind() == SpaceKind::Euclidean2 {
            // S = 2 sigma(m' - m, m'' - m)
            h[(0, 3)] = 2.0;
            h[(1, 2)] = -2.0;
            h[(3, 0)] = 2.0;
            h[(2, 1)] = -2.0;
        } else {
            for j in 0..4 {
                let mut xp = *x;
                let mut xm = *x;
                xp[j] += HESSIAN_FD_STEP;
                xm[j] -= HESSIAN_FD_STEP;
                let (_, gp) = phase_and_gradient(self.space, &self.m, Self::split(&xp).0, Self::split(&xp).1)?;
                let (_, gm) = phase_and_gradient(self.space, &self.m, Self::split(&xm).0, Self::split(&xm).1)?;
                h.set_column(j, &((gp - gm) / (2.0 * HESSIAN_FD_STEP)));
            }
            h = (h + h.transpose()) * 0.5;
        }
        let (h1, h2) = (self.g1.hessian(c1), self.g2.hessian(c2));
        for i in 0..2 {
            for j in 0..2 {
                h[(i, j)] += h1[(i, j)];
                h[(i + 2, j + 2)] += h2[(i, j)];
            }
        }
        Some(h)
    }
}

/// Solves the stationarity system of `g1(m') + g2(m'') + S(m, m', m'')` by
/// Newton's method, starting from `x0` (default `m' = m'' = m`).
pub fn compose(
    space: &Space,
    g1: &GeneratingFunction,
    g2: &GeneratingFunction,
    m: &Point,
    x0: Option<(Point, Point)>,
) -> Result<Composition> {
    let obj = Objective { space, m: m.to_vec(), g1, g2 };
    let (p1, p2) = x0.unwrap_or((*m, *m));
    let (c1, c2) = (space.chart_coords(&p1), space.chart_coords(&p2));
    let mut x = Vector4::new(c1[0], c1[1], c2[0], c2[1]);
    if !obj.admissible(&x) {
        return Err(Error::LeftDomain);
    }
    let mut iterations = 0;
    loop {
        let grad = obj.gradient(&x).ok_or(Error::LeftDomain)?;
        let gnorm = grad.norm();
        let hess = obj.hessian(&x).ok_or(Error::LeftDomain)?;
        if gnorm < GRADIENT_TOL {
            return finish(space, &obj, x, hess, iterations, gnorm);
        }
        if iterations >= MAX_NEWTON_ITERATIONS {
            return Err(Error::NoConvergence { iterations, gradient_norm: gnorm });
        }
        let step = solve(&hess, &grad).ok_or(Error::SingularHessian)?;
        let mut t = 1.0;
        let mut next = x - step;
        let mut halvings = 0;
        while !obj.admissible(&next) {
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::LeftDomain);
            }
            t *= 0.5;
            next = x - step * t;
        }
        x = next;
        iterations += 1;
    }
}

fn solve(h: &Matrix4<f64>, g: &Vector4<f64>) -> Option<Vector4<f64>> {
    let scale = h.amax().max(1e-300);
    let lu = h.lu();
    if lu.determinant().abs() < 1e-12 * scale.powi(4) {
        return None;
    }
    lu.solve(g)
}

fn finish(
    space: &Space,
    obj: &Objective,
    x: Vector4<f64>,
    hess: Matrix4<f64>,
    iterations: usize,
    gnorm: f64,
) -> Result<Composition> {
    let det = hess.determinant();
    if det.abs() < 1e-12 * hess.amax().max(1e-300).powi(4) {
        return Err(Error::SingularHessian);
    }
    let eig = SymmetricEigen::new(hess);
    let sig = eig.eigenvalues.iter().map(|&l| if l > 0.0 { 1 } else { -1 }).sum();
    let (c1, c2) = Objective::split(&x);
    Ok(Composition {
        value: obj.value(&x).ok_or(Error::LeftDomain)?,
        stationary: (space.chart_point(c1), space.chart_point(c2)),
        hessian_signature: sig,
        hessian_det: det,
        iterations,
        gradient_norm: gnorm,
    })
}

/// Leading-order stationary-phase value of the midpoint-form product of
/// `exp(i g1 / hbar)` and `exp(i g2 / hbar)` at `m`.
pub fn stationary_phase_estimate(
    space: &Space,
    g1: &GeneratingFunction,
    g2: &GeneratingFunction,
    m: &Point,
) -> Result<Complex64> {
    stationary_phase_estimate_with_amplitudes(space, g1, g2, None, None, m)
}

/// As [`stationary_phase_estimate`] with slowly varying amplitudes multiplying
/// the two oscillatory factors, evaluated at the stationary point.
pub fn stationary_phase_estimate_with_amplitudes(
    space: &Space,
    g1: &GeneratingFunction,
    g2: &GeneratingFunction,
    a1: Option<&ScalarField>,
    a2: Option<&ScalarField>,
    m: &Point,
) -> Result<Complex64> {
    let c = compose(space, g1, g2, m, None)?;
    let hbar = space.hbar();
    let (p1, p2) = c.stationary;
    let amp = match space.kind() {
        SpaceKind::Euclidean2 => FLAT_AMPLITUDE,
        _ => amplitude(space, m, &p1, &p2)?,
    };
    let dens = space.chart_density(&p1) * space.chart_density(&p2);
    let env = a1.map_or(Complex64::new(1.0, 0.0), |f| f.eval(space, &p1))
        * a2.map_or(Complex64::new(1.0, 0.0), |f| f.eval(space, &p2));
    let modulus = normalization(hbar) * amp * dens * (2.0 * PI * hbar).powi(2) / c.hessian_det.abs().sqrt();
    let phase = PI * c.hessian_signature as f64 / 4.0 + c.value / hbar;
    Ok(env * Complex64::from_polar(modulus, phase))
}

/// Logarithm of a planar field whose log is a complex quadratic:
/// `log f(x) = -x^T P x / 2 + J.x + k`.
fn log_quadratic(space: &Space, f: &ScalarField) -> Result<(Matrix2<Complex64>, Vector2<Complex64>, Complex64)> {
    let hbar = space.hbar();
    let gauss = |c: &Vec3, w: f64| {
        let s = 1.0 / (w * w);
        (
            Matrix2::identity().map(|v: f64| Complex64::from(v * s)),
            Vector2::new(Complex64::from(c.x * s), Complex64::from(c.y * s)),
            Complex64::from(-0.5 * s * (c.x * c.x + c.y * c.y)),
        )
    };
    match f {
        ScalarField::GaussianBump { center, width, amplitude } => {
            let (p, j, k) = gauss(center.coords(), *width);
            Ok((p, j, k + amplitude.ln()))
        }
        ScalarField::OscillatoryExp { phase, damping } => {
            let (mut p, mut j, mut k) = match damping {
                Some(d) => gauss(d.center.coords(), d.width),
                None => (Matrix2::zeros(), Vector2::zeros(), Complex64::from(0.0)),
            };
            let i = Complex64::i();
            let h = phase.hessian;
            let s = 0.5 * (h[0][1] + h[1][0]);
            p -= Matrix2::new(h[0][0], s, s, h[1][1]).map(|v| i * v / hbar);
            j += Vector2::new(phase.covector[0], phase.covector[1]).map(|v| i * v / hbar);
            k += i * phase.constant / hbar;
            Ok((p, j, k))
        }
        _ => Err(Error::Unsupported("complex stationary phase for this field family")),
    }
}

/// Stationary phase with the stationary point continued into complex
/// coordinates. For planar fields with complex-quadratic logarithms (Gaussian
/// bumps, damped quadratic phases) the total exponent is quadratic and the
/// result equals the product integral exactly.
pub fn complex_stationary_phase(space: &Space, f1: &ScalarField, f2: &ScalarField, m: &Point) -> Result<Complex64> {
    if space.kind() != SpaceKind::Euclidean2 {
        return Err(Error::Unsupported("complex stationary phase off the plane"));
    }
    let hbar = space.hbar();
    let mv = Vector2::new(Complex64::from(m.coords().x), Complex64::from(m.coords().y));
    let (p1, j1, k1) = log_quadratic(space, f1)?;
    let (p2, j2, k2) = log_quadratic(space, f2)?;
    // exponent in w = (x, y) with m' = m + x, m'' = m + y
    let i = Complex64::i();
    let om = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let mut big = Matrix4::<Complex64>::zeros();
    for r in 0..2 {
        for c in 0..2 {
            big[(r, c)] = p1[(r, c)];
            big[(r + 2, c + 2)] = p2[(r, c)];
            big[(r, c + 2)] = -i * (2.0 / hbar) * om[(r, c)];
            big[(r + 2, c)] = -i * (2.0 / hbar) * om[(c, r)];
        }
    }
    let lin1 = j1 - p1 * mv;
    let lin2 = j2 - p2 * mv;
    let kk = Vector4::new(lin1[0], lin1[1], lin2[0], lin2[1]);
    let k0 = k1
        + k2
        + (j1.dot(&mv) - Complex64::from(0.5) * (mv.transpose() * p1 * mv)[0])
        + (j2.dot(&mv) - Complex64::from(0.5) * (mv.transpose() * p2 * mv)[0]);
    let inv = big.try_inverse().ok_or(Error::IllConditioned)?;
    let det_sqrt = continued_sqrt_det(&big)?;
    let expo = Complex64::from(0.5) * (kk.transpose() * inv * kk)[0] + k0;
    let pref = normalization(hbar) * FLAT_AMPLITUDE * (2.0 * PI).powi(2);
    Ok(expo.exp() * pref / det_sqrt)
}

/// `sqrt(det M)` on the branch continued from the identity along
/// `(1 - s) I + s M`.
fn continued_sqrt_det(m: &Matrix4<Complex64>) -> Result<Complex64> {
    let steps = 256;
    let mut root = Complex64::new(1.0, 0.0);
    let id = Matrix4::<Complex64>::identity();
    for k in 1..=steps {
        let s = k as f64 / steps as f64;
        let d = (id * Complex::from(1.0 - s) + m * Complex::from(s)).determinant();
        if d.norm() < 1e-300 {
            return Err(Error::IllConditioned);
        }
        let r = d.sqrt();
        root = if (r - root).norm() <= (r + root).norm() { r } else { -r };
    }
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Damping;

    fn sigma(a: [f64; 2], b: [f64; 2]) -> f64 {
        a[0] * b[1] - a[1] * b[0]
    }

    #[test]
    fn linear_composition_has_symplectic_constant() {
        let e = Space::euclidean(0.5).unwrap();
        let (a, b) = ([0.7, -0.2], [0.1, 0.9]);
        let m = e.point(&[0.3, -0.4]).unwrap();
        let c = compose(&e, &GeneratingFunction::Linear(a), &GeneratingFunction::Linear(b), &m, None).unwrap();
        let want = (a[0] + b[0]) * 0.3 + (a[1] + b[1]) * -0.4 - 0.5 * sigma(a, b);
        assert!((c.value - want).abs() < 1e-12);
        assert_eq!(c.hessian_signature, 0);
        assert!(c.iterations <= 2);
        let r = compose(&e, &GeneratingFunction::Linear(b), &GeneratingFunction::Linear(a), &m, None).unwrap();
        assert!((c.value + r.value - 2.0 * ((a[0] + b[0]) * 0.3 + (a[1] + b[1]) * -0.4)).abs() < 1e-10);
        // plane waves: the estimate is the exact product
        let est =
            stationary_phase_estimate(&e, &GeneratingFunction::Linear(a), &GeneratingFunction::Linear(b), &m).unwrap();
        assert!((est - Complex64::from_polar(1.0, want / 0.5)).norm() < 1e-12);
    }

    #[test]
    fn trivial_second_factor_returns_first() {
        let e = Space::euclidean(0.5).unwrap();
        let g = GeneratingFunction::Quadratic(QuadraticPhase {
            hessian: [[0.5, 0.2], [0.2, -0.3]],
            covector: [0.1, 0.4],
            constant: 0.3,
        });
        let m = e.point(&[0.2, 0.7]).unwrap();
        let c = compose(&e, &g, &GeneratingFunction::zero(), &m, None).unwrap();
        assert!((c.value - g.value([0.2, 0.7])).abs() < 1e-12);
    }

    #[test]
    fn newton_converges_from_any_start_on_quadratics() {
        let e = Space::euclidean(0.5).unwrap();
        let g1 =
            GeneratingFunction::Quadratic(QuadraticPhase { hessian: [[1.0, 0.0], [0.0, 0.4]], ..Default::default() });
        let g2 = GeneratingFunction::Quadratic(QuadraticPhase {
            hessian: [[-0.3, 0.1], [0.1, 0.2]],
            covector: [0.5, 0.0],
            constant: 0.0,
        });
        let m = e.origin();
        for start in [[0.0, 0.0], [5.0, -3.0], [-10.0, 2.0]] {
            let x0 = (e.point(&start).unwrap(), e.point(&[start[1], start[0]]).unwrap());
            let c = compose(&e, &g1, &g2, &m, Some(x0)).unwrap();
            assert!(c.iterations <= 2 && c.gradient_norm < GRADIENT_TOL);
        }
    }

    #[test]
    fn curved_compositions_converge() {
        for space in [Space::hyperbolic(0.5).unwrap(), Space::sphere(0.5).unwrap()] {
            let g1 = GeneratingFunction::Linear([0.2, -0.1]);
            let g2 = GeneratingFunction::Quadratic(QuadraticPhase {
                hessian: [[0.3, 0.0], [0.0, 0.3]],
                covector: [0.0, 0.1],
                constant: 0.0,
            });
            let m = space.chart_point([0.1, 0.05]);
            let c = compose(&space, &g1, &g2, &m, None).unwrap();
            assert!(c.gradient_norm < GRADIENT_TOL, "{:?}", space.kind());
            // the gradient really vanishes: check by differences of the value
            let obj = Objective { space: &space, m: m.to_vec(), g1: &g1, g2: &g2 };
            let (a, b) = (space.chart_coords(&c.stationary.0), space.chart_coords(&c.stationary.1));
            let x = Vector4::new(a[0], a[1], b[0], b[1]);
            for j in 0..4 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += 1e-6;
                xm[j] -= 1e-6;
                let d = (obj.value(&xp).unwrap() - obj.value(&xm).unwrap()) / 2e-6;
                assert!(d.abs() < 1e-7, "{:?} {j}: {d}", space.kind());
            }
        }
    }

    #[test]
    fn callable_checks_derivatives() {
        let ok = GeneratingFunction::callable(
            |x| x[0].sin() * x[1],
            |x| [x[0].cos() * x[1], x[0].sin()],
            |x| [[-x[0].sin() * x[1], x[0].cos()], [x[0].cos(), 0.0]],
        );
        assert!(ok.is_ok());
        let bad = GeneratingFunction::callable(|x| x[0] * x[0], |x| [x[0], 0.0], |_| [[2.0, 0.0], [0.0, 0.0]]);
        assert!(matches!(bad, Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn zero_phases_reduce_to_damped_product() {
        let e = Space::euclidean(0.5).unwrap();
        let m = e.point(&[0.1, 0.2]).unwrap();
        let a1 = ScalarField::bump(e.origin(), 2.0);
        let a2 = ScalarField::bump(e.point(&[0.3, 0.0]).unwrap(), 2.0);
        let z = GeneratingFunction::zero();
        let est = stationary_phase_estimate_with_amplitudes(&e, &z, &z, Some(&a1), Some(&a2), &m).unwrap();
        let want = a1.eval(&e, &m) * a2.eval(&e, &m);
        assert!((est - want).norm() < 1e-12);
    }

    #[test]
    fn complex_stationary_phase_matches_gaussian_closed_form() {
        use crate::oracles::{gaussian_moyal, GaussianExp};
        let e = Space::euclidean(0.5).unwrap();
        let f = ScalarField::bump(e.point(&[0.2, -0.1]).unwrap(), 0.9);
        let g = ScalarField::bump(e.point(&[-0.4, 0.3]).unwrap(), 1.3);
        let m = e.point(&[0.1, 0.05]).unwrap();
        let got = complex_stationary_phase(&e, &f, &g, &m).unwrap();
        let exact =
            gaussian_moyal(&GaussianExp::bump([0.2, -0.1], 0.9), &GaussianExp::bump([-0.4, 0.3], 1.3), 0.5).unwrap();
        assert!((got - exact.eval(0.1, 0.05)).norm() < 1e-12);
        let d = Some(Damping { center: e.origin(), width: 1.0 });
        let osc = ScalarField::oscillatory(QuadraticPhase::linear([0.3, 0.0]), d);
        assert!(complex_stationary_phase(&e, &osc, &f, &m).is_ok());
        let poly = ScalarField::damped_polynomial(&[([1, 0, 0], 1.0)], e.origin(), 1.0);
        assert!(matches!(complex_stationary_phase(&e, &poly, &f, &m), Err(Error::Unsupported(_))));
    }
}
