//! Independent reference computations used to validate the engine: the
//! terminating Moyal series on polynomials, closed-form Moyal products of
//! Gaussians, angle-sum and line-integral triangle areas, the explicit planar
//! prequantization phases and finite-difference Jacobians of `Psi`.
//!
//! Nothing here calls the area or phase code of [`crate::triangles`] or
//! [`crate::starprod`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg};

use nalgebra::{Complex, Matrix2, Matrix4, SMatrix, Vector2};
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::{Point, Space, SpaceKind, Tangent, Vec3};
use crate::triangles::CornerTriple;

pub const MAX_SERIES_DEGREE: u32 = 12;

/// Exact complex rationals, for coefficient-wise identities.
pub type ExactCoeff = Complex<Rational64>;

/// Polynomial in the planar coordinates `(p, q)`, stored as a sparse map from
/// exponent pairs to coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T = Complex64> {
    terms: BTreeMap<(u32, u32), T>,
}

/// Coefficient ring of [`Polynomial`].
pub trait Coeff:
    Clone + Zero + One + PartialEq + Add<Output = Self> + Mul<Output = Self> + Neg<Output = Self> + Div<Output = Self>
{
    fn from_count(n: u32) -> Self;
}

impl Coeff for Complex64 {
    fn from_count(n: u32) -> Self {
        Complex64::new(n as f64, 0.0)
    }
}

impl Coeff for ExactCoeff {
    fn from_count(n: u32) -> Self {
        ExactCoeff::new(Rational64::from(n as i64), Rational64::zero())
    }
}

impl<T: Coeff> Polynomial<T> {
    pub fn zero() -> Self {
        Polynomial { terms: BTreeMap::new() }
    }

    pub fn monomial(coeff: T, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(i, j, coeff);
        p
    }

    pub fn constant(c: T) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32), T)>) -> Self {
        let mut p = Self::zero();
        for ((i, j), c) in terms {
            p.add_term(i, j, c);
        }
        p
    }

    fn add_term(&mut self, i: u32, j: u32, c: T) {
        let e = self.terms.entry((i, j)).or_insert_with(T::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: u32, j: u32) -> T {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    /// `d^a/dp^a d^b/dq^b`.
    pub fn derivative(&self, a: u32, b: u32) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            if i < a || j < b {
                continue;
            }
            let f = falling(i, a) * falling(j, b);
            out.add_term(i - a, j - b, c.clone() * T::from_count(f));
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_terms(self.terms.iter().map(|(&k, c)| (k, c.clone() * s.clone())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            for (&(k, l), d) in &other.terms {
                out.add_term(i + k, j + l, c.clone() * d.clone());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }
}

impl Polynomial<Complex64> {
    pub fn eval(&self, p: f64, q: f64) -> Complex64 {
        self.terms.iter().map(|(&(i, j), c)| c * p.powi(i as i32) * q.powi(j as i32)).sum()
    }

    pub fn real(terms: &[((u32, u32), f64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(k, c)| (k, Complex64::new(c, 0.0))))
    }
}

fn falling(n: u32, k: u32) -> u32 {
    (0..k).map(|t| n - t).product()
}

fn binomial(n: u32, k: u32) -> u32 {
    falling(n, k) / falling(k, k)
}

/// Moyal product of two polynomials with `{p, q} = 1`:
/// `f * g = sum_n (i hbar / 2)^n / n! sum_k C(n,k) (-1)^k (d_p^{n-k} d_q^k f)(d_p^k d_q^{n-k} g)`.
pub fn moyal_series(f: &Polynomial<Complex64>, g: &Polynomial<Complex64>, hbar: f64) -> Result<Polynomial<Complex64>> {
    moyal_series_with(f, g, Complex64::new(0.0, 0.5 * hbar))
}

/// [`moyal_series`] over an arbitrary coefficient ring; `half_i_hbar` is the
/// ring element standing for `i hbar / 2`.
pub fn moyal_series_with<T: Coeff>(f: &Polynomial<T>, g: &Polynomial<T>, half_i_hbar: T) -> Result<Polynomial<T>> {
    for d in [f.degree(), g.degree()] {
        if d > MAX_SERIES_DEGREE {
            return Err(Error::DegreeTooHigh { degree: d, max: MAX_SERIES_DEGREE });
        }
    }
    let top = f.degree().min(g.degree());
    let mut out = Polynomial::zero();
    let mut pow = T::one();
    let mut fact = T::one();
    for n in 0..=top {
        if n > 0 {
            pow = pow * half_i_hbar.clone();
            fact = fact * T::from_count(n);
        }
        let pref = pow.clone() / fact.clone();
        for k in 0..=n {
            let df = f.derivative(n - k, k);
            let dg = g.derivative(k, n - k);
            if df.is_zero() || dg.is_zero() {
                continue;
            }
            let mut c = pref.clone() * T::from_count(binomial(n, k));
            if k % 2 == 1 {
                c = -c;
            }
            out = out.add(&df.mul(&dg).scale(c));
        }
    }
    Ok(out)
}

/// `c exp(-x^T Q x / 2 + b^T x)` on the plane, with `Q` real symmetric
/// positive definite and complex `b`, `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianExp {
    pub q: Matrix2<f64>,
    pub b: Vector2<Complex64>,
    pub c: Complex64,
}

impl GaussianExp {
    /// `exp(-|x - center|^2 / (2 width^2))`.
    pub fn bump(center: [f64; 2], width: f64) -> Self {
        let s = 1.0 / (width * width);
        let c2 = center[0] * center[0] + center[1] * center[1];
        GaussianExp {
            q: Matrix2::identity() * s,
            b: Vector2::new(Complex64::from(center[0] * s), Complex64::from(center[1] * s)),
            c: Complex64::from((-0.5 * c2 * s).exp()),
        }
    }

    pub fn eval(&self, p: f64, q: f64) -> Complex64 {
        let x = Vector2::new(p, q);
        let quad = -0.5 * x.dot(&(self.q * x));
        let lin = self.b[0] * p + self.b[1] * q;
        self.c * (lin + quad).exp()
    }
}

/// Exact Moyal product of two Gaussian exponentials.
///
/// Uses `(f * g)(x) = (pi hbar)^-2 \int\int f(x+y) g(x+z) exp(2i sigma(y,z)/hbar) dy dz`
/// and the closed form of the resulting four-dimensional Gaussian integral.
pub fn gaussian_moyal(f: &GaussianExp, g: &GaussianExp, hbar: f64) -> Result<GaussianExp> {
    let i = Complex64::i();
    let k = 2.0 / hbar;
    let omega = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let mut m = Matrix4::<Complex64>::zeros();
    for r in 0..2 {
        for c in 0..2 {
            m[(r, c)] = Complex64::from(f.q[(r, c)]);
            m[(r + 2, c + 2)] = Complex64::from(g.q[(r, c)]);
            m[(r, c + 2)] = -i * k * omega[(r, c)];
            m[(r + 2, c)] = -i * k * omega[(c, r)];
        }
    }
    let det = m.determinant();
    let scale = f.q.norm() * g.q.norm() + k.powi(4);
    if det.norm().is_nan() || det.norm() <= 1e-12 * scale || f.q.cholesky().is_none() || g.q.cholesky().is_none() {
        return Err(Error::IllConditioned);
    }
    let minv = m.try_inverse().ok_or(Error::IllConditioned)?;
    // J(x) = B - K x
    let mut kmat = SMatrix::<Complex64, 4, 2>::zeros();
    let mut bvec = nalgebra::Vector4::<Complex64>::zeros();
    for r in 0..2 {
        bvec[r] = f.b[r];
        bvec[r + 2] = g.b[r];
        for c in 0..2 {
            kmat[(r, c)] = Complex64::from(f.q[(r, c)]);
            kmat[(r + 2, c)] = Complex64::from(g.q[(r, c)]);
        }
    }
    let ktm = kmat.transpose() * minv;
    let qc = (f.q + g.q).map(Complex64::from) - ktm * kmat;
    let b = f.b + g.b - ktm * bvec;
    let half = Complex64::from(0.5);
    let expo = half * (bvec.transpose() * minv * bvec)[0];
    let c = f.c * g.c * (4.0 / (hbar * hbar)) * expo.exp() / det.sqrt();
    let q = qc.map(|z| z.re);
    if qc.iter().any(|z| z.im.abs() > 1e-9 * (1.0 + z.re.abs())) {
        return Err(Error::IllConditioned);
    }
    Ok(GaussianExp { q, b, c })
}

/// Tangent angle at `p` between the geodesics towards `x` and `y`.
fn corner_angle(space: &Space, p: &Point, x: &Point, y: &Point) -> Result<f64> {
    let u = space.log_map(p, x)?.vec;
    let w = space.log_map(p, y)?.vec;
    let (nu, nw) = (space.tangent_norm(&u), space.tangent_norm(&w));
    if nu < 1e-12 || nw < 1e-12 {
        return Err(Error::Degenerate);
    }
    let cos = space.metric(&u, &w);
    let sin = space.symplectic_form(p, &u, &w).abs();
    Ok(sin.atan2(cos))
}

/// Unsigned area from the angle sum: excess on the sphere, defect on the
/// hyperbolic plane.
pub fn excess_area(space: &Space, t: &CornerTriple) -> Result<f64> {
    let sum = corner_angle(space, &t.a, &t.b, &t.c)?
        + corner_angle(space, &t.b, &t.c, &t.a)?
        + corner_angle(space, &t.c, &t.a, &t.b)?;
    match space.kind() {
        SpaceKind::Sphere2 => Ok(sum - PI),
        SpaceKind::Hyperbolic2 => Ok(PI - sum),
        SpaceKind::Euclidean2 => Err(Error::Unsupported("angle-sum area")),
    }
}

/// Oriented area as the line integral of a symplectic potential around the
/// boundary `a -> b -> c -> a`, each side split into `n_steps` segments.
///
/// Potentials: `p dq` on the plane; `(1 - cos rho) dphi` and
/// `(cosh r - 1) dphi` in geodesic polar coordinates about the normalized
/// centroid on the sphere and the hyperbolic plane.
pub fn stokes_area(space: &Space, t: &CornerTriple, n_steps: usize) -> Result<f64> {
    let n = n_steps.max(1);
    let corners = [t.a, t.b, t.c];
    let centre = match space.kind() {
        SpaceKind::Euclidean2 => space.origin(),
        _ => {
            let s = t.a.to_vec() + t.b.to_vec() + t.c.to_vec();
            if s.norm() < 1e-12 {
                return Err(Error::Degenerate);
            }
            space.renormalize(s)
        }
    };
    let (e1, e2) = space.frame(&centre);
    let o = centre.to_vec();
    // (potential coefficient, polar angle) of a point
    let polar = |x: &Vec3| -> (f64, f64) {
        let c = space.inner(&o, x);
        let w = x - o * c;
        let phi = space.metric(&w, &e2).atan2(space.metric(&w, &e1));
        let coeff = match space.kind() {
            SpaceKind::Sphere2 => 1.0 - c,
            _ => c - 1.0,
        };
        (coeff, phi)
    };
    let mut total = 0.0;
    for k in 0..3 {
        let (p0, p1) = (corners[k], corners[(k + 1) % 3]);
        let v = space.log_map(&p0, &p1)?.vec;
        let at = |s: f64| space.exp_vec(&p0, &(v * s)).to_vec();
        let mut prev = at(0.0);
        for j in 0..n {
            let next = at((j + 1) as f64 / n as f64);
            let mid = at((j as f64 + 0.5) / n as f64);
            total += match space.kind() {
                SpaceKind::Euclidean2 => mid.x * (next.y - prev.y),
                _ => {
                    let (_, a0) = polar(&prev);
                    let (_, a1) = polar(&next);
                    let (cm, _) = polar(&mid);
                    let mut d = a1 - a0;
                    if d > PI {
                        d -= 2.0 * PI;
                    } else if d < -PI {
                        d += 2.0 * PI;
                    }
                    cm * d
                }
            };
            prev = next;
        }
    }
    Ok(total)
}

/// Phase of the planar section `s_o` between `(p1, q1)` and `(p2, q2)`.
pub fn so_phase_r2(p1: f64, q1: f64, p2: f64, q2: f64, hbar: f64) -> f64 {
    (p1 + p2) * (q2 - q1) / (2.0 * hbar)
}

/// Holonomy phase of the planar triangle `m1, m2, m3` (points as `(p, q)`).
pub fn lambda_phase_r2(m1: [f64; 2], m2: [f64; 2], m3: [f64; 2], hbar: f64) -> f64 {
    let [p1, q1] = m1;
    let [p2, q2] = m2;
    let [p3, q3] = m3;
    ((p1 + p2) * (q1 - q2) + (p2 + p3) * (q2 - q3) + (p3 + p1) * (q3 - q1)) / (2.0 * hbar)
}

/// Central-difference Jacobian determinant of `Psi(v, m2)` in the coordinates
/// (fiber frame components of `v`, surface chart of `m2`) to (surface chart,
/// surface chart).
pub fn jacobian_fd(space: &Space, base: &Point, v: &Tangent, m2: &Point, step: f64) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&step) {
        return Err(Error::InvalidSpec(format!("finite-difference step {step} outside [1e-7, 1e-3]")));
    }
    let c = space.fiber_coords(v);
    let x0 = [c[0], c[1], space.chart_coords(m2)[0], space.chart_coords(m2)[1]];
    let eval = |x: [f64; 4]| -> Result<[f64; 4]> {
        let w = space.fiber_vector(base, [x[0], x[1]]);
        let (m1, m3) = space.chord(base, &w.vec);
        let p = space.chart_point([x[2], x[3]]);
        let a = space.chart_coords(&space.midpoint(&m1, &p)?);
        let b = space.chart_coords(&space.midpoint(&p, &m3)?);
        Ok([a[0], a[1], b[0], b[1]])
    };
    let mut jac = Matrix4::zeros();
    for j in 0..4 {
        let mut xp = x0;
        let mut xm = x0;
        xp[j] += step;
        xm[j] -= step;
        let (fp, fm) = (eval(xp)?, eval(xm)?);
        for i in 0..4 {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    let det = jac.determinant();
    if !det.is_finite() || det.abs() < 1e-12 {
        return Err(Error::NearSingular);
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn moyal_series_examples() {
        let hbar = 0.37;
        let p = Polynomial::real(&[((1, 0), 1.0)]);
        let q = Polynomial::real(&[((0, 1), 1.0)]);
        let pq = moyal_series(&p, &q, hbar).unwrap();
        let qp = moyal_series(&q, &p, hbar).unwrap();
        let comm = pq.sub(&qp);
        assert_eq!(comm, Polynomial::constant(c(0.0, hbar)));

        let f = Polynomial::real(&[((3, 1), 2.0), ((0, 2), -1.0)]);
        assert_eq!(moyal_series(&f, &Polynomial::constant(c(1.0, 0.0)), hbar).unwrap(), f);

        let p2 = Polynomial::real(&[((2, 0), 1.0)]);
        let q2 = Polynomial::real(&[((0, 2), 1.0)]);
        let got = moyal_series(&p2, &q2, hbar).unwrap();
        let want = Polynomial::from_terms([
            ((2, 2), c(1.0, 0.0)),
            ((1, 1), c(0.0, 2.0 * hbar)),
            ((0, 0), c(-hbar * hbar / 2.0, 0.0)),
        ]);
        for (k, v) in got.terms() {
            assert!((v - want.coeff(k.0, k.1)).norm() < 1e-15);
        }
        assert_eq!(got.terms().count(), 3);

        let big = Polynomial::real(&[((13, 0), 1.0)]);
        assert!(matches!(moyal_series(&big, &p, hbar), Err(Error::DegreeTooHigh { .. })));
    }

    #[test]
    fn moyal_series_is_exactly_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = |rng: &mut ChaCha8Rng| Rational64::new(rng.gen_range(-5..=5), rng.gen_range(1..=4));
        let half_i_hbar = ExactCoeff::new(Rational64::from(0), Rational64::new(1, 3));
        for _ in 0..20 {
            let mut polys = Vec::new();
            for _ in 0..3 {
                let mut terms = Vec::new();
                for i in 0..=4u32 {
                    for j in 0..=(4 - i) {
                        if rng.gen_bool(0.5) {
                            terms.push(((i, j), ExactCoeff::new(r(&mut rng), r(&mut rng))));
                        }
                    }
                }
                polys.push(Polynomial::from_terms(terms));
            }
            let star =
                |a: &Polynomial<ExactCoeff>, b: &Polynomial<ExactCoeff>| moyal_series_with(a, b, half_i_hbar).unwrap();
            let left = star(&star(&polys[0], &polys[1]), &polys[2]);
            let right = star(&polys[0], &star(&polys[1], &polys[2]));
            assert_eq!(left, right);
        }
    }

    #[test]
    fn gaussian_moyal_closed_form() {
        for hbar in [0.5, 1.0, 2.0] {
            let f = GaussianExp::bump([0.0, 0.0], 1.0);
            let g = gaussian_moyal(&f, &f, hbar).unwrap();
            let s = 1.0 + hbar * hbar / 4.0;
            for (p, q) in [(0.0, 0.0), (0.3, -0.7), (1.5, 0.2)] {
                let want = (-(p * p + q * q) / s).exp() / s;
                assert!((g.eval(p, q) - want).norm() < 1e-13, "{hbar}");
            }
        }
        // hbar -> 0: pointwise product
        let f = GaussianExp::bump([0.2, 0.1], 0.8);
        let g = GaussianExp::bump([-0.3, 0.4], 1.1);
        let h = gaussian_moyal(&f, &g, 1e-4).unwrap();
        assert!((h.eval(0.1, 0.0) - f.eval(0.1, 0.0) * g.eval(0.1, 0.0)).norm() < 1e-4);
        // swapping real factors conjugates
        let fg = gaussian_moyal(&f, &g, 0.5).unwrap();
        let gf = gaussian_moyal(&g, &f, 0.5).unwrap();
        assert!((fg.eval(0.3, -0.2) - gf.eval(0.3, -0.2).conj()).norm() < 1e-14);
        let flat = GaussianExp { q: Matrix2::zeros(), ..f };
        assert_eq!(gaussian_moyal(&flat, &g, 0.5), Err(Error::IllConditioned));
    }

    /// The first two orders of the Gaussian closed form agree with the series
    /// applied to the Taylor data: f*g - fg - (i hbar/2){f,g} = O(hbar^2).
    #[test]
    fn gaussian_moyal_matches_series_to_first_order() {
        let f = GaussianExp::bump([0.2, 0.1], 0.8);
        let g = GaussianExp::bump([-0.3, 0.4], 1.1);
        let (p, q) = (0.1, -0.2);
        let grad = |e: &GaussianExp| {
            let x = Vector2::new(c(p, 0.0), c(q, 0.0));
            let qx = e.q.map(Complex64::from) * x;
            let v = e.eval(p, q);
            (v * (e.b[0] - qx[0]), v * (e.b[1] - qx[1]))
        };
        let (fp, fq) = grad(&f);
        let (gp, gq) = grad(&g);
        let bracket = fp * gq - fq * gp;
        let mut errs = Vec::new();
        for hbar in [0.1, 0.05] {
            let h = gaussian_moyal(&f, &g, hbar).unwrap();
            let rem = h.eval(p, q) - f.eval(p, q) * g.eval(p, q) - c(0.0, hbar / 2.0) * bracket;
            errs.push(rem.norm());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.9, "order {order}");
    }

    #[test]
    fn excess_and_stokes_octant() {
        let s = Space::sphere(1.0).unwrap();
        let t = CornerTriple::new(
            s.point(&[1.0, 0.0, 0.0]).unwrap(),
            s.point(&[0.0, 1.0, 0.0]).unwrap(),
            s.point(&[0.0, 0.0, 1.0]).unwrap(),
        );
        assert!((excess_area(&s, &t).unwrap() - PI / 2.0).abs() < 1e-14);
        let st = stokes_area(&s, &t, 10_000).unwrap();
        assert!((st - PI / 2.0).abs() < 1e-6, "{st}");
        let rev = stokes_area(&s, &CornerTriple::new(t.b, t.a, t.c), 10_000).unwrap();
        assert!((rev + st).abs() < 1e-12);
    }

    #[test]
    fn stokes_planar_and_degenerate() {
        let e = Space::euclidean(1.0).unwrap();
        let t = CornerTriple::new(
            e.point(&[0.0, 0.0]).unwrap(),
            e.point(&[1.0, 0.0]).unwrap(),
            e.point(&[0.0, 1.0]).unwrap(),
        );
        assert!((stokes_area(&e, &t, 100).unwrap() - 0.5).abs() < 1e-14);
        let h = Space::hyperbolic(1.0).unwrap();
        let p = h.hyperboloid_point(0.3, 0.2);
        assert!(stokes_area(&h, &CornerTriple::new(p, p, p), 100).unwrap().abs() < 1e-15);
        assert_eq!(excess_area(&h, &CornerTriple::new(p, p, p)), Err(Error::Degenerate));
    }

    #[test]
    fn stokes_converges_quadratically() {
        let h = Space::hyperbolic(1.0).unwrap();
        let t = CornerTriple::new(
            h.hyperboloid_point(0.0, 0.0),
            h.hyperboloid_point(1.5, 0.2),
            h.hyperboloid_point(-0.3, 1.0),
        );
        let exact = PI - {
            // reference by the defect formula
            excess_area(&h, &t).map(|d| PI - d).unwrap()
        };
        let e1 = (stokes_area(&h, &t, 100).unwrap() - exact).abs();
        let e2 = (stokes_area(&h, &t, 200).unwrap() - exact).abs();
        let order = (e1 / e2).log2();
        assert!(order > 1.8 && order < 2.2, "order {order}");
    }

    #[test]
    fn hyperbolic_areas_stay_below_pi() {
        let h = Space::hyperbolic(1.0).unwrap();
        let mut last = 0.0;
        for r in [1.0, 2.0, 4.0, 6.0, 8.0] {
            let corners: Vec<Point> = (0..3)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / 3.0;
                    h.normal_chart_point(&h.origin(), [r * a.cos(), r * a.sin()])
                })
                .collect();
            let area = excess_area(&h, &CornerTriple::new(corners[0], corners[1], corners[2])).unwrap();
            assert!(area > last && area < PI);
            last = area;
        }
    }

    #[test]
    fn prequantization_phase_examples() {
        assert_eq!(so_phase_r2(1.0, 0.0, 1.0, 1.0, 1.0), 1.0);
        assert_eq!(so_phase_r2(0.4, -1.0, 0.4, -1.0, 0.3), 0.0);
        let (a, b) = ([0.3, 1.2], [-0.5, 2.0]);
        assert_eq!(so_phase_r2(a[0], a[1], b[0], b[1], 0.7), -so_phase_r2(b[0], b[1], a[0], a[1], 0.7));
        assert_eq!(lambda_phase_r2([0.0, 0.0], [1.0, 1.0], [2.0, 2.0], 1.0), 0.0);
        assert_eq!(lambda_phase_r2([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], 1.0).abs(), 0.5);
    }

    #[test]
    fn planar_psi_jacobian_is_a_quarter() {
        let e = Space::euclidean(1.0).unwrap();
        let m = e.point(&[0.3, -1.0]).unwrap();
        let v = e.tangent(&m, &[0.5, 2.0]).unwrap();
        let j = jacobian_fd(&e, &m, &v, &e.point(&[4.0, 1.0]).unwrap(), 1e-4).unwrap();
        assert!((j - 0.25).abs() < 1e-8);
    }

    #[test]
    fn degenerate_psi_jacobian_scales_with_chart_density() {
        // at v = 0, m2 = base the map is the identity on the midpoint pair and
        // its surface-chart Jacobian is 1/4 times the density ratio of the charts
        for space in [Space::hyperbolic(1.0).unwrap(), Space::sphere(1.0).unwrap()] {
            let m = space.chart_point([0.3, -0.4]);
            let v = space.fiber_vector(&m, [0.0, 0.0]);
            let j = jacobian_fd(&space, &m, &v, &m, 1e-5).unwrap().abs();
            let rho = space.chart_density(&m);
            // the fiber chart is orthonormal, so its density is 1
            assert!((j - 0.25 / rho).abs() < 1e-7 / rho, "{:?}: {j}", space.kind());
        }
    }
}
