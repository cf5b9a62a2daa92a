//! Model spaces: the Euclidean plane, the hyperbolic plane (upper sheet of the
//! hyperboloid `z^2 - x^2 - y^2 = 1`) and the unit sphere.
//!
//! Points of all three spaces are stored as vectors in 3-space. Planar points
//! keep `z = 0` and use `(x, y)` as the canonical coordinates `(p, q)` with
//! symplectic form `dp ^ dq`. On the curved spaces the symplectic form is the
//! area form `omega_m(u, w) = det(m, u, w)`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::{Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Tolerance used to validate constraint-surface membership.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Two points closer than this to being antipodal are treated as antipodal.
pub const ANTIPODAL_TOL: f64 = 1e-12;

/// Central-difference step used for the fiber density.
pub const DENSITY_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    #[serde(rename = "r2")]
    Euclidean2,
    #[serde(rename = "h2")]
    Hyperbolic2,
    #[serde(rename = "s2")]
    Sphere2,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Euclidean2 => "euclidean plane",
            SpaceKind::Hyperbolic2 => "hyperbolic plane",
            SpaceKind::Sphere2 => "sphere",
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            SpaceKind::Euclidean2 => "r2",
            SpaceKind::Hyperbolic2 => "h2",
            SpaceKind::Sphere2 => "s2",
        }
    }

    pub fn is_compact(self) -> bool {
        self == SpaceKind::Sphere2
    }
}

impl std::str::FromStr for SpaceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "r2" | "euclidean" | "plane" => Ok(SpaceKind::Euclidean2),
            "h2" | "hyperbolic" => Ok(SpaceKind::Hyperbolic2),
            "s2" | "sphere" => Ok(SpaceKind::Sphere2),
            other => Err(format!("unknown space '{other}' (expected r2, h2 or s2)")),
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// A model space together with its deformation parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Space {
    kind: SpaceKind,
    hbar: f64,
}

/// A point of a model space in embedding coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point(Vec3);

/// A tangent vector together with its base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent {
    pub base: Point,
    pub vec: Vec3,
}

impl Point {
    /// Wraps embedding coordinates without validation.
    pub(crate) fn from_vec_unchecked(v: Vec3) -> Self {
        Point(v)
    }

    pub fn coords(&self) -> &Vec3 {
        &self.0
    }

    pub fn to_vec(self) -> Vec3 {
        self.0
    }
}

impl Tangent {
    pub(crate) fn new_unchecked(base: Point, vec: Vec3) -> Self {
        Tangent { base, vec }
    }
}

impl Space {
    /// Builds a space, enforcing the sphere quantization condition `2/hbar in N`.
    pub fn new(kind: SpaceKind, hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidHbar { hbar, reason: "must be finite and positive" });
        }
        if kind == SpaceKind::Sphere2 {
            let n = 2.0 / hbar;
            if (n - n.round()).abs() > 1e-9 * n.max(1.0) || n.round() < 1.0 {
                return Err(Error::InvalidHbar { hbar, reason: "on the sphere 2/hbar must be a positive integer" });
            }
        }
        Ok(Space { kind, hbar })
    }

    pub fn euclidean(hbar: f64) -> Result<Self> {
        Self::new(SpaceKind::Euclidean2, hbar)
    }

    pub fn hyperbolic(hbar: f64) -> Result<Self> {
        Self::new(SpaceKind::Hyperbolic2, hbar)
    }

    pub fn sphere(hbar: f64) -> Result<Self> {
        Self::new(SpaceKind::Sphere2, hbar)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Copy of this space with a different `hbar` (same quantization rules).
    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        Space::new(self.kind, hbar)
    }

    // ------------------------------------------------------------------
    // points and vectors

    /// Validates embedding coordinates: two numbers for the plane, three for the
    /// hyperboloid and the sphere.
    pub fn point(&self, coords: &[f64]) -> Result<Point> {
        let bad = || Error::InvalidPoint { coords: coords.to_vec(), space: self.kind.name() };
        match (self.kind, coords.len()) {
            (SpaceKind::Euclidean2, 2) => Ok(Point(Vec3::new(coords[0], coords[1], 0.0))),
            (SpaceKind::Euclidean2, 3) if coords[2] == 0.0 => Ok(Point(Vec3::new(coords[0], coords[1], 0.0))),
            (SpaceKind::Hyperbolic2 | SpaceKind::Sphere2, 3) => {
                let v = Vec3::new(coords[0], coords[1], coords[2]);
                if !v.iter().all(|c| c.is_finite()) {
                    return Err(bad());
                }
                let residual = (self.inner(&v, &v) - 1.0).abs();
                let scale = v.norm_squared().max(1.0);
                if residual > MEMBERSHIP_TOL * scale {
                    return Err(bad());
                }
                if self.kind == SpaceKind::Hyperbolic2 && v.z <= 0.0 {
                    return Err(bad());
                }
                Ok(Point(v))
            }
            _ => Err(bad()),
        }
    }

    /// Projects approximate coordinates onto the space: normalizes on the
    /// sphere, recomputes `z` from `(x, y)` on the hyperboloid.
    pub fn project(&self, coords: &[f64]) -> Result<Point> {
        let bad = || Error::InvalidPoint { coords: coords.to_vec(), space: self.kind.name() };
        match (self.kind, coords.len()) {
            (SpaceKind::Euclidean2, 2) => self.point(coords),
            (SpaceKind::Hyperbolic2, 2) | (SpaceKind::Hyperbolic2, 3) => {
                let (x, y) = (coords[0], coords[1]);
                if coords.len() == 3 && coords[2] <= 0.0 {
                    return Err(bad());
                }
                Ok(self.hyperboloid_point(x, y))
            }
            (SpaceKind::Sphere2, 3) => {
                let v = Vec3::new(coords[0], coords[1], coords[2]);
                let n = v.norm();
                if !(n.is_finite() && n > 0.0) {
                    return Err(bad());
                }
                Ok(Point(v / n))
            }
            _ => Err(bad()),
        }
    }

    /// Point of the upper hyperboloid sheet above `(x, y)`.
    pub fn hyperboloid_point(&self, x: f64, y: f64) -> Point {
        Point(Vec3::new(x, y, (1.0 + x * x + y * y).sqrt()))
    }

    /// The canonical origin: `(0,0)`, `(0,0,1)` or the north pole.
    pub fn origin(&self) -> Point {
        match self.kind {
            SpaceKind::Euclidean2 => Point(Vec3::zeros()),
            _ => Point(Vec3::new(0.0, 0.0, 1.0)),
        }
    }

    /// Validates that `vec` is tangent at `base`.
    pub fn tangent(&self, base: &Point, vec: &[f64]) -> Result<Tangent> {
        let v = match (self.kind, vec.len()) {
            (SpaceKind::Euclidean2, 2) => Vec3::new(vec[0], vec[1], 0.0),
            (_, 3) => Vec3::new(vec[0], vec[1], vec[2]),
            _ => return Err(Error::NotTangent { residual: f64::NAN }),
        };
        let residual = match self.kind {
            SpaceKind::Euclidean2 => v.z.abs(),
            _ => self.inner(&v, &base.0).abs(),
        };
        if residual > MEMBERSHIP_TOL * v.norm().max(1.0) * base.0.norm().max(1.0) {
            return Err(Error::NotTangent { residual });
        }
        Ok(Tangent { base: *base, vec: v })
    }

    /// Ambient bilinear form: dot product on the plane and the sphere,
    /// `zz' - xx' - yy'` on the hyperboloid.
    pub fn inner(&self, x: &Vec3, y: &Vec3) -> f64 {
        match self.kind {
            SpaceKind::Euclidean2 => x.x * y.x + x.y * y.y,
            SpaceKind::Hyperbolic2 => x.z * y.z - x.x * y.x - x.y * y.y,
            SpaceKind::Sphere2 => x.dot(y),
        }
    }

    /// Riemannian length of a tangent vector.
    pub fn tangent_norm(&self, v: &Vec3) -> f64 {
        match self.kind {
            SpaceKind::Hyperbolic2 => (-self.inner(v, v)).max(0.0).sqrt(),
            _ => self.inner(v, v).max(0.0).sqrt(),
        }
    }

    /// Riemannian inner product of two tangent vectors at the same point.
    pub fn metric(&self, u: &Vec3, w: &Vec3) -> f64 {
        match self.kind {
            SpaceKind::Hyperbolic2 => -self.inner(u, w),
            _ => self.inner(u, w),
        }
    }

    /// Symplectic (area) form evaluated on two tangent vectors at `m`.
    pub fn symplectic_form(&self, m: &Point, u: &Vec3, w: &Vec3) -> f64 {
        match self.kind {
            SpaceKind::Euclidean2 => u.x * w.y - u.y * w.x,
            _ => det3(&m.0, u, w),
        }
    }

    /// Pulls a point back onto the constraint surface.
    pub fn renormalize(&self, v: Vec3) -> Point {
        match self.kind {
            SpaceKind::Euclidean2 => Point(Vec3::new(v.x, v.y, 0.0)),
            SpaceKind::Sphere2 => Point(v / v.norm()),
            SpaceKind::Hyperbolic2 => {
                let q = self.inner(&v, &v);
                Point(v / q.abs().sqrt())
            }
        }
    }

    // ------------------------------------------------------------------
    // geodesics

    pub fn exp_map(&self, m: &Point, v: &Tangent) -> Point {
        self.exp_vec(m, &v.vec)
    }

    /// Geodesic flow at time one from `m` along the ambient tangent vector `v`.
    pub fn exp_vec(&self, m: &Point, v: &Vec3) -> Point {
        match self.kind {
            SpaceKind::Euclidean2 => Point(m.0 + v),
            SpaceKind::Sphere2 => {
                let n = v.norm();
                let s = sinc(n);
                self.renormalize(m.0 * n.cos() + v * s)
            }
            SpaceKind::Hyperbolic2 => {
                let n = self.tangent_norm(v);
                let s = sinhc(n);
                self.renormalize(m.0 * n.cosh() + v * s)
            }
        }
    }

    /// Inverse of [`Space::exp_map`] along the short geodesic.
    pub fn log_map(&self, m1: &Point, m2: &Point) -> Result<Tangent> {
        let a = &m1.0;
        let b = &m2.0;
        let vec = match self.kind {
            SpaceKind::Euclidean2 => b - a,
            SpaceKind::Sphere2 => {
                if (a + b).norm() <= ANTIPODAL_TOL {
                    return Err(Error::AntipodalPair);
                }
                let c = a.dot(b);
                let u = b - a * c;
                let s = u.norm();
                if s == 0.0 {
                    Vec3::zeros()
                } else {
                    let d = s.atan2(c);
                    u * (d / s)
                }
            }
            SpaceKind::Hyperbolic2 => {
                let c = self.inner(a, b);
                let u = b - a * c;
                let s = self.tangent_norm(&u);
                if s == 0.0 {
                    Vec3::zeros()
                } else {
                    u * (s.asinh() / s)
                }
            }
        };
        Ok(Tangent { base: *m1, vec })
    }

    /// Geodesic distance.
    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        let d = a.0 - b.0;
        match self.kind {
            SpaceKind::Euclidean2 => d.norm(),
            SpaceKind::Sphere2 => 2.0 * (0.5 * d.norm()).min(1.0).asin(),
            SpaceKind::Hyperbolic2 => 2.0 * (0.5 * (-self.inner(&d, &d)).max(0.0).sqrt()).asinh(),
        }
    }

    /// Midpoint of the short geodesic between `m1` and `m2`.
    pub fn midpoint(&self, m1: &Point, m2: &Point) -> Result<Point> {
        let s = m1.0 + m2.0;
        match self.kind {
            SpaceKind::Euclidean2 => Ok(Point(s * 0.5)),
            SpaceKind::Sphere2 => {
                let n = s.norm();
                if n <= ANTIPODAL_TOL {
                    return Err(Error::AntipodalPair);
                }
                Ok(Point(s / n))
            }
            SpaceKind::Hyperbolic2 => Ok(Point(s / self.inner(&s, &s).sqrt())),
        }
    }

    /// Point reflection through `p`.
    pub fn geodesic_symmetry(&self, p: &Point, x: &Point) -> Point {
        match self.kind {
            SpaceKind::Euclidean2 => Point(p.0 * 2.0 - x.0),
            _ => {
                let k = 2.0 * self.inner(&p.0, &x.0);
                self.renormalize(p.0 * k - x.0)
            }
        }
    }

    /// Inverse of the chord map `(m, v) -> (exp_m(-v), exp_m(v))`.
    pub fn chord_decompose(&self, m1: &Point, m2: &Point) -> Result<(Point, Tangent)> {
        let m = self.midpoint(m1, m2)?;
        let v = self.log_map(&m, m2)?;
        Ok((m, v))
    }

    /// The chord map itself.
    pub fn chord(&self, m: &Point, v: &Vec3) -> (Point, Point) {
        (self.exp_vec(m, &-v), self.exp_vec(m, v))
    }

    /// Whether the chord map is a local diffeomorphism onto its image at `(m, v)`.
    pub fn in_u(&self, v: &Tangent) -> bool {
        match self.kind {
            SpaceKind::Sphere2 => self.tangent_norm(&v.vec) < FRAC_PI_2,
            _ => true,
        }
    }

    // ------------------------------------------------------------------
    // fiber frames and charts

    /// Orthonormal, positively oriented frame of `T_m M`.
    ///
    /// Built by Gram-Schmidt from the x axis; on the sphere the y axis is used
    /// instead when `m` is within 30 degrees of `(+-1, 0, 0)`.
    pub fn frame(&self, m: &Point) -> (Vec3, Vec3) {
        let m = &m.0;
        match self.kind {
            SpaceKind::Euclidean2 => (Vec3::x(), Vec3::y()),
            SpaceKind::Sphere2 => {
                let mut r = Vec3::x();
                let mut w = r - m * r.dot(m);
                if w.norm() < 0.5 {
                    r = Vec3::y();
                    w = r - m * r.dot(m);
                }
                let e1 = w.normalize();
                let e2 = m.cross(&e1).normalize();
                (e1, e2)
            }
            SpaceKind::Hyperbolic2 => {
                let r = Vec3::x();
                let w = r - m * self.inner(&r, m);
                let e1 = w / (-self.inner(&w, &w)).sqrt();
                let c = m.cross(&e1);
                let e2 = -Vec3::new(-c.x, -c.y, c.z);
                let e2 = e2 / (-self.inner(&e2, &e2)).sqrt();
                (e1, e2)
            }
        }
    }

    /// Tangent vector at `m` with frame components `c`.
    pub fn fiber_vector(&self, m: &Point, c: [f64; 2]) -> Tangent {
        let (e1, e2) = self.frame(m);
        Tangent { base: *m, vec: e1 * c[0] + e2 * c[1] }
    }

    /// Frame components of a tangent vector.
    pub fn fiber_coords(&self, v: &Tangent) -> [f64; 2] {
        let (e1, e2) = self.frame(&v.base);
        [self.metric(&v.vec, &e1), self.metric(&v.vec, &e2)]
    }

    /// Normal (exponential) chart centred at `m`.
    pub fn normal_chart_point(&self, m: &Point, c: [f64; 2]) -> Point {
        let v = self.fiber_vector(m, c);
        self.exp_vec(m, &v.vec)
    }

    /// Inverse of [`Space::normal_chart_point`].
    pub fn normal_chart_coords(&self, m: &Point, x: &Point) -> Result<[f64; 2]> {
        let v = self.log_map(m, x)?;
        Ok(self.fiber_coords(&v))
    }

    /// Liouville density of a normal chart at geodesic radius `r`.
    pub fn normal_chart_density(&self, r: f64) -> f64 {
        match self.kind {
            SpaceKind::Euclidean2 => 1.0,
            SpaceKind::Hyperbolic2 => sinhc(r),
            SpaceKind::Sphere2 => sinc(r),
        }
    }

    /// Coordinates in the fixed surface chart: `(p, q)` on the plane, `(x, y)`
    /// on the hyperboloid, stereographic projection from the south pole on the
    /// sphere.
    pub fn chart_coords(&self, p: &Point) -> [f64; 2] {
        let v = &p.0;
        match self.kind {
            SpaceKind::Euclidean2 | SpaceKind::Hyperbolic2 => [v.x, v.y],
            SpaceKind::Sphere2 => [v.x / (1.0 + v.z), v.y / (1.0 + v.z)],
        }
    }

    pub fn chart_point(&self, c: [f64; 2]) -> Point {
        match self.kind {
            SpaceKind::Euclidean2 => Point(Vec3::new(c[0], c[1], 0.0)),
            SpaceKind::Hyperbolic2 => self.hyperboloid_point(c[0], c[1]),
            SpaceKind::Sphere2 => {
                let r2 = c[0] * c[0] + c[1] * c[1];
                let d = 1.0 + r2;
                Point(Vec3::new(2.0 * c[0] / d, 2.0 * c[1] / d, (1.0 - r2) / d))
            }
        }
    }

    /// Liouville density of the fixed surface chart at `p`.
    pub fn chart_density(&self, p: &Point) -> f64 {
        match self.kind {
            SpaceKind::Euclidean2 => 1.0,
            SpaceKind::Hyperbolic2 => 1.0 / p.0.z,
            SpaceKind::Sphere2 => {
                let [x, y] = self.chart_coords(p);
                let d = 1.0 + x * x + y * y;
                4.0 / (d * d)
            }
        }
    }

    /// Partial derivatives of the surface chart parametrization at chart point `c`.
    pub fn chart_tangents(&self, c: [f64; 2]) -> (Vec3, Vec3) {
        let [x, y] = c;
        match self.kind {
            SpaceKind::Euclidean2 => (Vec3::x(), Vec3::y()),
            SpaceKind::Hyperbolic2 => {
                let z = (1.0 + x * x + y * y).sqrt();
                (Vec3::new(1.0, 0.0, x / z), Vec3::new(0.0, 1.0, y / z))
            }
            SpaceKind::Sphere2 => {
                let d = 1.0 + x * x + y * y;
                let d2 = d * d;
                (
                    Vec3::new(2.0 * (d - 2.0 * x * x) / d2, -4.0 * x * y / d2, -4.0 * x / d2),
                    Vec3::new(-4.0 * x * y / d2, 2.0 * (d - 2.0 * y * y) / d2, -4.0 * y / d2),
                )
            }
        }
    }

    // ------------------------------------------------------------------
    // fiber measure

    /// Density of the fiber measure `dv` on `T_m M` relative to the Lebesgue
    /// measure of the frame coordinates of [`Space::frame`].
    ///
    /// `dv` is characterised by `dmu_M * dv = dmu_TM`, where `dmu_TM` is the
    /// Liouville volume of the pull-back of `(omega, -omega)` under the chord
    /// map. The pull-back is evaluated by central differences in coordinates
    /// (normal chart at `m`, frame components of `v`); the normal chart has unit
    /// density at its centre so the Pfaffian is the density itself.
    pub fn dv_density(&self, v: &Tangent) -> Result<f64> {
        if !self.in_u(v) {
            return Err(Error::OutsideU { length: self.tangent_norm(&v.vec) });
        }
        let m = v.base;
        let c = self.fiber_coords(v);
        let scale = self.tangent_norm(&v.vec).max(1.0);
        let h = DENSITY_FD_STEP * scale;
        let eval = |x: [f64; 4]| -> (Point, Point) {
            let mm = self.normal_chart_point(&m, [x[0], x[1]]);
            let w = self.fiber_vector(&mm, [x[2], x[3]]);
            self.chord(&mm, &w.vec)
        };
        let x0 = [0.0, 0.0, c[0], c[1]];
        let mut d1 = [Vec3::zeros(); 4];
        let mut d2 = [Vec3::zeros(); 4];
        for i in 0..4 {
            let mut xp = x0;
            let mut xm = x0;
            xp[i] += h;
            xm[i] -= h;
            let (p1, p2) = eval(xp);
            let (q1, q2) = eval(xm);
            d1[i] = (p1.0 - q1.0) / (2.0 * h);
            d2[i] = (p2.0 - q2.0) / (2.0 * h);
        }
        let (m1, m3) = eval(x0);
        let mut omega = Matrix4::zeros();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let w = self.symplectic_form(&m1, &d1[i], &d1[j]) - self.symplectic_form(&m3, &d2[i], &d2[j]);
                omega[(i, j)] = w;
                omega[(j, i)] = -w;
            }
        }
        Ok(pfaffian4(&omega).abs())
    }
}

/// Pfaffian of an antisymmetric 4x4 matrix.
pub(crate) fn pfaffian4(a: &Matrix4<f64>) -> f64 {
    a[(0, 1)] * a[(2, 3)] - a[(0, 2)] * a[(1, 3)] + a[(0, 3)] * a[(1, 2)]
}

pub(crate) fn det3(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    a.dot(&b.cross(c))
}

/// `sin(x)/x`, accurate near zero.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `sinh(x)/x`, accurate near zero.
pub(crate) fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}
