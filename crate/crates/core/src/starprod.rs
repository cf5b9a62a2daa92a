//! The deformed product: the two-point integral, the product integrated in
//! `(v, m2)` coordinates, and the same product integrated directly over
//! midpoint pairs with the amplitude `A`.
//!
//! All integrals use tensor midpoint rules with dyadic refinement. The
//! reported `refine_error` is the difference between the two finest levels.
//! Sums are reduced in a fixed order keyed to grid indices, so results do not
//! depend on the number of worker threads.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{det3, Point, Space, SpaceKind, Vec3, ANTIPODAL_TOL};
use crate::triangles::{corner_area_raw, fixed_vector_fast, sphere_midpoint_area, FLAT_AMPLITUDE};

/// `N(hbar) = (pi hbar)^-2 / 16`, so that `N * A_flat` is the Weyl kernel constant.
pub fn normalization(hbar: f64) -> f64 {
    1.0 / (16.0 * (PI * hbar).powi(2))
}

/// Orientation of the phase relative to the corner area of `(m3, m2, m1)`.
/// Fixed once by requiring the planar product to satisfy
/// `f * g = fg + (i hbar / 2){f, g} + O(hbar^2)` with `{p, q} = 1`.
pub const PHASE_ORIENTATION: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    /// Nodes per axis on the finest level.
    pub resolution: usize,
    /// Half-width of the coordinate boxes (normal coordinates); unused on the sphere.
    pub truncation_radius: f64,
    /// Number of dyadic levels; level `k` below the finest halves the resolution `k` times.
    pub levels: usize,
    /// Optional `sinh` stretch: box nodes `x = R sinh(beta s) / sinh(beta)`.
    pub stretch: Option<f64>,
    /// Fraction of the box half-width over which the truncation window falls
    /// smoothly from 1 to 0; `0` gives a hard cutoff.
    pub taper: f64,
    /// Midpoint-form cutoff: pairs with `1 - det^2` below this are dropped.
    pub collar: f64,
    /// Fail with `NonConvergent` when the refinement error exceeds this bound.
    pub tolerance: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            resolution: 64,
            truncation_radius: 8.0,
            levels: 2,
            stretch: None,
            taper: 0.25,
            collar: 1e-6,
            tolerance: None,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::InvalidSpec(s.to_string()));
        if self.resolution < 8 {
            return bad("resolution must be at least 8");
        }
        if self.levels < 2 {
            return bad("at least two refinement levels are required");
        }
        if self.resolution >> (self.levels - 1) < 4 {
            return bad("coarsest level would have fewer than 4 nodes per axis");
        }
        if !(self.truncation_radius.is_finite() && self.truncation_radius > 0.0) {
            return bad("truncation radius must be positive");
        }
        if let Some(b) = self.stretch {
            if !(b.is_finite() && b > 0.0) {
                return bad("stretch must be positive");
            }
        }
        if !(self.taper >= 0.0 && self.taper <= 1.0) {
            return bad("taper must lie in [0, 1]");
        }
        if !(self.collar >= 0.0 && self.collar < 1.0) {
            return bad("collar must lie in [0, 1)");
        }
        if let Some(t) = self.tolerance {
            if t.is_nan() || t < 0.0 {
                return bad("tolerance must be non-negative");
            }
        }
        Ok(())
    }

    /// Smooth truncation window of one box coordinate.
    pub fn window(&self, t: f64) -> f64 {
        let r = self.truncation_radius;
        let t = t.abs();
        if t >= r {
            return 0.0;
        }
        let inner = r * (1.0 - self.taper);
        if t <= inner {
            return 1.0;
        }
        let s = (t - inner) / (r - inner);
        let psi = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
        psi(1.0 - s) / (psi(1.0 - s) + psi(s))
    }

    fn window2(&self, c: [f64; 2]) -> f64 {
        self.window(c[0]) * self.window(c[1])
    }

    /// Resolutions of all levels, coarsest first.
    pub fn level_resolutions(&self) -> Vec<usize> {
        (0..self.levels).rev().map(|k| (self.resolution >> k).max(1)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelValue {
    pub resolution: usize,
    pub value: Complex64,
    pub samples: u64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarResult {
    pub value: Complex64,
    pub refine_error: f64,
    pub samples_used: u64,
    pub levels: Vec<LevelValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Planar fields that split as sums of products use an `O(n^3)` matrix path.
    #[default]
    Auto,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StarOptions {
    pub normalization: Option<f64>,
    pub strategy: Strategy,
}

impl StarOptions {
    fn norm(&self, space: &Space) -> f64 {
        self.normalization.unwrap_or_else(|| normalization(space.hbar()))
    }
}

// ----------------------------------------------------------------------
// grids

/// A quadrature node: point, ambient offset data and weight (chart density included).
#[derive(Debug, Clone, Copy)]
struct Node {
    x: Vec3,
    coords: [f64; 2],
    weight: f64,
}

fn axis(n: usize, half_width: f64, stretch: Option<f64>) -> Vec<(f64, f64)> {
    let hs = 2.0 / n as f64;
    (0..n)
        .map(|k| {
            let s = -1.0 + (k as f64 + 0.5) * hs;
            match stretch {
                None => (half_width * s, half_width * hs),
                Some(b) => {
                    let sb = b.sinh();
                    (half_width * (b * s).sinh() / sb, half_width * b * (b * s).cosh() / sb * hs)
                }
            }
        })
        .collect()
}

/// Points `exp_m(c1 e1 + c2 e2)` over a box of normal coordinates at `m`.
fn box_nodes(space: &Space, m: &Point, n: usize, half_width: f64, stretch: Option<f64>) -> Vec<Node> {
    let ax = axis(n, half_width, stretch);
    let mut out = Vec::with_capacity(n * n);
    for &(a, wa) in &ax {
        for &(b, wb) in &ax {
            let r = (a * a + b * b).sqrt();
            let p = space.normal_chart_point(m, [a, b]);
            out.push(Node { x: p.to_vec(), coords: [a, b], weight: wa * wb * space.normal_chart_density(r) });
        }
    }
    out
}

/// Geodesic polar grid about `m` with `n` radii in `(0, rmax)` and `2n` angles.
fn polar_nodes(space: &Space, m: &Point, n: usize, rmax: f64) -> Vec<Node> {
    let hr = rmax / n as f64;
    let hp = PI / n as f64;
    let mut out = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        let r = (i as f64 + 0.5) * hr;
        for j in 0..2 * n {
            let phi = (j as f64 + 0.5) * hp;
            let c = [r * phi.cos(), r * phi.sin()];
            let p = space.normal_chart_point(m, c);
            out.push(Node { x: p.to_vec(), coords: c, weight: hr * hp * r * space.normal_chart_density(r) });
        }
    }
    out
}

/// Grid over the base manifold centred at `m`.
fn manifold_nodes(space: &Space, m: &Point, n: usize, q: &QuadratureSpec) -> Vec<Node> {
    match space.kind() {
        SpaceKind::Sphere2 => polar_nodes(space, m, n, PI),
        _ => {
            let mut nodes = box_nodes(space, m, n, q.truncation_radius, q.stretch);
            for nd in &mut nodes {
                nd.weight *= q.window2(nd.coords);
            }
            nodes
        }
    }
}

/// Fiber grid at `m`: `(v, weight * dv density)`; on the sphere clipped to `|v| < pi/2`.
fn fiber_nodes(space: &Space, m: &Point, n: usize, q: &QuadratureSpec) -> Result<Vec<(Vec3, f64)>> {
    let raw: Vec<(Vec3, f64)> = match space.kind() {
        SpaceKind::Sphere2 => {
            let hr = FRAC_PI_2 / n as f64;
            let hp = PI / n as f64;
            let mut out = Vec::with_capacity(2 * n * n);
            for i in 0..n {
                let r = (i as f64 + 0.5) * hr;
                for j in 0..2 * n {
                    let phi = (j as f64 + 0.5) * hp;
                    let v = space.fiber_vector(m, [r * phi.cos(), r * phi.sin()]);
                    out.push((v.vec, hr * hp * r));
                }
            }
            out
        }
        _ => {
            let ax = axis(n, q.truncation_radius, q.stretch);
            let mut out = Vec::with_capacity(n * n);
            for &(a, wa) in &ax {
                for &(b, wb) in &ax {
                    out.push((space.fiber_vector(m, [a, b]).vec, wa * wb * q.window2([a, b])));
                }
            }
            out
        }
    };
    raw.into_iter()
        .map(|(v, w)| {
            let t = crate::geometry::Tangent::new_unchecked(*m, v);
            Ok((v, w * space.dv_density(&t)?))
        })
        .collect()
}

// ----------------------------------------------------------------------
// summation

pub(crate) fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Evaluates `block(i)` for every outer index in parallel and reduces in index order.
fn ordered_sum<F>(n_outer: usize, block: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    let parts: Vec<Complex64> = (0..n_outer).into_par_iter().map(block).collect();
    pairwise_sum(&parts)
}

// ----------------------------------------------------------------------
// fast embedded-vector kernels

#[inline]
fn mid(kind: SpaceKind, a: &Vec3, b: &Vec3) -> Option<Vec3> {
    let s = a + b;
    match kind {
        SpaceKind::Euclidean2 => Some(s * 0.5),
        SpaceKind::Sphere2 => {
            let n = s.norm();
            (n > ANTIPODAL_TOL).then(|| s / n)
        }
        SpaceKind::Hyperbolic2 => Some(s / (s.z * s.z - s.x * s.x - s.y * s.y).sqrt()),
    }
}

/// Engine phase of the triangle `(m1, m2, m3)` in units of area.
#[inline]
fn phase_area(space: &Space, m1: &Vec3, m2: &Vec3, m3: &Vec3) -> f64 {
    PHASE_ORIENTATION * corner_area_raw(space, m3, m2, m1)
}

fn run_levels<F>(q: &QuadratureSpec, mut level: F) -> Result<StarResult>
where
    F: FnMut(usize) -> Result<(Complex64, u64)>,
{
    q.validate()?;
    let mut levels = Vec::new();
    for n in q.level_resolutions() {
        let t0 = Instant::now();
        let (value, samples) = level(n)?;
        levels.push(LevelValue { resolution: n, value, samples, wall_ms: t0.elapsed().as_secs_f64() * 1e3 });
    }
    let k = levels.len();
    let value = levels[k - 1].value;
    let refine_error = (levels[k - 1].value - levels[k - 2].value).norm();
    let samples_used = levels.iter().map(|l| l.samples).sum();
    if let Some(bound) = q.tolerance {
        if refine_error.is_nan() || refine_error > bound {
            return Err(Error::NonConvergent { refine_error, bound });
        }
    }
    Ok(StarResult { value, refine_error, samples_used, levels })
}

// ----------------------------------------------------------------------
// public integrals

/// `g(m1, m3) = \int f1(mid(m1, m2)) f2(mid(m2, m3)) e^{i S/hbar} dm2`, with the
/// `m2` grid centred at `mid(m1, m3)`.
pub fn two_point_product(
    space: &Space,
    f1: &ScalarField,
    f2: &ScalarField,
    m1: &Point,
    m3: &Point,
    q: &QuadratureSpec,
) -> Result<StarResult> {
    let centre = space.midpoint(m1, m3)?;
    let kind = space.kind();
    let hbar = space.hbar();
    let (a, c) = (m1.to_vec(), m3.to_vec());
    run_levels(q, |n| {
        if f1.is_zero() || f2.is_zero() {
            return Ok((Complex64::new(0.0, 0.0), 0));
        }
        let nodes = manifold_nodes(space, &centre, n, q);
        let value = ordered_sum(nodes.len(), |i| {
            let nd = &nodes[i];
            let (Some(x), Some(y)) = (mid(kind, &a, &nd.x), mid(kind, &nd.x, &c)) else {
                return Complex64::new(0.0, 0.0);
            };
            let ph = phase_area(space, &a, &nd.x, &c) / hbar;
            f1.eval_vec(space, &x) * f2.eval_vec(space, &y) * Complex64::from_polar(nd.weight, ph)
        });
        Ok((value, nodes.len() as u64))
    })
}

/// The product `(f1 * f2)(m)` integrated over `(v, m2)` with the fiber measure `dv`.
pub fn star(space: &Space, f1: &ScalarField, f2: &ScalarField, m: &Point, q: &QuadratureSpec) -> Result<StarResult> {
    star_with(space, f1, f2, m, q, &StarOptions::default())
}

pub fn star_with(
    space: &Space,
    f1: &ScalarField,
    f2: &ScalarField,
    m: &Point,
    q: &QuadratureSpec,
    opts: &StarOptions,
) -> Result<StarResult> {
    let norm = opts.norm(space);
    run_levels(q, |n| star_level(space, f1, f2, m, q, n, opts.strategy).map(|(v, s)| (v * norm, s)))
}

/// A single level of [`star`] at the given resolution, without normalization
/// override; returns the value and the number of integrand samples.
pub fn star_at_resolution(
    space: &Space,
    f1: &ScalarField,
    f2: &ScalarField,
    m: &Point,
    q: &QuadratureSpec,
    resolution: usize,
    opts: &StarOptions,
) -> Result<(Complex64, u64)> {
    q.validate()?;
    let (v, s) = star_level(space, f1, f2, m, q, resolution, opts.strategy)?;
    Ok((v * opts.norm(space), s))
}

fn star_level(
    space: &Space,
    f1: &ScalarField,
    f2: &ScalarField,
    m: &Point,
    q: &QuadratureSpec,
    n: usize,
    strategy: Strategy,
) -> Result<(Complex64, u64)> {
    if f1.is_zero() || f2.is_zero() {
        return Ok((Complex64::new(0.0, 0.0), 0));
    }
    if strategy == Strategy::Auto {
        if let (Some(a), Some(b)) = (f1.planar_factors(space), f2.planar_factors(space)) {
            return Ok(planar_separable(space, &a, &b, m, q, n));
        }
    }
    let kind = space.kind();
    let hbar = space.hbar();
    let fibers = fiber_nodes(space, m, n, q)?;
    let base = manifold_nodes(space, m, n, q);
    let chords: Vec<(Vec3, Vec3, f64)> = fibers
        .iter()
        .map(|(v, w)| {
            let (a, b) = space.chord(m, v);
            (a.to_vec(), b.to_vec(), *w)
        })
        .collect();
    let value = ordered_sum(chords.len(), |i| {
        let (m1, m3, wv) = &chords[i];
        let mut acc = Vec::with_capacity(base.len());
        for nd in &base {
            let (Some(x), Some(y)) = (mid(kind, m1, &nd.x), mid(kind, &nd.x, m3)) else {
                continue;
            };
            let ph = phase_area(space, m1, &nd.x, m3) / hbar;
            acc.push(f1.eval_vec(space, &x) * f2.eval_vec(space, &y) * Complex64::from_polar(nd.weight, ph));
        }
        pairwise_sum(&acc) * *wv
    });
    Ok((value, (chords.len() * base.len()) as u64))
}

/// Planar fast path for fields of the form `sum X(p) Y(q)`.
///
/// With `m2 = m + xi` and `(m1, m3) = (m - v, m + v)` the phase is
/// `sigma(xi, v) = xi_p v_q - xi_q v_p`, so the four-dimensional midpoint sum
/// is `sum E[xp, vq] conj(E)[xq, vp] P[xp, vp] Q[xq, vq]` with
/// `E[a, b] = exp(i a b / hbar)`, evaluated with two matrix products.
fn planar_separable(
    space: &Space,
    f1: &[(Complex64, crate::field::Factor1D, crate::field::Factor1D)],
    f2: &[(Complex64, crate::field::Factor1D, crate::field::Factor1D)],
    m: &Point,
    q: &QuadratureSpec,
    n: usize,
) -> (Complex64, u64) {
    let hbar = space.hbar();
    let ax = axis(n, q.truncation_radius, q.stretch);
    let win: Vec<f64> = ax.iter().map(|(x, _)| q.window(*x)).collect();
    let e = DMatrix::from_fn(n, n, |a, b| Complex64::from_polar(1.0, ax[a].0 * ax[b].0 / hbar));
    let ec = e.map(|z| z.conj());
    let (mp, mq) = (m.coords().x, m.coords().y);
    let density = 4.0;
    let mut parts = Vec::new();
    for (c1, x1, y1) in f1 {
        for (c2, x2, y2) in f2 {
            let p = DMatrix::from_fn(n, n, |a, b| {
                let (xi, wa) = ax[a];
                let (v, wb) = ax[b];
                x1.eval(mp + 0.5 * (xi - v)) * x2.eval(mp + 0.5 * (xi + v)) * (wa * wb * win[a] * win[b])
            });
            let qm = DMatrix::from_fn(n, n, |a, b| {
                let (xi, wa) = ax[a];
                let (v, wb) = ax[b];
                y1.eval(mq + 0.5 * (xi - v)) * y2.eval(mq + 0.5 * (xi + v)) * (wa * wb * win[a] * win[b])
            });
            let u = &p * (&ec * &qm);
            let terms: Vec<Complex64> = e.iter().zip(u.iter()).map(|(a, b)| a * b).collect();
            parts.push(pairwise_sum(&terms) * c1 * c2 * density);
        }
    }
    (pairwise_sum(&parts), (n as u64).pow(4))
}

/// The product integrated directly over midpoint pairs `(m', m'')` with the
/// amplitude and the midpoint-form phase; a validation path.
///
/// On the plane and the hyperbolic plane each pair is weighted by the
/// truncation window of [`star`] evaluated at its preimage `(v, m2)`, so both
/// forms integrate the same windowed integrand.
pub fn star_midpoint_form(
    space: &Space,
    f1: &ScalarField,
    f2: &ScalarField,
    m: &Point,
    q: &QuadratureSpec,
) -> Result<StarResult> {
    star_midpoint_form_with(space, f1, f2, m, q, &StarOptions::default())
}

pub fn star_midpoint_form_with(
    space: &Space,
    f1: &ScalarField,
    f2: &ScalarField,
    m: &Point,
    q: &QuadratureSpec,
    opts: &StarOptions,
) -> Result<StarResult> {
    let norm = opts.norm(space);
    run_levels(q, |n| midpoint_level(space, f1, f2, m, q, n).map(|(v, s)| (v * norm, s)))
}

fn midpoint_level(
    space: &Space,
    f1: &ScalarField,
    f2: &ScalarField,
    m: &Point,
    q: &QuadratureSpec,
    n: usize,
) -> Result<(Complex64, u64)> {
    if f1.is_zero() || f2.is_zero() {
        return Ok((Complex64::new(0.0, 0.0), 0));
    }
    let kind = space.kind();
    let hbar = space.hbar();
    let r = q.truncation_radius;
    let nodes = match kind {
        SpaceKind::Sphere2 => polar_nodes(space, m, n, PI),
        SpaceKind::Euclidean2 => box_nodes(space, m, n, r, q.stretch),
        SpaceKind::Hyperbolic2 => box_nodes(space, m, n, r * 2f64.sqrt(), q.stretch),
    };
    let g1: Vec<Complex64> = nodes.iter().map(|nd| f1.eval_vec(space, &nd.x) * nd.weight).collect();
    let g2: Vec<Complex64> = nodes.iter().map(|nd| f2.eval_vec(space, &nd.x) * nd.weight).collect();
    let a = m.to_vec();
    let (e1, e2) = space.frame(m);
    let coords_at = |w: &Vec3| -> [f64; 2] { [space.metric(w, &e1), space.metric(w, &e2)] };
    let value = ordered_sum(nodes.len(), |i| {
        if g1[i].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let b = nodes[i].x;
        let pab = space.inner(&a, &b);
        let mut acc = Vec::with_capacity(nodes.len());
        for (j, nd) in nodes.iter().enumerate() {
            if g2[j].norm() == 0.0 {
                continue;
            }
            let c = nd.x;
            let (area, amp) = match kind {
                SpaceKind::Euclidean2 => {
                    let (u, w) = (nodes[i].coords, nd.coords);
                    let xi = [u[0] + w[0], u[1] + w[1]];
                    let v = [w[0] - u[0], w[1] - u[1]];
                    let win = q.window2(xi) * q.window2(v);
                    if win == 0.0 {
                        continue;
                    }
                    (2.0 * (u[0] * w[1] - u[1] * w[0]), FLAT_AMPLITUDE * win)
                }
                SpaceKind::Hyperbolic2 => {
                    let d = det3(&a, &b, &c);
                    let margin = 1.0 - d * d;
                    if margin <= q.collar {
                        continue;
                    }
                    let Some((v, xi)) = preimage_h2(space, &a, &b, &c, &coords_at) else { continue };
                    let win = q.window2(v) * q.window2(xi);
                    if win == 0.0 {
                        continue;
                    }
                    let prod = pab * space.inner(&b, &c) * space.inner(&c, &a);
                    (2.0 * d.asin(), FLAT_AMPLITUDE * prod * margin.powf(-2.5) * win)
                }
                SpaceKind::Sphere2 => {
                    let (pbc, pca) = (b.dot(&c), c.dot(&a));
                    let s = pab.signum();
                    if pab == 0.0 || pbc == 0.0 || pca == 0.0 || pbc.signum() != s || pca.signum() != s {
                        continue;
                    }
                    let d = det3(&a, &b, &c);
                    let margin = 1.0 - d * d;
                    if margin <= q.collar {
                        continue;
                    }
                    let prod = (pab * pbc * pca).abs();
                    (sphere_midpoint_area(d, s), FLAT_AMPLITUDE * prod * margin.powf(-2.5))
                }
            };
            acc.push(g2[j] * Complex64::from_polar(amp, area / hbar));
        }
        pairwise_sum(&acc) * g1[i]
    });
    Ok((value, (nodes.len() * nodes.len()) as u64))
}

/// `(v, xi)` frame coordinates of the preimage of the midpoint pair `(b, c)`
/// based at `a`: `m3 = exp_a(v)` spans the fixed line of the composed
/// reflections, `m1 = s_a(m3)`, `m2 = s_b(m1) = exp_a(xi)`.
fn preimage_h2<F>(space: &Space, a: &Vec3, b: &Vec3, c: &Vec3, coords_at: &F) -> Option<([f64; 2], [f64; 2])>
where
    F: Fn(&Vec3) -> [f64; 2],
{
    let f = fixed_vector_fast(space, a, b, c)?;
    let qf = space.inner(&f, &f);
    if qf <= 0.0 {
        return None;
    }
    let mut m3 = f / qf.sqrt();
    if m3.z < 0.0 {
        m3 = -m3;
    }
    let m1 = a * (2.0 * space.inner(a, &m3)) - m3;
    let m2 = b * (2.0 * space.inner(b, &m1)) - m1;
    let log = |x: &Vec3| -> Vec3 {
        let cth = space.inner(a, x);
        let u = x - a * cth;
        let s = (-space.inner(&u, &u)).max(0.0).sqrt();
        if s == 0.0 {
            u
        } else {
            u * (s.asinh() / s)
        }
    };
    Some((coords_at(&log(&m3)), coords_at(&log(&m2))))
}
