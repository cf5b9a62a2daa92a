//! Geodesic triangles: oriented symplectic areas from corners and from side
//! midpoints, recovery of corners from midpoints, the midpoint domain `W`,
//! the midpoint map `Psi` and the amplitude `A`.
//!
//! Midpoint ordering is fixed throughout: `alpha = mid(a, b)`,
//! `beta = mid(b, c)`, `gamma = mid(c, a)`.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{det3, Point, Space, SpaceKind, Tangent, Vec3, ANTIPODAL_TOL};

/// Amplitude of the degenerate (flat) configuration.
pub const FLAT_AMPLITUDE: f64 = 16.0;

/// Below this margin `1 - det^2` the amplitude is reported as divergent.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

/// Threshold on the second-smallest singular value of `M - I` below which the
/// fixed space of the composed reflections counts as more than one-dimensional.
pub const DEGENERACY_TOL: f64 = 1e-9;

const RECOVERY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerTriple {
    pub a: Point,
    pub b: Point,
    pub c: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MidpointTriple {
    pub alpha: Point,
    pub beta: Point,
    pub gamma: Point,
}

/// Which of the three midpoint scalar products agree in sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Eta {
    Minus,
    Zero,
    Plus,
}

impl Eta {
    pub fn value(self) -> f64 {
        match self {
            Eta::Minus => -1.0,
            Eta::Zero => 0.0,
            Eta::Plus => 1.0,
        }
    }
}

impl CornerTriple {
    pub fn new(a: Point, b: Point, c: Point) -> Self {
        CornerTriple { a, b, c }
    }
}

impl MidpointTriple {
    pub fn new(alpha: Point, beta: Point, gamma: Point) -> Self {
        MidpointTriple { alpha, beta, gamma }
    }

    /// The three scalar products `<alpha|beta>`, `<beta|gamma>`, `<gamma|alpha>`.
    pub fn products(&self, space: &Space) -> [f64; 3] {
        let (a, b, c) = (self.alpha.coords(), self.beta.coords(), self.gamma.coords());
        [space.inner(a, b), space.inner(b, c), space.inner(c, a)]
    }

    pub fn det(&self) -> f64 {
        det3(self.alpha.coords(), self.beta.coords(), self.gamma.coords())
    }
}

fn shoelace(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let u = b - a;
    let w = c - a;
    0.5 * (u.x * w.y - u.y * w.x)
}

/// Oriented symplectic area of the geodesic triangle with corners `a, b, c`.
pub fn area_from_corners(space: &Space, t: &CornerTriple) -> Result<f64> {
    let (a, b, c) = (t.a.coords(), t.b.coords(), t.c.coords());
    match space.kind() {
        SpaceKind::Euclidean2 => Ok(shoelace(a, b, c)),
        kind => {
            if kind == SpaceKind::Sphere2 {
                for (x, y) in [(a, b), (b, c), (c, a)] {
                    if (x + y).norm() <= ANTIPODAL_TOL {
                        return Err(Error::SideTooLong { length: PI });
                    }
                }
            }
            Ok(corner_area_raw(space, a, b, c))
        }
    }
}

/// `2 Arg(1 + <a|b> + <b|c> + <c|a> + i det(a, b, c))` without domain checks.
pub(crate) fn corner_area_raw(space: &Space, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    match space.kind() {
        SpaceKind::Euclidean2 => shoelace(a, b, c),
        _ => {
            let re = 1.0 + space.inner(a, b) + space.inner(b, c) + space.inner(c, a);
            2.0 * det3(a, b, c).atan2(re)
        }
    }
}

/// Majority sign of three numbers; zero when no sign holds a strict majority.
pub fn eta_sign(p_ab: f64, p_bg: f64, p_ga: f64) -> Eta {
    let s = [p_ab, p_bg, p_ga].map(sign);
    let plus = s.iter().filter(|&&x| x > 0).count();
    let minus = s.iter().filter(|&&x| x < 0).count();
    if plus >= 2 {
        Eta::Plus
    } else if minus >= 2 {
        Eta::Minus
    } else {
        Eta::Zero
    }
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Oriented area of the triangle whose side midpoints are `m`.
pub fn area_from_midpoints(space: &Space, m: &MidpointTriple) -> Result<f64> {
    let (a, b, c) = (m.alpha.coords(), m.beta.coords(), m.gamma.coords());
    match space.kind() {
        SpaceKind::Euclidean2 => Ok(4.0 * shoelace(a, b, c)),
        SpaceKind::Hyperbolic2 => {
            let d = det3(a, b, c);
            if d * d >= 1.0 {
                return Err(Error::OutsideW);
            }
            Ok(2.0 * d.asin())
        }
        SpaceKind::Sphere2 => {
            let [p, q, r] = m.products(space);
            let eta = eta_sign(p, q, r).value();
            Ok(sphere_midpoint_area(det3(a, b, c), eta))
        }
    }
}

pub(crate) fn sphere_midpoint_area(d: f64, eta: f64) -> f64 {
    let c = (1.0 - d * d).max(0.0).sqrt();
    2.0 * d.atan2(eta * c)
}

/// Membership of `(m2, m3)` in the midpoint domain `W` of `base`.
pub fn in_w(space: &Space, base: &Point, m2: &Point, m3: &Point) -> bool {
    let (a, b, c) = (base.coords(), m2.coords(), m3.coords());
    match space.kind() {
        SpaceKind::Euclidean2 => true,
        SpaceKind::Hyperbolic2 => {
            let d = det3(a, b, c);
            d * d < 1.0
        }
        SpaceKind::Sphere2 => {
            let s1 = sign(space.inner(b, c));
            s1 == sign(space.inner(a, b)) && s1 == sign(space.inner(a, c))
        }
    }
}

/// Amplitude `A(base, m2, m3)` of the midpoint form of the product.
pub fn amplitude(space: &Space, base: &Point, m2: &Point, m3: &Point) -> Result<f64> {
    if !in_w(space, base, m2, m3) {
        return Err(Error::OutsideW);
    }
    if space.kind() == SpaceKind::Euclidean2 {
        return Ok(FLAT_AMPLITUDE);
    }
    let (a, b, c) = (base.coords(), m2.coords(), m3.coords());
    let d = det3(a, b, c);
    let margin = 1.0 - d * d;
    if margin < BOUNDARY_MARGIN {
        return Err(Error::BoundaryDivergence { margin });
    }
    let prod = space.inner(a, b) * space.inner(b, c) * space.inner(c, a);
    Ok(FLAT_AMPLITUDE * prod.abs() * margin.powf(-2.5))
}

pub fn midpoints_from_corners(space: &Space, t: &CornerTriple) -> Result<MidpointTriple> {
    Ok(MidpointTriple {
        alpha: space.midpoint(&t.a, &t.b)?,
        beta: space.midpoint(&t.b, &t.c)?,
        gamma: space.midpoint(&t.c, &t.a)?,
    })
}

/// Matrix of the geodesic symmetry through `p` acting on embedding coordinates.
fn reflection(space: &Space, p: &Vec3) -> Matrix3<f64> {
    let g = match space.kind() {
        SpaceKind::Hyperbolic2 => Matrix3::from_diagonal(&Vec3::new(-1.0, -1.0, 1.0)),
        _ => Matrix3::identity(),
    };
    p * p.transpose() * g * 2.0 - Matrix3::identity()
}

/// Recovers the corners of the triangle whose side midpoints are `m`.
///
/// Corner `a` spans the fixed line of `s_gamma s_beta s_alpha`; then
/// `b = s_alpha(a)` and `c = s_beta(b)`.
pub fn corners_from_midpoints(space: &Space, m: &MidpointTriple) -> Result<CornerTriple> {
    let (al, be, ga) = (m.alpha.coords(), m.beta.coords(), m.gamma.coords());
    if space.kind() == SpaceKind::Euclidean2 {
        let a = al - be + ga;
        let b = al * 2.0 - a;
        let c = be * 2.0 - b;
        return Ok(CornerTriple {
            a: Point::from_vec_unchecked(a),
            b: Point::from_vec_unchecked(b),
            c: Point::from_vec_unchecked(c),
        });
    }
    if space.kind() == SpaceKind::Hyperbolic2 {
        let d = m.det();
        if d * d >= 1.0 {
            return Err(Error::OutsideW);
        }
    }
    let sa = reflection(space, al);
    let sb = reflection(space, be);
    let sg = reflection(space, ga);
    let k = sg * sb * sa - Matrix3::identity();
    let svd = k.svd(false, true);
    let vt = svd.v_t.ok_or(Error::DegenerateMidpoints)?;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let scale = k.norm().max(1.0);
    if svd.singular_values[order[1]] < DEGENERACY_TOL * scale {
        return Err(Error::DegenerateMidpoints);
    }
    let fixed: Vec3 = vt.row(order[0]).transpose();
    let candidates: Vec<Vec3> = match space.kind() {
        SpaceKind::Hyperbolic2 => {
            let q = space.inner(&fixed, &fixed);
            if q <= 0.0 {
                return Err(Error::OutsideW);
            }
            let a = fixed / q.sqrt();
            vec![if a.z < 0.0 { -a } else { a }]
        }
        _ => {
            let a = fixed.normalize();
            vec![a, -a]
        }
    };
    let mut best: Option<(f64, CornerTriple)> = None;
    for a in candidates {
        let a = space.renormalize(a);
        let b = space.renormalize(sa * a.coords());
        let c = space.renormalize(sb * b.coords());
        let t = CornerTriple { a, b, c };
        let Ok(back) = midpoints_from_corners(space, &t) else { continue };
        let err = (back.alpha.coords() - al)
            .amax()
            .max((back.beta.coords() - be).amax())
            .max((back.gamma.coords() - ga).amax());
        let scale = al.amax().max(be.amax()).max(ga.amax()).max(1.0);
        if err <= RECOVERY_TOL * scale && !matches!(best, Some((e, _)) if err >= e) {
            best = Some((err, t));
        }
    }
    best.map(|(_, t)| t).ok_or(Error::OutsideW)
}

/// Fixed vector of the composed reflections from a cross product of rows of
/// `M - I`; cheaper than an SVD and used inside quadrature loops where
/// degenerate inputs only occur on null sets.
pub(crate) fn fixed_vector_fast(space: &Space, al: &Vec3, be: &Vec3, ga: &Vec3) -> Option<Vec3> {
    let k = reflection(space, ga) * reflection(space, be) * reflection(space, al) - Matrix3::identity();
    let r0: Vec3 = k.row(0).transpose();
    let r1: Vec3 = k.row(1).transpose();
    let r2: Vec3 = k.row(2).transpose();
    let cands = [r0.cross(&r1), r1.cross(&r2), r2.cross(&r0)];
    let best = cands.iter().max_by(|x, y| x.norm_squared().total_cmp(&y.norm_squared()))?;
    if best.norm() <= 1e-14 * k.norm().powi(2).max(1.0) {
        return None;
    }
    Some(*best)
}

/// The map `Psi(v, m2) = (mid(m1, m2), mid(m2, m3))` with `(m1, m3) = F(base, v)`.
pub fn psi_map(space: &Space, base: &Point, v: &Tangent, m2: &Point) -> Result<(Point, Point)> {
    if !space.in_u(v) {
        return Err(Error::OutsideU { length: space.tangent_norm(&v.vec) });
    }
    let (m1, m3) = space.chord(base, &v.vec);
    Ok((space.midpoint(&m1, m2)?, space.midpoint(m2, &m3)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn octant(s: &Space) -> CornerTriple {
        CornerTriple::new(
            s.point(&[1.0, 0.0, 0.0]).unwrap(),
            s.point(&[0.0, 1.0, 0.0]).unwrap(),
            s.point(&[0.0, 0.0, 1.0]).unwrap(),
        )
    }

    #[test]
    fn corner_area_examples() {
        let s = Space::sphere(1.0).unwrap();
        assert!((area_from_corners(&s, &octant(&s)).unwrap() - FRAC_PI_2).abs() < 1e-15);

        let h = Space::hyperbolic(1.0).unwrap();
        let o = h.origin();
        assert_eq!(area_from_corners(&h, &CornerTriple::new(o, o, o)).unwrap(), 0.0);
        let (sh, ch) = (1f64.sinh(), 1f64.cosh());
        let t = CornerTriple::new(o, h.hyperboloid_point(sh, 0.0), h.hyperboloid_point(0.0, sh));
        let want = 2.0 * (sh * sh / (1.0 + 2.0 * ch + ch * ch)).atan();
        let got = area_from_corners(&h, &t).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert!((got - 0.4209).abs() < 2e-4);

        let antipodal = CornerTriple::new(s.origin(), s.point(&[0.0, 0.0, -1.0]).unwrap(), s.origin());
        assert!(matches!(area_from_corners(&s, &antipodal), Err(Error::SideTooLong { .. })));
    }

    #[test]
    fn midpoint_area_examples() {
        let s = Space::sphere(1.0).unwrap();
        let m = midpoints_from_corners(&s, &octant(&s)).unwrap();
        let r = 0.5f64.sqrt();
        assert!((m.alpha.coords() - Vec3::new(r, r, 0.0)).amax() < 1e-15);
        assert!((m.det() - r).abs() < 1e-15);
        assert!((area_from_midpoints(&s, &m).unwrap() - FRAC_PI_2).abs() < 1e-14);

        let p = s.project(&[0.1, 0.2, 0.9]).unwrap();
        assert_eq!(area_from_midpoints(&s, &MidpointTriple::new(p, p, p)).unwrap(), 0.0);

        let e = Space::euclidean(1.0).unwrap();
        let t = CornerTriple::new(
            e.point(&[0.0, 0.0]).unwrap(),
            e.point(&[2.0, 0.0]).unwrap(),
            e.point(&[0.0, 2.0]).unwrap(),
        );
        let m = midpoints_from_corners(&e, &t).unwrap();
        assert_eq!(m.alpha.coords(), &Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(m.beta.coords(), &Vec3::new(1.0, 1.0, 0.0));
        assert_eq!(m.gamma.coords(), &Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(area_from_midpoints(&e, &m).unwrap(), area_from_corners(&e, &t).unwrap());

        let h = Space::hyperbolic(1.0).unwrap();
        let far = MidpointTriple::new(
            h.origin(),
            h.hyperboloid_point(2f64.sinh(), 0.0),
            h.hyperboloid_point(0.0, 2f64.sinh()),
        );
        assert_eq!(area_from_midpoints(&h, &far), Err(Error::OutsideW));
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta_sign(0.5, 0.2, 0.9), Eta::Plus);
        assert_eq!(eta_sign(0.5, 0.2, -0.1), Eta::Plus);
        assert_eq!(eta_sign(-0.5, 0.2, -0.1), Eta::Minus);
        assert_eq!(eta_sign(0.0, 0.0, 0.0), Eta::Zero);
        assert_eq!(eta_sign(1.0, 0.0, -1.0), Eta::Zero);
    }

    #[test]
    fn domain_w_examples() {
        let h = Space::hyperbolic(1.0).unwrap();
        let o = h.origin();
        assert!(in_w(&h, &o, &o, &o));
        let s2 = 2f64.sinh();
        let (b, c) = (h.hyperboloid_point(s2, 0.0), h.hyperboloid_point(0.0, s2));
        assert!((det3(o.coords(), b.coords(), c.coords()) - s2 * s2).abs() < 1e-12);
        assert!(!in_w(&h, &o, &b, &c));

        let s = Space::sphere(1.0).unwrap();
        // <a|b> > 0, <a|c> > 0, <b|c> < 0
        let a = s.origin();
        let b = s.project(&[1.0, 0.0, 0.3]).unwrap();
        let c = s.project(&[-1.0, 0.0, 0.3]).unwrap();
        assert!(!in_w(&s, &a, &b, &c));
        assert!(in_w(&s, &a, &a, &a));
        let e = Space::euclidean(1.0).unwrap();
        assert!(in_w(&e, &e.origin(), &e.point(&[9.0, 9.0]).unwrap(), &e.origin()));
    }

    #[test]
    fn amplitude_examples() {
        let h = Space::hyperbolic(1.0).unwrap();
        let o = h.origin();
        assert_eq!(amplitude(&h, &o, &o, &o).unwrap(), 16.0);
        let s = Space::sphere(1.0).unwrap();
        let p = s.project(&[0.3, -0.2, 0.5]).unwrap();
        assert!((amplitude(&s, &p, &p, &p).unwrap() - 16.0).abs() < 1e-12);
        let e = Space::euclidean(1.0).unwrap();
        assert_eq!(amplitude(&e, &e.origin(), &e.origin(), &e.origin()).unwrap(), 16.0);

        // det^2 -> 1 along a one-parameter family: monotone blow-up
        let mut last = 0.0;
        let mut hit_boundary = false;
        for k in 1..200 {
            let t = 0.01 * k as f64;
            let (b, c) = (h.hyperboloid_point(t.sinh(), 0.0), h.hyperboloid_point(0.0, t.sinh()));
            match amplitude(&h, &o, &b, &c) {
                Ok(a) => {
                    assert!(a > last);
                    last = a;
                }
                Err(Error::BoundaryDivergence { .. }) | Err(Error::OutsideW) => {
                    hit_boundary = true;
                    break;
                }
                Err(e) => panic!("{e}"),
            }
        }
        assert!(hit_boundary && last > 1e6);
    }

    #[test]
    fn corner_recovery_examples() {
        let e = Space::euclidean(1.0).unwrap();
        let m = MidpointTriple::new(
            e.point(&[0.0, 0.0]).unwrap(),
            e.point(&[1.0, 0.0]).unwrap(),
            e.point(&[0.0, 1.0]).unwrap(),
        );
        let t = corners_from_midpoints(&e, &m).unwrap();
        assert_eq!(t.a.coords(), &Vec3::new(-1.0, 1.0, 0.0));
        assert_eq!(t.b.coords(), &Vec3::new(1.0, -1.0, 0.0));
        assert_eq!(t.c.coords(), &Vec3::new(1.0, 1.0, 0.0));

        let s = Space::sphere(1.0).unwrap();
        let m = midpoints_from_corners(&s, &octant(&s)).unwrap();
        let t = corners_from_midpoints(&s, &m).unwrap();
        assert!((t.a.coords() - Vec3::x()).amax() < 1e-12);
        assert!((t.b.coords() - Vec3::y()).amax() < 1e-12);
        assert!((t.c.coords() - Vec3::z()).amax() < 1e-12);

        let ortho = MidpointTriple::new(
            s.point(&[1.0, 0.0, 0.0]).unwrap(),
            s.point(&[0.0, 1.0, 0.0]).unwrap(),
            s.point(&[0.0, 0.0, 1.0]).unwrap(),
        );
        assert_eq!(corners_from_midpoints(&s, &ortho), Err(Error::DegenerateMidpoints));
    }

    #[test]
    fn psi_examples() {
        let e = Space::euclidean(1.0).unwrap();
        let o = e.origin();
        let v = e.tangent(&o, &[1.0, 0.0]).unwrap();
        let (x, y) = psi_map(&e, &o, &v, &e.point(&[0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(x.coords(), &Vec3::new(-0.5, 0.5, 0.0));
        assert_eq!(y.coords(), &Vec3::new(0.5, 0.5, 0.0));
        let s = Space::sphere(1.0).unwrap();
        let p = s.project(&[0.2, 0.1, 1.0]).unwrap();
        let z = s.fiber_vector(&p, [0.0, 0.0]);
        let (x, y) = psi_map(&s, &p, &z, &p).unwrap();
        assert!((x.coords() - p.coords()).amax() < 1e-15 && (y.coords() - p.coords()).amax() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn h2_point() -> impl Strategy<Value = Vec3> {
            (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Vec3::new(x, y, (1.0 + x * x + y * y).sqrt()))
        }

        fn s2_point() -> impl Strategy<Value = Vec3> {
            prop::array::uniform3(-1.0..1.0f64)
                .prop_filter("nonzero", |v| Vec3::from(*v).norm() > 0.1)
                .prop_map(|v| Vec3::from(v).normalize())
        }

        fn triple(v: [Vec3; 3]) -> CornerTriple {
            CornerTriple::new(
                Point::from_vec_unchecked(v[0]),
                Point::from_vec_unchecked(v[1]),
                Point::from_vec_unchecked(v[2]),
            )
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(300))]

            #[test]
            fn h2_antisymmetry_and_midpoint_consistency(v in prop::array::uniform3(h2_point())) {
                let h = Space::hyperbolic(1.0).unwrap();
                let t = triple(v);
                let s = area_from_corners(&h, &t).unwrap();
                let swapped = area_from_corners(&h, &CornerTriple::new(t.b, t.a, t.c)).unwrap();
                prop_assert!((s + swapped).abs() < 1e-12);
                let m = midpoints_from_corners(&h, &t).unwrap();
                prop_assert!(m.det().powi(2) < 1.0);
                prop_assert!((area_from_midpoints(&h, &m).unwrap() - s).abs() < 1e-9);
                let back = corners_from_midpoints(&h, &m).unwrap();
                let err = (back.a.coords() - t.a.coords()).amax()
                    .max((back.b.coords() - t.b.coords()).amax())
                    .max((back.c.coords() - t.c.coords()).amax());
                prop_assert!(err < 1e-8 * t.a.coords().z.max(t.b.coords().z).max(t.c.coords().z));
            }

            #[test]
            fn s2_sign_coherence_and_det_bound(v in prop::array::uniform3(s2_point())) {
                let s = Space::sphere(1.0).unwrap();
                let t = triple(v);
                let m = midpoints_from_corners(&s, &t).unwrap();
                prop_assert!(m.det().powi(2) <= 1.0 + 1e-14);
                prop_assert!(in_w(&s, &m.alpha, &m.beta, &m.gamma));
                let a = area_from_corners(&s, &t).unwrap();
                prop_assert!((area_from_midpoints(&s, &m).unwrap() - a).abs() < 1e-9);
                let swapped = area_from_corners(&s, &CornerTriple::new(t.a, t.c, t.b)).unwrap();
                prop_assert!((a + swapped).abs() < 1e-12);
            }

            #[test]
            fn fast_fixed_vector_matches(v in prop::array::uniform3(s2_point())) {
                let s = Space::sphere(1.0).unwrap();
                let t = triple(v);
                let m = midpoints_from_corners(&s, &t).unwrap();
                if let Some(f) = fixed_vector_fast(&s, m.alpha.coords(), m.beta.coords(), m.gamma.coords()) {
                    let f = f.normalize();
                    prop_assert!(f.cross(t.a.coords()).norm() < 1e-6);
                }
            }
        }
    }
}
