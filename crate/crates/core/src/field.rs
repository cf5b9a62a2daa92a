//! Complex scalar fields on a model space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{Point, Space, SpaceKind, Vec3};

/// Real quadratic function `x^T H x / 2 + b.x + c` of the surface chart
/// coordinates of a space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticPhase {
    pub hessian: [[f64; 2]; 2],
    #[serde(default)]
    pub covector: [f64; 2],
    #[serde(default)]
    pub constant: f64,
}

impl QuadraticPhase {
    pub fn linear(covector: [f64; 2]) -> Self {
        QuadraticPhase { covector, ..Default::default() }
    }

    pub fn eval_chart(&self, x: [f64; 2]) -> f64 {
        let h = &self.hessian;
        0.5 * (h[0][0] * x[0] * x[0] + (h[0][1] + h[1][0]) * x[0] * x[1] + h[1][1] * x[1] * x[1])
            + self.covector[0] * x[0]
            + self.covector[1] * x[1]
            + self.constant
    }

    pub fn gradient_chart(&self, x: [f64; 2]) -> [f64; 2] {
        let h = &self.hessian;
        let s = 0.5 * (h[0][1] + h[1][0]);
        [h[0][0] * x[0] + s * x[1] + self.covector[0], s * x[0] + h[1][1] * x[1] + self.covector[1]]
    }

    pub fn is_separable(&self) -> bool {
        self.hessian[0][1] == 0.0 && self.hessian[1][0] == 0.0
    }
}

/// Gaussian envelope `exp(-d(x, center)^2 / (2 width^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Damping {
    pub center: Point,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarField {
    Zero,
    GaussianBump {
        center: Point,
        width: f64,
        amplitude: Complex64,
    },
    /// `sum c x^i y^j z^k` in embedding coordinates, times a Gaussian envelope.
    DampedPolynomial {
        terms: Vec<([u32; 3], Complex64)>,
        damping: Damping,
    },
    /// `exp(i g / hbar)` with an optional Gaussian envelope.
    OscillatoryExp {
        phase: QuadraticPhase,
        damping: Option<Damping>,
    },
}

impl ScalarField {
    pub fn bump(center: Point, width: f64) -> Self {
        ScalarField::GaussianBump { center, width, amplitude: Complex64::new(1.0, 0.0) }
    }

    pub fn damped_polynomial(terms: &[([u32; 3], f64)], center: Point, width: f64) -> Self {
        ScalarField::DampedPolynomial {
            terms: terms.iter().map(|&(e, c)| (e, Complex64::new(c, 0.0))).collect(),
            damping: Damping { center, width },
        }
    }

    pub fn oscillatory(phase: QuadraticPhase, damping: Option<Damping>) -> Self {
        ScalarField::OscillatoryExp { phase, damping }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarField::Zero)
    }

    pub fn eval(&self, space: &Space, p: &Point) -> Complex64 {
        self.eval_vec(space, p.coords())
    }

    pub(crate) fn eval_vec(&self, space: &Space, x: &Vec3) -> Complex64 {
        match self {
            ScalarField::Zero => Complex64::new(0.0, 0.0),
            ScalarField::GaussianBump { center, width, amplitude } => {
                amplitude * envelope(space, x, center.coords(), *width)
            }
            ScalarField::DampedPolynomial { terms, damping } => {
                let poly: Complex64 = terms
                    .iter()
                    .map(|(e, c)| c * x.x.powi(e[0] as i32) * x.y.powi(e[1] as i32) * x.z.powi(e[2] as i32))
                    .sum();
                poly * envelope(space, x, damping.center.coords(), damping.width)
            }
            ScalarField::OscillatoryExp { phase, damping } => {
                let c = space.chart_coords(&Point::from_vec_unchecked(*x));
                let g = phase.eval_chart(c);
                let env = damping.map_or(1.0, |d| envelope(space, x, d.center.coords(), d.width));
                Complex64::from_polar(env, g / space.hbar())
            }
        }
    }

    /// Writes a planar field as `sum_t c_t X_t(p) Y_t(q)`, when it has that form.
    pub(crate) fn planar_factors(&self, space: &Space) -> Option<Vec<(Complex64, Factor1D, Factor1D)>> {
        if space.kind() != SpaceKind::Euclidean2 {
            return None;
        }
        let hbar = space.hbar();
        let gauss = |c: f64, w: f64| Factor1D { inv_w2: 1.0 / (w * w), center: c, hbar, ..Default::default() };
        match self {
            ScalarField::Zero => Some(Vec::new()),
            ScalarField::GaussianBump { center, width, amplitude } => {
                let c = center.coords();
                Some(vec![(*amplitude, gauss(c.x, *width), gauss(c.y, *width))])
            }
            ScalarField::DampedPolynomial { terms, damping } => {
                let c = damping.center.coords();
                Some(
                    terms
                        .iter()
                        .filter(|(e, _)| e[2] == 0)
                        .map(|(e, k)| {
                            let mut x = gauss(c.x, damping.width);
                            let mut y = gauss(c.y, damping.width);
                            x.pow = e[0];
                            y.pow = e[1];
                            (*k, x, y)
                        })
                        .collect(),
                )
            }
            ScalarField::OscillatoryExp { phase, damping } => {
                if !phase.is_separable() {
                    return None;
                }
                let (mut x, mut y) = match damping {
                    Some(d) => (gauss(d.center.coords().x, d.width), gauss(d.center.coords().y, d.width)),
                    None => (Factor1D { hbar, ..Default::default() }, Factor1D { hbar, ..Default::default() }),
                };
                x.quad = phase.hessian[0][0];
                x.lin = phase.covector[0];
                y.quad = phase.hessian[1][1];
                y.lin = phase.covector[1];
                Some(vec![(Complex64::from_polar(1.0, phase.constant / hbar), x, y)])
            }
        }
    }
}

/// `x^pow exp(-(x - center)^2 inv_w2 / 2) exp(i (quad x^2 / 2 + lin x) / hbar)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Factor1D {
    pub pow: u32,
    pub center: f64,
    pub inv_w2: f64,
    pub quad: f64,
    pub lin: f64,
    pub hbar: f64,
}

impl Factor1D {
    pub fn eval(&self, x: f64) -> Complex64 {
        let d = x - self.center;
        let amp = x.powi(self.pow as i32) * (-0.5 * self.inv_w2 * d * d).exp();
        if self.quad == 0.0 && self.lin == 0.0 {
            Complex64::new(amp, 0.0)
        } else {
            Complex64::from_polar(amp, (0.5 * self.quad * x * x + self.lin * x) / self.hbar)
        }
    }
}

/// Gaussian of the geodesic distance between `x` and `c`.
fn envelope(space: &Space, x: &Vec3, c: &Vec3, width: f64) -> f64 {
    let d = x - c;
    let dist = match space.kind() {
        SpaceKind::Euclidean2 => d.norm(),
        SpaceKind::Hyperbolic2 => 2.0 * (0.5 * (-space.inner(&d, &d)).max(0.0).sqrt()).asinh(),
        SpaceKind::Sphere2 => 2.0 * (0.5 * d.norm()).min(1.0).asin(),
    };
    (-0.5 * dist * dist / (width * width)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_uses_geodesic_distance() {
        let s = Space::sphere(1.0).unwrap();
        let f = ScalarField::bump(s.origin(), 0.5);
        let x = s.point(&[1.0, 0.0, 0.0]).unwrap();
        let want = (-(std::f64::consts::FRAC_PI_2.powi(2)) / (2.0 * 0.25)).exp();
        assert!((f.eval(&s, &x).re - want).abs() < 1e-15);
        let h = Space::hyperbolic(1.0).unwrap();
        let f = ScalarField::bump(h.origin(), 2.0);
        let x = h.hyperboloid_point(1.5f64.sinh(), 0.0);
        assert!((f.eval(&h, &x).re - (-1.5f64 * 1.5 / 8.0).exp()).abs() < 1e-14);
    }

    #[test]
    fn planar_factors_reproduce_values() {
        let e = Space::euclidean(0.3).unwrap();
        let c = e.point(&[0.2, -0.4]).unwrap();
        let fields = [
            ScalarField::bump(c, 0.7),
            ScalarField::damped_polynomial(&[([0, 0, 0], 1.0), ([1, 2, 0], -0.5), ([0, 0, 1], 3.0)], c, 1.2),
            ScalarField::oscillatory(
                QuadraticPhase { hessian: [[0.3, 0.0], [0.0, -1.0]], covector: [0.2, 0.5], constant: 0.1 },
                Some(Damping { center: c, width: 2.0 }),
            ),
        ];
        for f in &fields {
            let parts = f.planar_factors(&e).unwrap();
            for (p, q) in [(0.0, 0.0), (1.3, -0.2), (-0.7, 2.0)] {
                let sum: Complex64 = parts.iter().map(|(k, x, y)| k * x.eval(p) * y.eval(q)).sum();
                let direct = f.eval(&e, &e.point(&[p, q]).unwrap());
                assert!((sum - direct).norm() < 1e-14, "{f:?}");
            }
        }
        let mixed =
            ScalarField::oscillatory(QuadraticPhase { hessian: [[0.0, 1.0], [1.0, 0.0]], ..Default::default() }, None);
        assert!(mixed.planar_factors(&e).is_none());
    }
}
