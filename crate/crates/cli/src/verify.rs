//! Seeded verification suites. Each check becomes one CSV row.

use std::f64::consts::PI;

use midstar_core::oracles::{excess_area, gaussian_moyal, lambda_phase_r2, so_phase_r2, GaussianExp};
use midstar_core::starprod::{star, QuadratureSpec};
use midstar_core::triangles::{area_from_corners, area_from_midpoints, corners_from_midpoints, midpoints_from_corners};
use midstar_core::{CornerTriple, Point, ScalarField, Space, SpaceKind};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Suite;
use crate::error::CliResult;
use crate::output::num;

pub const HEADER: &str = "suite,case_id,quantity,expected,got,abs_err,pass";

pub struct Row {
    pub suite: &'static str,
    pub case_id: String,
    pub quantity: &'static str,
    pub expected: f64,
    pub got: f64,
    pub abs_err: f64,
    pub pass: bool,
}

impl Row {
    fn new(suite: &'static str, case_id: String, quantity: &'static str, expected: f64, got: f64, tol: f64) -> Self {
        let abs_err = (expected - got).abs();
        Row { suite, case_id, quantity, expected, got, abs_err, pass: abs_err <= tol }
    }

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.suite,
            self.case_id,
            self.quantity,
            num(self.expected),
            num(self.got),
            num(self.abs_err),
            self.pass
        )
    }
}

pub fn run(suite: Suite, seed: u64, cases: usize, hbar: f64) -> CliResult<Vec<Row>> {
    let mut rows = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Triangles {
        triangles(&mut rows, seed, cases)?;
    }
    if all || suite == Suite::Recovery {
        recovery(&mut rows, seed.wrapping_add(1), cases)?;
    }
    if all || suite == Suite::Phases {
        phases(&mut rows, seed.wrapping_add(2), cases)?;
    }
    if all || suite == Suite::Moyal {
        moyal(&mut rows, seed.wrapping_add(3), cases.min(20), hbar)?;
    }
    Ok(rows)
}

fn random_point(s: &Space, rng: &mut ChaCha8Rng) -> Point {
    match s.kind() {
        SpaceKind::Euclidean2 => s.chart_point([rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]),
        SpaceKind::Hyperbolic2 => {
            let z: f64 = rng.gen_range(1.0..10.0);
            let th: f64 = rng.gen_range(0.0..2.0 * PI);
            let r = (z * z - 1.0).sqrt();
            s.hyperboloid_point(r * th.cos(), r * th.sin())
        }
        SpaceKind::Sphere2 => loop {
            let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n: f64 = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
            if (0.1..1.0).contains(&n) {
                if let Ok(p) = s.project(&v) {
                    return p;
                }
            }
        },
    }
}

fn random_triangle(s: &Space, rng: &mut ChaCha8Rng) -> CornerTriple {
    loop {
        let p = [random_point(s, rng), random_point(s, rng), random_point(s, rng)];
        let antipodal =
            s.kind() == SpaceKind::Sphere2 && (0..3).any(|i| p[i].coords().dot(p[(i + 1) % 3].coords()) < -1.0 + 1e-6);
        if !antipodal {
            return CornerTriple::new(p[0], p[1], p[2]);
        }
    }
}

fn triangles(rows: &mut Vec<Row>, seed: u64, cases: usize) -> CliResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in [Space::hyperbolic(1.0)?, Space::sphere(1.0)?] {
        for i in 0..cases {
            let t = random_triangle(&s, &mut rng);
            let id = format!("{}-{i:04}", s.kind().short_name());
            let area = area_from_corners(&s, &t)?;
            let mid = area_from_midpoints(&s, &midpoints_from_corners(&s, &t)?)?;
            rows.push(Row::new("triangles", id.clone(), "midpoint_area", area, mid, 1e-9));
            rows.push(Row::new("triangles", id, "angle_sum_area", area.abs(), excess_area(&s, &t)?, 1e-8));
        }
    }
    Ok(())
}

fn recovery(rows: &mut Vec<Row>, seed: u64, cases: usize) -> CliResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in [Space::euclidean(1.0)?, Space::hyperbolic(1.0)?, Space::sphere(1.0)?] {
        for i in 0..cases {
            let t = random_triangle(&s, &mut rng);
            let back = corners_from_midpoints(&s, &midpoints_from_corners(&s, &t)?)?;
            let err = [(back.a, t.a), (back.b, t.b), (back.c, t.c)]
                .iter()
                .map(|(x, y)| (x.coords() - y.coords()).amax())
                .fold(0.0, f64::max);
            let id = format!("{}-{i:04}", s.kind().short_name());
            rows.push(Row::new("recovery", id, "corner_deviation", 0.0, err, 1e-8));
        }
    }
    Ok(())
}

fn wrap(x: f64) -> f64 {
    x - 2.0 * PI * (x / (2.0 * PI)).round()
}

fn phases(rows: &mut Vec<Row>, seed: u64, cases: usize) -> CliResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..cases {
        let hbar = rng.gen_range(0.1..2.0);
        let s = Space::euclidean(hbar)?;
        let t = random_triangle(&s, &mut rng);
        let [m1, m2, m3] = [t.a, t.b, t.c].map(|p| [p.coords().x, p.coords().y]);
        let lambda = lambda_phase_r2(m1, m2, m3, hbar);
        let area = area_from_corners(&s, &CornerTriple::new(t.c, t.b, t.a))? / hbar;
        let id = format!("r2-{i:04}");
        let mut row = Row::new("phases", id.clone(), "lambda_phase", wrap(area), wrap(lambda), 1e-12);
        row.abs_err = (Complex64::from_polar(1.0, lambda) - Complex64::from_polar(1.0, area)).norm();
        row.pass = row.abs_err <= 1e-12;
        rows.push(row);
        let so = so_phase_r2(m2[0], m2[1], m1[0], m1[1], hbar)
            + so_phase_r2(m3[0], m3[1], m2[0], m2[1], hbar)
            + so_phase_r2(m1[0], m1[1], m3[0], m3[1], hbar);
        rows.push(Row::new("phases", id, "so_composition", lambda, so, 1e-12));
    }
    Ok(())
}

fn moyal(rows: &mut Vec<Row>, seed: u64, cases: usize, hbar: f64) -> CliResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = Space::euclidean(hbar)?;
    let spec = QuadratureSpec::default();
    for i in 0..cases {
        let m = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let mut near = || {
            let (r, th): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0 * PI));
            [m[0] + r * th.cos(), m[1] + r * th.sin()]
        };
        let (c1, c2) = (near(), near());
        let f = ScalarField::bump(s.point(&c1)?, 1.0);
        let g = ScalarField::bump(s.point(&c2)?, 1.0);
        let got = star(&s, &f, &g, &s.point(&m)?, &spec)?.value;
        let want = gaussian_moyal(&GaussianExp::bump(c1, 1.0), &GaussianExp::bump(c2, 1.0), hbar)?.eval(m[0], m[1]);
        let tol = 1e-3 * want.norm();
        let id = format!("r2-{i:04}");
        let mut re = Row::new("moyal", id.clone(), "star_re", want.re, got.re, tol);
        let mut im = Row::new("moyal", id, "star_im", want.im, got.im, tol);
        let pass = (got - want).norm() <= tol;
        re.pass = pass;
        im.pass = pass;
        rows.push(re);
        rows.push(im);
    }
    Ok(())
}
