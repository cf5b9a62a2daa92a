//! Shared inputs for the benchmarks.

use midstar_core::{CornerTriple, Point, ScalarField, Space};

/// A fixed, moderately sized triangle on each curved space.
pub fn triangle(space: &Space) -> CornerTriple {
    let p = |x: f64, y: f64| space.chart_point([x, y]);
    CornerTriple::new(p(0.3, 0.1), p(-0.2, 0.5), p(0.1, -0.4))
}

/// Two Gaussian bumps near the evaluation point, and the point itself.
pub fn bump_pair(space: &Space, width: f64) -> (ScalarField, ScalarField, Point) {
    let f = ScalarField::bump(space.chart_point([0.15, 0.05]), width);
    let g = ScalarField::bump(space.chart_point([-0.05, 0.1]), width);
    (f, g, space.chart_point([0.05, 0.05]))
}
