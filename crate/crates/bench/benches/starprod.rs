use criterion::{black_box, criterion_group, criterion_main, Criterion};
use midstar_bench::bump_pair;
use midstar_core::semiclassics::compose;
use midstar_core::starprod::{star_at_resolution, QuadratureSpec, StarOptions, Strategy};
use midstar_core::{GeneratingFunction, QuadraticPhase, Space};

fn planar(c: &mut Criterion) {
    let s = Space::euclidean(0.5).unwrap();
    let (f, g, m) = bump_pair(&s, 1.0);
    let q = QuadratureSpec::default();
    let mut group = c.benchmark_group("r2_star_n32");
    group.sample_size(10);
    for (name, strategy) in [("separable", Strategy::Auto), ("generic", Strategy::Generic)] {
        let opts = StarOptions { strategy, ..Default::default() };
        group.bench_function(name, |b| b.iter(|| star_at_resolution(&s, &f, &g, black_box(&m), &q, 32, &opts)));
    }
    group.finish();
}

fn curved(c: &mut Criterion) {
    let mut group = c.benchmark_group("curved_star_n16");
    group.sample_size(10);
    for s in [Space::hyperbolic(0.5).unwrap(), Space::sphere(0.5).unwrap()] {
        let (f, g, m) = bump_pair(&s, 0.5);
        let q = QuadratureSpec { truncation_radius: 4.0, ..Default::default() };
        group.bench_function(s.kind().short_name(), |b| {
            b.iter(|| star_at_resolution(&s, &f, &g, black_box(&m), &q, 16, &StarOptions::default()))
        });
    }
    group.finish();
}

fn composition(c: &mut Criterion) {
    let g1 = GeneratingFunction::Linear([0.2, -0.1]);
    let g2 = GeneratingFunction::Quadratic(QuadraticPhase {
        hessian: [[0.3, 0.0], [0.0, 0.3]],
        covector: [0.0, 0.1],
        constant: 0.0,
    });
    for s in [Space::euclidean(0.5).unwrap(), Space::hyperbolic(0.5).unwrap(), Space::sphere(0.5).unwrap()] {
        let m = s.chart_point([0.1, 0.05]);
        c.bench_function(&format!("{}/compose", s.kind().short_name()), |b| {
            b.iter(|| compose(&s, &g1, &g2, black_box(&m), None))
        });
    }
}

criterion_group!(benches, planar, curved, composition);
criterion_main!(benches);
