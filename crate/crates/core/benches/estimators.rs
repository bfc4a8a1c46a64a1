//! Rayon versus sequential execution of the two Monte Carlo estimators.
//! Both paths draw the same samples, so only the wall time differs.

use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fracmc::area::{per_s_estimate, Domain};
use fracmc::curvature::fmc_estimate;
use fracmc::exec::Execution;
use fracmc::{build_polyline, pt2, Dim, Hypersurface, Params, Point, QuadratureSpec};

fn circle(n: usize) -> Hypersurface {
    let pts: Vec<Point> = (0..n).map(|k| {
        let t = 2.0 * PI * k as f64 / n as f64;
        pt2(t.cos(), t.sin())
    }).collect();
    build_polyline(&pts, true).unwrap()
}

fn modes() -> [(&'static str, Execution); 2] {
    [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)]
}

fn fmc(c: &mut Criterion) {
    let m = circle(256);
    let p = Params::new(Dim::Two, 0.5).unwrap();
    let z = m.barycenter(0);
    let nu = m.facet_normal(0);
    let mut g = c.benchmark_group("fmc_estimate");
    g.sample_size(10);
    for (name, exec) in modes() {
        let spec = QuadratureSpec::for_surface(&m, 100_000, 7).with_exec(exec);
        g.bench_with_input(BenchmarkId::new(name, 100_000), &spec, |b, spec| {
            b.iter(|| fmc_estimate(&m, z, nu, &p, spec).unwrap())
        });
    }
    g.finish();
}

fn per_s(c: &mut Criterion) {
    let m = circle(256);
    let p = Params::new(Dim::Two, 0.5).unwrap();
    let omega = Domain::ball(Point::zeros(), 3.0);
    let mut g = c.benchmark_group("per_s_estimate");
    g.sample_size(10);
    for (name, exec) in modes() {
        let spec = QuadratureSpec::for_surface(&m, 100_000, 7).with_exec(exec);
        g.bench_with_input(BenchmarkId::new(name, 100_000), &spec, |b, spec| {
            b.iter(|| per_s_estimate(&m, &omega, &p, spec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, fmc, per_s);
criterion_main!(benches);
