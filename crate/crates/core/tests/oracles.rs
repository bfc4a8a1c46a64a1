//! The library against the independent oracles in `common`.

mod common;

use std::f64::consts::PI;

use fracmc::area::{classical_ps_oracle, per_s_estimate, Domain, Region};
use fracmc::curvature::{f_closed, f_eval, fmc_flux, FluxOptions};
use fracmc::shapes::{cone_2d_points, make_cone_2d};
use fracmc::{build_polyline, pt2, Dim, Params, Point, QuadratureSpec};

#[test]
fn f_matches_simpson() {
    for (n, dim) in [(2, Dim::Two), (3, Dim::Three)] {
        for s in [0.2, 0.5, 0.9] {
            let p = Params::new(dim, s).unwrap();
            for t in [0.3, 1.0, 4.0] {
                let o = common::f_oracle(t, n, s);
                assert!((f_closed(t, &p) - o).abs() < 1e-10, "N={n} s={s} t={t}");
                assert!((f_eval(t, &p) - o).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn cone_flux_matches_polar_quadrature() {
    for d in [0.5, 1.0, 2.0] {
        let m = make_cone_2d(d).unwrap();
        let segs = common::cone_segments(d);
        for s in [0.3, 0.5, 0.8] {
            let p = Params::new(Dim::Two, s).unwrap();
            for (z, nu) in cone_2d_points(&m, 2) {
                let a = fmc_flux(&m, z, nu, &p, &FluxOptions::default()).unwrap();
                let b = common::polar_fmc(&segs, (z.x, z.y), (nu.x, nu.y), s);
                assert!((a - b).abs() < 1e-7 * (1.0 + b.abs()), "d={d} s={s} z={z:?}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn polar_quadrature_of_a_bent_curve() {
    // an arbitrary open polyline, away from its vertices
    let pts = [pt2(-1.0, 0.3), pt2(-0.2, 0.0), pt2(0.5, 0.1), pt2(1.2, 0.7), pt2(1.0, 1.4)];
    let m = build_polyline(&pts, false).unwrap();
    let segs: Vec<_> = pts.windows(2).map(|w| ((w[0].x, w[0].y), (w[1].x, w[1].y))).collect();
    let p = Params::new(Dim::Two, 0.6).unwrap();
    for f in 0..4 {
        let z = m.barycenter(f);
        let nu = m.facet_normal(f);
        let a = fmc_flux(&m, z, nu, &p, &FluxOptions::default()).unwrap();
        let b = common::polar_fmc(&segs, (z.x, z.y), (nu.x, nu.y), 0.6);
        assert!((a - b).abs() < 1e-7 * (1.0 + b.abs()), "facet {f}: {a} vs {b}");
    }
}

#[test]
fn disk_perimeter_against_quadrature() {
    let s = 0.5;
    let exact = common::disk_ps(s);
    let p = Params::new(Dim::Two, s).unwrap();
    let omega = Domain::ball(Point::zeros(), 3.0);
    let spec = QuadratureSpec::for_diameter(2.0, 400_000, 11);
    let c = classical_ps_oracle(&Region::Ball { center: Point::zeros(), radius: 1.0 }, &omega, &p, &spec).unwrap();
    assert!(c.contains(exact), "{c:?} vs {exact}");
    let circle: Vec<Point> = (0..512).map(|k| {
        let t = 2.0 * PI * k as f64 / 512.0;
        pt2(t.cos(), t.sin())
    }).collect();
    let m = build_polyline(&circle, true).unwrap();
    let e = per_s_estimate(&m, &omega, &p, &QuadratureSpec::for_surface(&m, 400_000, 12)).unwrap();
    // the 512-gon differs from the disk by ~1e-4 relative
    assert!((e.value - exact).abs() <= e.half_width() + 2e-4 * exact, "{e:?} vs {exact}");
}

#[test]
fn flux_next_to_short_facets() {
    // the barrier sheet has a 2e-6 facet at its apex, flanked by nearly
    // collinear ones
    use fracmc::shapes::{make_barrier_sheet, project_to_surface, BarrierKind, BarrierMesh, BarrierSpec};
    let p = Params::new(Dim::Two, 0.5).unwrap();
    let sb = BarrierSpec::new(Dim::Two, 1e-2, &p).unwrap();
    let m = make_barrier_sheet(&sb, BarrierKind::BumpFree, &BarrierMesh::default()).unwrap();
    let c = &m.chains()[0];
    let pts: Vec<Point> = c.vertices.iter().map(|&i| m.vertex(i)).collect();
    let segs: Vec<_> = pts.windows(2).map(|w| ((w[0].x, w[0].y), (w[1].x, w[1].y))).collect();
    for x in [0.0, 1e-4, 0.05] {
        let (z, nu) = project_to_surface(&m, &pt2(x, sb.t)).unwrap();
        let a = fmc_flux(&m, z, nu, &p, &FluxOptions::default()).unwrap();
        let b = common::polar_fmc(&segs, (z.x, z.y), (nu.x, nu.y), 0.5);
        assert!((a - b).abs() < 1e-5 * (1.0 + b.abs()), "x={x}: {a} vs {b}");
    }
}
