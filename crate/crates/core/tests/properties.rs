//! Invariances that must hold on any admissible polyline, not just the
//! hand-picked shapes.

use fracmc::curvature::{f_closed, fmc_flux, FluxOptions};
use fracmc::{build_polyline, classify, pt2, Dim, Params, Point, SideLabel};
use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};
use proptest::prelude::*;

// a graph-like open polyline: x strictly increasing, so never self-intersecting
fn polyline() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((0.2f64..1.0, -0.8f64..0.8), 4..8).prop_map(|steps| {
        let mut x = 0.0;
        steps.into_iter().map(|(dx, y)| {
            x += dx;
            pt2(x, y)
        }).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn f_is_odd_increasing_and_bounded(t in -50.0f64..50.0, s in 0.05f64..0.95) {
        let p = Params::new(Dim::Two, s).unwrap();
        let f = f_closed(t, &p);
        prop_assert_eq!(f, -f_closed(-t, &p));
        prop_assert!(f_closed(t + 0.1, &p) > f);
        // F(∞) = ½B(½, (1+s)/2)
        let cap = 0.5 * statrs::function::beta::beta(0.5, 0.5 * (1.0 + s));
        prop_assert!(f.abs() < cap);
    }

    #[test]
    fn flux_flips_with_the_normal(pts in polyline(), s in 0.1f64..0.9, u in 0.2f64..0.8) {
        let m = build_polyline(&pts, false).unwrap();
        let p = Params::new(Dim::Two, s).unwrap();
        let f = m.n_facets() / 2;
        let [a, b, _] = m.facet_points(f);
        let z = a + (b - a) * u;
        let nu = m.facet_normal(f);
        let h = fmc_flux(&m, z, nu, &p, &FluxOptions::default()).unwrap();
        let g = fmc_flux(&m, z, -nu, &p, &FluxOptions::default()).unwrap();
        prop_assert!((h + g).abs() <= 1e-9 * (1.0 + h.abs()), "{} vs {}", h, g);
    }

    #[test]
    fn flux_is_invariant_under_rigid_motions(pts in polyline(), angle in -3.0f64..3.0, tx in -5.0f64..5.0, ty in -5.0f64..5.0) {
        let m = build_polyline(&pts, false).unwrap();
        let p = Params::new(Dim::Two, 0.5).unwrap();
        let f = m.n_facets() / 2;
        let z = m.barycenter(f);
        let nu = m.facet_normal(f);
        let iso = Isometry3::from_parts(Translation3::new(tx, ty, 0.0), UnitQuaternion::from_axis_angle(&Vector3::z_axis(), angle));
        let mm = m.transformed(&iso).unwrap();
        let zz = iso.transform_point(&z.into()).coords;
        let h = fmc_flux(&m, z, nu, &p, &FluxOptions::default()).unwrap();
        let hh = fmc_flux(&mm, zz, iso.rotation * nu, &p, &FluxOptions::default()).unwrap();
        prop_assert!((h - hh).abs() <= 1e-7 * (1.0 + h.abs()), "{} vs {}", h, hh);
    }

    #[test]
    fn flux_scales_like_length_to_minus_s(pts in polyline(), lambda in 0.25f64..4.0) {
        let m = build_polyline(&pts, false).unwrap();
        let p = Params::new(Dim::Two, 0.4).unwrap();
        let scaled: Vec<Point> = pts.iter().map(|q| q * lambda).collect();
        let ms = build_polyline(&scaled, false).unwrap();
        let f = m.n_facets() / 2;
        let h = fmc_flux(&m, m.barycenter(f), m.facet_normal(f), &p, &FluxOptions::default()).unwrap();
        let hs = fmc_flux(&ms, ms.barycenter(f), ms.facet_normal(f), &p, &FluxOptions::default()).unwrap();
        prop_assert!((hs - lambda.powf(-0.4) * h).abs() <= 1e-8 * (1.0 + h.abs()), "{} vs {}", hs, h);
    }

    #[test]
    fn labels_swap_with_the_normal(pts in polyline(), qx in -1.0f64..6.0, qy in -3.0f64..3.0) {
        let m = build_polyline(&pts, false).unwrap();
        let f = m.n_facets() / 2;
        let z = m.barycenter(f);
        let nu = m.facet_normal(f);
        let y = pt2(qx, qy);
        let a = classify(&m, z, nu, y, 1e-9).unwrap();
        let b = classify(&m, z, -nu, y, 1e-9).unwrap();
        match a {
            SideLabel::Indeterminate => prop_assert_eq!(b, SideLabel::Indeterminate),
            _ => prop_assert_eq!(b.sign(), -a.sign()),
        }
    }
}
