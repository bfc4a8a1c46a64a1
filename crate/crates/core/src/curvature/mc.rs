//! Monte Carlo estimator over the side partition.
//!
//! Radii are drawn with density ∝ r^{-1-s} and directions uniformly, so every
//! sample carries the same weight and only its label matters. Each draw y is
//! paired with its mirror image across the tangent plane; on a flat piece the
//! two labels cancel exactly, which is what makes the principal value finite.

use nalgebra::Rotation3;

use super::{Estimate, QuadratureSpec};
use crate::error::{Error, Result};
use crate::exec::{map_chunks, pairwise, Moments};
use crate::geometry::{Aabb, Hypersurface, Point};
use crate::params::{Dim, Params};
use crate::rng;
use crate::side::{Classifier, SideLabel};

/// Redraws allowed for a single sample before giving up.
pub const RESAMPLE_BUDGET: u32 = 100;
/// Largest tolerated fraction of rejected (tangent) draws.
pub const MAX_REJECT_RATE: f64 = 1e-2;

pub fn fmc_estimate(m: &Hypersurface, z: Point, nu: Point, params: &Params, spec: &QuadratureSpec) -> Result<Estimate> {
    fmc_estimate_with_frame(m, z, nu, params, spec, &Rotation3::identity())
}

/// Same as [`fmc_estimate`] with sample directions expressed in `frame`.
/// Transporting M, z, ν and the frame by one rigid motion transports every
/// sample, so the estimate is reproduced exactly.
pub fn fmc_estimate_with_frame(
    m: &Hypersurface,
    z: Point,
    nu: Point,
    params: &Params,
    spec: &QuadratureSpec,
    frame: &Rotation3<f64>,
) -> Result<Estimate> {
    params.validate()?;
    spec.validate(params)?;
    if params.dim != m.dim() {
        return Err(Error::InvalidParams("params and surface disagree on the dimension".into()));
    }
    let cls = Classifier::new(m, z, nu, m.default_tol())?;
    let bd = m.boundary_distance(&z);
    if bd <= spec.r_near {
        return Err(Error::BoundaryPoint(bd));
    }
    let s = params.s;
    let dim = m.dim();
    let omega = dim.sphere_measure();
    let far_exact = spec.r_far >= m.reach_from(&z);
    let inv_near = spec.r_near.powf(-s);
    let inv_far = if far_exact { 0.0 } else { spec.r_far.powf(-s) };
    let norm = omega * (inv_near - inv_far) / s;

    let chunks = map_chunks(spec.n_samples, spec.exec, |range| {
        let mut mom = Moments::default();
        let mut rejects = 0u64;
        let mut exhausted = false;
        for i in range {
            let mut g = rng::stream(spec.seed, i as u64);
            let mut tries = 0;
            loop {
                // inverse CDF of r^{-1-s} on [r_near, R_far] (R_far = ∞ when exact)
                let u = rng::unit_open0(&mut g);
                let r = (inv_far + u * (inv_near - inv_far)).powf(-1.0 / s);
                let w = frame * rng::direction(&mut g, dim);
                // beyond the reach every label is frozen along the ray
                let r = r.min(spec.r_far);
                let y = z + w * r;
                let y_star = y - nu * (2.0 * (y - z).dot(&nu));
                let (a, b) = (cls.label(&y), cls.label(&y_star));
                if a == SideLabel::Indeterminate || b == SideLabel::Indeterminate {
                    rejects += 1;
                    tries += 1;
                    if tries >= RESAMPLE_BUDGET {
                        exhausted = true;
                        break;
                    }
                    continue;
                }
                mom.push(0.5 * (a.sign() + b.sign()));
                break;
            }
            if exhausted {
                break;
            }
        }
        (mom, rejects, exhausted)
    });
    if chunks.iter().any(|c| c.2) {
        return Err(Error::NonConvergent(format!("resample budget of {RESAMPLE_BUDGET} exhausted")));
    }
    let moms: Vec<Moments> = chunks.iter().map(|c| c.0).collect();
    let mom = pairwise(&moms, Moments::default(), Moments::merge);
    let rejects: u64 = chunks.iter().map(|c| c.1).sum();
    let draws = mom.n + rejects;
    if rejects as f64 > MAX_REJECT_RATE * draws as f64 {
        return Err(Error::NonConvergent(format!("indeterminate rate {:.3e}", rejects as f64 / draws as f64)));
    }
    let cn = params.c_n;
    let far_tail = if far_exact { 0.0 } else { omega * inv_far / s };
    let near = near_field_bound(&cls, params, spec);
    // rare events: never claim more resolution than one pair of weight 1/n,
    // so a run with (almost) no informative draws still brackets them
    let floor = 1.0 / mom.n.max(1) as f64;
    Ok(Estimate {
        value: cn * norm * mom.mean(),
        std_error: cn * norm * mom.std_error().max(floor),
        trunc_bound: cn * (far_tail + near),
        n_eval: 2 * draws,
        seed: spec.seed,
    })
}

/// sup over M ∩ B(z, r) of |height over the tangent plane| / |tangential offset|^{1+α},
/// sampled on every facet meeting the ball. Zero when the ball only sees the
/// facet plane of z.
pub fn near_field_ratio(m: &Hypersurface, z: &Point, nu: &Point, r: f64, alpha: f64, tol: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let probe = Aabb { min: *z, max: *z }.padded(r);
    let mut check = |p: Point| {
        let d = p - z;
        if d.norm() > r {
            return;
        }
        let h = d.dot(nu).abs();
        if h <= tol {
            return;
        }
        let rho = (d.norm_squared() - h * h).max(0.0).sqrt();
        worst = worst.max(if rho <= tol { f64::INFINITY } else { h / rho.powf(1.0 + alpha) });
    };
    m.bvh().visit_box(&probe, |f| {
        let [a, b, c] = m.facet_points(f);
        check(m.closest_on_facet(f, z));
        match m.dim() {
            Dim::Two => {
                const K: usize = 64;
                for k in 0..=K {
                    check(a + (b - a) * (k as f64 / K as f64));
                }
            }
            Dim::Three => {
                const K: usize = 16;
                for i in 0..=K {
                    for j in 0..=K - i {
                        let (u, v) = (i as f64 / K as f64, j as f64 / K as f64);
                        check(a + (b - a) * u + (c - a) * v);
                    }
                }
            }
        }
    });
    worst
}

// c_N-free part of the excised-ball bound: 2·ω_{N−2}·L·r^{α−s}/(α−s) where
// |height| ≤ L·|offset|^{1+α} inside the ball.
fn near_field_bound(cls: &Classifier, params: &Params, spec: &QuadratureSpec) -> f64 {
    let m = cls.surface();
    let (a, s) = (spec.alpha_reg, params.s);
    let l = near_field_ratio(m, &cls.base(), &cls.normal(), spec.r_near, a, cls.tol());
    if l == 0.0 {
        return 0.0;
    }
    2.0 * m.dim().equator_measure() * l * spec.r_near.powf(a - s) / (a - s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::geometry::{build_polyline, pt2};

    fn spec(m: &Hypersurface, n: usize) -> QuadratureSpec {
        QuadratureSpec::for_surface(m, n, 11).with_exec(Execution::Sequential)
    }

    #[test]
    fn flat_segment_cancels_exactly() {
        let m = build_polyline(&[pt2(-1.0, 0.0), pt2(1.0, 0.0)], false).unwrap();
        let p = Params::new(Dim::Two, 0.5).unwrap();
        let e = fmc_estimate(&m, pt2(0.1, 0.0), pt2(0.0, 1.0), &p, &spec(&m, 20_000)).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.trunc_bound, 0.0);
        // only the one-pair resolution floor remains
        let norm = 2.0 * std::f64::consts::PI * (2e-3f64).powf(-0.5) / 0.5;
        assert!((e.std_error - p.c_n * norm / 20_000.0).abs() < 1e-12 * e.std_error);
    }

    #[test]
    fn boundary_point_is_refused() {
        let m = build_polyline(&[pt2(-1.0, 0.0), pt2(1.0, 0.0)], false).unwrap();
        let p = Params::new(Dim::Two, 0.5).unwrap();
        let e = fmc_estimate(&m, pt2(0.9995, 0.0), pt2(0.0, 1.0), &p, &spec(&m, 100)).unwrap_err();
        assert!(matches!(e, Error::BoundaryPoint(_)));
    }

    #[test]
    fn near_ratio_sees_a_kink() {
        let m = build_polyline(&[pt2(-1.0, 0.0), pt2(0.01, 0.0), pt2(1.0, 0.5)], false).unwrap();
        let (z, nu) = (pt2(0.0, 0.0), pt2(0.0, 1.0));
        assert_eq!(near_field_ratio(&m, &z, &nu, 0.005, 1.0, 1e-12), 0.0);
        assert!(near_field_ratio(&m, &z, &nu, 0.05, 1.0, 1e-12) > 0.0);
    }

    #[test]
    fn two_sheets_attract() {
        // two parallel sheets: interior between them, H < 0 with ν pointing out
        let m = crate::geometry::build_polylines(&[
            (vec![pt2(-1.0, 0.0), pt2(1.0, 0.0)], false),
            (vec![pt2(-1.0, -0.3), pt2(1.0, -0.3)], false),
        ])
        .unwrap();
        let p = Params::new(Dim::Two, 0.5).unwrap();
        let e = fmc_estimate(&m, pt2(0.0, 0.0), pt2(0.0, 1.0), &p, &spec(&m, 100_000)).unwrap();
        assert!(e.value < 0.0 && e.is_significant(), "{e:?}");
    }
}
