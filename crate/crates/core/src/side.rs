//! The z-relative interior/exterior partition of space.
//!
//! A point y is Interior when the open segment (z, y] crosses M an odd number
//! of times and y lies on the −ν side of the tangent plane at z, or an even
//! number of times and y lies on the +ν side; Exterior in the mirrored cases.
//! With this rule ν points *away* from the interior near z.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_chunks, pairwise, Execution};
use crate::geometry::{Aabb, Hypersurface, Point};
use crate::params::Dim;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SideLabel {
    Interior,
    Exterior,
    Indeterminate,
}

impl SideLabel {
    /// +1 / −1 / 0.
    pub fn sign(self) -> f64 {
        match self {
            SideLabel::Interior => 1.0,
            SideLabel::Exterior => -1.0,
            SideLabel::Indeterminate => 0.0,
        }
    }

    pub fn flipped(self) -> SideLabel {
        match self {
            SideLabel::Interior => SideLabel::Exterior,
            SideLabel::Exterior => SideLabel::Interior,
            SideLabel::Indeterminate => SideLabel::Indeterminate,
        }
    }
}

/// Largest angle between ν and the normal of a facet touching z.
const NORMAL_ANGLE_TOL: f64 = 1e-6;

/// A validated base point: classification of many query points without
/// re-checking z every time.
#[derive(Clone, Debug)]
pub struct Classifier<'a> {
    m: &'a Hypersurface,
    z: Point,
    nu: Point,
    tol: f64,
    angle_tol: f64,
    facet: usize,
}

impl<'a> Classifier<'a> {
    pub fn new(m: &'a Hypersurface, z: Point, nu: Point, tol: f64) -> Result<Self> {
        if (nu.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!("normal must be a unit vector, |nu| = {}", nu.norm())));
        }
        if m.dim() == Dim::Two && (z.z != 0.0 || nu.z != 0.0) {
            return Err(Error::InvalidParams("planar base point and normal need zero third coordinate".into()));
        }
        // whether z lies on M is judged at the scale of M, even when `tol` has
        // been tightened for short facets (chord sag of a sampled curve)
        let on_tol = tol.max(crate::geometry::REL_TOL * m.diam());
        let facet = m.locate(&z, on_tol)?;
        let cos_min = NORMAL_ANGLE_TOL.cos();
        let mut bad = None;
        let probe = Aabb { min: z, max: z }.padded(on_tol);
        m.bvh().visit_box(&probe, |f| {
            if (m.closest_on_facet(f, &z) - z).norm() <= on_tol && m.facet_normal(f).dot(&nu).abs() < cos_min {
                bad = Some(f);
            }
        });
        if let Some(f) = bad {
            let d = (m.closest_on_facet(f, &z) - z).norm();
            return Err(Error::PointNotOnSurface(d.max(on_tol)));
        }
        Ok(Classifier { m, z, nu, tol, angle_tol: (tol / m.diam()).max(1e-12), facet })
    }

    pub fn surface(&self) -> &Hypersurface {
        self.m
    }

    pub fn base(&self) -> Point {
        self.z
    }

    pub fn normal(&self) -> Point {
        self.nu
    }

    pub fn facet(&self) -> usize {
        self.facet
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn label(&self, y: &Point) -> SideLabel {
        let d = self.z - y;
        let len = d.norm();
        let side = d.dot(&self.nu);
        if side.abs() < self.angle_tol * len || len <= self.tol {
            return SideLabel::Indeterminate;
        }
        let c = self.m.crossings_from(&self.z, y, self.tol);
        if c.tangent {
            return SideLabel::Indeterminate;
        }
        let odd = c.count % 2 == 1;
        if odd != (side > 0.0) {
            SideLabel::Interior
        } else {
            SideLabel::Exterior
        }
    }
}

pub fn classify(m: &Hypersurface, z: Point, nu: Point, y: Point, tol: f64) -> Result<SideLabel> {
    Ok(Classifier::new(m, z, nu, tol)?.label(&y))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionVolumes {
    pub vol_interior: f64,
    pub vol_exterior: f64,
    pub vol_indeterminate: f64,
    /// Standard error of `vol_interior` (the others are of the same order).
    pub std_error: f64,
    pub n_samples: usize,
}

/// Monte Carlo volumes of the three labels inside an axis-aligned box (its
/// third extent is ignored in the plane).
pub fn partition_volume(
    m: &Hypersurface,
    z: Point,
    nu: Point,
    region: &Aabb,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<PartitionVolumes> {
    let cls = Classifier::new(m, z, nu, m.default_tol())?;
    let dim = m.dim();
    let ext = region.max - region.min;
    let vol = match dim {
        Dim::Two => ext.x * ext.y,
        Dim::Three => ext.x * ext.y * ext.z,
    };
    if !(vol > 0.0) || n_samples == 0 {
        return Ok(PartitionVolumes { vol_interior: 0.0, vol_exterior: 0.0, vol_indeterminate: 0.0, std_error: 0.0, n_samples });
    }
    let counts = map_chunks(n_samples, exec, |r| {
        let mut c = [0u64; 3];
        for i in r {
            let mut g = rng::stream(seed, i as u64);
            let mut y = region.min;
            for k in 0..dim.n() {
                y[k] += ext[k] * rng::unit(&mut g);
            }
            c[match cls.label(&y) {
                SideLabel::Interior => 0,
                SideLabel::Exterior => 1,
                SideLabel::Indeterminate => 2,
            }] += 1;
        }
        c
    });
    let c = pairwise(&counts, [0u64; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    let n = n_samples as f64;
    let p = c[0] as f64 / n;
    Ok(PartitionVolumes {
        vol_interior: vol * p,
        vol_exterior: vol * c[1] as f64 / n,
        vol_indeterminate: vol * c[2] as f64 / n,
        std_error: vol * (p * (1.0 - p) / n).sqrt(),
        n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_polyline, pt2};

    fn flat() -> Hypersurface {
        build_polyline(&[pt2(-1.0, 0.0), pt2(1.0, 0.0)], false).unwrap()
    }

    #[test]
    fn flat_segment_labels() {
        let m = flat();
        let (z, nu) = (pt2(0.0, 0.0), pt2(0.0, 1.0));
        assert_eq!(classify(&m, z, nu, pt2(0.2, -0.5), 1e-9).unwrap(), SideLabel::Interior);
        assert_eq!(classify(&m, z, nu, pt2(0.2, 0.5), 1e-9).unwrap(), SideLabel::Exterior);
        assert_eq!(classify(&m, z, -nu, pt2(0.2, 0.5), 1e-9).unwrap(), SideLabel::Interior);
        assert_eq!(classify(&m, z, nu, pt2(3.0, 0.0), 1e-9).unwrap(), SideLabel::Indeterminate);
    }

    #[test]
    fn off_surface_base_point() {
        let m = flat();
        let e = classify(&m, pt2(0.0, 0.1), pt2(0.0, 1.0), pt2(0.0, 1.0), 1e-9).unwrap_err();
        assert!(matches!(e, Error::PointNotOnSurface(_)));
        // wrong normal is also rejected
        let e = classify(&m, pt2(0.0, 0.0), pt2(1.0, 0.0), pt2(0.0, 1.0), 1e-9).unwrap_err();
        assert!(matches!(e, Error::PointNotOnSurface(_)));
    }

    #[test]
    fn degenerate_region_is_zero() {
        let m = flat();
        let r = Aabb { min: pt2(0.0, 0.0), max: pt2(1.0, 0.0) };
        let v = partition_volume(&m, pt2(0.0, 0.0), pt2(0.0, 1.0), &r, 1000, 1, Execution::Sequential).unwrap();
        assert_eq!((v.vol_interior, v.vol_exterior, v.vol_indeterminate), (0.0, 0.0, 0.0));
    }
}
