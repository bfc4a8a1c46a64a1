//! Segment/facet intersection with explicit unreliability flags.

use super::{Hypersurface, Point, Segment};
use crate::params::Dim;

/// Result of counting transversal crossings along a segment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Crossings {
    pub count: usize,
    /// Parity may be wrong: some intersection is near a facet edge, grazing,
    /// or at an endpoint of the query segment.
    pub tangent: bool,
}

/// One intersection of a query segment with a facet.
#[derive(Clone, Copy, Debug)]
pub struct Hit {
    /// Parameter along the query segment, in [0, 1] up to tolerance.
    pub t: f64,
    pub facet: usize,
    /// Near an edge/vertex, grazing, or coincident with a query endpoint.
    pub unreliable: bool,
}

// Tolerances for one query, derived from the distance tolerance.
#[derive(Clone, Copy)]
struct Tols {
    dist: f64,
    // tolerance on |cos(direction, normal)|
    angle: f64,
}

impl Hypersurface {
    fn tols(&self, tol: f64) -> Tols {
        Tols { dist: tol, angle: (tol / self.diam().max(f64::MIN_POSITIVE)).max(1e-12) }
    }

    /// Visits every intersection of the segment `[p, q]` with the surface.
    pub fn for_each_hit(&self, p: &Point, q: &Point, tol: f64, mut f: impl FnMut(Hit)) {
        let tols = self.tols(tol);
        let d = q - p;
        let len = d.norm();
        if len == 0.0 {
            return;
        }
        self.bvh().visit_segment(p, q, tol, |fi| {
            let hit = match self.dim() {
                Dim::Two => self.hit_segment_2d(fi, p, &d, len, tols),
                Dim::Three => self.hit_triangle(fi, p, &d, len, tols),
            };
            if let Some(h) = hit {
                f(h);
            }
        });
    }

    fn hit_segment_2d(&self, fi: usize, p: &Point, d: &Point, len: f64, tols: Tols) -> Option<Hit> {
        let [a, b, _] = self.facet_points(fi);
        let e = b - a;
        let elen = self.facet_measure(fi);
        let denom = d.x * e.y - d.y * e.x;
        let ap = a - p;
        if denom.abs() <= tols.angle * len * elen {
            // (nearly) parallel: only matters if the two are within tolerance
            let dist = super::segment_segment_dist(p, &(p + d), &a, &b);
            if dist > tols.dist {
                return None;
            }
            let t = (closest_param(p, d, &a).min(closest_param(p, d, &b))).clamp(0.0, 1.0);
            return Some(Hit { t, facet: fi, unreliable: true });
        }
        let t = (ap.x * e.y - ap.y * e.x) / denom;
        let u = (ap.x * d.y - ap.y * d.x) / denom;
        let (tt, tu) = (tols.dist / len, tols.dist / elen);
        if t < -tt || t > 1.0 + tt || u < -tu || u > 1.0 + tu {
            return None;
        }
        let near_vertex = u < tu || u > 1.0 - tu;
        let near_end = t < tt || t > 1.0 - tt;
        Some(Hit { t, facet: fi, unreliable: near_vertex || near_end })
    }

    fn hit_triangle(&self, fi: usize, p: &Point, d: &Point, len: f64, tols: Tols) -> Option<Hit> {
        let [a, b, c] = self.facet_points(fi);
        let n = self.facet_normal(fi);
        let h = self.altitudes(fi);
        let (e1, e2) = (b - a, c - a);
        let cosang = d.dot(&n) / len;
        if cosang.abs() <= tols.angle {
            let (sp, sq) = ((p - a).dot(&n), (p + d - a).dot(&n));
            let t = if sp * sq < 0.0 {
                sp / (sp - sq)
            } else if sp.abs() < sq.abs() {
                0.0
            } else {
                1.0
            };
            if sp.abs() <= tols.dist && sq.abs() <= tols.dist {
                // coplanar: does the segment meet the triangle at all?
                let q = p + d;
                let inside = |x: &Point| {
                    let lam = barycentric(x, &a, &e1, &e2);
                    (0..3).all(|k| lam[k] * h[k] >= -tols.dist)
                };
                let near_edge = [(a, b), (b, c), (c, a)]
                    .iter()
                    .any(|(u, v)| super::segment_segment_dist(p, &q, u, v) <= tols.dist);
                return (inside(p) || inside(&q) || near_edge).then_some(Hit { t: 0.5, facet: fi, unreliable: true });
            }
            let x = p + d * t;
            if (x - a).dot(&n).abs() > tols.dist {
                return None;
            }
            let lam = barycentric(&x, &a, &e1, &e2);
            if (0..3).all(|k| lam[k] * h[k] >= -tols.dist) {
                return Some(Hit { t, facet: fi, unreliable: true });
            }
            return None;
        }
        // Möller–Trumbore
        let pvec = d.cross(&e2);
        let det = e1.dot(&pvec);
        let inv = 1.0 / det;
        let tvec = p - a;
        let u = tvec.dot(&pvec) * inv;
        let qvec = tvec.cross(&e1);
        let v = d.dot(&qvec) * inv;
        let t = e2.dot(&qvec) * inv;
        let lam = [1.0 - u - v, u, v];
        let tt = tols.dist / len;
        if t < -tt || t > 1.0 + tt {
            return None;
        }
        let mut min_edge = f64::INFINITY;
        for k in 0..3 {
            let de = lam[k] * h[k];
            if de < -tols.dist {
                return None;
            }
            min_edge = min_edge.min(de);
        }
        let unreliable = min_edge < tols.dist || t < tt || t > 1.0 - tt;
        Some(Hit { t, facet: fi, unreliable })
    }

    /// Transversal interior crossings of `seg`, with the tangent flag raised
    /// for any near-degenerate intersection (including one at an endpoint).
    pub fn intersect_count(&self, seg: &Segment, tol: f64) -> Crossings {
        let mut c = Crossings::default();
        self.for_each_hit(&seg.a, &seg.b, tol, |h| {
            if h.unreliable {
                c.tangent = true;
            } else {
                c.count += 1;
            }
        });
        c
    }

    /// Crossings of the half-open segment `(z, y]` for `z` on the surface:
    /// intersections within `tol` of `z` are dropped (the base point is never
    /// counted), everything else as in [`Hypersurface::intersect_count`].
    pub fn crossings_from(&self, z: &Point, y: &Point, tol: f64) -> Crossings {
        let len = (y - z).norm();
        let mut c = Crossings::default();
        self.for_each_hit(z, y, tol, |h| {
            if h.t * len <= tol && !self.grazes(h.facet, z, y, tol) {
                return;
            }
            if h.unreliable {
                c.tangent = true;
            } else {
                c.count += 1;
            }
        });
        c
    }

    // A facet through z that the segment runs along (not merely leaves).
    fn grazes(&self, f: usize, z: &Point, y: &Point, tol: f64) -> bool {
        let d = y - z;
        (d.dot(&self.facet_normal(f))).abs() <= self.tols(tol).angle * d.norm()
    }
}

fn closest_param(p: &Point, d: &Point, x: &Point) -> f64 {
    (x - p).dot(d) / d.norm_squared()
}

fn barycentric(x: &Point, a: &Point, e1: &Point, e2: &Point) -> [f64; 3] {
    let w = x - a;
    let (d00, d01, d11) = (e1.dot(e1), e1.dot(e2), e2.dot(e2));
    let (d20, d21) = (w.dot(e1), w.dot(e2));
    let den = d00 * d11 - d01 * d01;
    let v = (d11 * d20 - d01 * d21) / den;
    let u = (d00 * d21 - d01 * d20) / den;
    [1.0 - v - u, v, u]
}

#[cfg(test)]
mod tests {
    use super::super::{build_polyline, build_trimesh, pt2};
    use super::*;

    fn flat() -> Hypersurface {
        build_polyline(&[pt2(-1.0, 0.0), pt2(1.0, 0.0)], false).unwrap()
    }

    #[test]
    fn vertical_crossing() {
        let m = flat();
        let c = m.intersect_count(&Segment::new(pt2(0.0, -1.0), pt2(0.0, 1.0)).unwrap(), 1e-9);
        assert_eq!(c, Crossings { count: 1, tangent: false });
    }

    #[test]
    fn parallel_miss() {
        let m = flat();
        let c = m.intersect_count(&Segment::new(pt2(0.0, 0.5), pt2(1.0, 0.5)).unwrap(), 1e-9);
        assert_eq!(c, Crossings { count: 0, tangent: false });
    }

    #[test]
    fn collinear_is_tangent() {
        let m = flat();
        let c = m.intersect_count(&Segment::new(pt2(-2.0, 0.0), pt2(2.0, 0.0)).unwrap(), 1e-9);
        assert!(c.tangent);
    }

    #[test]
    fn endpoint_on_surface_is_flagged_but_skippable() {
        let m = flat();
        let (z, y) = (pt2(0.1, 0.0), pt2(0.3, -2.0));
        assert!(m.intersect_count(&Segment::new(z, y).unwrap(), 1e-9).tangent);
        assert_eq!(m.crossings_from(&z, &y, 1e-9), Crossings { count: 0, tangent: false });
    }

    #[test]
    fn through_vertex_is_flagged() {
        let m = build_polyline(&[pt2(-1.0, 0.0), pt2(0.0, 0.0), pt2(1.0, 0.5)], false).unwrap();
        let c = m.intersect_count(&Segment::new(pt2(0.0, -1.0), pt2(0.0, 1.0)).unwrap(), 1e-9);
        assert!(c.tangent);
    }

    #[test]
    fn triangle_crossing_and_edge_flag() {
        let v = vec![Point::zeros(), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)];
        let m = build_trimesh(&v, &[[0, 1, 2]]).unwrap();
        let c = m.intersect_count(&Segment::new(Point::new(0.2, 0.2, -1.0), Point::new(0.2, 0.2, 1.0)).unwrap(), 1e-9);
        assert_eq!(c, Crossings { count: 1, tangent: false });
        let c = m.intersect_count(&Segment::new(Point::new(0.5, 0.5, -1.0), Point::new(0.5, 0.5, 1.0)).unwrap(), 1e-9);
        assert!(c.tangent);
        let c = m.intersect_count(&Segment::new(Point::new(0.8, 0.8, -1.0), Point::new(0.8, 0.8, 1.0)).unwrap(), 1e-9);
        assert_eq!(c, Crossings { count: 0, tangent: false });
        let c = m.intersect_count(&Segment::new(Point::new(-1.0, 0.2, 0.0), Point::new(2.0, 0.2, 0.0)).unwrap(), 1e-9);
        assert!(c.tangent);
    }
}
