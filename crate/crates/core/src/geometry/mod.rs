//! Oriented hypersurfaces with boundary: polylines in the plane, triangle
//! meshes in space. Points are always stored as 3-vectors; in the plane the
//! third coordinate is identically zero.

mod bvh;
mod intersect;
pub mod io;

pub use bvh::{Aabb, Bvh};
pub use intersect::{Crossings, Hit};

use nalgebra::{Isometry3, Vector3};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::params::Dim;

pub type Point = Vector3<f64>;

/// Minimal admissible facet length/area.
pub const MIN_FACET_MEASURE: f64 = 1e-14;
/// Default distance tolerance relative to the bounding-box diameter.
pub const REL_TOL: f64 = 1e-9;

pub fn pt2(x: f64, y: f64) -> Point {
    Point::new(x, y, 0.0)
}

/// A query segment `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidParams("segment endpoints coincide".into()));
        }
        Ok(Segment { a, b })
    }
}

/// One connected polyline piece, as vertex indices in traversal order.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub vertices: Vec<usize>,
    pub closed: bool,
}

#[derive(Clone, Debug)]
pub struct Hypersurface {
    dim: Dim,
    vertices: Vec<Point>,
    // Facets as vertex index triples; for polylines the third slot repeats the second.
    facets: Vec<[usize; 3]>,
    normals: Vec<Point>,
    measures: Vec<f64>,
    // triangle altitudes (distance from vertex k to the opposite edge); unused in 2D
    altitudes: Vec<[f64; 3]>,
    chains: Vec<Chain>,
    boundary: Vec<Vec<usize>>,
    bvh: Bvh,
    bbox: Aabb,
}

impl Hypersurface {
    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    pub fn n_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn facet(&self, f: usize) -> &[usize] {
        match self.dim {
            Dim::Two => &self.facets[f][..2],
            Dim::Three => &self.facets[f][..],
        }
    }

    pub fn facet_points(&self, f: usize) -> [Point; 3] {
        let [a, b, c] = self.facets[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn facet_normal(&self, f: usize) -> Point {
        self.normals[f]
    }

    pub fn facet_normals(&self) -> &[Point] {
        &self.normals
    }

    /// Length (N=2) or area (N=3).
    pub fn facet_measure(&self, f: usize) -> f64 {
        self.measures[f]
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    pub fn barycenter(&self, f: usize) -> Point {
        let p = self.facet_points(f);
        match self.dim {
            Dim::Two => (p[0] + p[1]) * 0.5,
            Dim::Three => (p[0] + p[1] + p[2]) / 3.0,
        }
    }

    /// Polyline chains (empty for meshes).
    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    /// Boundary rings. In the plane every chain endpoint is its own ring.
    pub fn boundary(&self) -> &[Vec<usize>] {
        &self.boundary
    }

    pub fn boundary_points(&self) -> Vec<Point> {
        self.boundary.iter().flatten().map(|&i| self.vertices[i]).collect()
    }

    pub fn is_closed(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn bbox(&self) -> Aabb {
        self.bbox
    }

    /// Bounding-box diagonal.
    pub fn diam(&self) -> f64 {
        self.bbox.diagonal()
    }

    /// REL_TOL·diam, capped at 1e-7 of the smallest facet width so that
    /// short, nearly collinear facets stay distinguishable; never below a few
    /// ulps of the coordinates.
    pub fn default_tol(&self) -> f64 {
        let diam = self.diam().max(f64::MIN_POSITIVE);
        let width = match self.dim {
            Dim::Two => self.measures.iter().copied().fold(f64::INFINITY, f64::min),
            Dim::Three => self.altitudes.iter().flatten().copied().fold(f64::INFINITY, f64::min),
        };
        let scale = diam + self.bbox.min.abs().max() + self.bbox.max.abs().max();
        (REL_TOL * diam).min(1e-7 * width).max(64.0 * f64::EPSILON * scale)
    }

    pub(crate) fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    pub(crate) fn altitudes(&self, f: usize) -> [f64; 3] {
        self.altitudes[f]
    }

    /// Largest distance from `z` to a vertex: beyond this radius every ray from
    /// `z` has left the surface for good.
    pub fn reach_from(&self, z: &Point) -> f64 {
        self.vertices.iter().map(|v| (v - z).norm()).fold(0.0, f64::max)
    }

    /// Distance from `x` to the boundary (infinite for closed surfaces).
    pub fn boundary_distance(&self, x: &Point) -> f64 {
        match self.dim {
            Dim::Two => self
                .boundary
                .iter()
                .flatten()
                .map(|&i| (self.vertices[i] - x).norm())
                .fold(f64::INFINITY, f64::min),
            Dim::Three => {
                let mut best = f64::INFINITY;
                for ring in &self.boundary {
                    for k in 0..ring.len() {
                        let (a, b) = (self.vertices[ring[k]], self.vertices[ring[(k + 1) % ring.len()]]);
                        best = best.min(point_segment_dist(x, &a, &b));
                    }
                }
                best
            }
        }
    }

    /// Closest point of facet `f` to `x`.
    pub fn closest_on_facet(&self, f: usize, x: &Point) -> Point {
        let p = self.facet_points(f);
        match self.dim {
            Dim::Two => closest_on_segment(x, &p[0], &p[1]),
            Dim::Three => closest_on_triangle(x, &p[0], &p[1], &p[2]),
        }
    }

    /// Nearest facet to `x`, with the closest point and its distance.
    pub fn nearest(&self, x: &Point) -> Option<(usize, Point, f64)> {
        self.nearest_filtered(x, |_| false)
    }

    pub fn nearest_filtered(&self, x: &Point, skip: impl Fn(usize) -> bool) -> Option<(usize, Point, f64)> {
        let (f, d2) = self
            .bvh
            .nearest(x, |f| (self.closest_on_facet(f, x) - x).norm_squared(), skip)?;
        Some((f, self.closest_on_facet(f, x), d2.sqrt()))
    }

    /// Facet containing `z` within `tol`, or `PointNotOnSurface`.
    pub fn locate(&self, z: &Point, tol: f64) -> Result<usize> {
        match self.nearest(z) {
            Some((f, _, d)) if d <= tol => Ok(f),
            Some((_, _, d)) => Err(Error::PointNotOnSurface(d)),
            None => Err(Error::PointNotOnSurface(f64::INFINITY)),
        }
    }

    /// Rebuilds the surface after a rigid motion (orientation preserved).
    pub fn transformed(&self, iso: &Isometry3<f64>) -> Result<Hypersurface> {
        self.map_vertices(|p| iso.transform_point(&nalgebra::Point3::from(*p)).coords)
    }

    pub fn scaled(&self, lambda: f64) -> Result<Hypersurface> {
        self.map_vertices(|p| p * lambda)
    }

    fn map_vertices(&self, f: impl Fn(&Point) -> Point) -> Result<Hypersurface> {
        let verts: Vec<Point> = self.vertices.iter().map(f).collect();
        match self.dim {
            Dim::Two => {
                let chains = self
                    .chains
                    .iter()
                    .map(|c| (c.vertices.iter().map(|&i| verts[i]).collect(), c.closed))
                    .collect::<Vec<_>>();
                build_polylines(&chains)
            }
            Dim::Three => {
                let tris: Vec<[usize; 3]> = self.facets.clone();
                build_trimesh(&verts, &tris)
            }
        }
    }
}

/// Single polyline chain.
pub fn build_polyline(points: &[Point], closed: bool) -> Result<Hypersurface> {
    build_polylines(&[(points.to_vec(), closed)])
}

/// Several chains at once. Chains may touch at shared endpoints (the apex of
/// an X-shaped cone) but must not cross.
pub fn build_polylines(chains_in: &[(Vec<Point>, bool)]) -> Result<Hypersurface> {
    if chains_in.is_empty() {
        return Err(Error::InvalidMesh("no chains".into()));
    }
    let mut vertices = Vec::new();
    let mut facets = Vec::new();
    let mut chains = Vec::new();
    let mut boundary = Vec::new();
    for (pts, closed) in chains_in {
        let closed = *closed;
        if pts.len() < 2 || (closed && pts.len() < 3) {
            return Err(Error::InvalidMesh(format!("chain with {} points", pts.len())));
        }
        if pts.iter().any(|p| p.z != 0.0 || !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidMesh("planar chains need finite points with z = 0".into()));
        }
        let base = vertices.len();
        vertices.extend_from_slice(pts);
        let idx: Vec<usize> = (base..base + pts.len()).collect();
        let n_seg = if closed { pts.len() } else { pts.len() - 1 };
        for k in 0..n_seg {
            let (a, b) = (idx[k], idx[(k + 1) % pts.len()]);
            facets.push([a, b, b]);
        }
        if !closed {
            boundary.push(vec![idx[0]]);
            boundary.push(vec![*idx.last().unwrap()]);
        }
        chains.push(Chain { vertices: idx, closed });
    }
    let mut normals = Vec::with_capacity(facets.len());
    let mut measures = Vec::with_capacity(facets.len());
    for (i, f) in facets.iter().enumerate() {
        let d = vertices[f[1]] - vertices[f[0]];
        let len = d.norm();
        if !(len > MIN_FACET_MEASURE) {
            return Err(Error::DegenerateFacet { index: i, measure: len });
        }
        normals.push(Point::new(-d.y / len, d.x / len, 0.0));
        measures.push(len);
    }
    let boxes: Vec<Aabb> = facets
        .iter()
        .map(|f| Aabb::from_points([&vertices[f[0]], &vertices[f[1]]]))
        .collect();
    let bvh = Bvh::build(&boxes);
    let bbox = Aabb::from_points(vertices.iter());
    let m = Hypersurface {
        dim: Dim::Two,
        altitudes: vec![[0.0; 3]; facets.len()],
        vertices,
        facets,
        normals,
        measures,
        chains,
        boundary,
        bvh,
        bbox,
    };
    if let Some((i, j)) = find_crossing_segments(&m) {
        return Err(Error::SelfIntersection(i, j));
    }
    Ok(m)
}

fn cross2(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

// Any pair of segments that meet other than at a shared endpoint (by index or
// by coordinates).
fn find_crossing_segments(m: &Hypersurface) -> Option<(usize, usize)> {
    let scale = m.diam().max(1e-300);
    let eps = 1e-12 * scale;
    for i in 0..m.facets.len() {
        let [a, b, _] = m.facets[i];
        let (pa, pb) = (m.vertices[a], m.vertices[b]);
        let query = Aabb::from_points([&pa, &pb]).padded(eps);
        let mut found = None;
        m.bvh.visit_box(&query, |j| {
            if j <= i || found.is_some() {
                return;
            }
            let [c, d, _] = m.facets[j];
            if c == a || c == b || d == a || d == b {
                // adjacent along a chain: only a fold-back overlap is illegal
                let shared = if c == a || c == b { c } else { d };
                let (o1, o2) = (
                    if shared == a { pb } else { pa },
                    if shared == c { m.vertices[d] } else { m.vertices[c] },
                );
                let s = m.vertices[shared];
                let (u, v) = (o1 - s, o2 - s);
                if cross2(&u, &v).abs() <= 1e-12 * u.norm() * v.norm() && u.dot(&v) > 0.0 {
                    found = Some((i, j));
                }
                return;
            }
            let (pc, pd) = (m.vertices[c], m.vertices[d]);
            if segments_touch_illegally(&pa, &pb, &pc, &pd, eps) {
                found = Some((i, j));
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

fn segments_touch_illegally(a: &Point, b: &Point, c: &Point, d: &Point, eps: f64) -> bool {
    let endpoint_pair = |p: &Point, q: &Point| (p - q).norm() <= eps;
    let shares_end = endpoint_pair(a, c) || endpoint_pair(a, d) || endpoint_pair(b, c) || endpoint_pair(b, d);
    let dist = segment_segment_dist(a, b, c, d);
    if dist > eps {
        return false;
    }
    if !shares_end {
        return true;
    }
    // They share an endpoint: illegal only if they also meet elsewhere, i.e.
    // they overlap collinearly.
    let (e1, e2) = (b - a, d - c);
    let collinear = cross2(&e1, &e2).abs() <= 1e-12 * e1.norm() * e2.norm();
    if !collinear {
        return false;
    }
    // shared point s, other ends o1, o2: overlap iff they leave s in the same direction
    let (s, o1, o2) = if endpoint_pair(a, c) {
        (a, b, d)
    } else if endpoint_pair(a, d) {
        (a, b, c)
    } else if endpoint_pair(b, c) {
        (b, a, d)
    } else {
        (b, a, c)
    };
    (o1 - s).dot(&(o2 - s)) > 0.0
}

/// Oriented triangle mesh. Facet winding is made consistent per connected
/// component (the first triangle of each component fixes the orientation).
pub fn build_trimesh(vertices: &[Point], triangles: &[[usize; 3]]) -> Result<Hypersurface> {
    if triangles.is_empty() {
        return Err(Error::InvalidMesh("no triangles".into()));
    }
    for t in triangles {
        if t.iter().any(|&i| i >= vertices.len()) {
            return Err(Error::InvalidMesh(format!("triangle {t:?} has an out-of-range index")));
        }
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(Error::InvalidMesh(format!("triangle {t:?} repeats a vertex")));
        }
    }
    let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (ti, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            edges.entry((a.min(b), a.max(b))).or_default().push(ti);
        }
    }
    for (&(a, b), inc) in &edges {
        if inc.len() > 2 {
            return Err(Error::NonManifoldEdge(a, b));
        }
    }
    // does triangle t traverse a -> b?
    let forward = |t: &[usize; 3], a: usize, b: usize| (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b);
    let mut flip: Vec<Option<bool>> = vec![None; triangles.len()];
    for seed in 0..triangles.len() {
        if flip[seed].is_some() {
            continue;
        }
        flip[seed] = Some(false);
        let mut queue = vec![seed];
        while let Some(t) = queue.pop() {
            let ft = flip[t].unwrap();
            let tri = &triangles[t];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                // effective direction of t on this edge
                let (ea, eb) = if ft { (b, a) } else { (a, b) };
                for &o in &edges[&(a.min(b), a.max(b))] {
                    if o == t {
                        continue;
                    }
                    // o must traverse eb -> ea
                    let need = !forward(&triangles[o], eb, ea);
                    match flip[o] {
                        None => {
                            flip[o] = Some(need);
                            queue.push(o);
                        }
                        Some(f) if f != need => return Err(Error::NonOrientable),
                        _ => {}
                    }
                }
            }
        }
    }
    let facets: Vec<[usize; 3]> = triangles
        .iter()
        .zip(&flip)
        .map(|(t, f)| if f.unwrap() { [t[0], t[2], t[1]] } else { *t })
        .collect();
    let mut normals = Vec::with_capacity(facets.len());
    let mut measures = Vec::with_capacity(facets.len());
    let mut altitudes = Vec::with_capacity(facets.len());
    for (i, t) in facets.iter().enumerate() {
        let (a, b, c) = (vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        let n = (b - a).cross(&(c - a));
        let area = 0.5 * n.norm();
        if !(area > MIN_FACET_MEASURE) {
            return Err(Error::DegenerateFacet { index: i, measure: area });
        }
        normals.push(n / (2.0 * area));
        measures.push(area);
        // altitude from vertex k onto the opposite edge
        let opp = [(c - b).norm(), (a - c).norm(), (b - a).norm()];
        altitudes.push([2.0 * area / opp[0], 2.0 * area / opp[1], 2.0 * area / opp[2]]);
    }
    // boundary: directed single-incidence edges, chained into loops
    let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut n_bd = 0;
    for t in &facets {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if edges[&(a.min(b), a.max(b))].len() == 1 {
                next.entry(a).or_default().push(b);
                n_bd += 1;
            }
        }
    }
    let mut starts: Vec<usize> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut boundary = Vec::new();
    let mut used = 0;
    for s in starts {
        while next.get(&s).map_or(false, |v| !v.is_empty()) {
            let mut ring = vec![s];
            let mut cur = s;
            loop {
                let nx = match next.get_mut(&cur).and_then(|v| v.pop()) {
                    Some(nx) => nx,
                    None => return Err(Error::InvalidMesh("open boundary edge chain".into())),
                };
                used += 1;
                if nx == s {
                    break;
                }
                ring.push(nx);
                cur = nx;
            }
            boundary.push(ring);
        }
    }
    debug_assert_eq!(used, n_bd);
    let boxes: Vec<Aabb> = facets
        .iter()
        .map(|t| Aabb::from_points([&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]]))
        .collect();
    let bvh = Bvh::build(&boxes);
    let bbox = Aabb::from_points(vertices.iter());
    Ok(Hypersurface {
        dim: Dim::Three,
        vertices: vertices.to_vec(),
        facets,
        normals,
        measures,
        altitudes,
        chains: Vec::new(),
        boundary,
        bvh,
        bbox,
    })
}

pub fn closest_on_segment(x: &Point, a: &Point, b: &Point) -> Point {
    let d = b - a;
    let t = ((x - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
    a + d * t
}

pub fn point_segment_dist(x: &Point, a: &Point, b: &Point) -> f64 {
    (closest_on_segment(x, a, b) - x).norm()
}

/// Distance between two segments (any dimension up to 3).
pub fn segment_segment_dist(a: &Point, b: &Point, c: &Point, d: &Point) -> f64 {
    let (d1, d2, r) = (b - a, d - c, a - c);
    let (aa, ee, f) = (d1.norm_squared(), d2.norm_squared(), d2.dot(&r));
    let cc = d1.dot(&r);
    let bb = d1.dot(&d2);
    let denom = aa * ee - bb * bb;
    let mut s = if denom > 1e-300 { ((bb * f - cc * ee) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = (bb * s + f) / ee;
    if t < 0.0 {
        t = 0.0;
        s = (-cc / aa).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((bb - cc) / aa).clamp(0.0, 1.0);
    }
    ((a + d1 * s) - (c + d2 * t)).norm()
}

/// Closest point on triangle (Ericson, Real-Time Collision Detection §5.1.5).
pub fn closest_on_triangle(p: &Point, a: &Point, b: &Point, c: &Point) -> Point {
    let (ab, ac, ap) = (b - a, c - a, p - a);
    let (d1, d2) = (ab.dot(&ap), ac.dot(&ap));
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let (d3, d4) = (ab.dot(&bp), ac.dot(&bp));
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let (d5, d6) = (ab.dot(&cp), ac.dot(&cp));
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_segment() {
        let m = build_polyline(&[pt2(-1.0, 0.0), pt2(1.0, 0.0)], false).unwrap();
        assert_eq!(m.n_facets(), 1);
        assert_eq!(m.facet_normal(0), Point::new(0.0, 1.0, 0.0));
        assert_eq!(m.boundary_points(), vec![pt2(-1.0, 0.0), pt2(1.0, 0.0)]);
        assert!(!m.is_closed());
    }

    #[test]
    fn closed_square_has_no_boundary() {
        let sq = [pt2(0.0, 0.0), pt2(1.0, 0.0), pt2(1.0, 1.0), pt2(0.0, 1.0)];
        let m = build_polyline(&sq, true).unwrap();
        assert_eq!(m.n_facets(), 4);
        assert!(m.is_closed());
        // counter-clockwise traversal gives inward normals, consistently
        let c = pt2(0.5, 0.5);
        for f in 0..4 {
            assert!((c - m.barycenter(f)).dot(&m.facet_normal(f)) > 0.0);
        }
    }

    #[test]
    fn duplicate_points_are_degenerate() {
        let e = build_polyline(&[pt2(0.0, 0.0), pt2(0.0, 0.0)], false).unwrap_err();
        assert!(matches!(e, Error::DegenerateFacet { .. }));
    }

    #[test]
    fn crossing_chain_is_rejected() {
        let bow = [pt2(0.0, 0.0), pt2(1.0, 1.0), pt2(1.0, 0.0), pt2(0.0, 1.0)];
        assert!(matches!(build_polyline(&bow, false), Err(Error::SelfIntersection(..))));
        let fold = [pt2(0.0, 0.0), pt2(1.0, 0.0), pt2(0.5, 0.0)];
        assert!(matches!(build_polyline(&fold, false), Err(Error::SelfIntersection(..))));
    }

    #[test]
    fn chains_may_share_an_apex() {
        let v = vec![pt2(-1.0, 1.0), pt2(0.0, 0.0), pt2(1.0, 1.0)];
        let l = vec![pt2(1.0, -1.0), pt2(0.0, 0.0), pt2(-1.0, -1.0)];
        let m = build_polylines(&[(v, false), (l, false)]).unwrap();
        assert_eq!(m.n_facets(), 4);
        assert_eq!(m.boundary().len(), 4);
        // but a T-junction is not allowed
        let a = vec![pt2(-1.0, 0.0), pt2(1.0, 0.0)];
        let b = vec![pt2(0.0, 0.0), pt2(0.0, 1.0)];
        assert!(build_polylines(&[(a, false), (b, false)]).is_err());
    }

    fn fan_disk(n: usize) -> (Vec<Point>, Vec<[usize; 3]>) {
        let mut v = vec![Point::zeros()];
        for k in 0..n {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            v.push(Point::new(t.cos(), t.sin(), 0.0));
        }
        let tris = (0..n).map(|k| [0, 1 + k, 1 + (k + 1) % n]).collect();
        (v, tris)
    }

    #[test]
    fn fan_disk_boundary_ring() {
        let (v, t) = fan_disk(256);
        let m = build_trimesh(&v, &t).unwrap();
        assert_eq!(m.boundary().len(), 1);
        assert_eq!(m.boundary()[0].len(), 256);
        let ring = &m.boundary()[0];
        let len: f64 = (0..ring.len())
            .map(|k| (m.vertex(ring[k]) - m.vertex(ring[(k + 1) % ring.len()])).norm())
            .sum();
        assert_relative_eq!(len, 2.0 * std::f64::consts::PI, max_relative = 1e-4);
        for f in 0..m.n_facets() {
            assert_relative_eq!(m.facet_normal(f).z, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn inconsistent_winding_is_repaired() {
        let (v, mut t) = fan_disk(16);
        t[3].swap(1, 2);
        t[9].swap(0, 1);
        let m = build_trimesh(&v, &t).unwrap();
        for f in 0..m.n_facets() {
            assert!(m.facet_normal(f).z > 0.99);
        }
    }

    #[test]
    fn tetrahedron_is_closed() {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
            Point::new(0.0, 0.0, 1.0),
        ];
        let t = vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];
        let m = build_trimesh(&v, &t).unwrap();
        assert!(m.is_closed());
    }

    #[test]
    fn mobius_strip_is_non_orientable() {
        let (n, w) = (12usize, 0.3);
        let mut v = Vec::new();
        for k in 0..n {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            for side in [-1.0, 1.0] {
                let r = 1.0 + side * w * (t / 2.0).cos();
                v.push(Point::new(r * t.cos(), r * t.sin(), side * w * (t / 2.0).sin()));
            }
        }
        let mut tris = Vec::new();
        for k in 0..n {
            let (a0, a1) = (2 * k, 2 * k + 1);
            // the half twist: the last strip glues to the first with sides swapped
            let (b0, b1) = if k + 1 == n { (1, 0) } else { (2 * k + 2, 2 * k + 3) };
            tris.push([a0, b0, a1]);
            tris.push([a1, b0, b1]);
        }
        assert_eq!(build_trimesh(&v, &tris).unwrap_err(), Error::NonOrientable);
    }

    #[test]
    fn non_manifold_edge() {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
            Point::new(0.0, -1.0, 0.0),
            Point::new(0.0, 0.0, 1.0),
        ];
        let t = vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]];
        assert!(matches!(build_trimesh(&v, &t), Err(Error::NonManifoldEdge(0, 1))));
    }

    #[test]
    fn triangle_closest_point() {
        let (a, b, c) = (Point::zeros(), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0));
        let p = closest_on_triangle(&Point::new(0.2, 0.2, 3.0), &a, &b, &c);
        assert_relative_eq!(p, Point::new(0.2, 0.2, 0.0));
        let p = closest_on_triangle(&Point::new(2.0, 2.0, 0.0), &a, &b, &c);
        assert_relative_eq!(p, Point::new(0.5, 0.5, 0.0));
    }
}
