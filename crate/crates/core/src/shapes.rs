//! The explicit geometries: flat disks, cones, the two-sheet barriers and a
//! few test surfaces for the probes.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_polyline, build_polylines, build_trimesh, pt2, Hypersurface, Point};
use crate::params::{Dim, Params};

/// Flat (N−1)-disk at x_N = `height` with normal +e_N.
/// In the plane `n_facets` equal segments; in space a fan of `n_facets` triangles.
pub fn make_flat_disk(dim: Dim, radius: f64, height: f64, n_facets: usize) -> Result<Hypersurface> {
    if !(radius > 0.0) {
        return Err(Error::DegenerateFacet { index: 0, measure: radius.max(0.0) });
    }
    let n = n_facets.max(1);
    match dim {
        Dim::Two => {
            let pts: Vec<Point> = (0..=n).map(|i| pt2(-radius + 2.0 * radius * i as f64 / n as f64, height)).collect();
            build_polyline(&pts, false)
        }
        Dim::Three => {
            let n = n.max(3);
            let mut v = vec![Point::new(0.0, 0.0, height)];
            v.extend((0..n).map(|j| {
                let th = TAU * j as f64 / n as f64;
                Point::new(radius * th.cos(), radius * th.sin(), height)
            }));
            let tris: Vec<[usize; 3]> = (0..n).map(|j| [0, 1 + j, 1 + (j + 1) % n]).collect();
            build_trimesh(&v, &tris)
        }
    }
}

/// Radius of the apex neighbourhood excluded from evaluation.
pub const APEX_EXCLUSION: f64 = 1e-3;

/// The planar cone C_d = {|x₂| = d|x₁|, |x₂| ≤ d}: a V through Γ₁ = {(±1, d)}
/// and a Λ through Γ₂ = {(±1, −d)}, meeting at the vertex. Normals point into
/// the axis region {|x₂| > d|x₁|}.
pub fn make_cone_2d(d: f64) -> Result<Hypersurface> {
    if !(d > 0.0) {
        return Err(Error::InvalidParams(format!("cone slope must be positive, got {d}")));
    }
    build_polylines(&[
        (vec![pt2(-1.0, d), pt2(0.0, 0.0), pt2(1.0, d)], false),
        (vec![pt2(1.0, -d), pt2(0.0, 0.0), pt2(-1.0, -d)], false),
    ])
}

/// Regular points of C_d with their normals: `per_arm` points on each arm at
/// fractions of the arm strictly between the apex exclusion and the boundary.
pub fn cone_2d_points(m: &Hypersurface, per_arm: usize) -> Vec<(Point, Point)> {
    let mut out = Vec::new();
    for f in 0..m.n_facets() {
        let [a, b, _] = m.facet_points(f);
        for k in 0..per_arm {
            let u = (k as f64 + 0.5) / per_arm as f64;
            // keep away from both ends
            let u = 0.1 + 0.8 * u;
            let z = a + (b - a) * u;
            if z.norm() > APEX_EXCLUSION {
                out.push((z, m.facet_normal(f)));
            }
        }
    }
    out
}

/// Triangulated double cone |x₃| = |x'| over |x'| ≤ 1 with the apex shared by
/// both nappes. Rings at radii k/n_rad, azimuths offset by half a step so the
/// meridian θ = 0 runs through facet interiors. Normals point into C̃₀.
pub fn make_cone_nd(n_azimuthal: usize, n_rad: usize) -> Result<Hypersurface> {
    if n_azimuthal < 16 || n_rad < 1 {
        return Err(Error::InvalidParams("need n_azimuthal ≥ 16 and n_rad ≥ 1".into()));
    }
    let mut v = vec![Point::zeros()];
    let mut tris = Vec::new();
    for sign in [1.0, -1.0] {
        let base = v.len();
        for k in 1..=n_rad {
            let r = k as f64 / n_rad as f64;
            for j in 0..n_azimuthal {
                let th = TAU * (j as f64 + 0.5) / n_azimuthal as f64;
                v.push(Point::new(r * th.cos(), r * th.sin(), sign * r));
            }
        }
        let idx = |k: usize, j: usize| base + (k - 1) * n_azimuthal + j % n_azimuthal;
        let mut push = |t: [usize; 3]| {
            // counter-clockwise seen from above gives an upward normal
            if sign > 0.0 {
                tris.push(t)
            } else {
                tris.push([t[0], t[2], t[1]])
            }
        };
        for j in 0..n_azimuthal {
            push([0, idx(1, j), idx(1, j + 1)]);
        }
        for k in 1..n_rad {
            for j in 0..n_azimuthal {
                push([idx(k, j), idx(k + 1, j), idx(k + 1, j + 1)]);
                push([idx(k, j), idx(k + 1, j + 1), idx(k, j + 1)]);
            }
        }
    }
    let m = build_trimesh(&v, &tris)?;
    Ok(m)
}

/// Surface point nearest to `x` and the normal of its facet.
pub fn project_to_surface(m: &Hypersurface, x: &Point) -> Result<(Point, Point)> {
    let (f, p, _) = m.nearest(x).ok_or_else(|| Error::InvalidMesh("empty surface".into()))?;
    Ok((p, m.facet_normal(f)))
}

// ---------------------------------------------------------------------------
// Barriers

/// Which of the two barriers: with the side bump v_ε around b', or without.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BarrierKind {
    WithBump,
    BumpFree,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub dim: Dim,
    pub eps: f64,
    /// Vertical offset of both sheets, 0 < t ≤ ε.
    pub t: f64,
    /// Sheet separation; `None` uses d(ε) = 2r(ε).
    pub d_sep: Option<f64>,
    /// Plateau height exponent, 0 < β < s.
    pub beta: f64,
    /// Center of the side bump, |b'| = 3/4.
    pub bump_center: Point,
}

impl BarrierSpec {
    /// Defaults: t = ε, d = d(ε), β = s/2, b' = (3/4)e₁.
    pub fn new(dim: Dim, eps: f64, params: &Params) -> Result<Self> {
        let spec = BarrierSpec { dim, eps, t: eps, d_sep: None, beta: 0.5 * params.s, bump_center: pt2(0.75, 0.0) };
        spec.validate()?;
        Ok(spec)
    }

    pub fn delta(&self) -> f64 {
        (-self.eps.ln()).powf(-0.5)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) || !(self.delta() < 0.5) {
            return Err(Error::InvalidParams(format!("need 0 < ε < e^-4 so that δ(ε) < 1/2, got ε = {}", self.eps)));
        }
        if !(self.t > 0.0 && self.t <= self.eps) {
            return Err(Error::InvalidParams(format!("need 0 < t ≤ ε, got t = {}", self.t)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParams(format!("β must lie in (0, s), got {}", self.beta)));
        }
        if ((self.bump_center.norm() - 0.75).abs() > 1e-12) || self.bump_center.z != 0.0 {
            return Err(Error::InvalidParams("bump center must satisfy |b'| = 3/4".into()));
        }
        if let Some(d) = self.d_sep {
            if !(d > 0.0) {
                return Err(Error::InvalidParams("separation must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn separation(&self) -> f64 {
        self.d_sep.unwrap_or_else(|| barrier_constants_raw(self.dim, self.eps).3)
    }
}

/// The well w_ε(ρ) = −exp(−1/(δ² − ρ²)) for ρ < δ, 0 beyond.
pub fn well(delta: f64, rho: f64) -> f64 {
    let g = delta * delta - rho * rho;
    if g <= 0.0 {
        0.0
    } else {
        -(-1.0 / g).exp()
    }
}

// (w', w'') of the well at radius ρ
fn well_derivatives(delta: f64, rho: f64) -> (f64, f64) {
    let g = delta * delta - rho * rho;
    if g <= 0.0 {
        return (0.0, 0.0);
    }
    let e = (-1.0 / g).exp();
    let d1 = 2.0 * rho * e / (g * g);
    let d2 = 2.0 * e / (g * g) * (1.0 - 2.0 * rho * rho / (g * g) + 4.0 * rho * rho / g);
    (d1, d2)
}

/// φ(ε) = sup |∇'² w_ε| by dense sampling of the radial profile (in space the
/// Hessian also has the tangential eigenvalue w'/ρ).
pub fn phi(dim: Dim, eps: f64) -> f64 {
    let delta = (-eps.ln()).powf(-0.5);
    let hess = |rho: f64| {
        let (d1, d2) = well_derivatives(delta, rho);
        match dim {
            Dim::Two => d2.abs(),
            Dim::Three => d2.abs().max(if rho > 0.0 { (d1 / rho).abs() } else { d2.abs() }),
        }
    };
    const K: usize = 4000;
    let mut best = (0.0, 0.0);
    for i in 0..K {
        let rho = delta * i as f64 / K as f64;
        let h = hess(rho);
        if h > best.1 {
            best = (rho, h);
        }
    }
    // golden-section polish around the best sample
    let step = delta / K as f64;
    let (mut a, mut b) = ((best.0 - step).max(0.0), (best.0 + step).min(delta));
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let (c, d) = (b - gr * (b - a), a + gr * (b - a));
        if hess(c) > hess(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.1.max(hess(0.5 * (a + b)))
}

fn barrier_constants_raw(dim: Dim, eps: f64) -> (f64, f64, f64, f64) {
    let delta = (-eps.ln()).powf(-0.5);
    let ph = phi(dim, eps);
    let n1 = (dim.n() - 1) as f64;
    let r = 1.0 / (2.0 * n1 * ph);
    (delta, ph, r, 2.0 * r)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierConstants {
    pub delta: f64,
    pub phi: f64,
    pub r_eps: f64,
    pub d_eps: f64,
    /// c(N,s) = (2(N−1))^s ω_{N−1} / (s(1−s)).
    pub c_bound: f64,
}

pub fn barrier_constants(spec: &BarrierSpec, params: &Params) -> BarrierConstants {
    let (delta, phi, r_eps, d_eps) = barrier_constants_raw(spec.dim, spec.eps);
    BarrierConstants { delta, phi, r_eps, d_eps, c_bound: c_bound(params) }
}

pub fn c_bound(params: &Params) -> f64 {
    let s = params.s;
    (2.0 * (params.n() - 1) as f64).powf(s) * params.dim.sphere_measure() / (s * (1.0 - s))
}

// smooth step: 0 for x ≤ 0, 1 for x ≥ 1
fn smoothstep(x: f64) -> f64 {
    let psi = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let (a, b) = (psi(x), psi(1.0 - x));
    a / (a + b)
}

/// v_ε(ρ): plateau of height min(1, φ^β) on ρ ≤ 1/16, smoothly down to 0 at 1/8.
pub fn side_bump(phi: f64, beta: f64, rho: f64) -> f64 {
    phi.powf(beta).min(1.0) * smoothstep((0.125 - rho) / 0.0625)
}

/// w̃_ε(x') (with bump) or w_ε(x') (bump-free), for x' in the leading coordinates.
pub fn barrier_profile_kind(spec: &BarrierSpec, phi: f64, kind: BarrierKind, x: &Point) -> f64 {
    let delta = spec.delta();
    let rho = match spec.dim {
        Dim::Two => x.x.abs(),
        Dim::Three => x.x.hypot(x.y),
    };
    if rho < delta {
        return well(delta, rho);
    }
    if kind == BarrierKind::WithBump && (0.625..0.875).contains(&rho) {
        let off = match spec.dim {
            Dim::Two => (x.x - spec.bump_center.x).abs(),
            Dim::Three => (x.x - spec.bump_center.x).hypot(x.y - spec.bump_center.y),
        };
        return side_bump(phi, spec.beta, off);
    }
    0.0
}

/// w̃_ε(x'): the well, the side bump around b', and zero elsewhere.
pub fn barrier_profile(spec: &BarrierSpec, x: &Point) -> f64 {
    let ph = phi(spec.dim, spec.eps);
    barrier_profile_kind(spec, ph, BarrierKind::WithBump, x)
}

/// Radial breakpoints of the profile about the origin.
pub fn barrier_breaks(spec: &BarrierSpec) -> Vec<f64> {
    let b = spec.bump_center.norm();
    vec![spec.delta(), b - 0.125, b - 0.0625, b + 0.0625, b + 0.125, 1.0]
}

/// Mesh resolution of the barrier sheets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierMesh {
    /// Target spacing on the graph sheet.
    pub h: f64,
    /// Half-width of the tiny facet centred on the apex.
    pub eta: f64,
}

impl Default for BarrierMesh {
    fn default() -> Self {
        BarrierMesh { h: 1.0 / 2000.0, eta: 1e-6 }
    }
}

/// The graph sheet x_N = profile + t over |x'| ≤ 1 alone, normal −e_N.
pub fn make_barrier_sheet(spec: &BarrierSpec, kind: BarrierKind, mesh: &BarrierMesh) -> Result<Hypersurface> {
    spec.validate()?;
    let ph = phi(spec.dim, spec.eps);
    let height = |x: &Point| barrier_profile_kind(spec, ph, kind, x) + spec.t;
    match spec.dim {
        Dim::Two => build_polyline(&sheet_points_2d(&height, mesh, true), false),
        Dim::Three => {
            let (v, t) = polar_mesh(1.0, mesh, &height, true);
            build_trimesh(&v, &t)
        }
    }
}

/// Two-sheet barrier: the graph sheet and the flat sheet at −d + t, both
/// with normal −e_N (so the interior seen from the apex lies above).
pub fn make_barrier(spec: &BarrierSpec, kind: BarrierKind, mesh: &BarrierMesh) -> Result<Hypersurface> {
    spec.validate()?;
    let ph = phi(spec.dim, spec.eps);
    let d = spec.separation();
    let top = |x: &Point| barrier_profile_kind(spec, ph, kind, x) + spec.t;
    let bottom = |_: &Point| -d + spec.t;
    match spec.dim {
        Dim::Two => {
            let coarse = BarrierMesh { h: 0.25, eta: mesh.eta };
            build_polylines(&[
                (sheet_points_2d(&top, mesh, true), false),
                (sheet_points_2d(&bottom, &coarse, true), false),
            ])
        }
        Dim::Three => {
            let (mut v, mut t) = polar_mesh(1.0, mesh, &top, true);
            let coarse = BarrierMesh { h: 0.1, eta: 0.05 };
            let (v2, t2) = polar_mesh(1.0, &coarse, &bottom, true);
            let off = v.len();
            v.extend(v2);
            t.extend(t2.into_iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
            build_trimesh(&v, &t)
        }
    }
}

/// Apex of the graph sheet, (0, w_ε(0) + t).
pub fn barrier_apex(spec: &BarrierSpec) -> Point {
    let mut p = Point::zeros();
    let h = -spec.eps + spec.t;
    match spec.dim {
        Dim::Two => p.y = h,
        Dim::Three => p.z = h,
    }
    p
}

// Uniform grid on [−1, 1] plus the tiny facet [−η, η]; right to left when
// `down` (normal −e₂).
fn sheet_points_2d(height: &dyn Fn(&Point) -> f64, mesh: &BarrierMesh, down: bool) -> Vec<Point> {
    let n = ((1.0 - mesh.eta) / mesh.h).ceil().max(1.0) as usize;
    let mut xs: Vec<f64> = (0..=n).map(|i| -1.0 + (1.0 - mesh.eta) * i as f64 / n as f64).collect();
    let right: Vec<f64> = xs.iter().rev().map(|x| -x).collect();
    xs.extend(right);
    if down {
        xs.reverse();
    }
    xs.into_iter()
        .map(|x| {
            let p = pt2(x, 0.0);
            pt2(x, height(&p))
        })
        .collect()
}

/// Polar triangulation of the disk of radius `radius`: a central triangle of
/// circumradius η, then rings at spacing ~h stitched by angle.
pub fn polar_mesh(radius: f64, mesh: &BarrierMesh, height: &dyn Fn(&Point) -> f64, down: bool) -> (Vec<Point>, Vec<[usize; 3]>) {
    let n_rings = ((radius - mesh.eta) / mesh.h).ceil().max(1.0) as usize;
    let mut radii = vec![mesh.eta];
    radii.extend((1..=n_rings).map(|k| mesh.eta + (radius - mesh.eta) * k as f64 / n_rings as f64));
    let counts: Vec<usize> = radii
        .iter()
        .enumerate()
        .map(|(k, &r)| if k == 0 { 3 } else { ((TAU * r / mesh.h).ceil() as usize).max(3) })
        .collect();
    let mut v = Vec::new();
    let mut start = Vec::new();
    for (k, (&r, &n)) in radii.iter().zip(&counts).enumerate() {
        start.push(v.len());
        // alternate offsets so successive rings interleave
        let off = if k % 2 == 0 { 0.0 } else { 0.5 };
        for j in 0..n {
            let th = TAU * (j as f64 + off) / n as f64;
            let mut p = Point::new(r * th.cos(), r * th.sin(), 0.0);
            p.z = height(&p);
            v.push(p);
        }
    }
    let mut tris = vec![[start[0], start[0] + 1, start[0] + 2]];
    for k in 0..radii.len() - 1 {
        let (ni, no) = (counts[k], counts[k + 1]);
        let ang = |ring: usize, j: usize| {
            let off = if ring % 2 == 0 { 0.0 } else { 0.5 };
            TAU * (j as f64 + off) / counts[ring] as f64
        };
        let inner = |j: usize| start[k] + j % ni;
        let outer = |j: usize| start[k + 1] + j % no;
        // angles continued past 2π so the merge walk is monotone
        let ai = |i: usize| ang(k, i % ni) + TAU * (i / ni) as f64;
        let ao = |j: usize| ang(k + 1, j % no) + TAU * (j / no) as f64;
        // start the walk at the first outer vertex not behind inner vertex 0
        let mut jo0 = 0;
        while jo0 < no && ang(k + 1, jo0) < ai(0) {
            jo0 += 1;
        }
        let (mut i, mut j) = (0, jo0);
        while i < ni || j < jo0 + no {
            let advance_outer = j < jo0 + no && (i >= ni || ao(j + 1) <= ai(i + 1));
            if advance_outer {
                tris.push([inner(i), outer(j), outer(j + 1)]);
                j += 1;
            } else {
                tris.push([inner(i), outer(j), inner(i + 1)]);
                i += 1;
            }
        }
    }
    if down {
        for t in &mut tris {
            t.swap(1, 2);
        }
    }
    (v, tris)
}

// ---------------------------------------------------------------------------
// Separation and J_φ

/// Sampled range on which φ is increasing from 0: (ε range, φ range).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiRange {
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub phi_lo: f64,
    pub phi_hi: f64,
}

/// I_φ and J_φ by monotone sampling over log ε, capped at φ < 1 and δ < 1/2.
pub fn phi_range(dim: Dim) -> PhiRange {
    let eps_max = (-4.0f64).exp() * (1.0 - 1e-9);
    let (lo, hi) = (1e-200f64.ln(), eps_max.ln());
    let k = 400;
    let mut last = (lo.exp(), phi(dim, lo.exp()));
    let first = last;
    for i in 1..=k {
        let e = (lo + (hi - lo) * i as f64 / k as f64).exp();
        let p = phi(dim, e);
        if p <= last.1 || p >= 1.0 {
            break;
        }
        last = (e, p);
    }
    PhiRange { eps_lo: first.0, eps_hi: last.0, phi_lo: first.1, phi_hi: last.1 }
}

/// ε_d: the ε with φ(ε) = (2(N−1)d)^{-1} when that value lies in J_φ,
/// otherwise the ε at the midpoint of J_φ. Returns (ε_d, in_range).
pub fn eps_for_separation(dim: Dim, d: f64) -> (f64, bool) {
    let range = phi_range(dim);
    let target = 1.0 / (2.0 * (dim.n() - 1) as f64 * d);
    let inside = target > range.phi_lo && target <= range.phi_hi;
    let goal = if inside { target } else { 0.5 * (range.phi_lo + range.phi_hi) };
    let (mut a, mut b) = (range.eps_lo.ln(), range.eps_hi.ln());
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if phi(dim, m.exp()) < goal {
            a = m;
        } else {
            b = m;
        }
    }
    (b.exp(), inside)
}

// ---------------------------------------------------------------------------
// Probe test surfaces

/// Flat disk of radius `radius` at height 0 with a smooth downward dent of
/// depth `depth` and half-width `width` centred at `center` (x₁ offset).
pub fn make_dented_disk(dim: Dim, radius: f64, depth: f64, width: f64, center: f64, h: f64) -> Result<Hypersurface> {
    let dent = move |x: &Point| {
        let r = match dim {
            Dim::Two => (x.x - center).abs(),
            Dim::Three => (x.x - center).hypot(x.y),
        } / width;
        if r < 1.0 {
            -depth * (1.0 - 1.0 / (1.0 - r * r)).exp()
        } else {
            0.0
        }
    };
    match dim {
        Dim::Two => {
            // grid through the dent centre so the bottom is a vertex
            let nl = ((center + radius) / h).ceil().max(1.0) as usize;
            let nr = ((radius - center) / h).ceil().max(1.0) as usize;
            let mut xs: Vec<f64> = (0..nl).map(|i| -radius + (center + radius) * i as f64 / nl as f64).collect();
            xs.extend((0..=nr).map(|i| center + (radius - center) * i as f64 / nr as f64));
            let pts: Vec<Point> = xs.into_iter().map(|x| pt2(x, dent(&pt2(x, 0.0)))).collect();
            build_polyline(&pts, false)
        }
        Dim::Three => {
            let mesh = BarrierMesh { h, eta: h * 0.25 };
            let shifted = move |x: &Point| dent(&Point::new(x.x + center, x.y, 0.0));
            let (mut v, t) = polar_mesh(radius, &mesh, &shifted, false);
            for p in &mut v {
                p.x += center;
            }
            build_trimesh(&v, &t)
        }
    }
}

/// Planar neck between Γ₁ = {(±1, 0)} and Γ₂ = {(±1, −d)}: two arcs bowing
/// inward by `waist` at mid-height, normals toward the middle.
pub fn make_neck(d: f64, waist: f64, n_per_arc: usize) -> Result<Hypersurface> {
    if !(waist > 0.0 && waist < 1.0 && d > 0.0) {
        return Err(Error::InvalidParams("need d > 0 and 0 < waist < 1".into()));
    }
    let n = n_per_arc.max(4);
    let arc = |sign: f64| -> Vec<Point> {
        (0..=n)
            .map(|i| {
                let u = i as f64 / n as f64;
                pt2(sign * (1.0 - waist * (PI * u).sin()), -d * u)
            })
            .collect()
    };
    let left = arc(-1.0);
    let mut right = arc(1.0);
    right.reverse();
    build_polylines(&[(left, false), (right, false)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_disks() {
        let m = make_flat_disk(Dim::Two, 1.0, 0.0, 1).unwrap();
        assert_eq!(m.n_facets(), 1);
        assert_eq!(m.facet_normal(0), pt2(0.0, 1.0));
        let m = make_flat_disk(Dim::Three, 1.0, 0.0, 256).unwrap();
        let ring = &m.boundary()[0];
        let len: f64 = (0..ring.len()).map(|k| (m.vertex(ring[k]) - m.vertex(ring[(k + 1) % ring.len()])).norm()).sum();
        assert!((len - TAU).abs() < 1e-3);
        assert!(m.facet_normals().iter().all(|n| (n.z - 1.0).abs() < 1e-12));
        assert!(matches!(make_flat_disk(Dim::Two, 0.0, 0.0, 4), Err(Error::DegenerateFacet { .. })));
    }

    #[test]
    fn cone_normals_face_the_axis_region() {
        let m = make_cone_2d(2.0).unwrap();
        assert_eq!(m.n_facets(), 4);
        for f in 0..4 {
            let c = m.barycenter(f);
            let probe = c + m.facet_normal(f) * 1e-3;
            assert!(probe.y.abs() > 2.0 * probe.x.abs(), "facet {f}");
        }
        let mut b = m.boundary_points();
        b.sort_by(|p, q| (p.x, p.y).partial_cmp(&(q.x, q.y)).unwrap());
        assert_eq!(b, vec![pt2(-1.0, -2.0), pt2(-1.0, 2.0), pt2(1.0, -2.0), pt2(1.0, 2.0)]);
    }

    #[test]
    fn cone_3d_structure() {
        let m = make_cone_nd(32, 5).unwrap();
        assert_eq!(m.boundary().len(), 2);
        for f in 0..m.n_facets() {
            let c = m.barycenter(f);
            let probe = c + m.facet_normal(f) * 1e-3;
            assert!(probe.z.abs() > probe.x.hypot(probe.y), "facet {f}");
        }
    }

    #[test]
    fn barrier_profile_values() {
        let p = Params::new(Dim::Two, 0.5).unwrap();
        let spec = BarrierSpec::new(Dim::Two, 1e-3, &p).unwrap();
        assert!((barrier_profile(&spec, &pt2(0.0, 0.0)) + 1e-3).abs() < 1e-15);
        assert_eq!(barrier_profile(&spec, &pt2(spec.delta(), 0.0)), 0.0);
        let ph = phi(Dim::Two, 1e-3);
        assert!(barrier_profile(&spec, &pt2(0.75, 0.0)) >= ph.powf(spec.beta) * (1.0 - 1e-12));
        let e16 = BarrierSpec { eps: (-16f64).exp(), t: (-16f64).exp(), ..spec };
        assert!((e16.delta() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn phi_decreases_with_eps() {
        let a: Vec<f64> = [1e-2, 1e-4, 1e-8].iter().map(|&e| phi(Dim::Two, e)).collect();
        assert!(a[0] > a[1] && a[1] > a[2], "{a:?}");
        // φ ≥ |w''(0)| = 2ε/δ⁴
        let d = (-(1e-4f64).ln()).powf(-0.5);
        assert!(a[1] >= 2e-4 / d.powi(4) * (1.0 - 1e-9), "{a:?}");
    }

    #[test]
    fn c_bound_formula() {
        let p = Params::new(Dim::Two, 0.5).unwrap();
        assert!((c_bound(&p) - 2f64.sqrt() * TAU / 0.25).abs() < 1e-12);
    }

    #[test]
    fn barrier_meshes() {
        let p = Params::new(Dim::Two, 0.5).unwrap();
        let spec = BarrierSpec::new(Dim::Two, 1e-3, &p).unwrap();
        let m = make_barrier(&spec, BarrierKind::WithBump, &BarrierMesh { h: 0.01, eta: 1e-6 }).unwrap();
        let apex = barrier_apex(&spec);
        let (f, _, dist) = m.nearest(&apex).unwrap();
        assert!(dist < 1e-12, "{dist}");
        assert_eq!(m.facet_normal(f), pt2(0.0, -1.0));
        let d = spec.separation();
        let heights: Vec<f64> = m.boundary_points().iter().map(|p| p.y).collect();
        assert!(heights.iter().all(|&y| (y - spec.t).abs() < 1e-15 || (y - (spec.t - d)).abs() < 1e-12));

        let spec3 = BarrierSpec::new(Dim::Three, 1e-3, &Params::new(Dim::Three, 0.5).unwrap()).unwrap();
        let m3 = make_barrier(&spec3, BarrierKind::WithBump, &BarrierMesh { h: 0.05, eta: 1e-4 }).unwrap();
        assert_eq!(m3.boundary().len(), 2);
        assert!(m3.facet_normals().iter().all(|n| n.z < 0.0));
        let (_, p, dist) = m3.nearest(&barrier_apex(&spec3)).unwrap();
        assert!(dist < 1e-9, "{p:?}");
    }

    #[test]
    fn polar_mesh_is_a_disk() {
        let (v, t) = polar_mesh(1.0, &BarrierMesh { h: 0.1, eta: 0.01 }, &|_| 0.0, false);
        let m = build_trimesh(&v, &t).unwrap();
        assert_eq!(m.boundary().len(), 1);
        let area = m.total_measure();
        assert!((area - PI).abs() < 0.05, "{area}");
        assert!(m.facet_normals().iter().all(|n| n.z > 0.0));
    }

    #[test]
    fn separation_inverse() {
        let (e, inside) = eps_for_separation(Dim::Two, 5.0);
        assert!(inside);
        assert!((phi(Dim::Two, e) - 0.1).abs() < 1e-9);
        let (_, inside) = eps_for_separation(Dim::Two, 1e-3);
        assert!(!inside);
    }
}
