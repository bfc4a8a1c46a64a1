//! Deterministic quadrature of the graph form.
//!
//! Where M is the graph x_N = u(x') with ν = +e_N (interior below), the
//! vertical integration in the kernel can be done in closed form:
//!
//!   H(q) = 2c ∫_{R^{N−1}} F((u(q'+x') − u(q'))/|x'|) |x'|^{-(N−1+s)} dx',
//!   F(t) = ∫₀^t (1+σ²)^{-(N+s)/2} dσ,
//!
//! and the remaining integrand is bounded near x' = 0 because F is odd and
//! the difference quotient is symmetric to first order.

use nalgebra::{Rotation3, Vector3};
use statrs::function::beta::{beta, beta_reg};

use super::{Estimate, QuadratureSpec};
use crate::error::{Error, Result};
use crate::geometry::{Hypersurface, Point};
use crate::params::{Dim, Params};
use crate::quad::{integrate, integrate_pieces};

/// F(t) by adaptive quadrature of ∫₀^{atan t} cos^{N+s−2}φ dφ.
pub fn f_eval(t: f64, params: &Params) -> f64 {
    let k = params.n() as f64 + params.s - 2.0;
    integrate(|phi| phi.cos().powf(k), 0.0, t.atan(), 0.0, 1e-13, 200).value
}

/// F(t) through the incomplete beta function (fast path for inner loops).
pub fn f_closed(t: f64, params: &Params) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let b = 0.5 * (params.n() as f64 + params.s - 1.0);
    let x = t * t / (1.0 + t * t);
    t.signum() * 0.5 * beta(0.5, b) * beta_reg(0.5, b, x)
}

/// A function u on R^{N−1}; x' is carried in the leading coordinates of a point.
pub trait GraphFunction: Sync {
    fn dim(&self) -> Dim;
    fn value(&self, x: &Point) -> f64;
    /// Distances from `q` at which u has kinks or fast transitions.
    fn kink_radii(&self, _q: &Point) -> Vec<f64> {
        Vec::new()
    }
    /// Radius around the origin over which the smoothness check samples.
    fn extent(&self) -> f64 {
        1.0
    }
}

/// A closure u with optional radial breakpoints about the origin.
pub struct FnGraph<F> {
    pub dim: Dim,
    pub f: F,
    pub breaks: Vec<f64>,
    pub extent: f64,
}

impl<F: Fn(&Point) -> f64 + Sync> GraphFunction for FnGraph<F> {
    fn dim(&self) -> Dim {
        self.dim
    }

    fn value(&self, x: &Point) -> f64 {
        (self.f)(x)
    }

    fn kink_radii(&self, q: &Point) -> Vec<f64> {
        let qn = q.norm();
        match self.dim {
            Dim::Two => self.breaks.iter().flat_map(|&r| [(r - q.x).abs(), (r + q.x).abs()]).collect(),
            Dim::Three => self.breaks.iter().flat_map(|&r| [(r - qn).abs(), r + qn]).collect(),
        }
    }

    fn extent(&self) -> f64 {
        self.extent
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphOptions {
    /// Largest allowed second difference of u; `None` skips the check.
    pub hessian_bound: Option<f64>,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions { hessian_bound: None, abs_tol: 1e-9, rel_tol: 1e-9, max_panels: 2000 }
    }
}

fn check_smooth(u: &dyn GraphFunction, q: &Point, bound: f64) -> Result<()> {
    let r = u.extent();
    let k = 64;
    let h = r / k as f64;
    let axes: &[Point] = match u.dim() {
        Dim::Two => &[Vector3::new(1.0, 0.0, 0.0)],
        Dim::Three => &[Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0)],
    };
    let mut worst: f64 = 0.0;
    let range: Vec<f64> = (-k + 1..k).map(|i| i as f64 * h).collect();
    let rows: &[f64] = if u.dim() == Dim::Two { &[0.0] } else { &range };
    for &x in &range {
        for &y in rows {
            let p = q + Vector3::new(x, y, 0.0);
            if (p - q).norm() > r - h {
                continue;
            }
            let c = u.value(&p);
            for e in axes {
                let d2 = (u.value(&(p + e * h)) - 2.0 * c + u.value(&(p - e * h))) / (h * h);
                worst = worst.max(d2.abs());
            }
        }
    }
    if worst > bound {
        return Err(Error::NotSmooth { found: worst, limit: bound });
    }
    Ok(())
}

/// H at the graph point over `q` (leading coordinates of `q`), orientation
/// ν = +e_N. The estimate is deterministic: std_error 0, trunc_bound the
/// quadrature error estimate.
pub fn fmc_graph(u: &dyn GraphFunction, q: &Point, params: &Params, opts: &GraphOptions) -> Result<Estimate> {
    params.validate()?;
    if u.dim() != params.dim {
        return Err(Error::InvalidParams("graph and params disagree on the dimension".into()));
    }
    if let Some(b) = opts.hessian_bound {
        check_smooth(u, q, b)?;
    }
    let s = params.s;
    let u0 = u.value(q);
    let mut evals = 0usize;
    // angular integral of F(difference quotient) at radius ρ
    let ring = |rho: f64, evals: &mut usize| -> (f64, f64) {
        match u.dim() {
            Dim::Two => {
                *evals += 2;
                let a = u.value(&(q + Vector3::new(rho, 0.0, 0.0))) - u0;
                let b = u.value(&(q - Vector3::new(rho, 0.0, 0.0))) - u0;
                (f_closed(a / rho, params) + f_closed(b / rho, params), 0.0)
            }
            Dim::Three => {
                let r = integrate(
                    |th| {
                        let x = q + Vector3::new(rho * th.cos(), rho * th.sin(), 0.0);
                        f_closed((u.value(&x) - u0) / rho, params)
                    },
                    0.0,
                    std::f64::consts::TAU,
                    0.1 * opts.abs_tol,
                    opts.rel_tol,
                    opts.max_panels,
                );
                *evals += r.evals;
                (r.value, r.error)
            }
        }
    };
    let mut breaks: Vec<f64> = u.kink_radii(q).into_iter().filter(|r| r.is_finite() && *r > 0.0).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let r_lo = breaks.first().copied().unwrap_or(1.0);
    let r_hi = breaks.last().copied().unwrap_or(1.0).max(r_lo);
    let mut inner_err = 0.0;
    // [0, r_lo] with ρ = t^{1/(1−s)}
    let e = 1.0 / (1.0 - s);
    let near = integrate(
        |t| {
            let rho = t.powf(e);
            let (g, err) = ring(rho, &mut evals);
            inner_err += err / rho * e;
            g / rho * e
        },
        0.0,
        r_lo.powf(1.0 - s),
        opts.abs_tol,
        opts.rel_tol,
        opts.max_panels,
    );
    let mut mid_breaks = breaks.clone();
    if mid_breaks.is_empty() {
        mid_breaks.push(r_lo);
    }
    let mid = integrate_pieces(
        |rho| {
            let (g, err) = ring(rho, &mut evals);
            inner_err += err * rho.powf(-1.0 - s);
            g * rho.powf(-1.0 - s)
        },
        &mid_breaks,
        opts.abs_tol,
        opts.rel_tol,
        opts.max_panels,
    );
    // [r_hi, ∞) with v = ρ^{-s}
    let far = integrate(
        |v| {
            let rho = v.powf(-1.0 / s);
            let (g, err) = ring(rho, &mut evals);
            inner_err += err / s;
            g / s
        },
        0.0,
        r_hi.powf(-s),
        opts.abs_tol,
        opts.rel_tol,
        opts.max_panels,
    );
    let c = 2.0 * params.c_n;
    let value = c * (near.value + mid.value + far.value);
    let quad_err = c * (near.error + mid.error + far.error);
    // angular errors enter the outer sums with weights ≤ the interval lengths;
    // the mean per-node error times the total length bounds their effect
    let nodes = (near.evals + mid.evals + far.evals).max(1) as f64;
    let span = r_lo.powf(1.0 - s) + (r_hi - r_lo) + r_hi.powf(-s);
    let ang_err = c * inner_err / nodes * span;
    Ok(Estimate::exact(value, quad_err + ang_err, evals as u64))
}

/// The local graph of a mesh over the tangent plane at z, extended outside the
/// projected domain by the cone from z through the boundary; with this
/// extension the labels below/above the graph are exactly the interior and
/// exterior sides of M seen from z.
pub struct MeshGraph {
    dim: Dim,
    // 2D: local (x', height) of the chain, sorted by x'
    profile: Vec<(f64, f64)>,
    // 3D: the surface in local coordinates and its projected boundary ring
    local: Option<Hypersurface>,
    ring: Vec<Point>,
    reach: f64,
}

impl MeshGraph {
    pub fn new(m: &Hypersurface, z: Point, nu: Point) -> Result<Self> {
        let frame = local_frame(&nu);
        let to_local = |p: &Point| frame * (p - z);
        let not_graph = || Error::InvalidMesh("surface is not a graph over the tangent plane".into());
        match m.dim() {
            Dim::Two => {
                if m.chains().len() != 1 || m.chains()[0].closed {
                    return Err(not_graph());
                }
                let mut prof: Vec<(f64, f64)> = m.chains()[0]
                    .vertices
                    .iter()
                    .map(|&i| {
                        let p = to_local(&m.vertex(i));
                        (p.x, p.y)
                    })
                    .collect();
                let inc = prof.windows(2).all(|w| w[1].0 > w[0].0);
                let dec = prof.windows(2).all(|w| w[1].0 < w[0].0);
                if !(inc || dec) {
                    return Err(not_graph());
                }
                if dec {
                    prof.reverse();
                }
                if !(prof[0].0 < 0.0 && prof.last().unwrap().0 > 0.0) {
                    return Err(not_graph());
                }
                Ok(MeshGraph { dim: Dim::Two, profile: prof, local: None, ring: Vec::new(), reach: m.reach_from(&z) })
            }
            Dim::Three => {
                if m.boundary().len() != 1 {
                    return Err(not_graph());
                }
                let iso = nalgebra::Isometry3::from_parts((frame * -z).into(), frame.into());
                let local = m.transformed(&iso)?;
                if local.facet_normals().iter().any(|n| n.z <= 0.0) {
                    return Err(not_graph());
                }
                let ring = m.boundary()[0].iter().map(|&i| to_local(&m.vertex(i))).collect();
                Ok(MeshGraph { dim: Dim::Three, profile: Vec::new(), local: Some(local), ring, reach: m.reach_from(&z) })
            }
        }
    }

    // boundary point of the projected ring along the ray from 0 at angle θ
    fn ring_hit(&self, dir: &Point) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        let n = self.ring.len();
        for k in 0..n {
            let (a, b) = (self.ring[k], self.ring[(k + 1) % n]);
            let e = b - a;
            let den = dir.x * e.y - dir.y * e.x;
            if den == 0.0 {
                continue;
            }
            let t = (a.x * e.y - a.y * e.x) / den;
            let u = (a.x * dir.y - a.y * dir.x) / den;
            if t > 0.0 && (0.0..=1.0).contains(&u) && best.map_or(true, |(bt, _)| t > bt) {
                best = Some((t, a.z + u * e.z));
            }
        }
        best
    }

    fn value_3d(&self, x: &Point) -> f64 {
        let rho = (x.x * x.x + x.y * x.y).sqrt();
        if rho == 0.0 {
            return 0.0;
        }
        let dir = Vector3::new(x.x / rho, x.y / rho, 0.0);
        let (rb, hb) = match self.ring_hit(&dir) {
            Some(v) => v,
            None => return 0.0,
        };
        if rho > rb {
            return hb * rho / rb;
        }
        let local = self.local.as_ref().unwrap();
        let l = 2.0 * self.reach + 1.0;
        let (p, q) = (Vector3::new(x.x, x.y, -l), Vector3::new(x.x, x.y, l));
        let mut best: Option<f64> = None;
        local.for_each_hit(&p, &q, 0.0, |h| {
            let z = -l + 2.0 * l * h.t;
            if best.map_or(true, |b| z.abs() < b.abs()) {
                best = Some(z);
            }
        });
        best.unwrap_or(hb * rho / rb)
    }
}

/// Rotation taking ν to +e_N (about e_3 in the plane).
fn local_frame(nu: &Point) -> Rotation3<f64> {
    if nu.z == 0.0 {
        // planar: angle of ν to e_2
        Rotation3::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_2 - nu.y.atan2(nu.x))
    } else {
        Rotation3::rotation_between(nu, &Vector3::z()).unwrap_or_else(|| Rotation3::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI))
    }
}

impl GraphFunction for MeshGraph {
    fn dim(&self) -> Dim {
        self.dim
    }

    fn value(&self, x: &Point) -> f64 {
        match self.dim {
            Dim::Two => {
                let p = &self.profile;
                let (first, last) = (p[0], *p.last().unwrap());
                if x.x <= first.0 {
                    return first.1 * x.x / first.0;
                }
                if x.x >= last.0 {
                    return last.1 * x.x / last.0;
                }
                let k = p.partition_point(|v| v.0 <= x.x).clamp(1, p.len() - 1);
                let (a, b) = (p[k - 1], p[k]);
                a.1 + (b.1 - a.1) * (x.x - a.0) / (b.0 - a.0)
            }
            Dim::Three => self.value_3d(x),
        }
    }

    fn kink_radii(&self, q: &Point) -> Vec<f64> {
        match self.dim {
            Dim::Two => self.profile.iter().map(|v| (v.0 - q.x).abs()).collect(),
            Dim::Three => {
                let r: Vec<f64> = self.ring.iter().map(|p| (Vector3::new(p.x, p.y, 0.0) - q).norm()).collect();
                let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = r.iter().copied().fold(0.0, f64::max);
                vec![lo, hi]
            }
        }
    }

    fn extent(&self) -> f64 {
        self.reach
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Consistency {
    pub mc: Estimate,
    pub graph: Estimate,
    pub compatible: bool,
}

/// Monte Carlo and graph quadrature at the same point; compatible when the
/// two intervals overlap.
pub fn fmc_consistency(
    m: &Hypersurface,
    z: Point,
    nu: Point,
    params: &Params,
    spec: &QuadratureSpec,
    opts: &GraphOptions,
) -> Result<Consistency> {
    let mc = super::fmc_estimate(m, z, nu, params, spec)?;
    let g = MeshGraph::new(m, z, nu)?;
    let graph = fmc_graph(&g, &Vector3::zeros(), params, opts)?;
    Ok(Consistency { mc, graph, compatible: mc.overlaps(&graph) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_polyline, pt2};

    #[test]
    fn f_forms_agree() {
        for dim in [Dim::Two, Dim::Three] {
            let p = Params::new(dim, 0.37).unwrap();
            for t in [0.0, 0.1, -0.7, 3.0, 50.0] {
                let (a, b) = (f_eval(t, &p), f_closed(t, &p));
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{t}: {a} {b}");
            }
            assert_eq!(f_eval(0.7, &p), -f_eval(-0.7, &p));
        }
    }

    #[test]
    fn planes_vanish() {
        let p = Params::new(Dim::Two, 0.5).unwrap();
        let zero = FnGraph { dim: Dim::Two, f: |_: &Point| 0.0, breaks: vec![], extent: 1.0 };
        assert_eq!(fmc_graph(&zero, &pt2(0.0, 0.0), &p, &GraphOptions::default()).unwrap().value, 0.0);
        let tilt = FnGraph { dim: Dim::Two, f: |x: &Point| 0.3 * x.x + 1.0, breaks: vec![], extent: 1.0 };
        assert!(fmc_graph(&tilt, &pt2(0.2, 0.0), &p, &GraphOptions::default()).unwrap().value.abs() < 1e-8);
        let p3 = Params::new(Dim::Three, 0.5).unwrap();
        let tilt3 = FnGraph { dim: Dim::Three, f: |x: &Point| 0.3 * x.x - 0.2 * x.y, breaks: vec![], extent: 1.0 };
        assert!(fmc_graph(&tilt3, &Vector3::new(0.1, 0.1, 0.0), &p3, &GraphOptions::default()).unwrap().value.abs() < 1e-8);
    }

    #[test]
    fn hessian_guard() {
        let p = Params::new(Dim::Two, 0.5).unwrap();
        let bumpy = FnGraph { dim: Dim::Two, f: |x: &Point| (40.0 * x.x).sin() * 0.1, breaks: vec![], extent: 1.0 };
        let o = GraphOptions { hessian_bound: Some(10.0), ..Default::default() };
        assert!(matches!(fmc_graph(&bumpy, &pt2(0.0, 0.0), &p, &o), Err(Error::NotSmooth { .. })));
    }

    #[test]
    fn mesh_graph_agrees_with_flux() {
        let pts: Vec<Point> = (0..=60).map(|i| {
            let x = -1.0 + i as f64 / 30.0;
            pt2(x, 0.2 * x * x - 0.1 * x.powi(3))
        }).collect();
        let m = build_polyline(&pts, false).unwrap();
        let p = Params::new(Dim::Two, 0.5).unwrap();
        let z = (pts[20] + pts[21]) * 0.5;
        let nu = m.facet_normal(20);
        let g = MeshGraph::new(&m, z, nu).unwrap();
        let a = fmc_graph(&g, &Vector3::zeros(), &p, &GraphOptions::default()).unwrap();
        let b = super::super::fmc_flux(&m, z, nu, &p, &Default::default()).unwrap();
        assert!((a.value - b).abs() < 1e-6 * b.abs().max(1.0), "{a:?} {b}");
    }
}
