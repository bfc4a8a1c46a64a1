//! Sliding probes: move a hyperplane or a ball until it first touches M and
//! look at the curvature there. A critical surface must have H = 0 at every
//! interior touching point; a resolved nonzero value is a violation.

use serde::{Deserialize, Serialize};

use crate::curvature::{fmc_estimate, Estimate, QuadratureSpec};
use crate::error::{Error, Result};
use crate::geometry::{closest_on_segment, closest_on_triangle, Hypersurface, Point};
use crate::params::{Dim, Params};

/// Relative clustering tolerance for contact points.
pub const CONTACT_TOL_REL: f64 = 1e-6;
/// At most this many contact points are curvature-evaluated.
pub const MAX_EVALUATIONS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ConsistentWithCritical,
    ViolatesCriticality,
    /// No contact at all, or contact only at the boundary of M.
    NoContact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactReport {
    /// Sliding parameter at first contact (`None` when nothing is touched).
    pub lambda_star: Option<f64>,
    pub contact_points: Vec<Point>,
    /// Contacts within r_near of ∂M; reported but not evaluated.
    pub boundary_contacts: Vec<Point>,
    /// Where the curvature was evaluated, with the estimates.
    pub eval_points: Vec<Point>,
    pub fmc_at_contact: Vec<Estimate>,
    pub verdict: Verdict,
}

impl ContactReport {
    fn no_contact() -> Self {
        ContactReport {
            lambda_star: None,
            contact_points: Vec::new(),
            boundary_contacts: Vec::new(),
            eval_points: Vec::new(),
            fmc_at_contact: Vec::new(),
            verdict: Verdict::NoContact,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }
}

fn verdict_of(est: &[Estimate]) -> Verdict {
    if est.is_empty() {
        Verdict::NoContact
    } else if est.iter().any(|e| e.value.abs() > e.half_width()) {
        Verdict::ViolatesCriticality
    } else {
        Verdict::ConsistentWithCritical
    }
}

// evenly spread subset of at most k items
fn spread<T: Copy>(v: &[T], k: usize) -> Vec<T> {
    if v.len() <= k {
        return v.to_vec();
    }
    (0..k).map(|i| v[(i * (v.len() - 1)) / (k - 1).max(1)]).collect()
}

fn evaluate(
    m: &Hypersurface,
    cands: &[(Point, usize)],
    params: &Params,
    spec: &QuadratureSpec,
    report: &mut ContactReport,
) -> Result<()> {
    let (inner, outer): (Vec<(Point, usize)>, Vec<(Point, usize)>) =
        cands.iter().partition(|c| m.boundary_distance(&c.0) > spec.r_near);
    report.boundary_contacts.extend(outer.iter().map(|c| c.0));
    for (p, f) in spread(&inner, MAX_EVALUATIONS) {
        let e = fmc_estimate(m, p, m.facet_normal(f), params, spec)?;
        report.eval_points.push(p);
        report.fmc_at_contact.push(e);
    }
    report.verdict = verdict_of(&report.fmc_at_contact);
    Ok(())
}

/// Slide the hyperplane {x·axis = λ} from λ = −∞ (`direction` = +1) or +∞
/// (`direction` = −1) to its first contact with M. λ* is the extreme vertex
/// coordinate, so there is no iteration error. Facets lying in the contact
/// plane are evaluated at their barycentres; an isolated touching vertex at
/// the barycentre of one incident facet.
pub fn slide_hyperplane(m: &Hypersurface, axis: &Point, direction: f64, params: &Params, spec: &QuadratureSpec) -> Result<ContactReport> {
    let axis = axis.normalize();
    let sgn = if direction >= 0.0 { 1.0 } else { -1.0 };
    let h: Vec<f64> = m.vertices().iter().map(|v| v.dot(&axis)).collect();
    let lambda = if sgn > 0.0 { h.iter().copied().fold(f64::INFINITY, f64::min) } else { h.iter().copied().fold(f64::NEG_INFINITY, f64::max) };
    let tol = CONTACT_TOL_REL * m.diam();
    let touching: Vec<bool> = h.iter().map(|&x| (x - lambda).abs() <= tol).collect();
    let mut report = ContactReport::no_contact();
    report.lambda_star = Some(lambda);
    report.contact_points = m.vertices().iter().zip(&touching).filter(|(_, &t)| t).map(|(v, _)| *v).collect();

    let nv = m.dim().n();
    let mut covered = vec![false; h.len()];
    let mut cands = Vec::new();
    for f in 0..m.n_facets() {
        let idx = &m.facet(f)[..nv];
        if idx.iter().all(|&i| touching[i]) {
            idx.iter().for_each(|&i| covered[i] = true);
            cands.push((m.barycenter(f), f));
        }
    }
    for (i, _) in touching.iter().enumerate().filter(|(i, &t)| t && !covered[*i]) {
        let v = m.vertex(i);
        if m.boundary_distance(&v) <= spec.r_near {
            report.boundary_contacts.push(v);
            continue;
        }
        if let Some(f) = (0..m.n_facets()).find(|&f| m.facet(f)[..nv].contains(&i)) {
            cands.push((m.barycenter(f), f));
        }
    }
    evaluate(m, &cands, params, spec, &mut report)?;
    Ok(report)
}

// closest point of facet f to x
fn closest_on_facet(m: &Hypersurface, f: usize, x: &Point) -> Point {
    let [a, b, c] = m.facet_points(f);
    match m.dim() {
        Dim::Two => closest_on_segment(x, &a, &b),
        Dim::Three => closest_on_triangle(x, &a, &b, &c),
    }
}

/// Slide the ball of radius `radius` with centre height·e_N + t·axis from
/// t = 0 toward +∞ and stop at the first t with dist(centre, M) = radius.
/// Distance to a facet is convex in t, so each facet is handled by a
/// golden-section search for its closest approach and a bisection for the
/// entry time. A contact exactly at a mesh vertex is moved 1% into the facet.
pub fn slide_ball(m: &Hypersurface, radius: f64, height: f64, axis: &Point, params: &Params, spec: &QuadratureSpec) -> Result<ContactReport> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParams(format!("ball radius must be positive, got {radius}")));
    }
    let axis = axis.normalize();
    let mut c0 = Point::zeros();
    c0[m.dim().n() - 1] = height;
    let centre = |t: f64| c0 + axis * t;
    // beyond t_max the ball has passed every vertex
    let t_max = m.vertices().iter().map(|v| (v - c0).dot(&axis)).fold(0.0, f64::max) + 2.0 * radius;
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut best: Option<(f64, usize)> = None;
    for f in 0..m.n_facets() {
        let dist = |t: f64| (closest_on_facet(m, f, &centre(t)) - centre(t)).norm();
        let t_hi = best.map_or(t_max, |b| b.0);
        let entry = if dist(0.0) <= radius {
            0.0
        } else {
            let (mut a, mut b) = (0.0, t_hi);
            for _ in 0..100 {
                let (c, d) = (b - gr * (b - a), a + gr * (b - a));
                if dist(c) < dist(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            let tm = 0.5 * (a + b);
            if dist(tm) > radius {
                continue;
            }
            let (mut lo, mut hi) = (0.0, tm);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if dist(mid) > radius {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };
        if best.map_or(true, |b| entry < b.0) {
            best = Some((entry, f));
        }
    }
    let Some((t, f)) = best else {
        return Ok(ContactReport::no_contact());
    };
    let mut p = closest_on_facet(m, f, &centre(t));
    let nv = m.dim().n();
    let tol = CONTACT_TOL_REL * m.diam();
    if m.facet(f)[..nv].iter().any(|&i| (m.vertex(i) - p).norm() <= tol) {
        p += (m.barycenter(f) - p) * 0.01;
    }
    let mut report = ContactReport::no_contact();
    report.lambda_star = Some(t);
    report.contact_points = vec![p];
    evaluate(m, &[(p, f)], params, spec, &mut report)?;
    Ok(report)
}
