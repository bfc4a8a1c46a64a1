//! Independent oracles for the integration and acceptance tests. Nothing
//! here calls into the library's estimators.

#![allow(dead_code)]

use std::f64::consts::PI;

type P2 = (f64, f64);

fn cross(a: P2, b: P2) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

/// Adaptive Simpson on [a, b].
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 30)
}

/// Composite Simpson with `n` (even) panels.
pub fn composite_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// F(t) = ∫₀^t (1+σ²)^{−(N+s)/2} dσ straight from its definition.
pub fn f_oracle(t: f64, n: usize, s: f64) -> f64 {
    composite_simpson(|x| (1.0 + x * x).powf(-0.5 * (n as f64 + s)), 0.0, t, 20_000)
}

/// H(z) for a planar polyline complex by polar decomposition about z.
///
/// Along a ray z + r·w the side label is constant between crossings and
/// starts as interior iff w·ν < 0, so ∫ r^{−1−s}σ dr is a finite sum once the
/// rays w and −w are paired (their leading r^{−s} terms cancel). What is left
/// is a piecewise smooth function of the angle, integrated adaptively between
/// the angles of the vertices.
pub fn polar_fmc(segments: &[(P2, P2)], z: P2, nu: P2, s: f64) -> f64 {
    // the segment through z itself is never crossed
    let on = |a: P2, b: P2| {
        let e = (b.0 - a.0, b.1 - a.1);
        let q = (z.0 - a.0, z.1 - a.1);
        let l2 = e.0 * e.0 + e.1 * e.1;
        let t = (q.0 * e.0 + q.1 * e.1) / l2;
        cross(e, q).abs() <= 1e-12 * l2.sqrt() && (0.0..=1.0).contains(&t)
    };
    let others: Vec<(P2, P2)> = segments.iter().copied().filter(|&(a, b)| !on(a, b)).collect();
    let ray = |w: P2| -> f64 {
        let mut hits: Vec<f64> = Vec::new();
        for &(a, b) in &others {
            let e = (b.0 - a.0, b.1 - a.1);
            let den = cross(w, e);
            if den.abs() < 1e-300 {
                continue;
            }
            let q = (a.0 - z.0, a.1 - z.1);
            let r = cross(q, e) / den;
            let u = cross(q, w) / den;
            if r > 1e-12 && (0.0..1.0).contains(&u) {
                hits.push(r);
            }
        }
        hits.sort_by(f64::total_cmp);
        let sigma0 = if w.0 * nu.0 + w.1 * nu.1 < 0.0 { 1.0 } else { -1.0 };
        let mut sum = 0.0;
        let mut sg = sigma0;
        for r in hits {
            sum += -2.0 * sg * r.powf(-s);
            sg = -sg;
        }
        sum / s
    };
    let g = |th: f64| {
        let w = (th.cos(), th.sin());
        ray(w) + ray((-w.0, -w.1))
    };
    let mut brk: Vec<f64> = vec![0.0, PI];
    for &(a, b) in segments {
        for p in [a, b] {
            let ang = (p.1 - z.1).atan2(p.0 - z.0).rem_euclid(PI);
            brk.push(ang);
        }
    }
    brk.sort_by(f64::total_cmp);
    brk.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    // panels stop just short of the breakpoints, where a ray grazes a vertex
    brk.windows(2).map(|w| simpson(&g, w[0] + 1e-13, w[1] - 1e-13, 1e-11)).sum()
}

/// The planar cone C_d as four segments (V through (±1, d), Λ through (±1, −d)).
pub fn cone_segments(d: f64) -> Vec<(P2, P2)> {
    vec![((-1.0, d), (0.0, 0.0)), ((0.0, 0.0), (1.0, d)), ((1.0, -d), (0.0, 0.0)), ((0.0, 0.0), (-1.0, -d))]
}

/// P_s(B₁; Ω) for the unit disk E = B₁ inside any Ω ⊃ B₁, c_N = 1.
/// In ∫_{B₁} dx ∫_{S¹} dω ∫_{ρ_e}^∞ r^{−1−s} dr, fix ω and run x along each
/// chord of length ℓ: the inner two integrals give ℓ^{1−s}/(s(1−s)), so
/// P_s = 2π ∫_{−1}^{1} (2√(1−p²))^{1−s} dp / (s(1−s)); p = sin φ makes the
/// integrand smooth.
pub fn disk_ps(s: f64) -> f64 {
    let g = |phi: f64| (2.0 * phi.cos()).powf(1.0 - s) * phi.cos();
    2.0 * PI * composite_simpson(g, -0.5 * PI, 0.5 * PI, 4000) / (s * (1.0 - s))
}
