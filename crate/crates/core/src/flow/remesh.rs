//! Arclength resampling and the tridiagonal smoothing solve.

use crate::geometry::Point;

pub fn length(chain: &[Point]) -> f64 {
    chain.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Resample an open chain at uniform arclength with about `h` spacing and at
/// least `min_segments` segments. Endpoints are copied exactly.
pub fn resample(chain: &[Point], h: f64, min_segments: usize) -> Vec<Point> {
    let total = length(chain);
    let n = ((total / h).round() as usize).max(min_segments).max(1);
    let mut out = Vec::with_capacity(n + 1);
    out.push(chain[0]);
    let step = total / n as f64;
    let mut seg = 0;
    let mut acc = 0.0; // arclength at the start of `seg`
    for k in 1..n {
        let target = k as f64 * step;
        loop {
            let l = (chain[seg + 1] - chain[seg]).norm();
            if acc + l >= target || seg + 2 == chain.len() {
                let u = if l > 0.0 { ((target - acc) / l).clamp(0.0, 1.0) } else { 0.0 };
                out.push(chain[seg] + (chain[seg + 1] - chain[seg]) * u);
                break;
            }
            acc += l;
            seg += 1;
        }
    }
    out.push(*chain.last().unwrap());
    out
}

/// `levels` rounds of the interpolating four-point scheme (ghost points
/// reflected through the ends). Original vertices keep their positions, at
/// index i·2^levels, and the limit curve is C¹.
pub fn subdivide(chain: &[Point], levels: u32) -> Vec<Point> {
    let mut c = chain.to_vec();
    for _ in 0..levels {
        let n = c.len();
        let g = |i: isize| -> Point {
            if i < 0 {
                c[0] * 2.0 - c[1]
            } else if i as usize >= n {
                c[n - 1] * 2.0 - c[n - 2]
            } else {
                c[i as usize]
            }
        };
        let mut out = Vec::with_capacity(2 * n - 1);
        for i in 0..n as isize - 1 {
            out.push(c[i as usize]);
            out.push((g(i) + g(i + 1)) * (9.0 / 16.0) - (g(i - 1) + g(i + 2)) * (1.0 / 16.0));
        }
        out.push(c[n - 1]);
        c = out;
    }
    c
}

/// Solves (I + μ·L) x = rhs in place, L = tridiag(−1, 2, −1) with zero
/// Dirichlet data on both sides (Thomas algorithm).
pub fn smooth_solve(mu: f64, rhs: &mut [f64]) {
    let n = rhs.len();
    if n == 0 || mu == 0.0 {
        return;
    }
    let (a, b) = (-mu, 1.0 + 2.0 * mu);
    let mut c = vec![0.0; n];
    c[0] = a / b;
    rhs[0] /= b;
    for i in 1..n {
        let m = b - a * c[i - 1];
        c[i] = a / m;
        rhs[i] = (rhs[i] - a * rhs[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt2;

    #[test]
    fn resample_keeps_ends_and_spacing() {
        let c = vec![pt2(0.0, 0.0), pt2(1.0, 0.0), pt2(1.0, 1.0)];
        let r = resample(&c, 0.1, 8);
        assert_eq!(r.len(), 21);
        assert_eq!(r[0], c[0]);
        assert_eq!(*r.last().unwrap(), c[2]);
        for w in r.windows(2) {
            assert!(((w[1] - w[0]).norm() - 0.1).abs() < 1e-12 || (w[1] - w[0]).norm() < 0.1);
        }
        assert!((r[10] - pt2(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(resample(&c, 10.0, 8).len(), 9);
    }

    #[test]
    fn subdivision_interpolates() {
        let c: Vec<Point> = (0..6).map(|i| pt2(i as f64, (i as f64).powi(3))).collect();
        let r = subdivide(&c, 2);
        assert_eq!(r.len(), 21);
        for (i, p) in c.iter().enumerate() {
            assert_eq!(r[4 * i], *p);
        }
        // the scheme reproduces cubics away from the ends
        let x = r[9].x;
        assert!((r[9].y - x.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_solve() {
        let mu = 0.7;
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut rhs: Vec<f64> = (0..4)
            .map(|i| {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i < 3 { x[i + 1] } else { 0.0 };
                x[i] + mu * (2.0 * x[i] - l - r)
            })
            .collect();
        smooth_solve(mu, &mut rhs);
        for i in 0..4 {
            assert!((rhs[i] - x[i]).abs() < 1e-12);
        }
    }
}
