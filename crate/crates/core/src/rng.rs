//! Counter-based randomness: every sample index owns an independent ChaCha
//! stream, so a sample's draws do not depend on how work is split.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::geometry::Point;
use crate::params::Dim;

/// Stream for sample `index` under `seed`. Redraws after a rejection simply
/// continue on the same stream.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Uniform in [0,1) with 53 random bits.
pub fn unit(r: &mut ChaCha8Rng) -> f64 {
    r.gen::<f64>()
}

/// Uniform in (0,1]; safe to raise to negative powers.
pub fn unit_open0(r: &mut ChaCha8Rng) -> f64 {
    1.0 - r.gen::<f64>()
}

/// Uniform direction on the unit sphere of R^N.
pub fn direction(r: &mut ChaCha8Rng, dim: Dim) -> Point {
    match dim {
        Dim::Two => {
            let t = 2.0 * PI * unit(r);
            Point::new(t.cos(), t.sin(), 0.0)
        }
        Dim::Three => {
            let z = 2.0 * unit(r) - 1.0;
            let t = 2.0 * PI * unit(r);
            let rho = (1.0 - z * z).max(0.0).sqrt();
            Point::new(rho * t.cos(), rho * t.sin(), z)
        }
    }
}

/// Direction with density ∝ |ω·n| on the whole sphere (either hemisphere with
/// probability 1/2), returned in the frame (t1, t2, n).
pub fn cosine_direction(r: &mut ChaCha8Rng, dim: Dim) -> Point {
    let sign = if unit(r) < 0.5 { 1.0 } else { -1.0 };
    match dim {
        Dim::Two => {
            // density ∝ cos θ on (−π/2, π/2): sin θ uniform on (−1, 1)
            let st = 2.0 * unit(r) - 1.0;
            Point::new(st, sign * (1.0 - st * st).max(0.0).sqrt(), 0.0)
        }
        Dim::Three => {
            // Malley: uniform on the disk, lifted
            let rad = unit(r).sqrt();
            let t = 2.0 * PI * unit(r);
            Point::new(rad * t.cos(), rad * t.sin(), sign * (1.0 - rad * rad).max(0.0).sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = (0..4).map(|_| unit(&mut stream(7, 3))).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(unit(&mut stream(7, 3)), unit(&mut stream(7, 4)));
        assert_ne!(unit(&mut stream(7, 3)), unit(&mut stream(8, 3)));
    }

    #[test]
    fn cosine_moment_in_plane() {
        // E|ω_2| under density |ω_2| / 4 on the circle equals π/4
        let n = 200_000;
        let mut r = stream(1, 0);
        let m: f64 = (0..n).map(|_| cosine_direction(&mut r, Dim::Two).y.abs()).sum::<f64>() / n as f64;
        assert!((m - PI / 4.0).abs() < 5e-3, "{m}");
    }
}
