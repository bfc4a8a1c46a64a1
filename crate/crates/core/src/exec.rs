//! Data-parallel map over index ranges with a sequential fallback.
//!
//! Work is cut into fixed-size chunks and the per-chunk results are returned
//! in index order, so any reduction done on them is identical whatever the
//! thread count or execution mode.

use serde::{Deserialize, Serialize};
use std::ops::Range;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Execution {
    /// rayon thread pool when the `parallel` feature is on, else sequential.
    #[default]
    Parallel,
    Sequential,
}

/// Samples per chunk. Part of the reproducibility contract only through the
/// summation order; changing it changes results in the last bits.
pub const CHUNK: usize = 4096;

pub fn map_chunks<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let n_chunks = n.div_ceil(CHUNK);
    let range = move |c: usize| c * CHUNK..((c + 1) * CHUNK).min(n);
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n_chunks).into_par_iter().map(|c| f(range(c))).collect()
        }
        _ => (0..n_chunks).map(|c| f(range(c))).collect(),
    }
}

/// Same as [`map_chunks`] but one item per index (for coarse work items such
/// as per-vertex curvature evaluations).
pub fn map_items<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Running first and second moments of a sample.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(self, o: Moments) -> Moments {
        Moments { n: self.n + o.n, sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq }
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Pairwise (tree) combination in index order.
pub fn pairwise<T: Copy>(items: &[T], zero: T, merge: impl Fn(T, T) -> T + Copy) -> T {
    match items.len() {
        0 => zero,
        1 => items[0],
        n => {
            let (a, b) = items.split_at(n / 2);
            merge(pairwise(a, zero, merge), pairwise(b, zero, merge))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_exactly() {
        let f = |r: Range<usize>| r.map(|i| (i as f64).sin()).sum::<f64>();
        let a = map_chunks(100_000, Execution::Parallel, f);
        let b = map_chunks(100_000, Execution::Sequential, f);
        assert_eq!(a, b);
        let sa = pairwise(&a, 0.0, |x, y| x + y);
        let sb = pairwise(&b, 0.0, |x, y| x + y);
        assert_eq!(sa.to_bits(), sb.to_bits());
    }

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.std_error() - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
