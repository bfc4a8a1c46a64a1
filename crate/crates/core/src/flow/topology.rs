//! Components of a polyline complex and the surgery moves of the flow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_segment_dist, segment_segment_dist, Point};

/// Chains closer than this are taken to share a point (same component).
const TOUCH: f64 = 1e-12;

/// Which fixed rings a component reaches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub gamma1: bool,
    pub gamma2: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub n_components: usize,
    /// Per component (in order of first chain), the rings it is attached to.
    pub boundary_attachment: Vec<Attachment>,
    /// Smallest distance between two different components (∞ for one).
    pub min_pair_distance: f64,
    /// Component label of every chain.
    pub chain_component: Vec<usize>,
}

impl ConnectivityReport {
    pub fn each_attached_to_one_ring(&self) -> bool {
        self.boundary_attachment.iter().all(|a| a.gamma1 != a.gamma2)
    }

    pub fn each_attached_to_both_rings(&self) -> bool {
        self.boundary_attachment.iter().all(|a| a.gamma1 && a.gamma2)
    }
}

pub fn chain_distance(a: &[Point], b: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for u in a.windows(2) {
        for v in b.windows(2) {
            best = best.min(segment_segment_dist(&u[0], &u[1], &v[0], &v[1]));
        }
    }
    best
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Exact connectivity of open chains whose endpoints sit on Γ₁ = {x₂ = 0} or
/// Γ₂ = {x₂ = −d}.
pub fn connectivity(chains: &[Vec<Point>], d: f64) -> Result<ConnectivityReport> {
    if chains.is_empty() {
        return Err(Error::InvalidState("empty curve".into()));
    }
    let n = chains.len();
    let mut dist = vec![vec![f64::INFINITY; n]; n];
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            let dij = chain_distance(&chains[i], &chains[j]);
            dist[i][j] = dij;
            dist[j][i] = dij;
            if dij <= TOUCH {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut roots = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let k = match roots.iter().position(|&x| x == r) {
            Some(k) => k,
            None => {
                roots.push(r);
                roots.len() - 1
            }
        };
        label[i] = k;
    }
    let tol = 1e-9 * (1.0 + d);
    let mut att = vec![Attachment::default(); roots.len()];
    for (i, c) in chains.iter().enumerate() {
        for e in [c[0], *c.last().unwrap()] {
            if e.y.abs() <= tol {
                att[label[i]].gamma1 = true;
            }
            if (e.y + d).abs() <= tol {
                att[label[i]].gamma2 = true;
            }
        }
    }
    let mut min_pair = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            if label[i] != label[j] {
                min_pair = min_pair.min(dist[i][j]);
            }
        }
    }
    Ok(ConnectivityReport { n_components: roots.len(), boundary_attachment: att, min_pair_distance: min_pair, chain_component: label })
}

// vertex i of `c` is far enough (along the chain) from both fixed ends
fn free(c: &[Point], i: usize, guard: f64) -> bool {
    i > 0 && i + 1 < c.len() && (c[i] - c[0]).norm() > guard && (c[i] - c[c.len() - 1]).norm() > guard
}

fn direction(c: &[Point], i: usize) -> Point {
    let (a, b) = (c[i.saturating_sub(1)], c[(i + 1).min(c.len() - 1)]);
    b - a
}

/// Reconnect two different chains that came within `merge` of each other at
/// their closest free vertices. Returns true if a surgery happened.
pub fn merge_components(chains: &mut Vec<Vec<Point>>, merge: f64) -> bool {
    let guard = 2.0 * merge;
    let mut best: Option<(f64, usize, usize, usize, usize)> = None;
    for a in 0..chains.len() {
        for b in 0..chains.len() {
            if a == b {
                continue;
            }
            let (ca, cb) = (&chains[a], &chains[b]);
            for i in (0..ca.len()).filter(|&i| free(ca, i, guard)) {
                for k in 0..cb.len() - 1 {
                    let dd = point_segment_dist(&ca[i], &cb[k], &cb[k + 1]);
                    if dd >= merge || best.is_some_and(|x| dd >= x.0) {
                        continue;
                    }
                    // cut B at the nearer end of the segment
                    let j = if (ca[i] - cb[k]).norm() <= (ca[i] - cb[k + 1]).norm() { k } else { k + 1 };
                    if free(cb, j, guard) {
                        best = Some((dd, a, i, b, j));
                    }
                }
            }
        }
    }
    let Some((_, a, i, b, j)) = best else {
        return false;
    };
    let (ca, cb) = (chains[a].clone(), chains[b].clone());
    chains.remove(a.max(b));
    chains.remove(a.min(b));
    // The contact vertices themselves are dropped so the two new chains leave
    // the junction about one spacing apart. Antiparallel chains join
    // head-to-tail, parallel ones head-to-head, which keeps them uncrossed.
    let anti = direction(&ca, i).dot(&direction(&cb, j)) < 0.0;
    let (n1, n2) = if anti {
        let mut n1 = ca[..i].to_vec();
        n1.extend_from_slice(&cb[j + 1..]);
        let mut n2 = cb[..j].to_vec();
        n2.extend_from_slice(&ca[i + 1..]);
        (n1, n2)
    } else {
        let mut n1 = ca[..i].to_vec();
        n1.extend(cb[..j].iter().rev());
        let mut n2: Vec<Point> = cb[j + 1..].iter().rev().copied().collect();
        n2.extend_from_slice(&ca[i + 1..]);
        (n1, n2)
    };
    for mut c in [n1, n2] {
        c.dedup_by(|p, q| (*p - *q).norm() <= TOUCH);
        if c.len() >= 2 && (c[0] - c[c.len() - 1]).norm() > TOUCH {
            chains.push(c);
        }
    }
    true
}

/// Cut out a loop where a chain comes within `merge` of itself: the widest
/// such pinch is replaced by a direct connection and the loop is dropped.
pub fn split_pinches(chains: &mut [Vec<Point>], merge: f64) -> bool {
    let guard = 2.0 * merge;
    let mut any = false;
    for c in chains.iter_mut() {
        let n = c.len();
        let mut best: Option<(usize, usize)> = None;
        for i in (0..n).filter(|&i| free(c, i, guard)) {
            let mut arc = 0.0;
            for j in i + 1..n - 1 {
                arc += (c[j] - c[j - 1]).norm();
                // close across, and folded back: a chain that has not turned
                // around is never closer than half its arclength
                let gap = point_segment_dist(&c[i], &c[j], &c[j + 1]);
                if j > i + 1 && gap < merge && gap < 0.5 * arc && free(c, j, guard) && best.map_or(true, |(a, b)| j - i > b - a) {
                    best = Some((i, j));
                }
            }
        }
        if let Some((i, j)) = best {
            c.drain(i + 1..j);
            c.dedup_by(|p, q| (*p - *q).norm() <= 1e-3 * merge);
            any = true;
        }
    }
    any
}
