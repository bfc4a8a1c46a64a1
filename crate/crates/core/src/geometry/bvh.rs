//! Axis-aligned bounding-volume hierarchy over facets.
//!
//! Median split on the longest axis, small leaves. Built once per surface and
//! then only read, so it is shared freely between threads.

use nalgebra::Vector3;

type P = Vector3<f64>;

#[derive(Clone, Copy, Debug)]
pub struct Aabb {
    pub min: P,
    pub max: P,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb { min: P::repeat(f64::INFINITY), max: P::repeat(f64::NEG_INFINITY) }
    }

    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a P>) -> Self {
        let mut b = Aabb::empty();
        for p in pts {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &P) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn merge(&self, o: &Aabb) -> Aabb {
        Aabb { min: self.min.inf(&o.min), max: self.max.sup(&o.max) }
    }

    pub fn padded(&self, pad: f64) -> Aabb {
        Aabb { min: self.min.add_scalar(-pad), max: self.max.add_scalar(pad) }
    }

    pub fn center(&self) -> P {
        (self.min + self.max) * 0.5
    }

    pub fn diagonal(&self) -> f64 {
        (self.max - self.min).norm()
    }

    pub fn contains(&self, p: &P) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    /// Squared distance from a point to the box (0 inside).
    pub fn dist2(&self, p: &P) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let e = (self.min[k] - p[k]).max(0.0).max(p[k] - self.max[k]);
            d2 += e * e;
        }
        d2
    }

    /// Slab test for the parametric segment p + t·d, t ∈ [0,1].
    pub fn hits_segment(&self, p: &P, inv_d: &P) -> bool {
        let mut t0: f64 = 0.0;
        let mut t1: f64 = 1.0;
        for k in 0..3 {
            if inv_d[k].is_infinite() {
                if p[k] < self.min[k] || p[k] > self.max[k] {
                    return false;
                }
                continue;
            }
            let a = (self.min[k] - p[k]) * inv_d[k];
            let b = (self.max[k] - p[k]) * inv_d[k];
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            t0 = t0.max(lo);
            t1 = t1.min(hi);
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug)]
struct Node {
    bb: Aabb,
    // leaf: `count > 0`, items are order[start..start+count]; inner: children start, start+1
    start: u32,
    count: u32,
}

#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

const LEAF: usize = 4;

impl Bvh {
    pub fn build(boxes: &[Aabb]) -> Self {
        let mut order: Vec<u32> = (0..boxes.len() as u32).collect();
        let centers: Vec<P> = boxes.iter().map(Aabb::center).collect();
        let mut nodes = Vec::with_capacity(2 * boxes.len() / LEAF + 1);
        nodes.push(Node { bb: Aabb::empty(), start: 0, count: 0 });
        if boxes.is_empty() {
            return Bvh { nodes: Vec::new(), order };
        }
        // explicit stack: (node index, lo, hi)
        let mut stack = vec![(0usize, 0usize, boxes.len())];
        while let Some((ni, lo, hi)) = stack.pop() {
            let bb = order[lo..hi]
                .iter()
                .fold(Aabb::empty(), |acc, &i| acc.merge(&boxes[i as usize]));
            if hi - lo <= LEAF {
                nodes[ni] = Node { bb, start: lo as u32, count: (hi - lo) as u32 };
                continue;
            }
            let cb = Aabb::from_points(order[lo..hi].iter().map(|&i| &centers[i as usize]));
            let ext = cb.max - cb.min;
            let axis = if ext.x >= ext.y && ext.x >= ext.z {
                0
            } else if ext.y >= ext.z {
                1
            } else {
                2
            };
            let mid = (lo + hi) / 2;
            order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
                centers[a as usize][axis].total_cmp(&centers[b as usize][axis])
            });
            let left = nodes.len();
            nodes.push(Node { bb: Aabb::empty(), start: 0, count: 0 });
            nodes.push(Node { bb: Aabb::empty(), start: 0, count: 0 });
            nodes[ni] = Node { bb, start: left as u32, count: 0 };
            stack.push((left + 1, mid, hi));
            stack.push((left, lo, mid));
        }
        Bvh { nodes, order }
    }

    pub fn bounds(&self) -> Option<Aabb> {
        self.nodes.first().map(|n| n.bb)
    }

    /// Calls `f` for each item whose padded box meets the segment [p, q].
    pub fn visit_segment(&self, p: &P, q: &P, pad: f64, mut f: impl FnMut(usize)) {
        if self.nodes.is_empty() {
            return;
        }
        let d = q - p;
        let inv = P::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
        let mut stack = [0u32; 64];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let n = &self.nodes[stack[sp] as usize];
            if !n.bb.padded(pad).hits_segment(p, &inv) {
                continue;
            }
            if n.count > 0 {
                for &i in &self.order[n.start as usize..(n.start + n.count) as usize] {
                    f(i as usize);
                }
            } else {
                stack[sp] = n.start;
                stack[sp + 1] = n.start + 1;
                sp += 2;
            }
        }
    }

    /// Calls `f` for each item whose box meets `query`.
    pub fn visit_box(&self, query: &Aabb, mut f: impl FnMut(usize)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let n = &self.nodes[ni as usize];
            let overlap = (0..3).all(|k| n.bb.min[k] <= query.max[k] && n.bb.max[k] >= query.min[k]);
            if !overlap {
                continue;
            }
            if n.count > 0 {
                for &i in &self.order[n.start as usize..(n.start + n.count) as usize] {
                    f(i as usize);
                }
            } else {
                stack.push(n.start);
                stack.push(n.start + 1);
            }
        }
    }

    /// Branch-and-bound nearest item. `dist2` returns the squared distance from
    /// the query to an item; items for which `skip` holds are ignored.
    pub fn nearest(
        &self,
        x: &P,
        dist2: impl Fn(usize) -> f64,
        skip: impl Fn(usize) -> bool,
    ) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        let mut stack = vec![(0u32, self.nodes[0].bb.dist2(x))];
        while let Some((ni, lb)) = stack.pop() {
            if let Some((_, b)) = best {
                if lb >= b {
                    continue;
                }
            }
            let n = &self.nodes[ni as usize];
            if n.count > 0 {
                for &i in &self.order[n.start as usize..(n.start + n.count) as usize] {
                    let i = i as usize;
                    if skip(i) {
                        continue;
                    }
                    let d = dist2(i);
                    if best.map_or(true, |(_, b)| d < b) {
                        best = Some((i, d));
                    }
                }
            } else {
                let (a, b) = (n.start, n.start + 1);
                let (da, db) = (self.nodes[a as usize].bb.dist2(x), self.nodes[b as usize].bb.dist2(x));
                // nearer child popped first
                if da < db {
                    stack.push((b, db));
                    stack.push((a, da));
                } else {
                    stack.push((a, da));
                    stack.push((b, db));
                }
            }
        }
        best
    }
}
