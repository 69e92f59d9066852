//! First-order fast marching for `|grad d| = n` from a boundary point source.
//!
//! The update is factored: `d = |x - xi| + u` with upwind differences applied to
//! `u`, which removes the point-source singularity from the truncation error.
//! The grid covers the square around the disk with `n = 1` outside it; since the
//! metric is Euclidean near the circle, confining paths to the disk never
//! shortens them, so boundary values are unaffected.

use crate::error::{Result, TomoError};
use crate::geometry::ConformalField;
use crate::num::Real;
use crate::vec2::Vec2;
use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

/// Cells of padding outside the unit square.
const PAD: usize = 4;

/// Slowness samples `n` on a uniform grid over `[-1 - 4h, 1 + 4h]^2`.
#[derive(Clone, Debug)]
pub struct EikonalGrid<T> {
    pub h: T,
    pub lo: T,
    pub n: usize,
    slowness: Vec<T>,
    /// Radius of the exactly initialised disk around the source.
    init_radius: T,
}

/// Distances from one source on the grid.
#[derive(Clone, Debug)]
pub struct EikonalSolution<T> {
    pub h: T,
    pub lo: T,
    pub n: usize,
    pub d: Vec<T>,
    /// Largest drop of `d` between consecutive accepted nodes (zero for a monotone march).
    pub max_order_violation: T,
}

#[derive(PartialEq)]
struct Key<T>(T, usize);

impl<T: PartialOrd> Eq for Key<T> {}

impl<T: PartialOrd> PartialOrd for Key<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl<T: PartialOrd> Ord for Key<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.partial_cmp(&o.0).unwrap_or(Ordering::Equal).then(self.1.cmp(&o.1))
    }
}

const FAR: u8 = 0;
const TRIAL: u8 = 1;
const DONE: u8 = 2;

impl<T: Real> EikonalGrid<T> {
    pub fn new(field: &ConformalField<T>, h: T) -> Result<Self> {
        if !(h > T::zero() && h <= T::one() / T::lit(128.0)) {
            return Err(TomoError::Config(format!("grid spacing must lie in (0, 1/128], got {h}")));
        }
        let half = ((T::one() / h).ceil().to_usize().unwrap_or(0)) + PAD;
        let n = 2 * half + 1;
        let lo = -h * T::from_count(half);
        let mut slowness = vec![T::one(); n * n];
        for j in 0..n {
            for i in 0..n {
                let x = Vec2::new(lo + h * T::from_count(i), lo + h * T::from_count(j));
                slowness[j * n + i] = field.n_at(x);
            }
        }
        Ok(Self { h, lo, n, slowness, init_radius: field.domain().boundary_gap() * T::lit(0.5) })
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> Vec2<T> {
        Vec2::new(self.lo + self.h * T::from_count(i), self.lo + self.h * T::from_count(j))
    }

    /// Marches from the boundary point at angle `theta`.
    pub fn solve(&self, theta: T) -> EikonalSolution<T> {
        let (n, h) = (self.n, self.h);
        let xi = Vec2::from_angle(theta);
        let mut d = vec![T::infinity(); n * n];
        let mut status = vec![FAR; n * n];
        let mut heap: BinaryHeap<Reverse<Key<T>>> = BinaryHeap::new();

        for j in 0..n {
            for i in 0..n {
                let r = (self.pos(i, j) - xi).norm();
                if r <= self.init_radius {
                    d[j * n + i] = r;
                    status[j * n + i] = DONE;
                }
            }
        }
        let init_max = self.init_radius;
        for j in 0..n {
            for i in 0..n {
                if status[j * n + i] == DONE {
                    for (a, b) in neighbours(i, j, n) {
                        let id = b * n + a;
                        if status[id] != DONE {
                            if let Some(v) = self.update(a, b, xi, &d, &status, init_max) {
                                if v < d[id] {
                                    d[id] = v;
                                    status[id] = TRIAL;
                                    heap.push(Reverse(Key(v, id)));
                                }
                            }
                        }
                    }
                }
            }
        }

        let mut last = init_max;
        let mut violation = T::zero();
        while let Some(Reverse(Key(v, id))) = heap.pop() {
            if status[id] == DONE || v != d[id] {
                continue;
            }
            status[id] = DONE;
            if v < last {
                violation = violation.max(last - v);
            }
            last = last.max(v);
            let (i, j) = (id % n, id / n);
            for (a, b) in neighbours(i, j, n) {
                let nid = b * n + a;
                if status[nid] == DONE {
                    continue;
                }
                if let Some(c) = self.update(a, b, xi, &d, &status, last) {
                    if c != d[nid] {
                        d[nid] = c;
                        status[nid] = TRIAL;
                        heap.push(Reverse(Key(c, nid)));
                    }
                }
            }
        }
        EikonalSolution { h, lo: self.lo, n, d, max_order_violation: violation }
    }

    /// Factored upwind update at node `(i, j)` from its accepted neighbours; never below `floor`.
    fn update(&self, i: usize, j: usize, xi: Vec2<T>, d: &[T], status: &[u8], floor: T) -> Option<T> {
        let n = self.n;
        let h = self.h;
        let x = self.pos(i, j);
        let r = x - xi;
        let d0 = r.norm();
        let a = if d0 > T::zero() { r / d0 } else { Vec2::zero() };
        let slow = self.slowness[j * n + i];
        let s2 = slow * slow;

        // Best accepted neighbour per axis: (sign toward neighbour, u at neighbour, d at neighbour).
        let pick = |cands: [(Option<usize>, T); 2]| -> Option<(T, T, T)> {
            let mut best: Option<(T, T, T)> = None;
            for (id, s) in cands {
                if let Some(id) = id {
                    if status[id] == DONE {
                        let (bi, bj) = (id % n, id / n);
                        let dn = d[id];
                        let un = dn - (self.pos(bi, bj) - xi).norm();
                        if best.map_or(true, |b| dn < b.2) {
                            best = Some((s, un, dn));
                        }
                    }
                }
            }
            best
        };
        let left = (i > 0).then(|| j * n + i - 1);
        let right = (i + 1 < n).then(|| j * n + i + 1);
        let down = (j > 0).then(|| (j - 1) * n + i);
        let up = (j + 1 < n).then(|| (j + 1) * n + i);
        let bx = pick([(left, -T::one()), (right, T::one())]);
        let by = pick([(down, -T::one()), (up, T::one())]);

        let mut best = T::infinity();
        if let (Some((sx, ux, dx)), Some((sy, uy, dy))) = (bx, by) {
            let wx = a.x + sx * ux / h;
            let wy = a.y + sy * uy / h;
            let s = sx * wx + sy * wy;
            let w = wx * wx + wy * wy;
            let disc = s * s - T::lit(2.0) * (w - s2);
            if disc >= T::zero() {
                let u = h * T::lit(0.5) * (s + disc.sqrt());
                if sx * wx - u / h <= T::zero() && sy * wy - u / h <= T::zero() {
                    let c = d0 + u;
                    if c >= dx && c >= dy {
                        best = c;
                    }
                }
            }
        }
        if !best.is_finite() {
            // One-sided: the full gradient gets no transverse part, which never undershoots.
            for (axis, own_a) in [(bx, a.x), (by, a.y)] {
                if let Some((s, un, dn)) = axis {
                    let c = d0 + h * (s * own_a + slow) + un;
                    best = best.min(c.max(dn));
                }
            }
        }
        best.is_finite().then(|| best.max(floor))
    }
}

fn neighbours(i: usize, j: usize, n: usize) -> impl Iterator<Item = (usize, usize)> {
    let mut v = [(usize::MAX, usize::MAX); 4];
    if i > 0 {
        v[0] = (i - 1, j);
    }
    if i + 1 < n {
        v[1] = (i + 1, j);
    }
    if j > 0 {
        v[2] = (i, j - 1);
    }
    if j + 1 < n {
        v[3] = (i, j + 1);
    }
    v.into_iter().filter(|p| p.0 != usize::MAX)
}

#[inline]
fn catmull_rom<T: Real>(p: [T; 4], t: T) -> T {
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let a = -p[0] + three * p[1] - three * p[2] + p[3];
    let b = two * p[0] - T::lit(5.0) * p[1] + T::lit(4.0) * p[2] - p[3];
    let c = -p[0] + p[2];
    half * (((a * t + b) * t + c) * t + two * p[1])
}

impl<T: Real> EikonalSolution<T> {
    /// Bicubic (Catmull-Rom) interpolation of the grid distances.
    pub fn at(&self, x: Vec2<T>) -> T {
        let n = self.n;
        let fx = (x.x - self.lo) / self.h;
        let fy = (x.y - self.lo) / self.h;
        let i = fx.floor().to_usize().unwrap_or(1).clamp(1, n - 3);
        let j = fy.floor().to_usize().unwrap_or(1).clamp(1, n - 3);
        let (t, u) = (fx - T::from_count(i), fy - T::from_count(j));
        let mut rows = [T::zero(); 4];
        for (r, row) in rows.iter_mut().enumerate() {
            let jj = j + r - 1;
            let p = [self.d[jj * n + i - 1], self.d[jj * n + i], self.d[jj * n + i + 1], self.d[jj * n + i + 2]];
            *row = catmull_rom(p, t);
        }
        catmull_rom(rows, u)
    }

    /// Distance at the boundary point at angle `theta`.
    pub fn boundary(&self, theta: T) -> T {
        self.at(Vec2::from_angle(theta))
    }
}

/// Fast-marching distances from the boundary point at angle `theta`.
pub fn eikonal_oracle<T: Real>(field: &ConformalField<T>, theta: T, h: T) -> Result<EikonalSolution<T>> {
    Ok(EikonalGrid::new(field, h)?.solve(theta))
}
