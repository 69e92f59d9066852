//! Fixed-step RK4 for the geodesic Hamiltonian `H = |p|^2 / (2 n^2)` and the
//! scalar normal Jacobi equation `j'' + K j = 0`, with exact straight flight
//! wherever `c` vanishes.

use crate::error::{Result, TomoError};
use crate::geometry::hermite::Local;
use crate::geometry::ConformalField;
use crate::num::Real;
use crate::vec2::Vec2;

/// Position, momentum and the two normal fundamental solutions `[y1, y1', y2, y2']`
/// with `y1(0) = 1, y1'(0) = 0, y2(0) = 0, y2'(0) = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State<T> {
    pub x: Vec2<T>,
    pub p: Vec2<T>,
    pub y: [T; 4],
}

impl<T: Real> State<T> {
    /// Start with g-unit velocity `v` at `x`.
    pub fn start(field: &ConformalField<T>, x: Vec2<T>, v: Vec2<T>) -> Self {
        let n = field.n_at(x);
        Self { x, p: v * (n * n), y: [T::one(), T::zero(), T::zero(), T::one()] }
    }

    #[inline]
    fn axpy(&self, h: T, d: &Self) -> Self {
        Self {
            x: self.x + d.x * h,
            p: self.p + d.p * h,
            y: [self.y[0] + h * d.y[0], self.y[1] + h * d.y[1], self.y[2] + h * d.y[2], self.y[3] + h * d.y[3]],
        }
    }
}

/// One stored integration node.
#[derive(Clone, Copy, Debug)]
pub struct Node<T> {
    pub t: T,
    pub s: State<T>,
    /// Cached `c` at `s.x`.
    pub c: T,
}

impl<T: Real> Node<T> {
    /// Euclidean components of the velocity `p / n^2`.
    #[inline]
    pub fn velocity(&self) -> Vec2<T> {
        self.s.p * (-(self.c + self.c)).exp()
    }

    #[inline]
    pub fn n(&self) -> T {
        self.c.exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    /// Reached the outer circle.
    Exit,
    /// Reached the requested arclength.
    Time,
}

#[inline]
fn deriv<T: Real>(s: &State<T>, l: &Local<T>) -> State<T> {
    let e = (-(l.c + l.c)).exp();
    let w = e * l.lap; // -K
    State {
        x: s.p * e,
        p: l.grad * (s.p.norm_sq() * e),
        y: [s.y[1], w * s.y[0], s.y[3], w * s.y[2]],
    }
}

/// Integrates from `s0` until the outer circle or arclength `stop_at`, calling
/// `observe` on every node including the first and last.
pub fn march<T: Real, F: FnMut(&Node<T>)>(
    field: &ConformalField<T>,
    s0: State<T>,
    step: T,
    stop_at: Option<T>,
    mut observe: F,
) -> Result<(Node<T>, Stop)> {
    let domain = field.domain();
    let outer_sq = domain.outer_radius * domain.outer_radius;
    let rs_sq = field.support_radius() * field.support_radius();
    let h0 = step.min(domain.boundary_gap() * T::lit(0.5));
    let max_len = T::lit(10.0) * field.big_lambda() * domain.diameter();
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);

    let mut s = s0;
    let mut l = field.local(s.x);
    let mut t = T::zero();
    observe(&Node { t, s, c: l.c });
    let mut force_rk = false;
    loop {
        if t > max_len {
            return Err(TomoError::NonSimpleSuspected(format!(
                "geodesic from ({}, {}) still inside after length {}",
                s0.x.x, s0.x.y, max_len
            )));
        }
        if !force_rk && s.x.norm_sq() >= rs_sq {
            // c vanishes here: the geodesic is a straight line until it meets the
            // support circle (moving inward) or the outer circle.
            let v = s.p;
            let a = v.norm_sq();
            let b = s.x.dot(v);
            let xx = s.x.norm_sq();
            let exit_disc = (b * b + a * (outer_sq - xx)).max(T::zero());
            let mut sigma = ((exit_disc.sqrt() - b) / a).max(T::zero());
            let mut kind = Some(Stop::Exit);
            if rs_sq > T::zero() && b < T::zero() {
                let disc = b * b - a * (xx - rs_sq);
                if disc > T::zero() {
                    let enter = (-b - disc.sqrt()) / a;
                    if enter >= T::zero() && enter < sigma {
                        sigma = enter;
                        kind = None;
                    }
                }
            }
            if let Some(end) = stop_at {
                if t + sigma >= end {
                    sigma = (end - t).max(T::zero());
                    kind = Some(Stop::Time);
                }
            }
            s.x += v * sigma;
            s.y[0] += s.y[1] * sigma;
            s.y[2] += s.y[3] * sigma;
            t += sigma;
            l = field.local(s.x);
            let node = Node { t, s, c: l.c };
            observe(&node);
            match kind {
                Some(k) => return Ok((node, k)),
                None => {
                    force_rk = true;
                    continue;
                }
            }
        }
        force_rk = false;
        let mut h = h0;
        let mut last = false;
        if let Some(end) = stop_at {
            if t + h >= end {
                h = end - t;
                last = true;
            }
        }
        let k1 = deriv(&s, &l);
        let s2 = s.axpy(h * half, &k1);
        let k2 = deriv(&s2, &field.local(s2.x));
        let s3 = s.axpy(h * half, &k2);
        let k3 = deriv(&s3, &field.local(s3.x));
        let s4 = s.axpy(h, &k3);
        let k4 = deriv(&s4, &field.local(s4.x));
        let hs = h * sixth;
        let two = T::lit(2.0);
        s = State {
            x: s.x + (k1.x + k2.x * two + k3.x * two + k4.x) * hs,
            p: s.p + (k1.p + k2.p * two + k3.p * two + k4.p) * hs,
            y: [
                s.y[0] + hs * (k1.y[0] + two * k2.y[0] + two * k3.y[0] + k4.y[0]),
                s.y[1] + hs * (k1.y[1] + two * k2.y[1] + two * k3.y[1] + k4.y[1]),
                s.y[2] + hs * (k1.y[2] + two * k2.y[2] + two * k3.y[2] + k4.y[2]),
                s.y[3] + hs * (k1.y[3] + two * k2.y[3] + two * k3.y[3] + k4.y[3]),
            ],
        };
        t += h;
        l = field.local(s.x);
        let node = Node { t, s, c: l.c };
        observe(&node);
        if last {
            return Ok((node, Stop::Time));
        }
        if s.x.norm_sq() > outer_sq {
            // Only possible for supports reaching within a step of the boundary.
            return Err(TomoError::Domain("integration stepped across the outer circle".into()));
        }
    }
}
