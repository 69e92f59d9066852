//! Unit-speed geodesics of `g = n^2 |dx|^2`, Jacobi fields and exit data.

mod certify;
pub mod integrator;

pub use certify::{certify_simplicity, tau_derivative_check, CertifyConfig, SimplicityCertificate, TauCheck};
pub use integrator::{march, Node, State, Stop};

use crate::error::{Result, TomoError};
use crate::geometry::ConformalField;
use crate::num::Real;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Default arclength step.
pub const DEFAULT_STEP: f64 = 1e-3;

pub(crate) fn check_step<T: Real>(step: T) -> Result<()> {
    if !(step > T::zero() && step <= T::lit(0.1)) {
        return Err(TomoError::Config(format!("step must lie in (0, 0.1], got {step}")));
    }
    Ok(())
}

/// A discretised geodesic from its start to the outer circle.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GeodesicTrace<T: Real> {
    pub times: Vec<T>,
    pub positions: Vec<Vec2<T>>,
    pub momenta: Vec<Vec2<T>>,
    /// `(J, J')` of the variation `J(0) = 0, J'(0) = N(0)` (unit normal), Euclidean components.
    pub jacobi_states: Vec<(Vec2<T>, Vec2<T>)>,
    /// Normal fundamental solutions `[y1, y1', y2, y2']` at each node.
    pub normal_solutions: Vec<[T; 4]>,
    /// `c` at each node.
    pub log_n: Vec<T>,
    pub exit_time: T,
    pub exit_point: Vec2<T>,
    pub exit_direction: Vec2<T>,
}

impl<T: Real> GeodesicTrace<T> {
    fn push(&mut self, node: &Node<T>) {
        let vel = node.velocity();
        let normal = vel.rot90();
        self.times.push(node.t);
        self.positions.push(node.s.x);
        self.momenta.push(node.s.p);
        self.jacobi_states.push((normal * node.s.y[2], normal * node.s.y[3]));
        self.normal_solutions.push(node.s.y);
        self.log_n.push(node.c);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Euclidean velocity at node `k`.
    pub fn velocity(&self, k: usize) -> Vec2<T> {
        self.momenta[k] * (-(self.log_n[k] + self.log_n[k])).exp()
    }

    /// `H = |p|^2 / (2 n^2)` at node `k`.
    pub fn hamiltonian(&self, k: usize) -> T {
        self.momenta[k].norm_sq() * (-(self.log_n[k] + self.log_n[k])).exp() * T::lit(0.5)
    }
}

/// Fires the geodesic from `x` with g-unit velocity `v` until it leaves the disk.
pub fn shoot<T: Real>(field: &ConformalField<T>, x: Vec2<T>, v: Vec2<T>, step: T) -> Result<GeodesicTrace<T>> {
    check_step(step)?;
    let outer = field.domain().outer_radius;
    if x.norm() > outer * (T::one() + T::lit(1e-12)) {
        return Err(TomoError::Domain(format!("start ({}, {}) outside the closed disk", x.x, x.y)));
    }
    let n = field.n_at(x);
    let speed = n * v.norm();
    if (speed - T::one()).abs() > T::lit(1e-6).max(T::tolerance_floor()) {
        return Err(TomoError::Validation(format!("velocity is not g-unit: |v|_g = {speed}")));
    }
    let mut trace = GeodesicTrace {
        times: Vec::new(),
        positions: Vec::new(),
        momenta: Vec::new(),
        jacobi_states: Vec::new(),
        normal_solutions: Vec::new(),
        log_n: Vec::new(),
        exit_time: T::zero(),
        exit_point: x,
        exit_direction: v.normalized(),
    };
    let s0 = State::start(field, x, v);
    let on_boundary = x.norm() >= outer * (T::one() - T::lit(1e-12));
    if on_boundary && x.dot(v) >= T::zero() {
        // Tangent or outward at the boundary: zero exit time.
        trace.push(&Node { t: T::zero(), s: s0, c: field.local(x).c });
        return Ok(trace);
    }
    let (last, _) = march(field, s0, step, None, |node| trace.push(node))?;
    trace.exit_time = last.t;
    trace.exit_point = last.s.x;
    trace.exit_direction = last.velocity().normalized();
    Ok(trace)
}

/// Exit data of a ray, without storing the path.
#[derive(Clone, Copy, Debug)]
pub struct Exit<T> {
    pub tau: T,
    pub point: Vec2<T>,
    /// Unit exit direction.
    pub direction: Vec2<T>,
    /// `[y1, y1', y2, y2']` at exit.
    pub y: [T; 4],
}

/// Fires from boundary point `x` in Euclidean unit direction `dir` (g-unit there since `n = 1`).
pub fn exit_data<T: Real>(field: &ConformalField<T>, x: Vec2<T>, dir: Vec2<T>, step: T) -> Result<Exit<T>> {
    let s0 = State::start(field, x, dir / field.n_at(x));
    let (last, _) = march(field, s0, step, None, |_| {})?;
    Ok(Exit { tau: last.t, point: last.s.x, direction: last.velocity().normalized(), y: last.s.y })
}

/// Coordinates of a Jacobi field in the parallel frame `(gamma', N)`:
/// tangential part `a + b t`, normal part `p y1 + q y2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiCoords<T> {
    pub a: T,
    pub b: T,
    pub p: T,
    pub q: T,
}

impl<T: Real> JacobiCoords<T> {
    /// Decomposes Euclidean initial data at a start point with cached `c0` and velocity `v0`.
    pub fn from_initial(c0: T, v0: Vec2<T>, j0: Vec2<T>, jdot0: Vec2<T>) -> Self {
        let n2 = (c0 + c0).exp();
        let e1 = v0;
        let e2 = v0.rot90();
        Self { a: n2 * j0.dot(e1), b: n2 * jdot0.dot(e1), p: n2 * j0.dot(e2), q: n2 * jdot0.dot(e2) }
    }

    /// `(J, J')` in Euclidean components at time `t` with velocity `v` and normal solutions `y`.
    pub fn evaluate(&self, t: T, v: Vec2<T>, y: &[T; 4]) -> (Vec2<T>, Vec2<T>) {
        let (tan, tan_d) = (self.a + self.b * t, self.b);
        let (nor, nor_d) = (self.p * y[0] + self.q * y[2], self.p * y[1] + self.q * y[3]);
        let e2 = v.rot90();
        (v * tan + e2 * nor, v * tan_d + e2 * nor_d)
    }

    /// `(|J|_g^2, |J'|_g^2)` at time `t`.
    pub fn norms_sq(&self, t: T, y: &[T; 4]) -> (T, T) {
        let (tan, nor) = (self.a + self.b * t, self.p * y[0] + self.q * y[2]);
        let nor_d = self.p * y[1] + self.q * y[3];
        (tan * tan + nor * nor, self.b * self.b + nor_d * nor_d)
    }
}

/// Terminal `(J, J')` of the Jacobi field with initial data `(j0, jdot0)` along `trace`.
pub fn jacobi_transport<T: Real>(trace: &GeodesicTrace<T>, j0: Vec2<T>, jdot0: Vec2<T>) -> Result<(Vec2<T>, Vec2<T>)> {
    if trace.is_empty() {
        return Err(TomoError::Validation("empty trace".into()));
    }
    let k = trace.len() - 1;
    let coords = JacobiCoords::from_initial(trace.log_n[0], trace.velocity(0), j0, jdot0);
    Ok(coords.evaluate(trace.times[k], trace.velocity(k), &trace.normal_solutions[k]))
}

/// `exp_x(w)`: the point at arclength `|w|_g` along the geodesic with initial direction `w`.
pub fn exp_map<T: Real>(field: &ConformalField<T>, x: Vec2<T>, w: Vec2<T>, step: T) -> Result<Vec2<T>> {
    Ok(exp_map_with_derivative(field, x, w, step, false)?.0)
}

/// `exp_x(w)` and, when asked, the Euclidean matrix of `D_w exp_x` (columns are the images of `e_x`, `e_y`).
pub fn exp_map_with_derivative<T: Real>(
    field: &ConformalField<T>,
    x: Vec2<T>,
    w: Vec2<T>,
    step: T,
    derivative: bool,
) -> Result<(Vec2<T>, Option<[Vec2<T>; 2]>)> {
    check_step(step)?;
    let c0 = field.local(x).c;
    let len = c0.exp() * w.norm();
    if len == T::zero() {
        return Ok((x, derivative.then_some([Vec2::new(T::one(), T::zero()), Vec2::new(T::zero(), T::one())])));
    }
    let v = w / len;
    let (last, stop) = march(field, State::start(field, x, v), step, Some(len), |_| {})?;
    if stop == Stop::Exit {
        return Err(TomoError::Domain(format!("geodesic leaves the disk at length {} < {}", last.t, len)));
    }
    let d = derivative.then(|| {
        let col = |e: Vec2<T>| {
            JacobiCoords::from_initial(c0, v, Vec2::zero(), e / len).evaluate(last.t, last.velocity(), &last.s.y).0
        };
        [col(Vec2::new(T::one(), T::zero())), col(Vec2::new(T::zero(), T::one()))]
    });
    Ok((last.s.x, d))
}
