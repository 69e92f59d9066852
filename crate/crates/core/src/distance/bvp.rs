//! Two-point boundary problem by shooting over the initial angle.

use crate::error::{Result, TomoError};
use crate::geodesics::{check_step, exit_data};
use crate::geometry::ConformalField;
use crate::num::Real;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Settings of the shooting solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub step: f64,
    /// Rays in the bracketing fan of each source.
    pub fan_rays: usize,
    /// Newton stops once the exit-angle miss is below this.
    pub tolerance: f64,
    /// Largest miss accepted as a solution.
    pub max_residual: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { step: 1e-3, fan_rays: 64, tolerance: 1e-11, max_residual: 1e-8, max_iterations: 60 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        check_step(self.step)?;
        if self.fan_rays < 8 {
            return Err(TomoError::Config(format!("fan needs at least 8 rays, got {}", self.fan_rays)));
        }
        if !(self.tolerance > 0.0 && self.max_residual >= self.tolerance) {
            return Err(TomoError::Config("need 0 < tolerance <= max_residual".into()));
        }
        Ok(())
    }
}

/// Point of the unit circle at angle `theta`.
#[inline]
pub fn boundary_point<T: Real>(theta: T) -> Vec2<T> {
    Vec2::from_angle(theta)
}

/// `theta` reduced to `[0, 2 pi)`.
#[inline]
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let two_pi = T::PI() + T::PI();
    let r = theta - two_pi * (theta / two_pi).floor();
    if r >= two_pi {
        T::zero()
    } else {
        r
    }
}

/// Euclidean chord between boundary points at angular offset `delta`.
#[inline]
pub fn chord<T: Real>(delta: T) -> T {
    (T::lit(2.0) * (delta * T::lit(0.5)).sin()).abs()
}

/// Tangential derivatives of `Gamma` from the endpoint directions:
/// `d_xi = -<v, T_xi>`, `d_eta = <u, T_eta>` with `T` the counter-clockwise unit tangent.
/// The metric is Euclidean at the boundary, so no field is needed.
pub fn gamma_gradient<T: Real>(theta_xi: T, theta_eta: T, v_xi: Vec2<T>, u_eta: Vec2<T>) -> (T, T) {
    let t_xi = boundary_point(theta_xi).rot90();
    let t_eta = boundary_point(theta_eta).rot90();
    (-v_xi.dot(t_xi), u_eta.dot(t_eta))
}

/// Solution of the two-point problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryDistance<T> {
    pub gamma: T,
    /// Initial unit direction at `xi` (`None` when `xi = eta`).
    pub v_xi: Option<Vec2<T>>,
    /// Final unit direction at `eta`.
    pub u_eta: Option<Vec2<T>>,
    /// Exit-angle miss of the accepted ray.
    pub residual: T,
    pub d_xi: T,
    pub d_eta: T,
}

/// One ray of a source fan, parametrised by the angle `phi` from the inward normal.
#[derive(Clone, Copy, Debug)]
pub struct FanRay<T> {
    pub phi: T,
    /// Exit angle minus source angle, in `(0, 2 pi)`.
    pub delta: T,
    pub tau: T,
    pub ddelta_dphi: T,
    pub dir: Vec2<T>,
    pub exit_dir: Vec2<T>,
    pub d_xi: T,
    pub d_eta: T,
}

/// All rays from one boundary source needed to solve for any target.
#[derive(Clone, Debug)]
pub struct SourceFan<'a, T: Real> {
    field: &'a ConformalField<T>,
    theta: T,
    xi: Vec2<T>,
    step: T,
    pub rays: Vec<FanRay<T>>,
}

impl<'a, T: Real> SourceFan<'a, T> {
    /// Shoots `rays` equally spaced directions and checks the exit angle increases monotonically.
    pub fn new(field: &'a ConformalField<T>, theta: T, rays: usize, step: T) -> Result<Self> {
        check_step(step)?;
        let mut fan = Self { field, theta, xi: boundary_point(theta), step, rays: Vec::with_capacity(rays) };
        for k in 0..rays {
            let phi = -T::FRAC_PI_2() + T::PI() * (T::from_count(k) + T::lit(0.5)) / T::from_count(rays);
            let r = fan.fire(phi)?;
            if let Some(prev) = fan.rays.last() {
                if r.delta <= prev.delta {
                    return Err(TomoError::NonSimpleSuspected(format!(
                        "exit angle not monotone in the fan from theta = {theta} (phi = {phi})"
                    )));
                }
            }
            fan.rays.push(r);
        }
        Ok(fan)
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    /// Fires the ray at angle `phi` from the inward normal.
    pub fn fire(&self, phi: T) -> Result<FanRay<T>> {
        let dir = Vec2::from_angle(self.theta + T::PI() + phi);
        let e = exit_data(self.field, self.xi, dir, self.step)?;
        let eta = e.point.normalized();
        let delta = wrap_angle(eta.angle() - self.theta);
        let u = e.direction;
        let normal = u.rot90();
        let tangent = eta.rot90();
        let cos_in = eta.dot(u);
        // Exit-point shift under the normal variation J = y2 N, moved back onto the circle.
        let ddelta_dphi = e.y[2] * (tangent.dot(normal) - tangent.dot(u) * eta.dot(normal) / cos_in);
        let (d_xi, d_eta) = (-dir.dot(self.xi.rot90()), u.dot(tangent));
        Ok(FanRay { phi, delta, tau: e.tau, ddelta_dphi, dir, exit_dir: u, d_xi, d_eta })
    }

    fn exact_chord(&self, theta_t: T, delta_t: T) -> BoundaryDistance<T> {
        let eta = boundary_point(theta_t);
        let g = chord(delta_t);
        if g == T::zero() {
            return BoundaryDistance { gamma: T::zero(), v_xi: None, u_eta: None, residual: T::zero(), d_xi: T::zero(), d_eta: T::zero() };
        }
        let v = (eta - self.xi) / g;
        let (d_xi, d_eta) = gamma_gradient(self.theta, theta_t, v, v);
        BoundaryDistance { gamma: g, v_xi: Some(v), u_eta: Some(v), residual: T::zero(), d_xi, d_eta }
    }

    /// Index `k` with `rays[k].delta <= delta_t < rays[k + 1].delta`, or the virtual end intervals.
    fn bracket(&self, delta_t: T) -> (T, T, T, T) {
        let pos = self.rays.partition_point(|r| r.delta <= delta_t);
        let lo = if pos == 0 { (-T::FRAC_PI_2(), T::zero()) } else { (self.rays[pos - 1].phi, self.rays[pos - 1].delta) };
        let hi = if pos == self.rays.len() {
            (T::FRAC_PI_2(), T::PI() + T::PI())
        } else {
            (self.rays[pos].phi, self.rays[pos].delta)
        };
        (lo.0, lo.1, hi.0, hi.1)
    }

    /// Solves for the geodesic from the source to the boundary point at `theta_t`.
    pub fn solve(&self, theta_t: T, cfg: &SolverConfig) -> Result<BoundaryDistance<T>> {
        let delta_t = wrap_angle(theta_t - self.theta);
        let gap = self.field.domain().boundary_gap();
        if chord(delta_t) < gap {
            return Ok(self.exact_chord(theta_t, delta_t));
        }
        let tol = T::lit(cfg.tolerance).max(T::tolerance_floor());
        let accept = T::lit(cfg.max_residual).max(T::tolerance_floor() * T::lit(16.0));
        let (mut lo, dlo, mut hi, dhi) = self.bracket(delta_t);
        let mut phi = lo + (hi - lo) * (delta_t - dlo) / (dhi - dlo);
        let mut best: Option<(T, FanRay<T>)> = None;
        for _ in 0..cfg.max_iterations {
            let r = self.fire(phi)?;
            let f = r.delta - delta_t;
            if best.map_or(true, |(b, _)| f.abs() < b) {
                best = Some((f.abs(), r));
            }
            if f.abs() < tol {
                break;
            }
            if f < T::zero() {
                lo = phi;
            } else {
                hi = phi;
            }
            let newton = phi - f / r.ddelta_dphi;
            phi = if r.ddelta_dphi > T::zero() && newton > lo && newton < hi { newton } else { (lo + hi) * T::lit(0.5) };
            if hi - lo <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        match best {
            Some((res, r)) if res <= accept => Ok(BoundaryDistance {
                gamma: r.tau,
                v_xi: Some(r.dir),
                u_eta: Some(r.exit_dir),
                residual: res,
                d_xi: r.d_xi,
                d_eta: r.d_eta,
            }),
            Some((res, _)) => Err(TomoError::NonSimpleSuspected(format!(
                "shooting from theta = {} to {} stalled with miss {}",
                self.theta, theta_t, res
            ))),
            None => Err(TomoError::Config("max_iterations must be positive".into())),
        }
    }

    /// Cubic Hermite interpolation of `Gamma` and `d_xi` between fan rays, using
    /// `dGamma/d(delta) = d_eta`. `None` outside the span of the fan.
    pub fn interpolate(&self, theta_t: T) -> Option<(T, T, T)> {
        let delta_t = wrap_angle(theta_t - self.theta);
        let pos = self.rays.partition_point(|r| r.delta <= delta_t);
        if pos == 0 || pos == self.rays.len() {
            return None;
        }
        let (a, b) = (&self.rays[pos - 1], &self.rays[pos]);
        let h = b.delta - a.delta;
        let s = (delta_t - a.delta) / h;
        let (s2, s3) = (s * s, s * s * s);
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let gamma = (two * s3 - three * s2 + T::one()) * a.tau
            + (s3 - two * s2 + s) * h * a.d_eta
            + (three * s2 - two * s3) * b.tau
            + (s3 - s2) * h * b.d_eta;
        let slope = (T::lit(6.0) * (s2 - s)) * (a.tau - b.tau) / h
            + (three * s2 - T::lit(4.0) * s + T::one()) * a.d_eta
            + (three * s2 - two * s) * b.d_eta;
        let d_xi = a.d_xi + (b.d_xi - a.d_xi) * s;
        Some((gamma, d_xi, slope))
    }
}

/// `Gamma(xi, eta)` with endpoint directions, for boundary points given by angle.
pub fn boundary_distance<T: Real>(
    field: &ConformalField<T>,
    theta_xi: T,
    theta_eta: T,
    cfg: &SolverConfig,
) -> Result<BoundaryDistance<T>> {
    cfg.validate()?;
    let delta = wrap_angle(theta_eta - theta_xi);
    if chord(delta) < field.domain().boundary_gap() {
        // No fan needed inside the collar band.
        let fan = SourceFan { field, theta: theta_xi, xi: boundary_point(theta_xi), step: T::lit(cfg.step), rays: Vec::new() };
        return fan.solve(theta_eta, cfg);
    }
    SourceFan::new(field, theta_xi, cfg.fan_rays, T::lit(cfg.step))?.solve(theta_eta, cfg)
}
