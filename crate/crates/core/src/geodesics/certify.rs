use super::integrator::{march, State};
use super::{check_step, exit_data};
use crate::error::{Result, TomoError};
use crate::geometry::ConformalField;
use crate::num::Real;
use crate::vec2::Vec2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Sampling plan for [`certify_simplicity`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyConfig {
    /// Boundary base points.
    pub angular_samples: usize,
    /// Directions per base point.
    pub direction_samples: usize,
    /// Interior base points on the circle of half the inner radius.
    pub interior_points: usize,
    pub step: f64,
    /// Relative deflation of `ell` and inflation of `big_l` when used as bounds.
    pub safety: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self { angular_samples: 32, direction_samples: 64, interior_points: 8, step: 1e-3, safety: 0.05 }
    }
}

impl CertifyConfig {
    /// Minimal sampling at a coarse step, for repeated membership tests inside samplers.
    pub fn coarse() -> Self {
        Self { angular_samples: 16, direction_samples: 16, interior_points: 0, step: 0.02, safety: 0.05 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.angular_samples < 16 || self.direction_samples < 16 {
            return Err(TomoError::Config(format!(
                "certification needs at least 16 angular and direction samples, got {} and {}",
                self.angular_samples, self.direction_samples
            )));
        }
        if !(0.0..1.0).contains(&self.safety) {
            return Err(TomoError::Config(format!("safety factor must lie in [0, 1), got {}", self.safety)));
        }
        check_step(self.step)
    }
}

/// Sampled bounds on the fibre derivative of the exponential map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SimplicityCertificate<T: Real> {
    /// Smallest sampled singular value of `D_v exp` (raw, before the safety factor).
    pub ell: T,
    /// Largest sampled singular value.
    pub big_l: T,
    /// Smallest sampled `det D_v exp`; a sign change marks a conjugate point.
    pub min_jacobi_det: T,
    /// Geodesic curvature of the boundary circle in the metric `g`.
    pub convexity_margin: T,
    pub is_simple: bool,
    pub safety: T,
    pub geodesics: usize,
    pub failure: Option<String>,
}

impl<T: Real> SimplicityCertificate<T> {
    /// `ell` deflated by the safety factor.
    pub fn certified_ell(&self) -> T {
        self.ell * (T::one() - self.safety)
    }

    /// `big_l` inflated by the safety factor.
    pub fn certified_big_l(&self) -> T {
        self.big_l * (T::one() + self.safety)
    }
}

#[derive(Clone, Copy)]
struct RayStats<T> {
    min_s: T,
    max_s: T,
    min_det: T,
}

fn scan_ray<T: Real>(field: &ConformalField<T>, x: Vec2<T>, v: Vec2<T>, step: T) -> Result<RayStats<T>> {
    let n0 = field.n_at(x);
    let mut st = RayStats { min_s: T::infinity(), max_s: T::zero(), min_det: T::infinity() };
    march(field, State::start(field, x, v), step, None, |node| {
        if node.t <= T::zero() {
            return;
        }
        let s_t = n0 / node.n();
        let s_n = s_t * node.s.y[2] / node.t;
        st.min_s = st.min_s.min(s_t.abs()).min(s_n.abs());
        st.max_s = st.max_s.max(s_t.abs()).max(s_n.abs());
        st.min_det = st.min_det.min(s_t * s_n);
    })?;
    Ok(st)
}

/// Fans geodesics from boundary and interior base points and records the extremes of
/// the singular values and determinant of `D_v exp` over all sampled times.
pub fn certify_simplicity<T: Real>(field: &ConformalField<T>, cfg: &CertifyConfig) -> Result<SimplicityCertificate<T>> {
    cfg.validate()?;
    let step = T::lit(cfg.step);
    let two_pi = T::PI() + T::PI();
    let (na, nd) = (cfg.angular_samples, cfg.direction_samples);
    let r_int = field.domain().inner_radius * T::lit(0.5);

    let mut rays: Vec<(Vec2<T>, Vec2<T>)> = Vec::with_capacity(na * nd + cfg.interior_points * nd);
    for k in 0..na {
        let xi = Vec2::from_angle(two_pi * T::from_count(k) / T::from_count(na));
        for j in 0..nd {
            let phi = -T::FRAC_PI_2() + T::PI() * (T::from_count(j) + T::lit(0.5)) / T::from_count(nd);
            rays.push((xi, Vec2::from_angle((-xi).angle() + phi)));
        }
    }
    for k in 0..cfg.interior_points {
        let x = Vec2::from_angle(two_pi * (T::from_count(k) + T::lit(0.5)) / T::from_count(cfg.interior_points)) * r_int;
        let n = field.n_at(x);
        for j in 0..nd {
            rays.push((x, Vec2::from_angle(two_pi * T::from_count(j) / T::from_count(nd)) / n));
        }
    }

    let results: Vec<Result<RayStats<T>>> = rays.par_iter().map(|(x, v)| scan_ray(field, *x, *v, step)).collect();

    let mut min_s = T::infinity();
    let mut max_s = T::zero();
    let mut min_det = T::infinity();
    let mut failure = None;
    for r in results {
        match r {
            Ok(st) => {
                min_s = min_s.min(st.min_s);
                max_s = max_s.max(st.max_s);
                min_det = min_det.min(st.min_det);
            }
            Err(e) => {
                if failure.is_none() {
                    failure = Some(e.to_string());
                }
            }
        }
    }

    let mut margin = T::infinity();
    for k in 0..4 * na {
        let x = Vec2::from_angle(two_pi * T::from_count(k) / T::from_count(4 * na));
        let l = field.local(x);
        margin = margin.min((T::one() + l.grad.dot(x)) * (-l.c).exp());
    }

    let is_simple = failure.is_none() && min_det > T::zero() && margin > T::zero();
    Ok(SimplicityCertificate {
        ell: min_s,
        big_l: max_s,
        min_jacobi_det: min_det,
        convexity_margin: margin,
        is_simple,
        safety: T::lit(cfg.safety),
        geodesics: rays.len(),
        failure,
    })
}

/// Outcome of [`tau_derivative_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TauCheck<T> {
    Checked { numeric_norm: T, bound: T },
    /// The exit is too close to tangential for the bound to mean anything.
    Grazing { incidence: T },
}

/// Central difference of the exit time in the initial direction angle, against
/// `L * Lambda * diam / <nu, u>` with `L = cert.big_l`.
pub fn tau_derivative_check<T: Real>(
    field: &ConformalField<T>,
    xi: Vec2<T>,
    v: Vec2<T>,
    cert: &SimplicityCertificate<T>,
    step: T,
) -> Result<TauCheck<T>> {
    if xi.dot(v) >= T::zero() {
        return Err(TomoError::Domain("direction is not strictly inward".into()));
    }
    let center = exit_data(field, xi, v, step)?;
    let incidence = center.point.normalized().dot(center.direction);
    if incidence < T::lit(1e-3) {
        return Ok(TauCheck::Grazing { incidence });
    }
    let h = T::lit(1e-4);
    let a = v.angle();
    let plus = exit_data(field, xi, Vec2::from_angle(a + h), step)?;
    let minus = exit_data(field, xi, Vec2::from_angle(a - h), step)?;
    let numeric_norm = ((plus.tau - minus.tau) / (h + h)).abs();
    let bound = cert.big_l * field.big_lambda() * field.domain().diameter() / incidence;
    Ok(TauCheck::Checked { numeric_norm, bound })
}
