//! Information distances between the data laws of two fields, from their `Z` tables.

use crate::distance::ZField;
use crate::error::Result;
use crate::geometry::DomainSpec;
use std::f64::consts::PI;

const VOL: f64 = 2.0 * PI;

fn weights(z1: &ZField<f64>, z2: &ZField<f64>) -> Result<(Vec<f64>, f64)> {
    let d = z1.diff(z2)?;
    let h = VOL / z1.k as f64;
    Ok((d, h * h))
}

/// `K = ||Z1 - Z2||^2 / (2 Vol^2)`.
pub fn kl_divergence(z1: &ZField<f64>, z2: &ZField<f64>) -> Result<f64> {
    let (d, w) = weights(z1, z2)?;
    Ok(d.iter().map(|v| v * v).sum::<f64>() * w / (2.0 * VOL * VOL))
}

/// `rho = Vol^-2 int exp(-(Z1 - Z2)^2 / 8)`.
pub fn hellinger_affinity(z1: &ZField<f64>, z2: &ZField<f64>) -> Result<f64> {
    let (d, w) = weights(z1, z2)?;
    Ok(d.iter().map(|v| (-v * v / 8.0).exp()).sum::<f64>() * w / (VOL * VOL))
}

/// `h = sqrt(2 (1 - rho))`, with `1 - rho` summed directly to avoid cancellation.
pub fn hellinger(z1: &ZField<f64>, z2: &ZField<f64>) -> Result<f64> {
    let (d, w) = weights(z1, z2)?;
    let one_minus_rho = d.iter().map(|v| -(-v * v / 8.0).exp_m1()).sum::<f64>() * w / (VOL * VOL);
    Ok((2.0 * one_minus_rho).sqrt())
}

/// Second moment of the log-likelihood ratio: `Vol^-2 int [(Z1 - Z2)^4 / 4 + (Z1 - Z2)^2]`.
pub fn variance_proxy(z1: &ZField<f64>, z2: &ZField<f64>) -> Result<f64> {
    let (d, w) = weights(z1, z2)?;
    Ok(d.iter().map(|v| 0.25 * v.powi(4) + v * v).sum::<f64>() * w / (VOL * VOL))
}

/// `kappa = (1 - e^-T) / (4T)`, `T = Delta^2 / 8`, `Delta = 2M + log diam - log delta`.
pub fn kappa(m: f64, domain: &DomainSpec<f64>) -> f64 {
    let delta = 2.0 * m + domain.diameter().ln() - domain.boundary_gap().ln();
    let t = delta * delta / 8.0;
    (1.0 - (-t).exp()) / (4.0 * t)
}

/// Both sides of the Hellinger sandwich around `h^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sandwich {
    pub lower: f64,
    pub h2: f64,
    pub upper: f64,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        self.lower <= self.h2 && self.h2 <= self.upper
    }
}

/// `kappa ||Z1 - Z2||^2 <= h^2 <= ||Z1 - Z2||^2 / (4 Vol^2)`.
pub fn hellinger_sandwich(z1: &ZField<f64>, z2: &ZField<f64>, m: f64, domain: &DomainSpec<f64>) -> Result<Sandwich> {
    let l2 = z1.l2_diff(z2)?;
    let h = hellinger(z1, z2)?;
    Ok(Sandwich { lower: kappa(m, domain) * l2 * l2, h2: h * h, upper: l2 * l2 / (4.0 * VOL * VOL) })
}
