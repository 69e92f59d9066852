use crate::error::{Result, TomoError};
use crate::geodesics::{certify_simplicity, CertifyConfig, SimplicityCertificate};
use crate::geometry::{Basis, ConformalField};
use crate::rng::{rng_for, Rng, TAG_PRIOR};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Truncated Gaussian prior on the basis coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorSpec {
    pub alpha: f64,
    pub beta: f64,
    /// Leading modes with nonzero variance.
    pub num_modes: usize,
    /// Standard deviation of the first level.
    pub scale: f64,
    /// Strict upper bound on the certified C3 bound.
    pub trunc_m: f64,
    /// Lower bound on the certified `ell`.
    pub trunc_ell: f64,
    pub max_rejections: usize,
    pub certify: CertifyConfig,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            alpha: 5.0,
            beta: 3.0,
            num_modes: 32,
            scale: 0.1,
            trunc_m: 400.0,
            trunc_ell: 0.05,
            max_rejections: 1000,
            certify: CertifyConfig::coarse(),
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TomoError::Config(m));
        if !(self.beta >= 3.0) {
            return bad(format!("beta must be at least 3, got {}", self.beta));
        }
        if !(self.alpha > self.beta + 1.0) {
            return bad(format!("alpha must exceed beta + 1, got alpha {} beta {}", self.alpha, self.beta));
        }
        if self.num_modes == 0 {
            return bad("num_modes must be positive".into());
        }
        if !(self.scale >= 0.0 && self.scale.is_finite()) {
            return bad(format!("scale must be finite and nonnegative, got {}", self.scale));
        }
        if !(self.trunc_m > 0.0) || !(self.trunc_ell > 0.0) {
            return bad("trunc_m and trunc_ell must be positive".into());
        }
        if self.max_rejections == 0 {
            return bad("max_rejections must be positive".into());
        }
        self.certify.validate()
    }

    /// `sigma_j = scale * level_j^{-(alpha/2 + 1/2)}` for the first `num_modes` modes, zero after.
    /// Cos/sin partners share a level and so a variance.
    pub fn mode_stddevs(&self, basis: &Basis<f64>) -> Result<Vec<f64>> {
        if self.num_modes > basis.len() {
            return Err(TomoError::Config(format!(
                "prior has {} modes but the basis only {}",
                self.num_modes,
                basis.len()
            )));
        }
        let p = self.alpha / 2.0 + 0.5;
        Ok(basis
            .modes()
            .iter()
            .enumerate()
            .map(|(j, m)| if j < self.num_modes { self.scale * (m.level as f64).powf(-p) } else { 0.0 })
            .collect())
    }

    pub fn truncation(&self) -> TruncationSet {
        TruncationSet { m: self.trunc_m, ell: self.trunc_ell, certify: self.certify }
    }
}

/// Fields with C3 bound below `m` that certify as simple with `ell` at least `ell`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSet {
    pub m: f64,
    pub ell: f64,
    pub certify: CertifyConfig,
}

#[derive(Clone, Debug)]
pub enum Membership {
    Inside(SimplicityCertificate<f64>),
    C3Exceeded(f64),
    NotSimple(SimplicityCertificate<f64>),
    EllTooSmall(SimplicityCertificate<f64>),
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside(_))
    }
}

impl TruncationSet {
    /// The C3 test runs first since it is cheap.
    pub fn check(&self, field: &ConformalField<f64>) -> Result<Membership> {
        if !(field.c3_bound() < self.m) {
            return Ok(Membership::C3Exceeded(field.c3_bound()));
        }
        let cert = certify_simplicity(field, &self.certify)?;
        Ok(if !cert.is_simple {
            Membership::NotSimple(cert)
        } else if cert.certified_ell() < self.ell {
            Membership::EllTooSmall(cert)
        } else {
            Membership::Inside(cert)
        })
    }
}

/// Accepted draw with rejection counts.
#[derive(Clone, Debug)]
pub struct PriorDraw {
    pub field: ConformalField<f64>,
    pub certificate: SimplicityCertificate<f64>,
    pub attempts: usize,
    pub c3_rejections: usize,
    pub cert_rejections: usize,
}

/// Untruncated Gaussian coefficients `sigma_j g_j`.
pub fn gaussian_coefficients(sigmas: &[f64], rng: &mut Rng) -> Vec<f64> {
    sigmas.iter().map(|s| if *s > 0.0 { s * rng.sample::<f64, _>(StandardNormal) } else { 0.0 }).collect()
}

/// Rejection sampler for the truncated prior.
pub fn sample_prior(spec: &PriorSpec, basis: &Arc<Basis<f64>>, seed: u64) -> Result<PriorDraw> {
    spec.validate()?;
    let sigmas = spec.mode_stddevs(basis)?;
    let trunc = spec.truncation();
    let mut rng = rng_for(seed, &[TAG_PRIOR]);
    let (mut c3_rej, mut cert_rej) = (0, 0);
    for attempt in 1..=spec.max_rejections + 1 {
        let field = ConformalField::new(basis.clone(), gaussian_coefficients(&sigmas, &mut rng))?;
        match trunc.check(&field)? {
            Membership::Inside(certificate) => {
                return Ok(PriorDraw { field, certificate, attempts: attempt, c3_rejections: c3_rej, cert_rejections: cert_rej })
            }
            Membership::C3Exceeded(_) => c3_rej += 1,
            _ => cert_rej += 1,
        }
    }
    Err(TomoError::PriorTruncationInfeasible {
        accepted: 0,
        attempts: spec.max_rejections + 1,
        c3_rejections: c3_rej,
        cert_rejections: cert_rej,
    })
}
