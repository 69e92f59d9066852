//! Preconditioned Crank-Nicolson sampling over basis coefficients.

mod diagnostics;

pub use diagnostics::{batch_means, split_rhat, BatchMeans};

use crate::distance::build_table_fast;
use crate::error::{Result, TomoError};
use crate::geometry::{Basis, ConformalField};
use crate::rng::{rng_for, Rng, TAG_CHAIN};
use crate::stability::c_l2_diff;
use crate::statmodel::{gaussian_coefficients, log_likelihood, Dataset, TruncationSet, ZInterpolator};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Log-likelihood of the data under a candidate field.
pub trait LogLikelihood: Sync {
    fn log_likelihood(&self, field: &ConformalField<f64>) -> Result<f64>;
}

/// Membership test for the support of the reference prior.
pub trait Truncation: Sync {
    fn admits(&self, field: &ConformalField<f64>) -> Result<bool>;
}

/// Zero log-likelihood; the chain then targets the truncated prior.
#[derive(Clone, Copy, Debug, Default)]
pub struct ConstantLikelihood;

impl LogLikelihood for ConstantLikelihood {
    fn log_likelihood(&self, _: &ConformalField<f64>) -> Result<f64> {
        Ok(0.0)
    }
}

/// No truncation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Unconstrained;

impl Truncation for Unconstrained {
    fn admits(&self, _: &ConformalField<f64>) -> Result<bool> {
        Ok(true)
    }
}

impl Truncation for TruncationSet {
    fn admits(&self, field: &ConformalField<f64>) -> Result<bool> {
        Ok(self.check(field)?.is_inside())
    }
}

/// Gaussian log-likelihood with `Z` interpolated from a fast table of the candidate field.
#[derive(Clone, Debug)]
pub struct TableLikelihood {
    pub data: Dataset,
    pub k: usize,
    pub rays: usize,
    pub step: f64,
}

impl TableLikelihood {
    pub fn new(data: Dataset) -> Self {
        Self { data, k: 32, rays: 24, step: 1e-2 }
    }
}

impl LogLikelihood for TableLikelihood {
    fn log_likelihood(&self, field: &ConformalField<f64>) -> Result<f64> {
        if self.data.is_empty() {
            return Ok(0.0);
        }
        let ip = ZInterpolator::new(&build_table_fast(field, self.k, self.rays, self.step)?);
        Ok(log_likelihood(|x, y| ip.z(x, y), &self.data))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PcnConfig {
    /// Total steps including burn-in.
    pub n_steps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub initial_step: f64,
    pub target_accept: f64,
    /// Steps per adaptation window during burn-in.
    pub adapt_window: usize,
}

impl Default for PcnConfig {
    fn default() -> Self {
        Self { n_steps: 2000, burn_in: 500, thinning: 1, initial_step: 0.2, target_accept: 0.25, adapt_window: 50 }
    }
}

impl PcnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps <= self.burn_in {
            return Err(TomoError::Config(format!("n_steps {} must exceed burn_in {}", self.n_steps, self.burn_in)));
        }
        if self.thinning == 0 || self.adapt_window == 0 {
            return Err(TomoError::Config("thinning and adapt_window must be positive".into()));
        }
        if !(self.initial_step > 0.0 && self.initial_step < 1.0) {
            return Err(TomoError::Config(format!("initial_step must lie in (0, 1), got {}", self.initial_step)));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(TomoError::Config("target_accept must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub coefficients: Vec<f64>,
    pub log_like: f64,
    pub step_size: f64,
    pub accepted: usize,
    pub proposed: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    /// Proposal outside the truncation set.
    Truncated,
    /// Metropolis rejection.
    Rejected,
    /// The likelihood could not be evaluated; treated as a rejection.
    Failed,
}

/// Everything a step needs besides the state and the stream.
pub struct Target<'a> {
    pub basis: &'a Arc<Basis<f64>>,
    /// Prior standard deviations per coefficient.
    pub sigmas: &'a [f64],
    pub likelihood: &'a dyn LogLikelihood,
    pub truncation: &'a dyn Truncation,
}

/// `theta' = sqrt(1 - s^2) theta + s xi` with `xi` a prior draw; outside the truncation set
/// it is rejected, otherwise accepted with probability `min(1, exp(l' - l))`.
pub fn pcn_step(state: &mut ChainState, target: &Target, rng: &mut Rng) -> Result<StepOutcome> {
    let s = state.step_size;
    let xi = gaussian_coefficients(target.sigmas, rng);
    let u: f64 = rng.gen();
    let shrink = (1.0 - s * s).sqrt();
    let proposal: Vec<f64> = state.coefficients.iter().zip(&xi).map(|(a, b)| shrink * a + s * b).collect();
    state.proposed += 1;
    let field = ConformalField::new(target.basis.clone(), proposal)?;
    if !target.truncation.admits(&field)? {
        return Ok(StepOutcome::Truncated);
    }
    let ll = match target.likelihood.log_likelihood(&field) {
        Ok(v) if v.is_finite() => v,
        _ => return Ok(StepOutcome::Failed),
    };
    if u.ln() < ll - state.log_like {
        state.coefficients = field.coefficients().to_vec();
        state.log_like = ll;
        state.accepted += 1;
        Ok(StepOutcome::Accepted)
    } else {
        Ok(StepOutcome::Rejected)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    /// Thinned post-burn-in states.
    pub samples: Vec<Vec<f64>>,
    pub log_likes: Vec<f64>,
    /// Post-burn-in acceptance rate.
    pub acceptance_rate: f64,
    pub burn_in_acceptance: f64,
    /// Step size after each adaptation window.
    pub step_schedule: Vec<f64>,
    pub final_step_size: f64,
    /// Batch-means effective sample size per coefficient.
    pub ess: Vec<f64>,
    pub truncation_rejections: usize,
    pub likelihood_failures: usize,
    pub warning: Option<String>,
}

/// Runs `cfg.n_steps` pCN steps from `init`. The step size adapts toward
/// `cfg.target_accept` during burn-in and is frozen afterwards.
pub fn run_chain(init: &[f64], target: &Target, cfg: &PcnConfig, seed: u64) -> Result<ChainOutput> {
    cfg.validate()?;
    if init.len() != target.basis.len() || target.sigmas.len() != target.basis.len() {
        return Err(TomoError::Validation("coefficient length does not match the basis".into()));
    }
    let field = ConformalField::new(target.basis.clone(), init.to_vec())?;
    if !target.truncation.admits(&field)? {
        return Err(TomoError::Validation("initial state lies outside the truncation set".into()));
    }
    let mut state = ChainState {
        coefficients: init.to_vec(),
        log_like: target.likelihood.log_likelihood(&field)?,
        step_size: cfg.initial_step,
        accepted: 0,
        proposed: 0,
    };
    let mut rng = rng_for(seed, &[TAG_CHAIN]);
    let mut samples = Vec::new();
    let mut log_likes = Vec::new();
    let mut schedule = Vec::new();
    let (mut window_acc, mut burn_acc, mut post_acc) = (0usize, 0usize, 0usize);
    let (mut truncated, mut failed) = (0usize, 0usize);

    for step in 1..=cfg.n_steps {
        let outcome = pcn_step(&mut state, target, &mut rng)?;
        let acc = outcome == StepOutcome::Accepted;
        truncated += (outcome == StepOutcome::Truncated) as usize;
        failed += (outcome == StepOutcome::Failed) as usize;
        if step <= cfg.burn_in {
            burn_acc += acc as usize;
            window_acc += acc as usize;
            if step % cfg.adapt_window == 0 {
                let rate = window_acc as f64 / cfg.adapt_window as f64;
                state.step_size = (state.step_size * (2.0 * (rate - cfg.target_accept)).exp()).clamp(1e-3, 0.999);
                schedule.push(state.step_size);
                window_acc = 0;
            }
        } else {
            post_acc += acc as usize;
            if (step - cfg.burn_in) % cfg.thinning == 0 {
                samples.push(state.coefficients.clone());
                log_likes.push(state.log_like);
            }
        }
    }
    let post = cfg.n_steps - cfg.burn_in;
    let acceptance_rate = post_acc as f64 / post as f64;
    let ess = (0..target.basis.len())
        .map(|j| batch_means(&samples.iter().map(|s| s[j]).collect::<Vec<_>>()).ess)
        .collect();
    let warning = (!(acceptance_rate > 0.05 && acceptance_rate < 0.95))
        .then(|| format!("post-burn-in acceptance {acceptance_rate:.3} outside (0.05, 0.95)"));
    Ok(ChainOutput {
        samples,
        log_likes,
        acceptance_rate,
        burn_in_acceptance: if cfg.burn_in > 0 { burn_acc as f64 / cfg.burn_in as f64 } else { f64::NAN },
        step_schedule: schedule,
        final_step_size: state.step_size,
        ess,
        truncation_rejections: truncated,
        likelihood_failures: failed,
        warning,
    })
}

/// Coefficient-wise average, rebuilt as a field (it need not lie in the truncation set).
pub fn posterior_mean(samples: &[Vec<f64>], basis: &Arc<Basis<f64>>) -> Result<ConformalField<f64>> {
    let first = samples.first().ok_or_else(|| TomoError::Validation("no samples".into()))?;
    let mut mean = vec![0.0; first.len()];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    let n = samples.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    ConformalField::new(basis.clone(), mean)
}

/// `||c_est - c_truth||_{L2}` by interior quadrature.
pub fn l2_error(estimate: &ConformalField<f64>, truth: &ConformalField<f64>) -> Result<f64> {
    if estimate.domain() != truth.domain() {
        return Err(TomoError::Validation("fields live on different domains".into()));
    }
    Ok(c_l2_diff(estimate, truth))
}
