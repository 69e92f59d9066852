//! Posterior contraction experiment and batched stability studies.

mod stability_batch;

pub use stability_batch::{prior_pool, stability_batch, StabilityBatch};

use crate::distance::{build_table, SolverConfig};
use crate::error::{Result, TomoError};
use crate::geometry::ConformalField;
use crate::mcmc::{l2_error, posterior_mean, run_chain, PcnConfig, TableLikelihood, Target};
use crate::rng::{sub_seed, TAG_CHAIN, TAG_DATA};
use crate::statmodel::{sample_dataset, Membership, PriorSpec, SampleOptions, ZMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Dimension of the domain.
const DIM: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RateConfig {
    pub n_values: Vec<usize>,
    pub replicates: usize,
    pub prior: PriorSpec,
    pub chain: PcnConfig,
    pub rate_nu: f64,
    pub target_omega: f64,
    /// Grid of the truth table that data are interpolated from.
    pub truth_k: usize,
    pub truth_solver: SolverConfig,
    /// Grid, fan size and step of the per-proposal likelihood tables.
    pub likelihood_k: usize,
    pub likelihood_rays: usize,
    pub likelihood_step: f64,
    /// Forces zero noise (control run).
    pub noiseless: bool,
    /// The experiment fails when more replicates than this are flagged.
    pub max_flagged_fraction: f64,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            n_values: vec![250, 1000, 4000],
            replicates: 4,
            prior: PriorSpec { num_modes: 3, scale: 0.5, ..PriorSpec::default() },
            chain: PcnConfig { n_steps: 1000, burn_in: 250, ..PcnConfig::default() },
            rate_nu: 2.5,
            target_omega: 0.1,
            truth_k: 64,
            truth_solver: SolverConfig::default(),
            likelihood_k: 32,
            likelihood_rays: 24,
            likelihood_step: 1e-2,
            noiseless: false,
            max_flagged_fraction: 0.2,
        }
    }
}

/// Smallest admissible `nu` is strictly above this.
pub fn nu_lower_bound(alpha: f64, beta: f64) -> Result<f64> {
    let denom = 2.0 * (alpha - beta) - DIM;
    if denom <= 0.0 {
        return Err(TomoError::Config(format!("no admissible nu: need 2(alpha - beta) > {DIM}, got alpha {alpha} beta {beta}")));
    }
    Ok((2.0 * DIM / denom).max(DIM / beta))
}

/// `delta_N = N^{-1/(2 + nu)}`.
pub fn delta_n(n: usize, nu: f64) -> f64 {
    (n as f64).powf(-1.0 / (2.0 + nu))
}

/// Upper limit `1 / (2 (2 + nu))` for the rate exponent.
pub fn omega_limit(nu: f64) -> f64 {
    1.0 / (2.0 * (2.0 + nu))
}

impl RateConfig {
    pub fn validate(&self) -> Result<()> {
        self.prior.validate()?;
        self.chain.validate()?;
        let bad = |m: String| Err(TomoError::Config(m));
        if self.n_values.len() < 3 || self.n_values.windows(2).any(|w| w[0] >= w[1]) || self.n_values[0] == 0 {
            return bad(format!("n_values must be at least 3 strictly increasing positive counts, got {:?}", self.n_values));
        }
        if self.replicates == 0 {
            return bad("replicates must be positive".into());
        }
        let lower = nu_lower_bound(self.prior.alpha, self.prior.beta)?;
        if !(self.rate_nu > lower) {
            return bad(format!("rate_nu {} is not admissible: must exceed {lower}", self.rate_nu));
        }
        let top = omega_limit(self.rate_nu);
        if !(self.target_omega > 0.0 && self.target_omega < top) {
            return bad(format!("target_omega must lie in (0, {top}), got {}", self.target_omega));
        }
        if self.truth_k < 32 || self.likelihood_k < 32 {
            return bad("table grids need K >= 32".into());
        }
        if self.likelihood_rays < 8 {
            return bad("likelihood fan needs at least 8 rays".into());
        }
        if !(0.0..=1.0).contains(&self.max_flagged_fraction) {
            return bad("max_flagged_fraction must lie in [0, 1]".into());
        }
        self.truth_solver.validate()
    }
}

/// One dataset and chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub n: usize,
    pub replicate: usize,
    pub error: f64,
    pub acceptance_rate: f64,
    pub final_step_size: f64,
    pub min_ess: f64,
    pub mean_coefficients: Vec<f64>,
    /// Reason the replicate was excluded, if it was.
    pub flag: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub n_values: Vec<usize>,
    /// Mean error over unflagged replicates per N.
    pub errors: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub fitted_slope: f64,
    pub r_squared: f64,
    pub target_omega: f64,
    pub rate_nu: f64,
    pub delta_schedule: Vec<f64>,
    /// Slope of `delta_N^{1/2}` in log N, a reference line.
    pub reference_slope: f64,
    pub replicates: Vec<ReplicateResult>,
    pub flagged: usize,
    pub truth_hash: String,
    pub seed: u64,
    pub noiseless: bool,
}

impl RateReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.errors.windows(2).all(|w| w[1] < w[0])
    }

    /// Decreasing except for at most one rise smaller than the larger of the two stderrs.
    pub fn monotone_within_stderr(&self) -> bool {
        let mut rises = 0;
        for i in 1..self.errors.len() {
            if self.errors[i] >= self.errors[i - 1] {
                rises += 1;
                if self.errors[i] - self.errors[i - 1] > self.stderrs[i].max(self.stderrs[i - 1]) {
                    return false;
                }
            }
        }
        rises <= 1
    }
}

/// OLS of `log error` on `log N`; returns `(slope, r^2)`.
pub fn fit_slope(n_values: &[usize], errors: &[f64]) -> Result<(f64, f64)> {
    if n_values.len() != errors.len() || n_values.len() < 3 {
        return Err(TomoError::Validation("need at least 3 (N, error) pairs of equal length".into()));
    }
    if errors.iter().any(|e| !(*e > 0.0)) || n_values.iter().any(|n| *n == 0) {
        return Err(TomoError::Validation(format!("errors and N must be positive, got {errors:?}")));
    }
    let x: Vec<f64> = n_values.iter().map(|n| (*n as f64).ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok((slope, r2))
}

/// For every N and replicate: draw a dataset from `truth`, run a pCN chain from the zero
/// field and record the L2 error of the posterior mean.
pub fn run_rate_experiment(truth: &ConformalField<f64>, cfg: &RateConfig, seed: u64) -> Result<RateReport> {
    cfg.validate()?;
    let basis = truth.basis();
    let sigmas = cfg.prior.mode_stddevs(basis)?;
    let trunc = cfg.prior.truncation();
    match trunc.check(truth)? {
        Membership::Inside(_) => {}
        other => {
            return Err(TomoError::Validation(format!("truth lies outside the truncation set: {}", describe(&other))));
        }
    }
    let table = build_table(truth, cfg.truth_k, &cfg.truth_solver)?;
    let opts = SampleOptions { mode: ZMode::Fast, noiseless: cfg.noiseless };
    let zero = vec![0.0; basis.len()];

    let jobs: Vec<(usize, usize)> =
        (0..cfg.n_values.len()).flat_map(|i| (0..cfg.replicates).map(move |r| (i, r))).collect();
    let results: Vec<Result<ReplicateResult>> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let n = cfg.n_values[i];
            let data = sample_dataset(truth, &table, n, sub_seed(seed, &[TAG_DATA, i as u64, r as u64]), &opts)?;
            let like = TableLikelihood { data, k: cfg.likelihood_k, rays: cfg.likelihood_rays, step: cfg.likelihood_step };
            let target = Target { basis, sigmas: &sigmas, likelihood: &like, truncation: &trunc };
            let out = run_chain(&zero, &target, &cfg.chain, sub_seed(seed, &[TAG_CHAIN, i as u64, r as u64]))?;
            let mean = posterior_mean(&out.samples, basis)?;
            let min_ess = out.ess.iter().zip(&sigmas).filter(|(_, s)| **s > 0.0).map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
            let flag = out.warning.clone().or_else(|| {
                (out.likelihood_failures * 20 > cfg.chain.n_steps)
                    .then(|| format!("{} likelihood failures", out.likelihood_failures))
            });
            Ok(ReplicateResult {
                n,
                replicate: r,
                error: l2_error(&mean, truth)?,
                acceptance_rate: out.acceptance_rate,
                final_step_size: out.final_step_size,
                min_ess,
                mean_coefficients: mean.coefficients().to_vec(),
                flag,
            })
        })
        .collect();
    let replicates = results.into_iter().collect::<Result<Vec<_>>>()?;

    let flagged = replicates.iter().filter(|r| r.flag.is_some()).count();
    if flagged as f64 > cfg.max_flagged_fraction * replicates.len() as f64 {
        return Err(TomoError::Validation(format!("{flagged} of {} replicates flagged", replicates.len())));
    }
    let mut errors = Vec::new();
    let mut stderrs = Vec::new();
    for &n in &cfg.n_values {
        let e: Vec<f64> = replicates.iter().filter(|r| r.n == n && r.flag.is_none()).map(|r| r.error).collect();
        if e.is_empty() {
            return Err(TomoError::Validation(format!("every replicate at N = {n} was flagged")));
        }
        let m = e.len() as f64;
        let mean = e.iter().sum::<f64>() / m;
        let sd = if e.len() > 1 { (e.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt() } else { 0.0 };
        errors.push(mean);
        stderrs.push(sd / m.sqrt());
    }
    let (fitted_slope, r_squared) = fit_slope(&cfg.n_values, &errors)?;
    Ok(RateReport {
        n_values: cfg.n_values.clone(),
        errors,
        stderrs,
        fitted_slope,
        r_squared,
        target_omega: cfg.target_omega,
        rate_nu: cfg.rate_nu,
        delta_schedule: cfg.n_values.iter().map(|n| delta_n(*n, cfg.rate_nu)).collect(),
        reference_slope: -omega_limit(cfg.rate_nu),
        replicates,
        flagged,
        truth_hash: truth.hash().to_string(),
        seed,
        noiseless: cfg.noiseless,
    })
}

fn describe(m: &Membership) -> String {
    match m {
        Membership::Inside(_) => "inside".into(),
        Membership::C3Exceeded(v) => format!("C3 bound {v}"),
        Membership::NotSimple(_) => "not simple".into(),
        Membership::EllTooSmall(c) => format!("certified ell {}", c.certified_ell()),
    }
}
