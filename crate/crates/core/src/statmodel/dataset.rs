use super::interp::ZInterpolator;
use crate::distance::{boundary_distance, DistanceTable, SolverConfig};
use crate::error::{Result, TomoError};
use crate::geometry::ConformalField;
use crate::rng::{rng_for, TAG_DATA};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest tolerated fraction of records that needed redrawing.
pub const MAX_RESAMPLE_FRACTION: f64 = 1e-3;
const MAX_REDRAWS: usize = 16;

/// One observation: boundary angles and the noisy log travel time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub theta_x: f64,
    pub theta_y: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<Record>,
    pub seed: u64,
    pub truth_hash: String,
    /// Records whose first pair failed to solve and were redrawn.
    pub resampled: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Empty dataset: the likelihood is constant.
    pub fn empty() -> Self {
        Self { records: Vec::new(), seed: 0, truth_hash: String::new(), resampled: 0 }
    }
}

/// How `Z_c` is evaluated at sampled pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ZMode {
    /// Two-point shooting at the exact pair.
    Exact(SolverConfig),
    /// Bicubic interpolation of the table.
    Fast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOptions {
    pub mode: ZMode,
    /// Forces `epsilon = 0` (control runs).
    pub noiseless: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { mode: ZMode::Exact(SolverConfig::default()), noiseless: false }
    }
}

/// Draws `n_obs` records with uniform angle pairs and standard normal noise.
/// Record `i` uses its own stream, so the dataset does not depend on thread count.
pub fn sample_dataset(
    field: &ConformalField<f64>,
    table: &DistanceTable<f64>,
    n_obs: usize,
    seed: u64,
    opts: &SampleOptions,
) -> Result<Dataset> {
    if table.field_hash != field.hash() {
        return Err(TomoError::Validation("table was not built from the given field".into()));
    }
    let interp = matches!(opts.mode, ZMode::Fast).then(|| ZInterpolator::new(table));
    let draw = |i: usize| -> Result<(Record, bool)> {
        let mut rng = rng_for(seed, &[TAG_DATA, i as u64]);
        let eps: f64 = rng.sample(StandardNormal);
        let eps = if opts.noiseless { 0.0 } else { eps };
        for attempt in 0..MAX_REDRAWS {
            let theta_x = rng.gen::<f64>() * 2.0 * PI;
            let theta_y = rng.gen::<f64>() * 2.0 * PI;
            let zc = match (&opts.mode, &interp) {
                (ZMode::Fast, Some(ip)) => Ok(ip.z(theta_x, theta_y)),
                (ZMode::Exact(cfg), _) => boundary_distance(field, theta_x, theta_y, cfg).map(|b| b.gamma.ln()),
                _ => unreachable!(),
            };
            match zc {
                Ok(z) if z.is_finite() => return Ok((Record { theta_x, theta_y, z: z + eps }, attempt > 0)),
                _ => continue,
            }
        }
        Err(TomoError::Solver { i, j: i, reason: format!("record {i}: no solvable pair in {MAX_REDRAWS} draws") })
    };
    let out: Vec<Result<(Record, bool)>> = (0..n_obs).into_par_iter().map(draw).collect();
    let mut records = Vec::with_capacity(n_obs);
    let mut resampled = 0;
    for r in out {
        let (rec, redrawn) = r?;
        resampled += redrawn as usize;
        records.push(rec);
    }
    if n_obs > 0 && resampled as f64 > MAX_RESAMPLE_FRACTION * n_obs as f64 {
        return Err(TomoError::Solver {
            i: 0,
            j: 0,
            reason: format!("{resampled} of {n_obs} records needed redrawing"),
        });
    }
    Ok(Dataset { records, seed, truth_hash: field.hash().to_string(), resampled })
}

/// `sum_i [-(z_i - Z(x_i, y_i))^2 / 2 - log(2 pi) / 2]`; zero for an empty dataset.
pub fn log_likelihood<F: Fn(f64, f64) -> f64>(z: F, data: &Dataset) -> f64 {
    let c = 0.5 * (2.0 * PI).ln();
    data.records
        .iter()
        .map(|r| {
            let res = r.z - z(r.theta_x, r.theta_y);
            -0.5 * res * res - c
        })
        .sum()
}
