use crate::distance::{build_table, DistanceTable, SolverConfig};
use crate::error::Result;
use crate::geometry::{Basis, ConformalField};
use crate::rng::{sub_seed, TAG_PAIRS};
use crate::stability::{forward_check, mukhometov_check, z_level_checks, StabilityReport};
use crate::statmodel::{sample_prior, PriorDraw, PriorSpec};
use rayon::prelude::*;
use std::sync::Arc;

/// Truncated-prior draws; draw `i` has its own stream.
pub fn prior_pool(spec: &PriorSpec, basis: &Arc<Basis<f64>>, count: usize, seed: u64) -> Result<Vec<PriorDraw>> {
    (0..count)
        .into_par_iter()
        .map(|i| sample_prior(spec, basis, sub_seed(seed, &[TAG_PAIRS, i as u64])))
        .collect()
}

/// Reports for a list of field pairs at one grid size.
#[derive(Clone, Debug)]
pub struct StabilityBatch {
    pub tables: Vec<DistanceTable<f64>>,
    pub reports: Vec<StabilityReport>,
}

impl StabilityBatch {
    /// Largest ratio for one inequality label.
    pub fn max_ratio(&self, inequality: &str) -> f64 {
        self.reports.iter().filter(|r| r.inequality == inequality).map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Builds one table per field and runs every inequality on each pair.
pub fn stability_batch(
    fields: &[ConformalField<f64>],
    pairs: &[(usize, usize)],
    k: usize,
    solver: &SolverConfig,
) -> Result<StabilityBatch> {
    let tables = fields.par_iter().map(|f| build_table(f, k, solver)).collect::<Result<Vec<_>>>()?;
    let mut reports = Vec::with_capacity(4 * pairs.len());
    for &(a, b) in pairs {
        let (t1, t2, f1, f2) = (&tables[a], &tables[b], &fields[a], &fields[b]);
        reports.push(mukhometov_check(t1, t2, f1, f2)?);
        reports.push(forward_check(t1, t2, f1, f2)?);
        let (inv, fwd) = z_level_checks(t1, t2, f1, f2)?;
        reports.push(inv);
        reports.push(fwd);
    }
    Ok(StabilityBatch { tables, reports })
}
