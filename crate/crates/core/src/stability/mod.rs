//! Empirical checks of the inverse and forward stability inequalities on field pairs.

use crate::distance::{torus_l2, z_field, DistanceTable};
use crate::error::{Result, TomoError};
use crate::geometry::{disk_l2, ConformalField};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Midpoint grid used for interior `L2` norms.
pub const INTERIOR_CELLS: usize = 256;
/// Default allowed excess of a ratio over 1.
pub const DEFAULT_SLACK: f64 = 0.02;

pub const MUKHOMETOV: &str = "mukhometov";
pub const FORWARD: &str = "forward";
pub const Z_INVERSE: &str = "z-inverse";
pub const Z_FORWARD: &str = "z-forward";

/// Identifies the two fields and the constants in force.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMeta {
    pub hash1: String,
    pub hash2: String,
    pub k: usize,
    /// Pairwise minimum of the lower bounds.
    pub lambda: f64,
    /// Pairwise maximum of the upper bounds.
    pub big_lambda: f64,
    pub ell: Option<f64>,
    pub big_l: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, defined as 0 when both vanish.
    pub ratio: f64,
    pub meta: PairMeta,
}

impl StabilityReport {
    fn new(inequality: &str, lhs: f64, rhs: f64, meta: PairMeta) -> Self {
        let ratio = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { lhs / rhs };
        Self { inequality: inequality.to_string(), lhs, rhs, ratio, meta }
    }

    pub fn passes(&self, slack: f64) -> bool {
        self.ratio <= 1.0 + slack
    }
}

/// `||n1 - n2||_{L2(disk)}` by the midpoint rule.
pub fn n_l2_diff(f1: &ConformalField<f64>, f2: &ConformalField<f64>) -> f64 {
    disk_l2(INTERIOR_CELLS, |x| f1.n_at(x) - f2.n_at(x))
}

/// `||c1 - c2||_{L2}`; both vanish off the inner disk.
pub fn c_l2_diff(f1: &ConformalField<f64>, f2: &ConformalField<f64>) -> f64 {
    disk_l2(INTERIOR_CELLS, |x| f1.local(x).c - f2.local(x).c)
}

/// `||d_xi (Gamma1 - Gamma2)||_{L2}` on the torus.
pub fn dxi_gamma_l2_diff(t1: &DistanceTable<f64>, t2: &DistanceTable<f64>) -> Result<f64> {
    same_grid(t1, t2)?;
    let d: Vec<f64> = t1.dgamma_dxi.iter().zip(&t2.dgamma_dxi).map(|(a, b)| a - b).collect();
    Ok(torus_l2(&d, t1.k))
}

/// `||Gamma1 - Gamma2||_{L2}` on the torus.
pub fn gamma_l2_diff(t1: &DistanceTable<f64>, t2: &DistanceTable<f64>) -> Result<f64> {
    same_grid(t1, t2)?;
    let d: Vec<f64> = t1.gamma.iter().zip(&t2.gamma).map(|(a, b)| a - b).collect();
    Ok(torus_l2(&d, t1.k))
}

fn same_grid(t1: &DistanceTable<f64>, t2: &DistanceTable<f64>) -> Result<()> {
    if t1.k != t2.k {
        return Err(TomoError::Validation(format!("table sizes differ: {} vs {}", t1.k, t2.k)));
    }
    Ok(())
}

fn meta(
    t1: &DistanceTable<f64>,
    t2: &DistanceTable<f64>,
    f1: &ConformalField<f64>,
    f2: &ConformalField<f64>,
) -> Result<PairMeta> {
    same_grid(t1, t2)?;
    for (t, f) in [(t1, f1), (t2, f2)] {
        if t.field_hash != f.hash() {
            return Err(TomoError::Validation("table was not built from the given field".into()));
        }
    }
    Ok(PairMeta {
        hash1: f1.hash().to_string(),
        hash2: f2.hash().to_string(),
        k: t1.k,
        lambda: f1.lambda().min(f2.lambda()),
        big_lambda: f1.big_lambda().max(f2.big_lambda()),
        ell: None,
        big_l: None,
    })
}

/// `||n1 - n2||_{L2}` against `(2 pi)^{-1/2} ||d_xi (Gamma1 - Gamma2)||_{L2}`.
pub fn mukhometov_check(
    t1: &DistanceTable<f64>,
    t2: &DistanceTable<f64>,
    f1: &ConformalField<f64>,
    f2: &ConformalField<f64>,
) -> Result<StabilityReport> {
    let m = meta(t1, t2, f1, f2)?;
    let rhs = dxi_gamma_l2_diff(t1, t2)? / (2.0 * std::f64::consts::PI).sqrt();
    Ok(StabilityReport::new(MUKHOMETOV, n_l2_diff(f1, f2), rhs, m))
}

/// `||Gamma1 - Gamma2||_{L2}` against `(Lambda / lambda) ||n1 - n2||_{L2}`; the ratio estimates the forward constant.
pub fn forward_check(
    t1: &DistanceTable<f64>,
    t2: &DistanceTable<f64>,
    f1: &ConformalField<f64>,
    f2: &ConformalField<f64>,
) -> Result<StabilityReport> {
    let m = meta(t1, t2, f1, f2)?;
    let rhs = m.big_lambda / m.lambda * n_l2_diff(f1, f2);
    Ok(StabilityReport::new(FORWARD, gamma_l2_diff(t1, t2)?, rhs, m))
}

/// Log-level constants: `||c1 - c2|| / ||Z1 - Z2||_{H1}` and `||Z1 - Z2||_{L2} / ||c1 - c2||`.
pub fn z_level_checks(
    t1: &DistanceTable<f64>,
    t2: &DistanceTable<f64>,
    f1: &ConformalField<f64>,
    f2: &ConformalField<f64>,
) -> Result<(StabilityReport, StabilityReport)> {
    let m = meta(t1, t2, f1, f2)?;
    let (z1, z2) = (z_field(t1), z_field(t2));
    let dc = c_l2_diff(f1, f2);
    let inverse = StabilityReport::new(Z_INVERSE, dc, z1.h1_diff(&z2)?, m.clone());
    let forward = StabilityReport::new(Z_FORWARD, z1.l2_diff(&z2)?, dc, m);
    Ok((inverse, forward))
}

/// Appends reports to a CSV ledger, writing the header when the file is new.
pub fn append_ledger(path: &Path, reports: &[StabilityReport]) -> Result<()> {
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if fresh {
        w.write_record(["inequality", "lhs", "rhs", "ratio", "k", "hash1", "hash2"])?;
    }
    for r in reports {
        w.write_record([
            r.inequality.clone(),
            format!("{:e}", r.lhs),
            format!("{:e}", r.rhs),
            format!("{:e}", r.ratio),
            r.meta.k.to_string(),
            r.meta.hash1.clone(),
            r.meta.hash2.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of a ledger file.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct LedgerRow {
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub k: usize,
    pub hash1: String,
    pub hash2: String,
}

pub fn read_ledger(path: &Path) -> Result<Vec<LedgerRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}
