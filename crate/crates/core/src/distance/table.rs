use super::bvp::{chord, SolverConfig, SourceFan};
use crate::error::{Result, TomoError};
use crate::geometry::ConformalField;
use crate::num::Real;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How the off-band entries of a table were computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableMethod {
    /// Newton shooting per pair.
    Shooting,
    /// Hermite interpolation along each source fan, averaged over both directions.
    FanHermite,
}

/// `Gamma`, `log Gamma` and `dGamma/d(theta_xi)` at boundary nodes `2 pi k / K`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DistanceTable<T: Real> {
    pub k: usize,
    pub delta: T,
    pub gamma: Vec<T>,
    /// `log gamma`, NaN on the diagonal.
    pub z: Vec<T>,
    pub dgamma_dxi: Vec<T>,
    pub residuals: Vec<T>,
    /// Pairs whose chord is shorter than `delta` (exact Euclidean values).
    pub band: Vec<bool>,
    pub field_hash: String,
    pub method: TableMethod,
}

impl<T: Real> DistanceTable<T> {
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.k + j
    }

    pub fn gamma_at(&self, i: usize, j: usize) -> T {
        self.gamma[self.idx(i, j)]
    }

    pub fn theta(&self, i: usize) -> T {
        (T::PI() + T::PI()) * T::from_count(i) / T::from_count(self.k)
    }

    /// Chord between nodes `i` and `j`.
    pub fn chord(&self, i: usize, j: usize) -> T {
        chord(self.theta(j) - self.theta(i))
    }

    /// Violations of the table invariants for `field` (empty when all hold).
    pub fn check_invariants(&self, field: &ConformalField<T>) -> Vec<String> {
        let mut bad = Vec::new();
        let (lam, big) = (field.lambda(), field.big_lambda());
        let slack = T::lit(1e-9).max(T::tolerance_floor());
        for i in 0..self.k {
            for j in 0..self.k {
                let g = self.gamma_at(i, j);
                let c = self.chord(i, j);
                if (g - self.gamma_at(j, i)).abs() >= T::lit(1e-6) {
                    bad.push(format!("asymmetric at ({i},{j})"));
                }
                if self.band[self.idx(i, j)] && (g - c).abs() >= T::lit(1e-8).max(T::tolerance_floor()) {
                    bad.push(format!("band entry ({i},{j}) differs from the chord"));
                }
                if g < lam * c - slack || g > big * c + slack {
                    bad.push(format!("({i},{j}) outside [lambda, Lambda] * chord"));
                }
                if self.dgamma_dxi[self.idx(i, j)].abs() > T::one() + T::lit(1e-3) {
                    bad.push(format!("|dgamma_dxi| > 1 + 1e-3 at ({i},{j})"));
                }
            }
        }
        bad
    }

    fn empty(field: &ConformalField<T>, k: usize, method: TableMethod) -> Self {
        let delta = field.domain().boundary_gap();
        let mut t = Self {
            k,
            delta,
            gamma: vec![T::zero(); k * k],
            z: vec![T::nan(); k * k],
            dgamma_dxi: vec![T::zero(); k * k],
            residuals: vec![T::zero(); k * k],
            band: vec![false; k * k],
            field_hash: field.hash().to_string(),
            method,
        };
        for i in 0..k {
            for j in 0..k {
                let id = t.idx(i, j);
                t.band[id] = t.chord(i, j) < delta;
            }
        }
        t
    }

    fn finish_z(&mut self) {
        for i in 0..self.k {
            for j in 0..self.k {
                let id = self.idx(i, j);
                self.z[id] = if i == j { T::nan() } else { self.gamma[id].ln() };
            }
        }
    }
}

fn check_k(k: usize) -> Result<()> {
    if k < 32 {
        return Err(TomoError::Validation(format!("table size must be at least 32, got {k}")));
    }
    Ok(())
}

/// Fills a `K x K` table by shooting: one fan per source, one Newton solve per pair `i < j`.
pub fn build_table<T: Real>(field: &ConformalField<T>, k: usize, cfg: &SolverConfig) -> Result<DistanceTable<T>> {
    check_k(k)?;
    cfg.validate()?;
    let mut table = DistanceTable::empty(field, k, TableMethod::Shooting);
    let step = T::lit(cfg.step);
    let rows: Vec<Result<Vec<(usize, super::BoundaryDistance<T>)>>> = (0..k - 1)
        .into_par_iter()
        .map(|i| {
            let theta = table.theta(i);
            let fan = SourceFan::new(field, theta, cfg.fan_rays, step).map_err(|e| TomoError::Solver {
                i,
                j: i,
                reason: e.to_string(),
            })?;
            ((i + 1)..k)
                .map(|j| {
                    fan.solve(table.theta(j), cfg)
                        .map(|s| (j, s))
                        .map_err(|e| TomoError::Solver { i, j, reason: e.to_string() })
                })
                .collect()
        })
        .collect();
    for (i, row) in rows.into_iter().enumerate() {
        for (j, s) in row? {
            let (a, b) = (table.idx(i, j), table.idx(j, i));
            table.gamma[a] = s.gamma;
            table.gamma[b] = s.gamma;
            table.residuals[a] = s.residual;
            table.residuals[b] = s.residual;
            table.dgamma_dxi[a] = s.d_xi;
            table.dgamma_dxi[b] = s.d_eta;
        }
    }
    table.finish_z();
    Ok(table)
}

/// Reduced-cost table: `rays` per source fan, off-band entries by Hermite
/// interpolation in the exit angle, averaged over the two directions of each pair.
/// Targets outside a fan's span fall back to Newton shooting.
pub fn build_table_fast<T: Real>(field: &ConformalField<T>, k: usize, rays: usize, step: T) -> Result<DistanceTable<T>> {
    check_k(k)?;
    let mut table = DistanceTable::empty(field, k, TableMethod::FanHermite);
    let cfg = SolverConfig { step: step.as_f64(), fan_rays: rays, ..SolverConfig::default() };
    cfg.validate()?;
    let rows: Vec<Result<Vec<(T, T, T)>>> = (0..k)
        .into_par_iter()
        .map(|i| {
            let fan = SourceFan::new(field, table.theta(i), rays, step).map_err(|e| TomoError::Solver {
                i,
                j: i,
                reason: e.to_string(),
            })?;
            (0..k)
                .map(|j| {
                    if i == j || table.band[table.idx(i, j)] {
                        let s = fan.solve(table.theta(j), &cfg).map_err(|e| TomoError::Solver { i, j, reason: e.to_string() })?;
                        return Ok((s.gamma, s.d_xi, s.d_eta));
                    }
                    match fan.interpolate(table.theta(j)) {
                        Some(v) => Ok(v),
                        None => fan
                            .solve(table.theta(j), &cfg)
                            .map(|s| (s.gamma, s.d_xi, s.d_eta))
                            .map_err(|e| TomoError::Solver { i, j, reason: e.to_string() }),
                    }
                })
                .collect()
        })
        .collect();
    let rows: Vec<Vec<(T, T, T)>> = rows.into_iter().collect::<Result<_>>()?;
    let half = T::lit(0.5);
    for i in 0..k {
        for j in 0..k {
            let id = table.idx(i, j);
            let (g_ij, dxi_ij, _) = rows[i][j];
            let (g_ji, _, deta_ji) = rows[j][i];
            table.gamma[id] = (g_ij + g_ji) * half;
            table.dgamma_dxi[id] = (dxi_ij + deta_ji) * half;
        }
    }
    table.finish_z();
    Ok(table)
}
