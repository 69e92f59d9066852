use super::table::DistanceTable;
use crate::error::{Result, TomoError};
use crate::num::Real;

/// `Z = log Gamma` on the node torus with its `theta_xi` derivative.
#[derive(Clone, Debug)]
pub struct ZField<T: Real> {
    pub k: usize,
    /// NaN on the diagonal.
    pub z: Vec<T>,
    /// `dGamma/d(theta_xi) / Gamma`, zero on the diagonal.
    pub dz_dxi: Vec<T>,
    pub band: Vec<bool>,
}

/// Log-distance view of a table.
pub fn z_field<T: Real>(table: &DistanceTable<T>) -> ZField<T> {
    let k = table.k;
    let mut dz = vec![T::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                let id = table.idx(i, j);
                dz[id] = table.dgamma_dxi[id] / table.gamma[id];
            }
        }
    }
    ZField { k, z: table.z.clone(), dz_dxi: dz, band: table.band.clone() }
}

/// Trapezoid (equivalently midpoint) weight of one torus cell.
#[inline]
pub(crate) fn cell_area<T: Real>(k: usize) -> T {
    let h = (T::PI() + T::PI()) / T::from_count(k);
    h * h
}

/// L2 norm over the torus of grid values.
pub fn torus_l2<T: Real>(values: &[T], k: usize) -> T {
    (values.iter().map(|v| *v * *v).sum::<T>() * cell_area::<T>(k)).sqrt()
}

impl<T: Real> ZField<T> {
    fn same_k(&self, other: &Self) -> Result<()> {
        if self.k != other.k {
            return Err(TomoError::Validation(format!("table sizes differ: {} vs {}", self.k, other.k)));
        }
        Ok(())
    }

    /// `Z1 - Z2` with the collar band and the diagonal set to zero.
    pub fn diff(&self, other: &Self) -> Result<Vec<T>> {
        self.same_k(other)?;
        Ok((0..self.k * self.k)
            .map(|id| if self.band[id] || self.z[id].is_nan() { T::zero() } else { self.z[id] - other.z[id] })
            .collect())
    }

    fn dxi_diff(&self, other: &Self) -> Result<Vec<T>> {
        self.same_k(other)?;
        Ok((0..self.k * self.k)
            .map(|id| if self.band[id] { T::zero() } else { self.dz_dxi[id] - other.dz_dxi[id] })
            .collect())
    }

    fn transpose(&self, v: &[T]) -> Vec<T> {
        let k = self.k;
        (0..k * k).map(|id| v[(id % k) * k + id / k]).collect()
    }

    /// `||Z1 - Z2||_{L2}` on the torus.
    pub fn l2_diff(&self, other: &Self) -> Result<T> {
        Ok(torus_l2(&self.diff(other)?, self.k))
    }

    /// `||d_xi (Z1 - Z2)||_{L2}`.
    pub fn dxi_l2_diff(&self, other: &Self) -> Result<T> {
        Ok(torus_l2(&self.dxi_diff(other)?, self.k))
    }

    /// `||d_eta (Z1 - Z2)||_{L2}`, by symmetry of `Gamma`.
    pub fn deta_l2_diff(&self, other: &Self) -> Result<T> {
        Ok(torus_l2(&self.transpose(&self.dxi_diff(other)?), self.k))
    }

    /// H1 norm of the difference.
    pub fn h1_diff(&self, other: &Self) -> Result<T> {
        let (a, b, c) = (self.l2_diff(other)?, self.dxi_l2_diff(other)?, self.deta_l2_diff(other)?);
        Ok((a * a + b * b + c * c).sqrt())
    }

    /// H2 seminorm of the difference, second derivatives by periodic central
    /// differences of the analytic first derivatives.
    pub fn h2_seminorm_diff(&self, other: &Self) -> Result<T> {
        let k = self.k;
        let dxi = self.dxi_diff(other)?;
        let deta = self.transpose(&dxi);
        let h2 = (T::PI() + T::PI()) / T::from_count(k) * T::lit(2.0);
        let at = |v: &[T], i: usize, j: usize| v[(i % k) * k + (j % k)];
        let mut sum = T::zero();
        for i in 0..k {
            for j in 0..k {
                let xx = (at(&dxi, i + 1, j) - at(&dxi, i + k - 1, j)) / h2;
                let xy = (at(&dxi, i, j + 1) - at(&dxi, i, j + k - 1)) / h2;
                let yy = (at(&deta, i, j + 1) - at(&deta, i, j + k - 1)) / h2;
                sum += xx * xx + T::lit(2.0) * xy * xy + yy * yy;
            }
        }
        Ok((sum * cell_area::<T>(k)).sqrt())
    }

    /// Range of `Z` over the pairs outside the collar band.
    pub fn off_band_range(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for id in 0..self.k * self.k {
            if !self.band[id] && !self.z[id].is_nan() {
                lo = lo.min(self.z[id]);
                hi = hi.max(self.z[id]);
            }
        }
        (lo, hi)
    }
}
