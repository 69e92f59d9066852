use crate::distance::{chord, DistanceTable};
use std::f64::consts::PI;

/// Periodic bicubic interpolation of `Z = log Gamma` from a table.
///
/// Interpolates the smooth excess `Gamma - chord` (zero near the diagonal) and
/// adds the exact chord back, so near-diagonal pairs stay exact.
#[derive(Clone, Debug)]
pub struct ZInterpolator {
    k: usize,
    excess: Vec<f64>,
}

#[inline]
fn catmull_rom(p: [f64; 4], t: f64) -> f64 {
    let a = -p[0] + 3.0 * p[1] - 3.0 * p[2] + p[3];
    let b = 2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3];
    let c = -p[0] + p[2];
    0.5 * (((a * t + b) * t + c) * t + 2.0 * p[1])
}

impl ZInterpolator {
    pub fn new(table: &DistanceTable<f64>) -> Self {
        let k = table.k;
        let mut excess = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                if !table.band[table.idx(i, j)] {
                    excess[i * k + j] = table.gamma_at(i, j) - table.chord(i, j);
                }
            }
        }
        Self { k, excess }
    }

    /// `Gamma(theta_x, theta_y)`.
    pub fn gamma(&self, theta_x: f64, theta_y: f64) -> f64 {
        let k = self.k;
        let scale = k as f64 / (2.0 * PI);
        let (fx, fy) = ((theta_x * scale).rem_euclid(k as f64), (theta_y * scale).rem_euclid(k as f64));
        let (i, j) = (fx.floor() as usize % k, fy.floor() as usize % k);
        let (t, u) = (fx - fx.floor(), fy - fy.floor());
        let at = |a: usize, b: usize| self.excess[(a % k) * k + (b % k)];
        let mut rows = [0.0; 4];
        for (r, row) in rows.iter_mut().enumerate() {
            let a = i + k + r - 1;
            *row = catmull_rom([at(a, j + k - 1), at(a, j + k), at(a, j + k + 1), at(a, j + k + 2)], u);
        }
        chord(theta_y - theta_x) + catmull_rom(rows, t)
    }

    /// `Z(theta_x, theta_y) = log Gamma`.
    pub fn z(&self, theta_x: f64, theta_y: f64) -> f64 {
        self.gamma(theta_x, theta_y).ln()
    }
}
