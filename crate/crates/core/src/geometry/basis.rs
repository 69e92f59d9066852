//! Cutoff times Fourier-Bessel modes on the inner disk.

use super::bessel::{bessel_j_into, bessel_zero};
use super::domain::DomainSpec;
use super::hermite::HermiteGrid;
use crate::error::{Result, TomoError};
use crate::num::Real;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Default number of modes.
pub const DEFAULT_MODES: usize = 32;
/// Cells per axis of the cache grid over `[-1, 1]^2`.
pub const DEFAULT_GRID_CELLS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Cos,
    Sin,
}

/// One basis function `phi(r) * J_k(a r) * cos(k theta)` (or `sin`), `a = j_{k,s} / r0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub order: usize,
    pub zero_index: usize,
    pub parity: Parity,
    pub bessel_zero: f64,
    /// 1-based rank of the Bessel zero among distinct zeros; cos/sin partners share it.
    pub level: usize,
}

/// Value and derivatives up to second order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Derivs2<T> {
    pub v: T,
    pub dx: T,
    pub dy: T,
    pub dxx: T,
    pub dxy: T,
    pub dyy: T,
}

impl<T: Real> Derivs2<T> {
    pub fn laplacian(&self) -> T {
        self.dxx + self.dyy
    }

    fn axpy(&mut self, a: T, o: &Self) {
        self.v += a * o.v;
        self.dx += a * o.dx;
        self.dy += a * o.dy;
        self.dxx += a * o.dxx;
        self.dxy += a * o.dxy;
        self.dyy += a * o.dyy;
    }
}

fn zeros_below(k: usize, limit: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = 1;
    loop {
        let z = bessel_zero(k, s);
        if z >= limit {
            return out;
        }
        out.push(z);
        s += 1;
    }
}

/// The first `count` modes ordered by Bessel zero (cos before sin).
pub fn mode_table(count: usize) -> Vec<Mode> {
    let mut limit = 2.0 * (count as f64).sqrt() + 6.0;
    loop {
        let mut zs: Vec<(f64, usize, usize)> = Vec::new();
        let mut k = 0;
        loop {
            let found = zeros_below(k, limit);
            if found.is_empty() {
                break;
            }
            zs.extend(found.into_iter().enumerate().map(|(i, z)| (z, k, i + 1)));
            k += 1;
        }
        zs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut modes = Vec::with_capacity(count + 1);
        for (level, &(z, k, s)) in zs.iter().enumerate() {
            let m = |parity| Mode { order: k, zero_index: s, parity, bessel_zero: z, level: level + 1 };
            modes.push(m(Parity::Cos));
            if k > 0 {
                modes.push(m(Parity::Sin));
            }
        }
        if modes.len() >= count {
            modes.truncate(count);
            return modes;
        }
        limit += 5.0;
    }
}

/// Radial cutoff `exp(1 - 1/(1 - r^2/r0^2))` and its derivatives in `s = r^2`.
#[inline]
pub(crate) fn cutoff_s<T: Real>(s: T, r0sq: T) -> (T, T, T) {
    if s >= r0sq {
        return (T::zero(), T::zero(), T::zero());
    }
    let u = T::one() - s / r0sq;
    let psi = (T::one() - u.recip()).exp();
    let d1 = -psi / (r0sq * u * u);
    let d2 = -d1 / (r0sq * u * u) - T::lit(2.0) * psi / (r0sq * r0sq * u * u * u);
    (psi, d1, d2)
}

/// Cutoff with Cartesian derivatives up to second order.
pub fn cutoff<T: Real>(x: Vec2<T>, r0: T) -> Derivs2<T> {
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let (p, d1, d2) = cutoff_s(x.norm_sq(), r0 * r0);
    Derivs2 {
        v: p,
        dx: two * x.x * d1,
        dy: two * x.y * d1,
        dxx: two * d1 + four * x.x * x.x * d2,
        dxy: four * x.x * x.y * d2,
        dyy: two * d1 + four * x.y * x.y * d2,
    }
}

#[derive(Clone, Copy, Default)]
struct Cx<T> {
    re: T,
    im: T,
}

impl<T: Real> Cx<T> {
    fn scale(self, s: T) -> Self {
        Cx { re: self.re * s, im: self.im * s }
    }
    fn add(self, o: Self) -> Self {
        Cx { re: self.re + o.re, im: self.im + o.im }
    }
    fn sub(self, o: Self) -> Self {
        Cx { re: self.re - o.re, im: self.im - o.im }
    }
    fn times_i(self) -> Self {
        Cx { re: -self.im, im: self.re }
    }
    fn part(self, p: Parity) -> T {
        match p {
            Parity::Cos => self.re,
            Parity::Sin => self.im,
        }
    }
}

/// `W_k = J_k(a r) e^{i k theta}` and its derivatives, from `J_0..J_{k+2}` at `a r`.
fn wave_derivs<T: Real>(k: usize, a: T, theta: T, jv: &[T]) -> [Cx<T>; 6] {
    let ki = k as i64;
    let w = |m: i64| -> Cx<T> {
        let jm = if m >= 0 {
            jv[m as usize]
        } else if (-m) % 2 == 0 {
            jv[(-m) as usize]
        } else {
            -jv[(-m) as usize]
        };
        let (s, c) = (T::lit(m as f64) * theta).sin_cos();
        Cx { re: jm * c, im: jm * s }
    };
    let (wm2, wm1, w0, wp1, wp2) = (w(ki - 2), w(ki - 1), w(ki), w(ki + 1), w(ki + 2));
    let half = a * T::lit(0.5);
    let quarter = a * a * T::lit(0.25);
    let two = T::lit(2.0);
    let dx = wm1.sub(wp1).scale(half);
    let dy = wm1.add(wp1).scale(half).times_i();
    let dxx = wm2.sub(w0.scale(two)).add(wp2).scale(quarter);
    let dyy = wm2.add(w0.scale(two)).add(wp2).scale(-quarter);
    let dxy = wm2.sub(wp2).scale(quarter).times_i();
    [w0, dx, dy, dxx, dxy, dyy]
}

/// Fixed basis plus Hermite samples of every mode on the cache grid.
#[derive(Debug)]
pub struct Basis<T: Real> {
    domain: DomainSpec<T>,
    modes: Vec<Mode>,
    wavenumbers: Vec<T>,
    grid_cells: usize,
    /// Support box grid (node layout shared by every field).
    pub(crate) origin: T,
    pub(crate) h: T,
    pub(crate) n: usize,
    /// `samples[m][node] = [c, c_x, c_y, c_xy]` for mode `m`.
    pub(crate) samples: Vec<Vec<[T; 4]>>,
}

impl<T: Real> Basis<T> {
    pub fn new(domain: DomainSpec<T>, num_modes: usize) -> Result<Self> {
        Self::with_grid(domain, num_modes, DEFAULT_GRID_CELLS)
    }

    pub fn with_grid(domain: DomainSpec<T>, num_modes: usize, grid_cells: usize) -> Result<Self> {
        domain.validate()?;
        if num_modes == 0 {
            return Err(TomoError::Validation("basis needs at least one mode".into()));
        }
        if grid_cells < 16 || grid_cells % 2 != 0 {
            return Err(TomoError::Validation(format!("grid cells must be even and >= 16, got {grid_cells}")));
        }
        let modes = mode_table(num_modes);
        let r0 = domain.inner_radius;
        let wavenumbers = modes.iter().map(|m| T::lit(m.bessel_zero) / r0).collect();
        let h = T::lit(2.0) / T::from_count(grid_cells);
        // Nodes of the global grid x_i = -1 + i h that cover the support plus one cell.
        let i0 = ((T::one() - r0) / h).floor().to_usize().unwrap_or(0).saturating_sub(1);
        let n = grid_cells + 1 - 2 * i0;
        let origin = -T::one() + h * T::from_count(i0);
        let mut basis = Self { domain, modes, wavenumbers, grid_cells, origin, h, n, samples: Vec::new() };
        basis.samples = basis.tabulate();
        Ok(basis)
    }

    fn tabulate(&self) -> Vec<Vec<[T; 4]>> {
        let n = self.n;
        let mut out = vec![vec![[T::zero(); 4]; n * n]; self.modes.len()];
        let r0 = self.domain.inner_radius;
        for j in 0..n {
            for i in 0..n {
                let x = Vec2::new(self.origin + self.h * T::from_count(i), self.origin + self.h * T::from_count(j));
                if x.norm() >= r0 {
                    continue;
                }
                let all = self.eval_modes(x);
                for (m, d) in all.iter().enumerate() {
                    out[m][j * n + i] = [d.v, d.dx, d.dy, d.dxy];
                }
            }
        }
        out
    }

    /// Analytic values and derivatives of every mode at `x`.
    pub fn eval_modes(&self, x: Vec2<T>) -> Vec<Derivs2<T>> {
        let r0 = self.domain.inner_radius;
        let r = x.norm();
        let mut out = vec![Derivs2::default(); self.modes.len()];
        if r >= r0 {
            return out;
        }
        let phi = cutoff(x, r0);
        let theta = if r > T::zero() { x.angle() } else { T::zero() };
        let kmax = self.modes.iter().map(|m| m.order).max().unwrap_or(0);
        let mut jv = vec![T::zero(); kmax + 3];
        let mut last_level = 0;
        for (m, mode) in self.modes.iter().enumerate() {
            let a = self.wavenumbers[m];
            if mode.level != last_level {
                bessel_j_into(a * r, &mut jv[..mode.order + 3]);
                last_level = mode.level;
            }
            let w = wave_derivs(mode.order, a, theta, &jv);
            let p = mode.parity;
            let (w0, wx, wy, wxx, wxy, wyy) = (w[0].part(p), w[1].part(p), w[2].part(p), w[3].part(p), w[4].part(p), w[5].part(p));
            let two = T::lit(2.0);
            out[m] = Derivs2 {
                v: phi.v * w0,
                dx: phi.dx * w0 + phi.v * wx,
                dy: phi.dy * w0 + phi.v * wy,
                dxx: phi.dxx * w0 + two * phi.dx * wx + phi.v * wxx,
                dxy: phi.dxy * w0 + phi.dx * wy + phi.dy * wx + phi.v * wxy,
                dyy: phi.dyy * w0 + two * phi.dy * wy + phi.v * wyy,
            };
        }
        out
    }

    /// Analytic evaluation of the expansion with coefficients `coef` at `x`.
    pub fn eval_expansion(&self, coef: &[T], x: Vec2<T>) -> Derivs2<T> {
        let mut acc = Derivs2::default();
        for (a, d) in coef.iter().zip(self.eval_modes(x)) {
            acc.axpy(*a, &d);
        }
        acc
    }

    /// Hermite data of the expansion on the cache grid.
    pub(crate) fn hermite(&self, coef: &[T]) -> HermiteGrid<T> {
        let mut g = HermiteGrid::zeros(self.origin, self.h, self.n);
        for (a, s) in coef.iter().zip(&self.samples) {
            if *a == T::zero() {
                continue;
            }
            for (node, v) in g.data.iter_mut().zip(s) {
                for q in 0..4 {
                    node[q] += *a * v[q];
                }
            }
        }
        g
    }

    pub fn domain(&self) -> &DomainSpec<T> {
        &self.domain
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn wavenumber(&self, m: usize) -> T {
        self.wavenumbers[m]
    }

    pub fn grid_cells(&self) -> usize {
        self.grid_cells
    }

    /// Spacing of the cache grid.
    pub fn grid_spacing(&self) -> T {
        self.h
    }
}
