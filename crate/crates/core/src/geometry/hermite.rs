//! Bicubic Hermite interpolation on a uniform square grid.

use crate::num::Real;
use crate::vec2::Vec2;

/// Value, gradient and Laplacian of an interpolated scalar.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Local<T> {
    pub c: T,
    pub grad: Vec2<T>,
    pub lap: T,
}

/// Nodal data `[f, f_x, f_y, f_xy]` on an `n x n` grid starting at `(origin, origin)`.
#[derive(Clone, Debug)]
pub struct HermiteGrid<T> {
    pub origin: T,
    pub h: T,
    pub n: usize,
    pub data: Vec<[T; 4]>,
}

#[inline]
fn basis<T: Real>(t: T) -> ([T; 2], [T; 2], [T; 2], [T; 2], [T; 2], [T; 2]) {
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    let six = T::lit(6.0);
    let twelve = T::lit(12.0);
    let t2 = t * t;
    let t3 = t2 * t;
    let a = [T::one() - three * t2 + two * t3, three * t2 - two * t3];
    let ad = [six * (t2 - t), six * (t - t2)];
    let add = [twelve * t - six, six - twelve * t];
    let b = [t - two * t2 + t3, t3 - t2];
    let bd = [T::one() - four * t + three * t2, three * t2 - two * t];
    let bdd = [six * t - four, six * t - two];
    (a, ad, add, b, bd, bdd)
}

impl<T: Real> HermiteGrid<T> {
    pub fn zeros(origin: T, h: T, n: usize) -> Self {
        Self { origin, h, n, data: vec![[T::zero(); 4]; n * n] }
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> &[T; 4] {
        &self.data[j * self.n + i]
    }

    #[inline]
    pub fn coord(&self, i: usize) -> T {
        self.origin + self.h * T::from_count(i)
    }

    #[inline]
    fn cell(&self, x: T) -> (usize, T) {
        let f = (x - self.origin) / self.h;
        let last = self.n - 2;
        let i = f.floor().to_usize().unwrap_or(0).min(last);
        (i, f - T::from_count(i))
    }

    /// Interpolant and its first and pure second derivatives at `(x, y)`.
    /// Points outside the grid are clamped to the edge cells.
    pub fn eval(&self, x: T, y: T) -> Local<T> {
        let (i, t) = self.cell(x);
        let (j, u) = self.cell(y);
        let h = self.h;
        let (ax, axd, axdd, bx, bxd, bxdd) = basis(t);
        let (ay, ayd, aydd, by, byd, bydd) = basis(u);
        // Interpolate along x first: per row, the value slot and the y-slope slot.
        let mut f = T::zero();
        let mut fx = T::zero();
        let mut fy = T::zero();
        let mut fxx = T::zero();
        let mut fyy = T::zero();
        for cy in 0..2 {
            let d0 = self.node(i, j + cy);
            let d1 = self.node(i + 1, j + cy);
            let v = d0[0] * ax[0] + d1[0] * ax[1] + h * (d0[1] * bx[0] + d1[1] * bx[1]);
            let vd = d0[0] * axd[0] + d1[0] * axd[1] + h * (d0[1] * bxd[0] + d1[1] * bxd[1]);
            let vdd = d0[0] * axdd[0] + d1[0] * axdd[1] + h * (d0[1] * bxdd[0] + d1[1] * bxdd[1]);
            let s = h * (d0[2] * ax[0] + d1[2] * ax[1] + h * (d0[3] * bx[0] + d1[3] * bx[1]));
            let sd = h * (d0[2] * axd[0] + d1[2] * axd[1] + h * (d0[3] * bxd[0] + d1[3] * bxd[1]));
            let sdd = h * (d0[2] * axdd[0] + d1[2] * axdd[1] + h * (d0[3] * bxdd[0] + d1[3] * bxdd[1]));
            f += v * ay[cy] + s * by[cy];
            fx += vd * ay[cy] + sd * by[cy];
            fxx += vdd * ay[cy] + sdd * by[cy];
            fy += v * ayd[cy] + s * byd[cy];
            fyy += v * aydd[cy] + s * bydd[cy];
        }
        let ih = h.recip();
        Local { c: f, grad: Vec2::new(fx * ih, fy * ih), lap: (fxx + fyy) * ih * ih }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(x: f64, y: f64, k: &[f64; 6]) -> [f64; 4] {
        // Bicubic-reproducible polynomial with its derivatives.
        let f = k[0] + k[1] * x + k[2] * y * y + k[3] * x * x * x + k[4] * x * y + k[5] * x * x * y * y * y;
        let fx = k[1] + 3.0 * k[3] * x * x + k[4] * y + 2.0 * k[5] * x * y * y * y;
        let fy = 2.0 * k[2] * y + k[4] * x + 3.0 * k[5] * x * x * y * y;
        let fxy = k[4] + 6.0 * k[5] * x * y * y;
        [f, fx, fy, fxy]
    }

    proptest! {
        #[test]
        fn reproduces_bicubic_polynomials(
            k in prop::array::uniform6(-2.0f64..2.0),
            x in -0.99f64..0.99,
            y in -0.99f64..0.99,
        ) {
            let n = 9;
            let mut g = HermiteGrid::zeros(-1.0, 0.25, n);
            for j in 0..n {
                for i in 0..n {
                    g.data[j * n + i] = poly(g.coord(i), g.coord(j), &k);
                }
            }
            let l = g.eval(x, y);
            let exact = poly(x, y, &k);
            prop_assert!((l.c - exact[0]).abs() < 1e-12);
            prop_assert!((l.grad.x - exact[1]).abs() < 1e-11);
            prop_assert!((l.grad.y - exact[2]).abs() < 1e-11);
            let lap = 2.0 * k[2] + 6.0 * k[3] * x + 2.0 * k[5] * y * y * y + 6.0 * k[5] * x * x * y;
            prop_assert!((l.lap - lap).abs() < 1e-9);
        }
    }
}
