//! Integer-order Bessel functions of the first kind and their zeros.

use crate::num::Real;

/// Fills `out[k] = J_k(z)` for `k = 0..out.len()` by Miller's backward recurrence,
/// normalised with `J_0 + 2 * sum J_{2k} = 1`. Negative `z` uses `J_k(-z) = (-1)^k J_k(z)`.
pub fn bessel_j_into<T: Real>(z: T, out: &mut [T]) {
    if out.is_empty() {
        return;
    }
    let az = z.abs();
    if az == T::zero() {
        out.iter_mut().for_each(|v| *v = T::zero());
        out[0] = T::one();
        return;
    }
    let nmax = out.len() - 1;
    let scale = az.to_f64().unwrap_or(0.0).ceil() as usize;
    let top = nmax.max(scale);
    let mut m = top + 20 + ((40 * top.max(1)) as f64).sqrt().ceil() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let big = T::max_value().sqrt() * T::epsilon();
    let two = T::lit(2.0);
    let mut next = T::zero(); // J_{j+1}
    let mut cur = T::min_positive_value().sqrt(); // J_j, arbitrary start
    let mut sum = T::zero();
    out.iter_mut().for_each(|v| *v = T::zero());
    if m <= nmax {
        out[m] = cur;
    }
    for j in (1..=m).rev() {
        let prev = two * T::from_count(j) / az * cur - next;
        next = cur;
        cur = prev; // now J_{j-1}
        if j % 2 == 0 {
            sum += next; // J_j with j even, j >= 2
        }
        if j - 1 <= nmax {
            out[j - 1] = cur;
        }
        if cur.abs() > big {
            let s = big.recip();
            cur = cur * s;
            next = next * s;
            sum = sum * s;
            for v in out.iter_mut().skip(j - 1) {
                *v = *v * s;
            }
        }
    }
    let norm = cur + two * sum;
    for (k, v) in out.iter_mut().enumerate() {
        *v = *v / norm;
        if z < T::zero() && k % 2 == 1 {
            *v = -*v;
        }
    }
}

/// `J_n(z)`.
pub fn bessel_j<T: Real>(n: usize, z: T) -> T {
    let mut buf = vec![T::zero(); n + 1];
    bessel_j_into(z, &mut buf);
    buf[n]
}

/// The `s`-th positive zero (1-based) of `J_k`, located by a sign scan and refined by bisection.
pub fn bessel_zero(k: usize, s: usize) -> f64 {
    assert!(s >= 1, "zero index is 1-based");
    let f = |z: f64| bessel_j(k, z);
    let dz = 0.05;
    let mut a = if k == 0 { dz } else { k as f64 };
    let mut fa = f(a);
    let mut found = 0;
    loop {
        let b = a + dz;
        let fb = f(b);
        if fa == 0.0 || fa.signum() != fb.signum() {
            found += 1;
            if found == s {
                let (mut lo, mut hi, mut flo) = (a, b, fa);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let fm = f(mid);
                    if fm.signum() == flo.signum() && fm != 0.0 {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
        fa = fb;
    }
}
