use super::basis::{Basis, Derivs2};
use super::domain::DomainSpec;
use super::hermite::{HermiteGrid, Local};
use crate::error::{Result, TomoError};
use crate::num::Real;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::Arc;

/// `n`, `grad n` and `grad log n = grad c` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample<T> {
    pub n: T,
    pub grad_n: Vec2<T>,
    pub grad_log_n: Vec2<T>,
}

/// Extremes of `c` over the cache grid and the derived conformal bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FieldBounds<T: Real> {
    pub c_min: T,
    pub c_max: T,
    /// `exp(-max|c|)`
    pub lambda: T,
    /// `exp(max|c|)`
    pub big_lambda: T,
}

/// Serialized form of a field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldDocument {
    pub domain: DomainSpec<f64>,
    pub coefficients: Vec<f64>,
}

/// Log-conformal parameter `c`, supported in the inner disk, with `n = exp(c)`.
///
/// Immutable after construction; evaluation goes through a bicubic Hermite cache
/// of the analytic expansion.
#[derive(Clone, Debug)]
pub struct ConformalField<T: Real> {
    basis: Arc<Basis<T>>,
    coefficients: Vec<T>,
    cache: HermiteGrid<T>,
    support_sq: T,
    bounds: FieldBounds<T>,
    c3_bound: T,
    hash: String,
}

impl<T: Real> ConformalField<T> {
    pub fn new(basis: Arc<Basis<T>>, coefficients: Vec<T>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(TomoError::Validation(format!(
                "expected {} coefficients, got {}",
                basis.len(),
                coefficients.len()
            )));
        }
        if let Some(k) = coefficients.iter().position(|a| !a.is_finite()) {
            return Err(TomoError::Validation(format!("coefficient {k} is not finite")));
        }
        let cache = basis.hermite(&coefficients);
        let r0 = basis.domain().inner_radius;
        let flat = coefficients.iter().all(|a| *a == T::zero());
        let support_sq = if flat { T::zero() } else { r0 * r0 };
        let (c_min, c_max) = cache
            .data
            .iter()
            .fold((T::zero(), T::zero()), |(lo, hi), d| (lo.min(d[0]), hi.max(d[0])));
        let m = c_max.max(-c_min);
        let bounds = FieldBounds { c_min, c_max, lambda: (-m).exp(), big_lambda: m.exp() };
        let c3_bound = c3_from_nodes(&cache);
        let hash = field_hash(basis.domain(), &coefficients);
        Ok(Self { basis, coefficients, cache, support_sq, bounds, c3_bound, hash })
    }

    pub fn zero(basis: Arc<Basis<T>>) -> Self {
        let n = basis.len();
        Self::new(basis, vec![T::zero(); n]).expect("zero field is valid")
    }

    /// Cached `c`, `grad c`, `lap c` without the domain check; zero outside the support.
    #[inline]
    pub fn local(&self, x: Vec2<T>) -> Local<T> {
        if x.norm_sq() >= self.support_sq {
            return Local::default();
        }
        self.cache.eval(x.x, x.y)
    }

    #[inline]
    pub fn n_at(&self, x: Vec2<T>) -> T {
        self.local(x).c.exp()
    }

    /// `n`, `grad n` and `grad c` at a point of the closed disk.
    pub fn eval_field(&self, x: Vec2<T>) -> Result<FieldSample<T>> {
        let outer = self.domain().outer_radius;
        if !x.is_finite() || x.norm() > outer * (T::one() + T::lit(1e-12)) {
            return Err(TomoError::Domain(format!("point ({}, {}) outside the closed disk", x.x, x.y)));
        }
        let l = self.local(x);
        let n = l.c.exp();
        Ok(FieldSample { n, grad_n: l.grad * n, grad_log_n: l.grad })
    }

    /// Analytic `c` and derivatives, bypassing the cache.
    pub fn eval_analytic(&self, x: Vec2<T>) -> Derivs2<T> {
        self.basis.eval_expansion(&self.coefficients, x)
    }

    /// Gaussian curvature `-exp(-2c) lap c` of the cached field.
    #[inline]
    pub fn curvature(&self, x: Vec2<T>) -> T {
        let l = self.local(x);
        -(-(l.c + l.c)).exp() * l.lap
    }

    /// Largest `|K|` over a grid `refine` times finer than the cache grid.
    pub fn curvature_sup(&self, refine: usize) -> T {
        if self.is_flat() {
            return T::zero();
        }
        let g = &self.cache;
        let steps = (g.n - 1) * refine.max(1);
        let dh = g.h / T::from_count(refine.max(1));
        let mut sup = T::zero();
        for j in 0..=steps {
            for i in 0..=steps {
                let x = Vec2::new(g.origin + dh * T::from_count(i), g.origin + dh * T::from_count(j));
                sup = sup.max(self.curvature(x).abs());
            }
        }
        sup
    }

    pub fn is_flat(&self) -> bool {
        self.support_sq == T::zero()
    }

    /// Radius beyond which `c` vanishes identically (zero for the flat field).
    pub fn support_radius(&self) -> T {
        self.support_sq.sqrt()
    }

    pub fn bounds(&self) -> FieldBounds<T> {
        self.bounds
    }

    pub fn lambda(&self) -> T {
        self.bounds.lambda
    }

    pub fn big_lambda(&self) -> T {
        self.bounds.big_lambda
    }

    /// `sum over |a| <= 3` of the grid sup of `|d^a c|`, by finite differences.
    pub fn c3_bound(&self) -> T {
        self.c3_bound
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn basis(&self) -> &Arc<Basis<T>> {
        &self.basis
    }

    pub fn domain(&self) -> &DomainSpec<T> {
        self.basis.domain()
    }

    /// SHA-256 of the domain and coefficients, hex encoded.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn with_coefficients(&self, coefficients: Vec<T>) -> Result<Self> {
        Self::new(self.basis.clone(), coefficients)
    }

    pub fn scaled(&self, s: T) -> Self {
        self.with_coefficients(self.coefficients.iter().map(|a| *a * s).collect())
            .expect("scaling keeps coefficients finite")
    }

    pub fn document(&self) -> FieldDocument {
        FieldDocument {
            domain: self.domain().cast(),
            coefficients: self.coefficients.iter().map(|a| a.as_f64()).collect(),
        }
    }

    pub fn from_document(doc: &FieldDocument, basis: Arc<Basis<T>>) -> Result<Self> {
        let d: DomainSpec<T> = doc.domain.cast();
        if &d != basis.domain() {
            return Err(TomoError::Validation("field document domain differs from the basis domain".into()));
        }
        Self::new(basis, doc.coefficients.iter().map(|a| T::lit(*a)).collect())
    }
}

/// Builds a field together with a fresh basis sized to the coefficient vector.
pub fn build_field<T: Real>(coefficients: Vec<T>, domain: DomainSpec<T>) -> Result<ConformalField<T>> {
    let basis = Arc::new(Basis::new(domain, coefficients.len())?);
    ConformalField::new(basis, coefficients)
}

fn field_hash<T: Real>(domain: &DomainSpec<T>, coefficients: &[T]) -> String {
    let mut h = Sha256::new();
    h.update(domain.outer_radius.as_f64().to_le_bytes());
    h.update(domain.inner_radius.as_f64().to_le_bytes());
    for a in coefficients {
        h.update(a.as_f64().to_le_bytes());
    }
    format!("{:x}", h.finalize())
}

fn c3_from_nodes<T: Real>(g: &HermiteGrid<T>) -> T {
    // Zero padding of two nodes: c vanishes well inside the grid.
    let n = g.n;
    let w = n + 4;
    let mut p = vec![T::zero(); w * w];
    for j in 0..n {
        for i in 0..n {
            p[(j + 2) * w + i + 2] = g.data[j * n + i][0];
        }
    }
    let h = g.h;
    let two = T::lit(2.0);
    let (i1, i2h, i4h2, ih2, i2h3) = (T::one(), T::one() / (two * h), T::one() / (T::lit(4.0) * h * h), T::one() / (h * h), T::one() / (two * h * h * h));
    let mut sup = [T::zero(); 10];
    for j in 2..n + 2 {
        for i in 2..n + 2 {
            let f = |di: isize, dj: isize| p[((j as isize + dj) as usize) * w + (i as isize + di) as usize];
            let xx = |dj: isize| f(1, dj) - two * f(0, dj) + f(-1, dj);
            let yy = |di: isize| f(di, 1) - two * f(di, 0) + f(di, -1);
            let d = [
                f(0, 0) * i1,
                (f(1, 0) - f(-1, 0)) * i2h,
                (f(0, 1) - f(0, -1)) * i2h,
                xx(0) * ih2,
                (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) * i4h2,
                yy(0) * ih2,
                (f(2, 0) - two * f(1, 0) + two * f(-1, 0) - f(-2, 0)) * i2h3,
                (xx(1) - xx(-1)) * i2h3,
                (yy(1) - yy(-1)) * i2h3,
                (f(0, 2) - two * f(0, 1) + two * f(0, -1) - f(0, -2)) * i2h3,
            ];
            for (s, v) in sup.iter_mut().zip(d) {
                *s = s.max(v.abs());
            }
        }
    }
    sup.iter().copied().sum()
}
