use crate::error::{Result, TomoError};
use crate::num::Real;
use serde::{Deserialize, Serialize};

/// Unit disk with a concentric inner disk carrying the unknown.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DomainSpec<T: Real> {
    pub outer_radius: T,
    pub inner_radius: T,
}

impl<T: Real> Default for DomainSpec<T> {
    fn default() -> Self {
        Self { outer_radius: T::one(), inner_radius: T::lit(0.7) }
    }
}

impl<T: Real> DomainSpec<T> {
    pub fn new(inner_radius: T) -> Result<Self> {
        let d = Self { outer_radius: T::one(), inner_radius };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.outer_radius != T::one() {
            return Err(TomoError::Validation(format!(
                "outer radius must be 1, got {}",
                self.outer_radius
            )));
        }
        if !(self.inner_radius > T::zero() && self.inner_radius < self.outer_radius) {
            return Err(TomoError::Validation(format!(
                "inner radius must lie in (0, 1), got {}",
                self.inner_radius
            )));
        }
        Ok(())
    }

    /// Distance between the outer circle and the closure of the inner disk.
    #[inline]
    pub fn boundary_gap(&self) -> T {
        self.outer_radius - self.inner_radius
    }

    #[inline]
    pub fn diameter(&self) -> T {
        self.outer_radius + self.outer_radius
    }

    pub fn cast<U: Real>(&self) -> DomainSpec<U> {
        DomainSpec { outer_radius: U::lit(self.outer_radius.as_f64()), inner_radius: U::lit(self.inner_radius.as_f64()) }
    }
}
