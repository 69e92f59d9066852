//! Named fields used by examples, tests and the CLI.

use super::basis::Basis;
use super::field::ConformalField;
use crate::error::{Result, TomoError};
use crate::num::Real;
use std::sync::Arc;

pub const PRESET_NAMES: &[&str] = &["flat", "bump", "bump-weak", "bump-negative", "bump-offset", "two-lobe"];

/// Builds a named preset. Radial bumps put a coefficient on the lowest mode,
/// whose peak value at the origin is 1.
pub fn preset<T: Real>(name: &str, basis: Arc<Basis<T>>) -> Result<ConformalField<T>> {
    let need = |k: usize| {
        if basis.len() < k {
            Err(TomoError::Config(format!("preset {name} needs at least {k} modes")))
        } else {
            Ok(())
        }
    };
    let mut c = vec![T::zero(); basis.len()];
    match name {
        "flat" => {}
        "bump" => c[0] = T::lit(0.2),
        "bump-weak" => c[0] = T::lit(0.1),
        "bump-negative" => c[0] = T::lit(-0.2),
        "bump-offset" => {
            need(3)?;
            c[0] = T::lit(0.12);
            c[1] = T::lit(0.06);
            c[2] = T::lit(-0.04);
        }
        "two-lobe" => {
            need(2)?;
            c[0] = T::lit(0.5);
            c[1] = T::lit(1.0);
            let f = ConformalField::new(basis.clone(), c.clone())?;
            let peak = f.bounds().c_max.max(-f.bounds().c_min);
            let s = T::lit(0.15) / peak;
            c.iter_mut().for_each(|a| *a = *a * s);
        }
        other => {
            return Err(TomoError::Config(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    }
    ConformalField::new(basis, c)
}
