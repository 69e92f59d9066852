//! Domain, field basis and the conformal factor.

pub mod basis;
pub mod bessel;
mod domain;
mod field;
pub mod hermite;
pub mod presets;
pub mod quadrature;

pub use basis::{Basis, Derivs2, Mode, Parity, DEFAULT_GRID_CELLS, DEFAULT_MODES};
pub use domain::DomainSpec;
pub use field::{build_field, ConformalField, FieldBounds, FieldDocument, FieldSample};
pub use presets::{preset, PRESET_NAMES};
pub use quadrature::{disk_l2, disk_midpoint};
