//! Travel-time tomography for conformal metrics `n^2 |dx|^2` on the unit disk.

pub mod distance;
pub mod error;
pub mod experiments;
pub mod geodesics;
pub mod geometry;
pub mod io;
pub mod mcmc;
pub mod num;
pub mod rng;
pub mod stability;
pub mod statmodel;
pub mod vec2;

pub use error::{Result, TomoError};
pub use num::Real;
pub use vec2::Vec2;

pub type Basis64 = geometry::Basis<f64>;
pub type Basis32 = geometry::Basis<f32>;
pub type Domain64 = geometry::DomainSpec<f64>;
pub type Domain32 = geometry::DomainSpec<f32>;
pub type Field64 = geometry::ConformalField<f64>;
pub type Field32 = geometry::ConformalField<f32>;
pub type Trace64 = geodesics::GeodesicTrace<f64>;
pub type Trace32 = geodesics::GeodesicTrace<f32>;
pub type Certificate64 = geodesics::SimplicityCertificate<f64>;
pub type Certificate32 = geodesics::SimplicityCertificate<f32>;
pub type Table64 = distance::DistanceTable<f64>;
pub type Table32 = distance::DistanceTable<f32>;
pub type ZField64 = distance::ZField<f64>;
pub type ZField32 = distance::ZField<f32>;
