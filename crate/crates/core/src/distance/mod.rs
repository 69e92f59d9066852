//! Boundary distance function by shooting, its tables and an eikonal oracle.

mod bvp;
pub mod eikonal;
mod table;
mod zfield;

pub use bvp::{
    boundary_distance, boundary_point, chord, gamma_gradient, wrap_angle, BoundaryDistance, FanRay, SolverConfig, SourceFan,
};
pub use eikonal::{eikonal_oracle, EikonalGrid, EikonalSolution};
pub use table::{build_table, build_table_fast, DistanceTable, TableMethod};
pub use zfield::{torus_l2, z_field, ZField};
