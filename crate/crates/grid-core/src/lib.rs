//! Shared containers for the scattering-control laboratory.
//!
//! Everything here is plain data: uniform grids in one or two dimensions,
//! scalar fields and Cauchy data living on them, wave-speed models, the
//! nested domains `Ω ⊆ Θ′ ⊆ Θ″ ⊆ Θ ⊆ Υ`, the key–value run configuration
//! and the binary field file format.
//!
//! Numerical containers are generic over a [`Real`] scalar (`f32` or `f64`).
//! The `*64` aliases at the bottom of this file are what the experiments use.

mod config;
mod error;
mod field;
mod grid;
mod io;
mod medium;
mod region;
mod scalar;

pub use config::{load_config, parse_config, BoxSpec, GridSpec, MediumSource, NestSpec, PulseSpec, RunConfig};
pub use error::GridError;
pub use field::{CauchyData, Mask, ScalarField};
pub use grid::Grid;
pub use io::{load_field, read_field, save_field, write_field};
pub use medium::{Layered, Medium};
pub use region::{DomainNest, Region};
pub use scalar::Real;

pub type Grid64 = Grid<f64>;
pub type Field64 = ScalarField<f64>;
pub type Cauchy64 = CauchyData<f64>;
pub type Medium64 = Medium<f64>;
pub type Nest64 = DomainNest<f64>;
pub type Field32 = ScalarField<f32>;
pub type Cauchy32 = CauchyData<f32>;
