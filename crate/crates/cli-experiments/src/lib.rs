//! Preset experiments for the scattering-control workspace and the pieces
//! behind the `sclab` binary: configuration presets, the simulate, control,
//! marchenko and rays commands, CSV and SVG output, and the acceptance
//! checks.

pub mod checks;
pub mod commands;
pub mod experiment;
pub mod krylov;
pub mod out;
pub mod preset;
pub mod svg;

pub use commands::{control, marchenko, rays, simulate, ControlOptions, Report};
pub use preset::{resolve, Preset, PRESETS};
