//! Scattering control: the Neumann series `h_k = Σ_{i≤k} (π*Rπ*R)^i h0`,
//! recovery of the almost direct transmission `h_DT = π̄_T R_T h0` from its
//! partial sums, energy and kinetic-energy recovery, the `H*` membership
//! residuals of a control, and a dense check of the minimal-norm behaviour
//! of even Neumann series.
//!
//! The almost direct transmission computed by [`almost_direct_transmission`]
//! simulates inside `Θ` and therefore uses the wave speed there. It exists
//! only as a reference for the iteration, which itself applies `R` and the
//! projections and never reads `h_DT`.

mod adt;
mod hstar;
mod iterate;
mod minimal_norm;
mod pulse;
mod setup;

pub use adt::{almost_direct_transmission, AdtResult};
pub use hstar::{factorization_residual, hstar_membership_residuals, HstarReport};
pub use iterate::{
    interior_field_recovery, recover_energy, recover_kinetic_energy, scattering_control_iterate,
    wavefield_recovery_outside, IterationOptions, IterationRow, IterationTrace,
};
pub use minimal_norm::{minimal_norm_neumann_check, NeumannComparison};
pub use pulse::{collimated_packet, rightward_pulse};
pub use setup::ControlSetup;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("initial data leave Θ: ‖π̄h0 − h0‖ = {violation:e} exceeds {allowed:e}")]
    Support { violation: f64, allowed: f64 },
    #[error("recovery time s = {s} lies outside [0, T]")]
    RecoveryTime { s: f64 },
    #[error("iteration trace is empty")]
    EmptyTrace,
    #[error("matrix is not a symmetric contraction (spectral radius {radius}, asymmetry {asymmetry:e})")]
    NotContraction { radius: f64, asymmetry: f64 },
    #[error(transparent)]
    Wave(#[from] wave_solver::WaveError),
    #[error(transparent)]
    Projection(#[from] projections::ProjError),
    #[error(transparent)]
    Depth(#[from] geometry_depth::DepthError),
    #[error(transparent)]
    Grid(#[from] grid_core::GridError),
}

pub type Setup64 = ControlSetup<f64>;
pub type Trace64 = IterationTrace<f64>;
pub type Adt64 = AdtResult<f64>;
