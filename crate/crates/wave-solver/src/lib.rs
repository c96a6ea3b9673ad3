//! Second-order leapfrog for `∂²_t u = c² Δ u` on a uniform grid.
//!
//! The scheme is velocity Verlet with lumped mass `m_i = h^dim / c_i²` and
//! stiffness `K = h^(dim-2) L` (`L` the 3- or 5-point graph Laplacian over
//! interior nodes, Dirichlet on `∂Υ`). With `A = M⁻¹K` one step reads
//!
//! ```text
//! v ← v − (dt/2) A u;   u ← u + dt v;   v ← v − (dt/2) A u
//! ```
//!
//! and it conserves `vᵀMv + uᵀ K_dt u` exactly, where
//! `K_dt = K − (dt²/4) K M⁻¹ K`. That quadratic form is the discrete energy
//! used everywhere in the workspace: it is positive definite for CFL
//! factors below `1/√dim`, it makes `R = ν R_{2T}` an exact isometric
//! involution, and it is the inner product the projections are orthogonal in.

mod energy;
mod propagator;

pub use energy::{energy, inner, kinetic_energy, norm};
pub use propagator::{diamond_vanishing_check, time_reverse, DiamondReport, Propagator};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WaveError {
    #[error("CFL factor {0} outside (0, 1/sqrt(dim)]")]
    Cfl(f64),
    #[error("duration {duration} is not a whole number of steps of {dt}")]
    Snap { duration: f64, dt: f64 },
    #[error(transparent)]
    Grid(#[from] grid_core::GridError),
}

pub type Prop64 = Propagator<f64>;
pub type Prop32 = Propagator<f32>;
