//! The projections `π̄_t` and `π*_t = I − π̄_t` of Cauchy data onto the parts
//! inside and outside `Θ_t = {d ≥ t}`.
//!
//! `π̄_t h` keeps `h` on `Θ_t`. Outside, the velocity is set to zero and the
//! pressure is replaced by the minimal-energy extension of its values on
//! `Θ_t`, with zero trace on `∂Υ`. Minimal energy is measured in the same
//! quadratic form the propagator conserves (`K_dt`, see `wave-solver`), so
//! the extension solves `(K_dt e)_i = 0` at the free nodes and the
//! decomposition `h = π̄_t h + π*_t h` is orthogonal in the tested inner
//! product. In 1D the extension is affine up to a one-cell layer next to
//! `∂Θ_t` whose size is set by the `dt²` term of `K_dt`.

mod cg;
mod projector;

pub use cg::{conjugate_gradient, CgStats};
pub use projector::{stationary_harmonic_residual, HarmonicExtender, Projector};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProjError {
    #[error("harmonic extension at level {level} stalled: relative residual {residual:e} after {iterations} iterations")]
    NoConvergence { level: f64, iterations: usize, residual: f64 },
    #[error(transparent)]
    Grid(#[from] grid_core::GridError),
}

pub type Projector64 = Projector<f64>;
