//! One-dimensional Marchenko-type focusing in two equivalent forms.
//!
//! The Cauchy form works with data at time zero: a tail `K` supported
//! left of `Θ` is added to incident data `r0` so that the wave at time `T`
//! is harmonic (pressure tail) or at rest (velocity tail) outside `Θ_T`.
//! The boundary form is the Rose iteration on incoming signals recorded at
//! the left edge `x_b` of `Ω`, driven by a reflection response deconvolved
//! from one simulated probe.
//!
//! The two forms are related by [`MarchenkoSetup::incoming_trace`]: a
//! rightward wave left of `x_b` is identified with the pressure it produces
//! at `x_b` as it passes, so a point at distance `τ` (travel time) from
//! `x_b` maps to time `τ`.
//!
//! Time frame: Cauchy data live at `t = 0`, boundary signals on
//! `τ ∈ [0, 2T]` sampled with the solver step. The cut `π*` (keep what lies
//! left of `Θ`) becomes `τ > ε` with `ε = x_b − inf Θ`, and `ν R_{2T}` maps
//! an outgoing signal at time `t` to an incoming one at `2T − t`.

mod boundary;
mod norm;
mod setup;
mod tails;

pub use boundary::{reflection_response, rose_tail_iterate, BoundaryTrace, ReflectionKernel, RoseIteration};
pub use norm::{operator_norm_estimate, rightward_subspace, NormEstimate, Subspace};
pub use setup::MarchenkoSetup;
pub use tails::{
    even_term_identity, focusing_report, pressure_tail_iterate, rose_cauchy_equivalence_check, FocusingReport,
    TailIteration, TailVariant,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarchenkoError {
    #[error("the Marchenko setting is one-dimensional, found dimension {0}")]
    NotOneDimensional(usize),
    #[error("wave speed left of x_b must be constant, found {lo} to {hi}")]
    LeftSpeed { lo: f64, hi: f64 },
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("free and layered solvers use different steps ({free:e} vs {layered:e})")]
    Misaligned { free: f64, layered: f64 },
    #[error("deconvolution refit residual {residual:e} exceeds {allowed:e}")]
    IllConditioned { residual: f64, allowed: f64 },
    #[error("signal length {found} does not match the 2T window of {expected} samples")]
    TraceLength { found: usize, expected: usize },
    #[error("subspace is empty or numerically degenerate")]
    EmptySubspace,
    #[error(transparent)]
    Control(#[from] scattering_control::ControlError),
    #[error(transparent)]
    Wave(#[from] wave_solver::WaveError),
    #[error(transparent)]
    Projection(#[from] projections::ProjError),
    #[error(transparent)]
    Grid(#[from] grid_core::GridError),
}

pub type Marchenko64 = MarchenkoSetup<f64>;
pub type Tails64 = TailIteration<f64>;
