//! Principal-symbol model of scattering control in horizontally layered
//! media.
//!
//! Horizontal slowness is conserved in flat layers, so every computation
//! lives on one [`SlownessModel`]: the medium seen by plane waves of a
//! fixed slowness `p`. Within a slice a covector is a layer, a vertical
//! direction, a depth and a time, and a symbol is a finite map from such
//! covectors to real amplitudes.
//!
//! Amplitudes are generic over [`Scalar`], which covers `f32`, `f64` and
//! exact rationals. The rational instance is used to verify the
//! constructive tail with no rounding at all.

mod construct;
mod escape;
mod model;
mod neumann;
mod scalar;
mod series;
mod symbol;
mod trace;

pub use construct::{constructive_tail, isolation_residual, ConstructiveTail, IsolationCheck, ReturningPiece};
pub use escape::{classify_escapable, Certificate, Classification};
pub use model::{
    rt_coefficients, Covector, Depth, Dir, Event, ExactSlowness, InterfaceScatter, LayerWave, LayeredModel,
    Normalization, RtCoefficients, Slowness64, SlownessModel,
};
pub use neumann::{apply_k, contraction_ratio, mdt_symbol, sigma_star, symbol_neumann_iterate, NeumannOptions, NeumannStep};
pub use scalar::Scalar;
pub use series::{layered_scattering_series, LayeredScatteringMatrix, ScatteringSeries, WaveKey};
pub use symbol::{propagate, reflect, Bichar, PropagateOptions, Propagation, SegmentRecord, SymbolVector};
pub use trace::{cotangent_depth, trace_rays, BrokenRay, RayEnd, RayEvent, RayTrace, Segment};

pub type Model64 = LayeredModel<f64>;
pub type Model32 = LayeredModel<f32>;
pub type ExactModel = LayeredModel<num::BigRational>;
pub type Symbol64 = SymbolVector<f64>;
pub type ExactSymbol = SymbolVector<num::BigRational>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RayError {
    #[error("invalid model: {0}")]
    Model(String),
    #[error("layer {layer} is within the glancing cutoff")]
    Glancing { layer: usize },
    #[error("layer {layer} is evanescent at this slowness")]
    Evanescent { layer: usize },
    #[error("covector at z = {z} lies on an interface")]
    OnInterface { z: f64 },
    #[error("event budget exhausted with {truncated_mass} energy still travelling")]
    Budget { truncated_mass: f64 },
    #[error("recursion budget exhausted before classifying the piece in layer {layer} at t = {time}, z = {z}")]
    Unclassified { layer: usize, time: f64, z: f64 },
    #[error("returning piece in layer {layer} ({dir:?}) at t = {time}, z = {z} is not (+)-escapable")]
    NotEscapable { layer: usize, dir: Dir, time: f64, z: f64 },
    #[error("{what} coefficient vanishes at interface {interface}, t = {time}")]
    NearZero { what: &'static str, interface: usize, time: f64 },
}
