//! Travel-time depth `d*_Θ` and the level sets `Θ_t`, `Θ*_t`.
//!
//! Depth is the first-order fast-marching solution of `|∇d| = 1/c` started
//! from `∂Θ`, positive inside `Θ` and negative outside. Nodes within one
//! cell of `∂Θ` are seeded with their exact Euclidean distance times the
//! local slowness; everything else is marched.

mod fmm;

pub use fmm::{compute_depth, depth_from_region, travel_time_from};

use grid_core::{DomainNest, GridError, Mask, Medium, Real, Region, ScalarField};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DepthError {
    #[error("wave speed must be positive, found {0} at node {1}")]
    NonPositiveSpeed(f64, usize),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("travel-time margin {margin} between Θ and the outer boundary does not exceed 2T = {two_t}")]
    Margin { margin: f64, two_t: f64 },
}

/// Which side of a level set a mask selects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `Θ_t`: nodes with depth at least `t`.
    Inside,
    /// `Θ*_t`: nodes with depth below `t`.
    Outside,
}

/// Signed travel-time depth on every node.
#[derive(Clone, Debug)]
pub struct DepthField<T> {
    pub d: ScalarField<T>,
    pub source: Region<T>,
}

impl<T: Real> DepthField<T> {
    pub fn values(&self) -> &[T] {
        self.d.values()
    }

    /// `Θ_t = {d ≥ t}` or its complement; nodes exactly at depth `t` go inside.
    pub fn level_mask(&self, t: T, side: Side) -> Mask {
        let g = self.d.grid();
        let v = self.d.values();
        match side {
            Side::Inside => Mask::from_fn(g, |i| v[i] >= t),
            Side::Outside => Mask::from_fn(g, |i| v[i] < t),
        }
    }

    /// Smallest `|d|` over the nodes of `∂Υ`.
    pub fn boundary_margin(&self) -> T {
        let g = self.d.grid();
        (0..g.len())
            .filter(|&i| g.is_boundary(i))
            .map(|i| self.d.values()[i].abs())
            .fold(T::infinity(), |a, b| a.min(b))
    }
}

pub type Depth64 = DepthField<f64>;

pub fn level_mask<T: Real>(depth: &DepthField<T>, t: T, side: Side) -> Mask {
    depth.level_mask(t, side)
}

/// Checks `d(∂Υ, Θ̄) > 2T` with the marched depth.
pub fn validate_margin<T: Real>(nest: &DomainNest<T>, m: &Medium<T>) -> Result<DepthField<T>, DepthError> {
    let depth = compute_depth(nest, m)?;
    let margin = depth.boundary_margin();
    let two_t = T::of(2.0) * nest.t_ctrl;
    if margin > two_t {
        Ok(depth)
    } else {
        Err(DepthError::Margin { margin: margin.to_f64_lossy(), two_t: two_t.to_f64_lossy() })
    }
}
