use crate::{GridError, Real};

/// A uniform node grid in one or two dimensions.
///
/// Nodes are numbered `i + nx * j`. In 1D the second extent is 1. Both axes
/// share one spacing so that the 5-point stencil is isotropic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    extent: [usize; 2],
    spacing: T,
    origin: [T; 2],
}

impl<T: Real> Grid<T> {
    pub fn new_1d(nodes: usize, spacing: T, origin: T) -> Result<Self, GridError> {
        Self::new(1, [nodes, 1], spacing, [origin, T::zero()])
    }

    pub fn new_2d(nx: usize, ny: usize, spacing: T, origin: [T; 2]) -> Result<Self, GridError> {
        Self::new(2, [nx, ny], spacing, origin)
    }

    pub fn new(dim: usize, extent: [usize; 2], spacing: T, origin: [T; 2]) -> Result<Self, GridError> {
        if dim != 1 && dim != 2 {
            return Err(GridError::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(GridError::InvalidGrid(format!("spacing {spacing} must be positive")));
        }
        if extent[0] < 3 || (dim == 2 && extent[1] < 3) {
            return Err(GridError::InvalidGrid(format!("extent {:?} too small", extent)));
        }
        if dim == 1 && extent[1] != 1 {
            return Err(GridError::InvalidGrid("1D grid must have unit second extent".into()));
        }
        if !origin[0].is_finite() || !origin[1].is_finite() {
            return Err(GridError::InvalidGrid("origin must be finite".into()));
        }
        Ok(Grid { dim, extent, spacing, origin })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn extent(&self) -> [usize; 2] {
        self.extent
    }
    pub fn spacing(&self) -> T {
        self.spacing
    }
    pub fn origin(&self) -> [T; 2] {
        self.origin
    }
    pub fn len(&self) -> usize {
        self.extent[0] * self.extent[1]
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Volume of one dual cell, `h^dim`.
    pub fn cell_volume(&self) -> T {
        self.spacing.powi(self.dim as i32)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.extent[0] * j
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.extent[0], idx / self.extent[0])
    }

    pub fn position(&self, idx: usize) -> [T; 2] {
        let (i, j) = self.coords(idx);
        [
            self.origin[0] + T::of_usize(i) * self.spacing,
            self.origin[1] + T::of_usize(j) * self.spacing,
        ]
    }

    /// Coordinates of the last node along each axis.
    pub fn far_corner(&self) -> [T; 2] {
        [
            self.origin[0] + T::of_usize(self.extent[0] - 1) * self.spacing,
            self.origin[1] + T::of_usize(self.extent[1] - 1) * self.spacing,
        ]
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let (i, j) = self.coords(idx);
        i == 0 || i + 1 == self.extent[0] || (self.dim == 2 && (j == 0 || j + 1 == self.extent[1]))
    }

    /// Stencil neighbours of a node (2 in 1D, 4 in 2D, fewer at the edge).
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> {
        let (i, j) = self.coords(idx);
        let [nx, ny] = self.extent;
        let mut out = [usize::MAX; 4];
        if i > 0 {
            out[0] = idx - 1;
        }
        if i + 1 < nx {
            out[1] = idx + 1;
        }
        if self.dim == 2 {
            if j > 0 {
                out[2] = idx - nx;
            }
            if j + 1 < ny {
                out[3] = idx + nx;
            }
        }
        out.into_iter().filter(|&n| n != usize::MAX)
    }

    /// Edges `(a, b)` with `a < b` between stencil neighbours, each listed once.
    pub fn faces(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let [nx, ny] = self.extent;
        let horizontal = (0..ny).flat_map(move |j| (0..nx - 1).map(move |i| (i + nx * j, i + 1 + nx * j)));
        let vertical = (0..ny.saturating_sub(1))
            .flat_map(move |j| (0..nx).map(move |i| (i + nx * j, i + nx * (j + 1))));
        horizontal.chain(vertical.filter(move |_| self.dim == 2))
    }

    pub fn check_same(&self, other: &Grid<T>) -> Result<(), GridError> {
        if self == other {
            Ok(())
        } else {
            Err(GridError::GridMismatch(format!("{:?} vs {:?}", self, other)))
        }
    }
}
