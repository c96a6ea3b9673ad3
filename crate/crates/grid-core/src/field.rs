use crate::{Grid, GridError, Real};

/// Real values attached to every node of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        ScalarField { grid, values: vec![T::zero(); grid.len()] }
    }

    pub fn constant(grid: Grid<T>, value: T) -> Self {
        ScalarField { grid, values: vec![value; grid.len()] }
    }

    pub fn from_values(grid: Grid<T>, values: Vec<T>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(ScalarField { grid, values })
    }

    /// Samples `f` at every node position.
    pub fn from_fn(grid: Grid<T>, mut f: impl FnMut([T; 2]) -> T) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Sets every value on ∂Υ to zero.
    pub fn zero_boundary(&mut self) {
        for i in 0..self.grid.len() {
            if self.grid.is_boundary(i) {
                self.values[i] = T::zero();
            }
        }
    }

    pub fn vanishes_on_boundary(&self) -> bool {
        (0..self.grid.len()).all(|i| !self.grid.is_boundary(i) || self.values[i] == T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn convert<U: Real>(&self) -> ScalarField<U> {
        let o = self.grid.origin();
        let grid = Grid::new(
            self.grid.dim(),
            self.grid.extent(),
            U::of(self.grid.spacing().to_f64_lossy()),
            [U::of(o[0].to_f64_lossy()), U::of(o[1].to_f64_lossy())],
        )
        .expect("converted grid stays valid");
        ScalarField { grid, values: self.values.iter().map(|v| U::of(v.to_f64_lossy())).collect() }
    }
}

/// Boolean node set on a grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    extent: [usize; 2],
    bits: Vec<bool>,
}

impl Mask {
    pub fn from_fn<T: Real>(grid: &Grid<T>, f: impl Fn(usize) -> bool) -> Self {
        Mask { extent: grid.extent(), bits: (0..grid.len()).map(f).collect() }
    }

    pub fn full<T: Real>(grid: &Grid<T>) -> Self {
        Self::from_fn(grid, |_| true)
    }

    pub fn empty<T: Real>(grid: &Grid<T>) -> Self {
        Self::from_fn(grid, |_| false)
    }

    pub fn extent(&self) -> [usize; 2] {
        self.extent
    }
    pub fn len(&self) -> usize {
        self.bits.len()
    }
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
    pub fn get(&self, idx: usize) -> bool {
        self.bits[idx]
    }
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }
    pub fn complement(&self) -> Mask {
        Mask { extent: self.extent, bits: self.bits.iter().map(|b| !b).collect() }
    }
    pub fn and(&self, other: &Mask) -> Mask {
        assert_eq!(self.extent, other.extent, "mask extents differ");
        Mask { extent: self.extent, bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect() }
    }
    pub fn or(&self, other: &Mask) -> Mask {
        assert_eq!(self.extent, other.extent, "mask extents differ");
        Mask { extent: self.extent, bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect() }
    }
    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.extent == other.extent && self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }
}

/// Cauchy data `(u0, u1)`: pressure and its time derivative at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyData<T> {
    pub u0: ScalarField<T>,
    pub u1: ScalarField<T>,
}

impl<T: Real> CauchyData<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        CauchyData { u0: ScalarField::zeros(grid), u1: ScalarField::zeros(grid) }
    }

    /// Builds Cauchy data, rejecting grid mismatches and nonzero pressure on ∂Υ.
    pub fn new(u0: ScalarField<T>, u1: ScalarField<T>) -> Result<Self, GridError> {
        u0.grid().check_same(u1.grid())?;
        if !u0.vanishes_on_boundary() {
            return Err(GridError::InvalidGrid("pressure must vanish on the outer boundary".into()));
        }
        Ok(CauchyData { u0, u1 })
    }

    /// Builds Cauchy data after forcing the Dirichlet condition on both components.
    pub fn with_dirichlet(mut u0: ScalarField<T>, mut u1: ScalarField<T>) -> Result<Self, GridError> {
        u0.grid().check_same(u1.grid())?;
        u0.zero_boundary();
        u1.zero_boundary();
        Ok(CauchyData { u0, u1 })
    }

    pub fn grid(&self) -> &Grid<T> {
        self.u0.grid()
    }

    pub fn scaled(&self, a: T) -> Self {
        CauchyData { u0: self.u0.map(|v| v * a), u1: self.u1.map(|v| v * a) }
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: T, x: &CauchyData<T>) {
        debug_assert_eq!(self.grid(), x.grid());
        for (y, v) in self.u0.values_mut().iter_mut().zip(x.u0.values()) {
            *y += a * *v;
        }
        for (y, v) in self.u1.values_mut().iter_mut().zip(x.u1.values()) {
            *y += a * *v;
        }
    }

    pub fn plus(&self, x: &CauchyData<T>) -> Self {
        let mut out = self.clone();
        out.axpy(T::one(), x);
        out
    }

    pub fn minus(&self, x: &CauchyData<T>) -> Self {
        let mut out = self.clone();
        out.axpy(-T::one(), x);
        out
    }

    pub fn max_abs(&self) -> T {
        self.u0.max_abs().max(self.u1.max_abs())
    }

    /// Zeroes both components outside `keep`.
    pub fn restricted(&self, keep: &Mask) -> Self {
        let mut out = self.clone();
        for i in 0..keep.len() {
            if !keep.get(i) {
                out.u0.values_mut()[i] = T::zero();
                out.u1.values_mut()[i] = T::zero();
            }
        }
        out
    }
}
