use crate::ControlError;
use geometry_depth::{validate_margin, DepthField};
use grid_core::{CauchyData, DomainNest, Medium, Real};
use projections::Projector;
use wave_solver::{inner, Propagator};

/// Everything one control experiment needs: `R`, the depth field and the
/// projections at every level.
#[derive(Clone, Debug)]
pub struct ControlSetup<T> {
    prop: Propagator<T>,
    proj: Projector<T>,
    nest: DomainNest<T>,
}

impl<T: Real> ControlSetup<T> {
    /// Marches depth from `Θ`, checks `d(∂Υ, Θ̄) > 2T`, and builds the propagator.
    pub fn new(medium: &Medium<T>, nest: &DomainNest<T>, cfl: T, cg_tol: T, cg_max_iter: usize) -> Result<Self, ControlError> {
        let depth = validate_margin(nest, medium)?;
        let prop = Propagator::new(medium, cfl, nest.t_ctrl)?;
        let proj = Projector::new(&prop, &depth, cg_tol, cg_max_iter);
        Ok(ControlSetup { prop, proj, nest: nest.clone() })
    }

    /// Same as [`ControlSetup::new`] with an already computed depth field.
    pub fn from_parts(prop: Propagator<T>, depth: &DepthField<T>, nest: &DomainNest<T>, cg_tol: T, cg_max_iter: usize) -> Self {
        let proj = Projector::new(&prop, depth, cg_tol, cg_max_iter);
        ControlSetup { prop, proj, nest: nest.clone() }
    }

    pub fn prop(&self) -> &Propagator<T> {
        &self.prop
    }
    pub fn proj(&self) -> &Projector<T> {
        &self.proj
    }
    pub fn depth(&self) -> &DepthField<T> {
        self.proj.depth()
    }
    pub fn nest(&self) -> &DomainNest<T> {
        &self.nest
    }
    pub fn t_ctrl(&self) -> T {
        self.prop.t_ctrl()
    }

    pub fn reflect(&self, h: &CauchyData<T>) -> Result<CauchyData<T>, ControlError> {
        Ok(self.prop.reflect_map(h)?)
    }
    pub fn propagate(&self, h: &CauchyData<T>, s: T) -> Result<CauchyData<T>, ControlError> {
        Ok(self.prop.propagate(h, s)?)
    }
    pub fn pi_bar(&self, h: &CauchyData<T>) -> Result<CauchyData<T>, ControlError> {
        Ok(self.proj.pi_bar(h)?)
    }
    pub fn pi_star(&self, h: &CauchyData<T>) -> Result<CauchyData<T>, ControlError> {
        Ok(self.proj.pi_star(h)?)
    }
    pub fn inner(&self, f: &CauchyData<T>, g: &CauchyData<T>) -> T {
        inner(&self.prop, f, g)
    }
    /// `E(h) = ⟨h, h⟩`.
    pub fn energy(&self, h: &CauchyData<T>) -> T {
        self.inner(h, h)
    }
    pub fn norm(&self, h: &CauchyData<T>) -> T {
        self.energy(h).max(T::zero()).sqrt()
    }
}
