use crate::{BoundaryTrace, MarchenkoError};
use grid_core::{CauchyData, DomainNest, Medium, Real};
use scattering_control::ControlSetup;
use wave_solver::Propagator;

/// A control setup plus a free solver with the speed found left of `x_b`.
///
/// The free solver runs on the same grid with the same step, so boundary
/// signals from both solvers share one time axis.
#[derive(Clone, Debug)]
pub struct MarchenkoSetup<T> {
    ctrl: ControlSetup<T>,
    free: Propagator<T>,
    boundary: usize,
    eps: T,
    left_speed: T,
}

impl<T: Real> MarchenkoSetup<T> {
    /// `x_b` is the left end of `Ω` and must be a grid node; `ε = x_b − inf Θ`.
    pub fn new(medium: &Medium<T>, nest: &DomainNest<T>, cfl: T, cg_tol: T, cg_max_iter: usize) -> Result<Self, MarchenkoError> {
        let grid = *medium.grid();
        if grid.dim() != 1 {
            return Err(MarchenkoError::NotOneDimensional(grid.dim()));
        }
        let x_b = nest.omega.lo[0];
        let eps = x_b - nest.theta.lo[0];
        if !(eps > T::zero()) {
            return Err(MarchenkoError::Geometry(format!("Ω must start strictly inside Θ (ε = {eps})")));
        }
        let h = grid.spacing();
        let q = (x_b - grid.origin()[0]) / h;
        if (q - q.round()).abs() > T::of(1e-6) {
            return Err(MarchenkoError::Geometry(format!("x_b = {x_b} is not a grid node")));
        }
        let boundary = q.round().to_usize().unwrap_or(0);

        let left = &medium.speed().values()[..boundary];
        let lo = left.iter().copied().fold(T::infinity(), T::min);
        let hi = left.iter().copied().fold(T::neg_infinity(), T::max);
        if left.is_empty() || hi - lo > T::of(1e-12) * hi {
            return Err(MarchenkoError::LeftSpeed { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
        }

        let ctrl = ControlSetup::new(medium, nest, cfl, cg_tol, cg_max_iter)?;
        let free_medium = Medium::constant(grid, lo)?;
        let free = Propagator::new(&free_medium, cfl * lo / medium.max_speed(), ctrl.t_ctrl())?;
        let (a, b) = (free.dt(), ctrl.prop().dt());
        if (a - b).abs() > T::of(1e-12) * b {
            return Err(MarchenkoError::Misaligned { free: a.to_f64_lossy(), layered: b.to_f64_lossy() });
        }
        Ok(MarchenkoSetup { ctrl, free, boundary, eps, left_speed: lo })
    }

    pub fn control(&self) -> &ControlSetup<T> {
        &self.ctrl
    }
    pub fn free(&self) -> &Propagator<T> {
        &self.free
    }
    pub fn boundary_node(&self) -> usize {
        self.boundary
    }
    pub fn x_b(&self) -> T {
        self.ctrl.prop().grid().position(self.boundary)[0]
    }
    pub fn eps(&self) -> T {
        self.eps
    }
    pub fn left_speed(&self) -> T {
        self.left_speed
    }
    pub fn dt(&self) -> T {
        self.ctrl.prop().dt()
    }
    /// Number of steps in `2T`; boundary signals have one more sample.
    pub fn window_steps(&self) -> usize {
        2 * self.ctrl.prop().steps_per_t()
    }

    /// Pressure at `x_b` over `[0, 2T]` when `h` evolves in the free medium.
    ///
    /// For data left of `x_b` only the rightward part reaches `x_b`, so this
    /// is the incoming signal associated with `h`.
    pub fn incoming_trace(&self, h: &CauchyData<T>) -> Result<BoundaryTrace, MarchenkoError> {
        self.free.grid().check_same(h.grid())?;
        Ok(record(&self.free, h, self.boundary, self.window_steps()))
    }
}

/// Pressure and velocity at node `at` after each of `steps` steps.
pub(crate) fn record<T: Real>(prop: &Propagator<T>, h: &CauchyData<T>, at: usize, steps: usize) -> BoundaryTrace {
    let mut u = Vec::with_capacity(steps + 1);
    let mut ut = Vec::with_capacity(steps + 1);
    prop.run(h, steps as i64, |_, x, v| {
        u.push(x[at].to_f64_lossy());
        ut.push(v[at].to_f64_lossy());
    });
    BoundaryTrace { t0: 0.0, dt: prop.dt().to_f64_lossy(), u, ut }
}
