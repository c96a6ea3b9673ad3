use crate::{conjugate_gradient, CgStats, ProjError};
use geometry_depth::{DepthField, Side};
use grid_core::{CauchyData, Mask, Real, ScalarField};
use wave_solver::Propagator;

/// Minimal-energy extension from `Θ_t` to the rest of `Υ` at one level `t`.
#[derive(Clone, Debug)]
pub struct HarmonicExtender<T> {
    pub level: T,
    /// `Θ_t`, where values are kept.
    pub inside: Mask,
    /// Interior nodes outside `Θ_t`; the extension is solved for here.
    pub free: Mask,
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> HarmonicExtender<T> {
    pub fn new(prop: &Propagator<T>, depth: &DepthField<T>, level: T, tol: T, max_iter: usize) -> Self {
        let inside = depth.level_mask(level, Side::Inside);
        let free = Mask::from_fn(prop.grid(), |i| prop.is_interior(i) && !inside.get(i));
        HarmonicExtender { level, inside, free, tol, max_iter }
    }

    /// Replaces `values` off `Θ_t` by the extension of its values on `Θ_t`.
    ///
    /// The current values on the free nodes serve as the initial guess.
    pub fn extend(&self, prop: &Propagator<T>, values: &mut [T]) -> Result<CgStats, ProjError> {
        let n = values.len();
        let free = self.free.bits();
        let mut fixed: Vec<T> = (0..n).map(|i| if self.inside.get(i) { values[i] } else { T::zero() }).collect();
        let mut rhs = vec![T::zero(); n];
        prop.apply_kdt(&fixed, &mut rhs);
        for i in 0..n {
            rhs[i] = if free[i] { -rhs[i] } else { T::zero() };
        }
        let mut x: Vec<T> = (0..n).map(|i| if free[i] { values[i] } else { T::zero() }).collect();
        let mut tmp = vec![T::zero(); n];
        let stats = conjugate_gradient(
            |p: &[T], out: &mut [T]| {
                tmp.copy_from_slice(p);
                for i in 0..n {
                    if !free[i] {
                        tmp[i] = T::zero();
                    }
                }
                prop.apply_kdt(&tmp, out);
                for i in 0..n {
                    if !free[i] {
                        out[i] = T::zero();
                    }
                }
            },
            &rhs,
            &mut x,
            self.tol,
            self.max_iter,
        );
        if !stats.converged {
            return Err(ProjError::NoConvergence {
                level: self.level.to_f64_lossy(),
                iterations: stats.iterations,
                residual: stats.relative_residual,
            });
        }
        for i in 0..n {
            if free[i] {
                fixed[i] = x[i];
            }
        }
        values.copy_from_slice(&fixed);
        Ok(stats)
    }
}

/// Bundles the propagator (for the energy form) and the depth field.
#[derive(Clone, Debug)]
pub struct Projector<T> {
    prop: Propagator<T>,
    depth: DepthField<T>,
    tol: T,
    max_iter: usize,
}

impl<T: Real> Projector<T> {
    pub fn new(prop: &Propagator<T>, depth: &DepthField<T>, tol: T, max_iter: usize) -> Self {
        Projector { prop: prop.clone(), depth: depth.clone(), tol, max_iter }
    }

    pub fn propagator(&self) -> &Propagator<T> {
        &self.prop
    }
    pub fn depth(&self) -> &DepthField<T> {
        &self.depth
    }
    pub fn tolerance(&self) -> T {
        self.tol
    }

    pub fn extender(&self, t: T) -> HarmonicExtender<T> {
        HarmonicExtender::new(&self.prop, &self.depth, t, self.tol, self.max_iter)
    }

    /// `π̄_t h`.
    pub fn project_inside(&self, h: &CauchyData<T>, t: T) -> Result<CauchyData<T>, ProjError> {
        self.prop.grid().check_same(h.grid())?;
        let ext = self.extender(t);
        let mut u0 = h.u0.values().to_vec();
        ext.extend(&self.prop, &mut u0)?;
        let u1: Vec<T> = h
            .u1
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| if ext.inside.get(i) { v } else { T::zero() })
            .collect();
        let grid = *h.grid();
        let mut out = CauchyData {
            u0: ScalarField::from_values(grid, u0)?,
            u1: ScalarField::from_values(grid, u1)?,
        };
        out.u1.zero_boundary();
        Ok(out)
    }

    /// `π*_t h = h − π̄_t h`.
    pub fn project_outside(&self, h: &CauchyData<T>, t: T) -> Result<CauchyData<T>, ProjError> {
        Ok(h.minus(&self.project_inside(h, t)?))
    }

    /// `π̄ = π̄_0`.
    pub fn pi_bar(&self, h: &CauchyData<T>) -> Result<CauchyData<T>, ProjError> {
        self.project_inside(h, T::zero())
    }

    /// `π* = π*_0`.
    pub fn pi_star(&self, h: &CauchyData<T>) -> Result<CauchyData<T>, ProjError> {
        self.project_outside(h, T::zero())
    }
}

/// `max_W |(K_dt h0)_i| / h^dim + max_W |h1_i|`, over interior nodes of `W`.
///
/// `K_dt h0 / h^dim` is the discrete `−Δ h0` of the energy form, so the
/// first term is zero exactly when `h0` is discretely harmonic on `W`.
pub fn stationary_harmonic_residual<T: Real>(prop: &Propagator<T>, h: &CauchyData<T>, w: &Mask) -> T {
    let g = prop.grid();
    let mut k = vec![T::zero(); g.len()];
    prop.apply_kdt(h.u0.values(), &mut k);
    let vol = g.cell_volume();
    let mut lap = T::zero();
    let mut vel = T::zero();
    for i in w.indices() {
        if prop.is_interior(i) {
            lap = lap.max((k[i] / vol).abs());
        }
        vel = vel.max(h.u1.values()[i].abs());
    }
    lap + vel
}
