use crate::{ControlError, ControlSetup};
use geometry_depth::Side;
use grid_core::{CauchyData, Mask, Real};
use wave_solver::kinetic_energy;

/// The almost direct transmission `h_DT = π̄_T R_T h0` with its energies.
#[derive(Clone, Debug)]
pub struct AdtResult<T> {
    pub h_dt: CauchyData<T>,
    /// `E(h_DT)`, including the harmonic extension outside `Θ_T`.
    pub energy: T,
    /// `KE_{Θ_T}(R_T h0)`; equal to the kinetic energy of `h_DT`.
    pub kinetic_energy: T,
    /// `E_{Θ*_T}(h_DT)`: the energy of the extension alone.
    pub extension_energy: T,
    pub theta_t: Mask,
}

/// Reference computation of `h_DT` by direct simulation through `Θ`.
///
/// Uses the wave speed inside `Θ`; the control iteration never calls it.
pub fn almost_direct_transmission<T: Real>(setup: &ControlSetup<T>, h0: &CauchyData<T>) -> Result<AdtResult<T>, ControlError> {
    check_support(setup, h0)?;
    let t = setup.t_ctrl();
    let moved = setup.propagate(h0, t)?;
    let h_dt = setup.proj().project_inside(&moved, t)?;
    let theta_t = setup.depth().level_mask(t, Side::Inside);
    let outside = theta_t.complement();
    let prop = setup.prop();
    Ok(AdtResult {
        energy: setup.energy(&h_dt),
        kinetic_energy: kinetic_energy(prop, &moved, &theta_t),
        extension_energy: wave_solver::energy(prop, &h_dt, &outside),
        h_dt,
        theta_t,
    })
}

/// Rejects `h0` unless `π̄h0 = h0` up to the projection tolerance.
pub(crate) fn check_support<T: Real>(setup: &ControlSetup<T>, h0: &CauchyData<T>) -> Result<(), ControlError> {
    let n0 = setup.norm(h0);
    if n0 == T::zero() {
        return Ok(());
    }
    let violation = setup.norm(&h0.minus(&setup.pi_bar(h0)?)) / n0;
    let allowed = T::of(1e-6).max(setup.proj().tolerance() * T::of(100.0));
    if violation > allowed {
        return Err(ControlError::Support { violation: violation.to_f64_lossy(), allowed: allowed.to_f64_lossy() });
    }
    Ok(())
}
