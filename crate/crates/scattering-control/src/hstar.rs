use crate::{ControlError, ControlSetup};
use grid_core::{CauchyData, Real};

/// The three quantities that vanish exactly on the control space `H*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HstarReport<T> {
    /// `‖π̄h‖`: the part inside `Θ`.
    pub inside: T,
    /// `‖π*_{−2T} h‖`: non-harmonic content farther than `2T` from `Θ` at `t = 0`.
    pub far_initial: T,
    /// `‖π*_{−2T} R_{2T} h‖`: the same at `t = 2T`.
    pub far_final: T,
}

impl<T: Real> HstarReport<T> {
    pub fn max(&self) -> T {
        self.inside.max(self.far_initial).max(self.far_final)
    }
}

pub fn hstar_membership_residuals<T: Real>(setup: &ControlSetup<T>, h: &CauchyData<T>) -> Result<HstarReport<T>, ControlError> {
    let two_t = T::of(2.0) * setup.t_ctrl();
    let proj = setup.proj();
    let later = setup.propagate(h, two_t)?;
    Ok(HstarReport {
        inside: setup.norm(&proj.pi_bar(h)?),
        far_initial: setup.norm(&proj.project_outside(h, -two_t)?),
        far_final: setup.norm(&proj.project_outside(&later, -two_t)?),
    })
}

/// `‖(I − π*Rπ*R)h − (I − π*R)(I + π*R)h‖`.
pub fn factorization_residual<T: Real>(setup: &ControlSetup<T>, h: &CauchyData<T>) -> Result<T, ControlError> {
    let a = |x: &CauchyData<T>| -> Result<CauchyData<T>, ControlError> { setup.pi_star(&setup.reflect(x)?) };
    let lhs = h.minus(&a(&a(h)?)?);
    let plus = h.plus(&a(h)?);
    let rhs = plus.minus(&a(&plus)?);
    Ok(setup.norm(&lhs.minus(&rhs)))
}
