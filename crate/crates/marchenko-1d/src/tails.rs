use crate::{BoundaryTrace, MarchenkoError, MarchenkoSetup};
use geometry_depth::Side;
use grid_core::{CauchyData, Real};
use scattering_control::{scattering_control_iterate, IterationOptions};
use wave_solver::{energy, kinetic_energy};

/// Which half of the wave the tail is designed to cancel outside `Θ_T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailVariant {
    /// `K + π*RK = −π*R r0`: the pressure at time `T` is harmonic off `Θ_T`.
    Pressure,
    /// `K − π*RK = −π*R r0`: the velocity at time `T` vanishes off `Θ_T`.
    Velocity,
}

#[derive(Clone, Debug)]
pub struct TailIteration<T> {
    pub variant: TailVariant,
    /// `K_l = Σ_{j=1}^{l+1} (∓π*R)^j r0`.
    pub tail: CauchyData<T>,
    /// `(∓π*R)^j r0` for `j = 0..=l+1`; entry 0 is `r0`.
    pub terms: Vec<CauchyData<T>>,
    pub term_norms: Vec<T>,
}

/// Neumann partial sums for the Cauchy-data tail.
///
/// `r0` must be supported in `Θ`. The returned tail uses `l_max + 1` terms,
/// so `l_max = 0` gives `K_0 = ∓π*R r0`.
pub fn pressure_tail_iterate<T: Real>(
    setup: &MarchenkoSetup<T>,
    r0: &CauchyData<T>,
    l_max: usize,
    variant: TailVariant,
) -> Result<TailIteration<T>, MarchenkoError> {
    let ctrl = setup.control();
    let scale = ctrl.norm(r0);
    let leak = ctrl.norm(&ctrl.pi_star(r0)?);
    let allowed = T::of(1e-6).max(T::of(100.0) * ctrl.proj().tolerance()) * scale;
    if leak > allowed {
        return Err(scattering_control::ControlError::Support {
            violation: (leak / scale).to_f64_lossy(),
            allowed: (allowed / scale).to_f64_lossy(),
        }
        .into());
    }
    let sign = match variant {
        TailVariant::Pressure => -T::one(),
        TailVariant::Velocity => T::one(),
    };
    let mut terms = vec![r0.clone()];
    let mut tail = CauchyData::zeros(*r0.grid());
    for _ in 0..=l_max {
        let last = terms.last().expect("terms start with r0");
        let next = ctrl.pi_star(&ctrl.reflect(last)?)?.scaled(sign);
        tail.axpy(T::one(), &next);
        terms.push(next);
    }
    let term_norms = terms.iter().map(|t| ctrl.norm(t)).collect();
    Ok(TailIteration { variant, tail, terms, term_norms })
}

/// How well `u(T) = R_T(r0 + K)` meets the focusing conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FocusingReport<T> {
    /// `‖π*_T (u(T), 0)‖ / ‖r0‖`: distance of the pressure from harmonic on `Θ*_T`.
    pub harmonic_residual: T,
    /// `KE_{Θ*_T}(u(T))^{1/2} / ‖r0‖`.
    pub velocity_residual: T,
    /// `E_{Θ_T}(u(T) − R_T r0)^{1/2} / E_{Θ_T}(R_T r0)^{1/2}`.
    pub inside_mismatch: T,
}

pub fn focusing_report<T: Real>(
    setup: &MarchenkoSetup<T>,
    r0: &CauchyData<T>,
    tail: &CauchyData<T>,
) -> Result<FocusingReport<T>, MarchenkoError> {
    let ctrl = setup.control();
    let t = ctrl.t_ctrl();
    let scale = ctrl.norm(r0);
    let scale = if scale > T::zero() { scale } else { T::one() };
    let u = ctrl.propagate(&r0.plus(tail), t)?;
    let direct = ctrl.propagate(r0, t)?;
    let pressure_only = CauchyData { u0: u.u0.clone(), u1: u.u1.map(|_| T::zero()) };
    let off = ctrl.proj().project_outside(&pressure_only, t)?;
    let outside = ctrl.depth().level_mask(t, Side::Outside);
    let inside = outside.complement();
    let prop = ctrl.prop();
    let base = energy(prop, &direct, &inside).max(T::zero()).sqrt();
    let diff = energy(prop, &u.minus(&direct), &inside).max(T::zero()).sqrt();
    Ok(FocusingReport {
        harmonic_residual: ctrl.norm(&off) / scale,
        velocity_residual: kinetic_energy(prop, &u, &outside).max(T::zero()).sqrt() / scale,
        inside_mismatch: if base > T::zero() { diff / base } else { diff },
    })
}

/// Compares the even partial sums `Σ_{i≤k} (π*R)^{2i} r0` of a pressure-tail
/// run with the scattering-control iterates `h_k` started at `r0`.
///
/// Returns `‖even_k − h_k‖ / ‖h_k‖` for every `k` the run covers.
pub fn even_term_identity<T: Real>(setup: &MarchenkoSetup<T>, run: &TailIteration<T>) -> Result<Vec<T>, MarchenkoError> {
    let ctrl = setup.control();
    let r0 = &run.terms[0];
    let k_max = (run.terms.len() - 1) / 2;
    let mut opts = IterationOptions::new(k_max);
    opts.snapshot_every = 1;
    opts.check_invariants = false;
    let trace = scattering_control_iterate(ctrl, r0, &opts)?;
    let mut even = CauchyData::zeros(*r0.grid());
    let mut out = Vec::with_capacity(k_max + 1);
    for (k, h) in &trace.snapshots {
        even.axpy(T::one(), &run.terms[2 * k]);
        let n = ctrl.norm(h);
        let d = ctrl.norm(&even.minus(h));
        out.push(if n > T::zero() { d / n } else { d });
    }
    Ok(out)
}

/// `‖J_CB K − K_rose‖ / ‖K_rose‖` with `J_CB` the incoming trace at `x_b`.
///
/// When the Rose tail vanishes the absolute norm of `J_CB K` is returned.
pub fn rose_cauchy_equivalence_check<T: Real>(
    setup: &MarchenkoSetup<T>,
    cauchy_tail: &CauchyData<T>,
    rose_tail: &BoundaryTrace,
) -> Result<f64, MarchenkoError> {
    let mapped = setup.incoming_trace(cauchy_tail)?;
    if mapped.len() != rose_tail.len() {
        return Err(MarchenkoError::TraceLength { found: rose_tail.len(), expected: mapped.len() });
    }
    Ok(mapped.relative_difference(rose_tail))
}
