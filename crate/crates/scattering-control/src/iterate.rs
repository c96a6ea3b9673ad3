use crate::adt::check_support;
use crate::{AdtResult, ControlError, ControlSetup};
use grid_core::{CauchyData, Real};
use wave_solver::time_reverse;

#[derive(Clone, Debug)]
pub struct IterationOptions<'a, T> {
    pub k_max: usize,
    /// Keep `h_k` for every `snapshot_every`-th `k` (0 keeps none).
    pub snapshot_every: usize,
    /// Reference `h_DT`; enables the interior mismatch column.
    pub oracle: Option<&'a AdtResult<T>>,
    /// Stop as soon as the tail has stabilized.
    pub stop_when_stabilized: bool,
    /// Also record `‖π̄h_k − h0‖` (one extra projection per step).
    pub check_invariants: bool,
}

impl<'a, T> IterationOptions<'a, T> {
    pub fn new(k_max: usize) -> Self {
        IterationOptions { k_max, snapshot_every: 0, oracle: None, stop_when_stabilized: false, check_invariants: true }
    }
}

/// Diagnostics for one partial sum `h_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRow<T> {
    pub k: usize,
    /// `‖h_k − h0‖`.
    pub tail_norm: T,
    /// `‖π̄Rh_k‖`.
    pub inside_norm: T,
    /// `‖R_{−T}π̄R_{2T}h_k − h_DT‖ / ‖h_DT‖` when an oracle is supplied.
    pub interior_mismatch: Option<T>,
    /// `E(h_k) − E(π*Rh_k)`.
    pub recovered_e: T,
    /// The kinetic energy estimate built from `h_k`.
    pub recovered_ke: T,
    /// `‖π̄h_k − h0‖`, when invariants are checked.
    pub pi_bar_violation: Option<T>,
    /// `‖h_{k+1} − h_k‖`.
    pub step_norm: T,
    pub norm_h: T,
    /// `‖π*Rh_k‖`.
    pub norm_pstar_r: T,
    /// `‖π*Rπ*Rh_k‖`.
    pub norm_pstar_r_pstar_r: T,
}

#[derive(Clone, Debug)]
pub struct IterationTrace<T> {
    pub h0: CauchyData<T>,
    pub h0_norm: T,
    pub rows: Vec<IterationRow<T>>,
    pub snapshots: Vec<(usize, CauchyData<T>)>,
    /// `h_k` for the last row.
    pub last: CauchyData<T>,
    /// First `k` at which the tail counts as stabilized.
    pub stabilized_at: Option<usize>,
}

impl<T: Real> IterationTrace<T> {
    /// Whether the tail stabilized within the recorded iterations.
    pub fn converged(&self) -> bool {
        self.stabilized_at.is_some()
    }

    /// Tail `h_K − h0` of the last recorded partial sum.
    pub fn tail(&self) -> CauchyData<T> {
        self.last.minus(&self.h0)
    }
}

/// Relative step size under which an iterate counts as unchanged.
const STABLE_STEP: f64 = 1e-4;
/// Consecutive unchanged steps that declare the tail stabilized.
const STABLE_RUN: usize = 3;
/// A step this small counts as a fixed point at once, without waiting for
/// a run of small steps.
const FIXED_POINT: f64 = 1e-6;

/// Runs `h_{k+1} = h0 + π*Rπ*R h_k` from `h_0 = h0` and records diagnostics.
///
/// Divergence is not an error: it shows up as a growing `tail_norm`.
pub fn scattering_control_iterate<T: Real>(
    setup: &ControlSetup<T>,
    h0: &CauchyData<T>,
    opts: &IterationOptions<'_, T>,
) -> Result<IterationTrace<T>, ControlError> {
    check_support(setup, h0)?;
    let h0_norm = setup.norm(h0);
    let e0 = setup.energy(h0);
    let scale = if h0_norm > T::zero() { h0_norm } else { T::one() };
    let dt_norm = opts.oracle.map(|o| setup.norm(&o.h_dt));
    let mut rows = Vec::new();
    let mut snapshots = Vec::new();
    let mut h = h0.clone();
    let mut stabilized_at = None;
    let mut run = 0;
    for k in 0..=opts.k_max {
        if opts.snapshot_every > 0 && k % opts.snapshot_every == 0 {
            snapshots.push((k, h.clone()));
        }
        let r = setup.reflect(&h)?;
        let pr = setup.pi_bar(&r)?;
        let ps = r.minus(&pr);
        let rps = setup.reflect(&ps)?;
        let psps = setup.pi_star(&rps)?;
        let next = h0.plus(&psps);

        let interior_mismatch = match (opts.oracle, dt_norm) {
            (Some(o), Some(n)) => {
                let back = setup.propagate(&time_reverse(&pr), -setup.t_ctrl())?;
                let diff = setup.norm(&back.minus(&o.h_dt));
                Some(if n > T::zero() { diff / n } else { diff })
            }
            _ => None,
        };
        let pi_bar_violation = if opts.check_invariants {
            Some(setup.norm(&setup.pi_bar(&h)?.minus(h0)))
        } else {
            None
        };
        let e_h = setup.energy(&h);
        let four_ke = e_h + e0 - setup.energy(&psps) + T::of(2.0) * setup.inner(&ps, &h.minus(&rps))
            - T::of(2.0) * setup.inner(h0, &rps.plus(&r));
        let step_norm = setup.norm(&next.minus(&h));
        rows.push(IterationRow {
            k,
            tail_norm: setup.norm(&h.minus(h0)),
            inside_norm: setup.norm(&pr),
            interior_mismatch,
            recovered_e: e_h - setup.energy(&ps),
            recovered_ke: four_ke / T::of(4.0),
            pi_bar_violation,
            step_norm,
            norm_h: e_h.max(T::zero()).sqrt(),
            norm_pstar_r: setup.norm(&ps),
            norm_pstar_r_pstar_r: setup.norm(&psps),
        });

        if stabilized_at.is_none() {
            let rel = (step_norm / scale).to_f64_lossy();
            run = if rel < STABLE_STEP { run + 1 } else { 0 };
            if rel < FIXED_POINT || run >= STABLE_RUN {
                stabilized_at = Some(k);
            }
        }
        if opts.stop_when_stabilized && stabilized_at.is_some() {
            break;
        }
        if k < opts.k_max {
            h = next;
        }
    }
    Ok(IterationTrace { h0: h0.clone(), h0_norm, rows, snapshots, last: h, stabilized_at })
}

/// `R_{−s} π̄_{T−s} R_{T+s} h_K` for the last partial sum; tends to `h_DT`.
pub fn interior_field_recovery<T: Real>(setup: &ControlSetup<T>, trace: &IterationTrace<T>, s: T) -> Result<CauchyData<T>, ControlError> {
    if trace.rows.is_empty() {
        return Err(ControlError::EmptyTrace);
    }
    let t = setup.t_ctrl();
    if s < T::zero() || s > t {
        return Err(ControlError::RecoveryTime { s: s.to_f64_lossy() });
    }
    let forward = setup.propagate(&trace.last, t + s)?;
    let kept = setup.proj().project_inside(&forward, t - s)?;
    setup.propagate(&kept, -s)
}

/// `(F h_K)(t) − (F π*R_{2T} h_K)(t − 2T)`; tends to `(F h_DT)(t − T)`.
pub fn wavefield_recovery_outside<T: Real>(setup: &ControlSetup<T>, trace: &IterationTrace<T>, t: T) -> Result<CauchyData<T>, ControlError> {
    let h = &trace.last;
    let two_t = T::of(2.0) * setup.t_ctrl();
    // π* commutes with ν, so π*R_{2T} h = ν π* R h.
    let control = time_reverse(&setup.pi_star(&setup.reflect(h)?)?);
    Ok(setup.propagate(h, t)?.minus(&setup.propagate(&control, t - two_t)?))
}

/// Per-`k` estimates of `E(h_DT)`.
pub fn recover_energy<T: Real>(trace: &IterationTrace<T>) -> Vec<T> {
    trace.rows.iter().map(|r| r.recovered_e).collect()
}

/// Per-`k` estimates of `KE_{Θ_T}(R_T h0)`.
pub fn recover_kinetic_energy<T: Real>(trace: &IterationTrace<T>) -> Vec<T> {
    trace.rows.iter().map(|r| r.recovered_ke).collect()
}
