use crate::setup::record;
use crate::{MarchenkoError, MarchenkoSetup, TailVariant};
use grid_core::Real;
use rustfft::{num_complex::Complex, FftPlanner};
use scattering_control::rightward_pulse;

/// Samples of `u` and `∂_t u` at `x_b` on `t0 + n·dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTrace {
    pub t0: f64,
    pub dt: f64,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
}

impl BoundaryTrace {
    /// Builds a trace from pressure samples; `∂_t u` by central differences.
    pub fn from_samples(t0: f64, dt: f64, u: Vec<f64>) -> Self {
        let n = u.len();
        let ut = (0..n)
            .map(|i| match (i, n) {
                (_, 0 | 1) => 0.0,
                (0, _) => (u[1] - u[0]) / dt,
                (i, n) if i + 1 == n => (u[i] - u[i - 1]) / dt,
                (i, _) => (u[i + 1] - u[i - 1]) / (2.0 * dt),
            })
            .collect();
        BoundaryTrace { t0, dt, u, ut }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }
    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dt
    }
    pub fn l2(&self) -> f64 {
        (self.u.iter().map(|v| v * v).sum::<f64>() * self.dt).sqrt()
    }

    /// `‖self − other‖ / ‖other‖` over the common samples, or the absolute
    /// difference when `other` vanishes.
    pub fn relative_difference(&self, other: &BoundaryTrace) -> f64 {
        let n = self.len().min(other.len());
        let diff: f64 = (0..n).map(|i| (self.u[i] - other.u[i]).powi(2)).sum();
        let base: f64 = other.u[..n].iter().map(|v| v * v).sum();
        if base > 0.0 {
            (diff / base).sqrt()
        } else {
            (diff * self.dt).sqrt()
        }
    }

    /// The same signal delayed by `steps` samples (zero-filled).
    pub fn delayed(&self, steps: usize) -> BoundaryTrace {
        let n = self.len();
        let u = (0..n).map(|i| if i >= steps { self.u[i - steps] } else { 0.0 }).collect();
        BoundaryTrace::from_samples(self.t0, self.dt, u)
    }
}

/// Discrete reflection response at `x_b`: the outgoing pressure is
/// `out[n] = Σ_m lags[m] · in[n − m]`.
#[derive(Clone, Debug)]
pub struct ReflectionKernel {
    pub dt: f64,
    pub lags: Vec<f64>,
    /// Incoming probe signal at `x_b`.
    pub probe: Vec<f64>,
    /// Outgoing signal it produced.
    pub outgoing: Vec<f64>,
    /// `‖lags ⊛ probe − outgoing‖ / ‖outgoing‖` over the lag window.
    pub refit_residual: f64,
}

impl ReflectionKernel {
    /// Causal convolution `lags ⊛ s`, truncated to the length of `s`.
    pub fn apply(&self, s: &[f64]) -> Vec<f64> {
        convolve(&self.lags, s, s.len())
    }
}

/// Estimates the reflection response from one simulated probe.
///
/// A rightward pulse of half-width `probe_width` (travel time) is started
/// just left of `x_b`. The outgoing signal is the recorded pressure minus
/// the free-medium recording, and the kernel is the Tikhonov-regularized
/// quotient of spectra with parameter `tikhonov · max |p̂|²`. The fit is
/// rejected when reconvolving the kernel with the probe misses the
/// outgoing signal by more than `max_refit`.
pub fn reflection_response<T: Real>(
    setup: &MarchenkoSetup<T>,
    probe_width: T,
    tikhonov: f64,
    max_refit: f64,
) -> Result<ReflectionKernel, MarchenkoError> {
    let prop = setup.control().prop();
    let center = setup.x_b() - T::of(1.05) * probe_width * setup.left_speed();
    let probe = rightward_pulse(prop, center, probe_width);
    let dt = setup.dt().to_f64_lossy();
    let n_lags = setup.window_steps() + 1;
    let extra = (2.2 * probe_width.to_f64_lossy() / dt).ceil() as usize;
    let steps = setup.window_steps() + extra;
    let total = record(prop, &probe, setup.boundary_node(), steps);
    let incoming = record(setup.free(), &probe, setup.boundary_node(), steps);
    let outgoing: Vec<f64> = total.u.iter().zip(&incoming.u).map(|(a, b)| a - b).collect();

    let len = (2 * (steps + 1)).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut p = padded(&incoming.u, len);
    let mut o = padded(&outgoing, len);
    fwd.process(&mut p);
    fwd.process(&mut o);
    let peak = p.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let reg = tikhonov * peak;
    let mut k: Vec<Complex<f64>> = o.iter().zip(&p).map(|(oz, pz)| oz * pz.conj() / (pz.norm_sqr() + reg)).collect();
    inv.process(&mut k);
    let lags: Vec<f64> = k[..n_lags].iter().map(|z| z.re / len as f64).collect();

    let refit = convolve(&lags, &incoming.u, n_lags);
    let num: f64 = refit.iter().zip(&outgoing).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = outgoing[..n_lags].iter().map(|v| v * v).sum();
    let refit_residual = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    if refit_residual > max_refit {
        return Err(MarchenkoError::IllConditioned { residual: refit_residual, allowed: max_refit });
    }
    Ok(ReflectionKernel { dt, lags, probe: incoming.u, outgoing, refit_residual })
}

fn padded(x: &[f64], len: usize) -> Vec<Complex<f64>> {
    let mut v = vec![Complex::new(0.0, 0.0); len];
    for (a, b) in v.iter_mut().zip(x) {
        a.re = *b;
    }
    v
}

/// First `n` samples of the linear convolution `a ⊛ b`.
fn convolve(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let len = (a.len() + b.len()).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let mut fa = padded(a, len);
    let mut fb = padded(b, len);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    let mut prod: Vec<Complex<f64>> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    planner.plan_fft_inverse(len).process(&mut prod);
    prod[..n].iter().map(|z| z.re / len as f64).collect()
}

/// Rose iterates and their sum.
#[derive(Clone, Debug)]
pub struct RoseIteration {
    /// `K_l = Σ_{j=1}^{l+1} A^j r`, `A = ∓ 1_{τ>ε} ℛ(2T − ·)`.
    pub tail: BoundaryTrace,
    /// Norm of each added term `A^j r`, starting at `j = 1`.
    pub term_norms: Vec<f64>,
}

/// Truncated Neumann series for the boundary tail.
///
/// One step maps an incoming signal `s` to `1_{τ>ε} (ℛ ⊛ s)(2T − τ)`:
/// the outgoing response, reversed in time about `T`, with the part that
/// would land in `Θ` cut off. The pressure variant alternates sign.
pub fn rose_tail_iterate<T: Real>(
    setup: &MarchenkoSetup<T>,
    kernel: &ReflectionKernel,
    incident: &BoundaryTrace,
    l_max: usize,
    variant: TailVariant,
) -> Result<RoseIteration, MarchenkoError> {
    let n = setup.window_steps() + 1;
    if incident.len() != n || kernel.lags.len() != n {
        let found = if incident.len() != n { incident.len() } else { kernel.lags.len() };
        return Err(MarchenkoError::TraceLength { found, expected: n });
    }
    let eps = setup.eps().to_f64_lossy();
    let sign = match variant {
        TailVariant::Pressure => -1.0,
        TailVariant::Velocity => 1.0,
    };
    let step = |s: &[f64]| -> Vec<f64> {
        let out = kernel.apply(s);
        (0..n)
            .map(|i| if i as f64 * incident.dt > eps { sign * out[n - 1 - i] } else { 0.0 })
            .collect()
    };
    let mut term = step(&incident.u);
    let mut tail = vec![0.0; n];
    let mut term_norms = Vec::with_capacity(l_max + 1);
    for l in 0..=l_max {
        for (a, b) in tail.iter_mut().zip(&term) {
            *a += b;
        }
        term_norms.push((term.iter().map(|v| v * v).sum::<f64>() * incident.dt).sqrt());
        if l < l_max {
            term = step(&term);
        }
    }
    Ok(RoseIteration { tail: BoundaryTrace::from_samples(0.0, incident.dt, tail), term_norms })
}
