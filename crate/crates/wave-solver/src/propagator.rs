use crate::WaveError;
use geometry_depth::DepthField;
use grid_core::{CauchyData, Grid, Medium, Real};

/// Time stepper bound to one medium, one step size and one control time.
#[derive(Clone, Debug)]
pub struct Propagator<T> {
    grid: Grid<T>,
    mass: Vec<T>,
    inv_mass: Vec<T>,
    interior: Vec<bool>,
    stiffness_scale: T,
    dt: T,
    steps_per_t: usize,
    t_ctrl: T,
}

impl<T: Real> Propagator<T> {
    /// Chooses the largest step `dt ≤ cfl·h/max(c)` such that `T` is an even
    /// number of steps, so `T/2`, `T` and `2T` all land on the step grid.
    pub fn new(medium: &Medium<T>, cfl: T, t_ctrl: T) -> Result<Self, WaveError> {
        let grid = *medium.grid();
        let limit = T::one() / T::of_usize(grid.dim()).sqrt();
        if !(cfl > T::zero()) || cfl > limit {
            return Err(WaveError::Cfl(cfl.to_f64_lossy()));
        }
        let h = grid.spacing();
        let dt_max = cfl * h / medium.max_speed();
        let mut steps = (t_ctrl / dt_max).ceil().to_usize().unwrap_or(1).max(1);
        if steps % 2 == 1 {
            steps += 1;
        }
        let dt = t_ctrl / T::of_usize(steps);
        let vol = grid.cell_volume();
        let mass: Vec<T> = medium.speed().values().iter().map(|&c| vol / (c * c)).collect();
        let inv_mass = mass.iter().map(|&m| T::one() / m).collect();
        let interior = (0..grid.len()).map(|i| !grid.is_boundary(i)).collect();
        Ok(Propagator {
            grid,
            mass,
            inv_mass,
            interior,
            stiffness_scale: h.powi(grid.dim() as i32 - 2),
            dt,
            steps_per_t: steps,
            t_ctrl,
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }
    pub fn dt(&self) -> T {
        self.dt
    }
    pub fn t_ctrl(&self) -> T {
        self.t_ctrl
    }
    pub fn steps_per_t(&self) -> usize {
        self.steps_per_t
    }
    pub fn mass(&self) -> &[T] {
        &self.mass
    }
    pub fn inv_mass(&self) -> &[T] {
        &self.inv_mass
    }
    pub fn is_interior(&self, i: usize) -> bool {
        self.interior[i]
    }

    /// One-line description of the step snapping, for run logs.
    pub fn snap_report(&self) -> String {
        format!(
            "dt = {:.6e}, T = {} = {} steps (CFL number {:.4})",
            self.dt.to_f64_lossy(),
            self.t_ctrl,
            self.steps_per_t,
            (self.dt / self.grid.spacing()).to_f64_lossy()
        )
    }

    /// Signed number of steps for a duration, or an error if it is off the step grid.
    pub fn steps(&self, duration: T) -> Result<i64, WaveError> {
        let q = duration / self.dt;
        let n = q.round();
        if (q - n).abs() > T::of(1e-6) * T::one().max(n.abs()) {
            return Err(WaveError::Snap { duration: duration.to_f64_lossy(), dt: self.dt.to_f64_lossy() });
        }
        Ok(n.to_i64().unwrap_or(0))
    }

    /// `out = K u`; rows on `∂Υ` are zero.
    pub fn apply_stiffness(&self, u: &[T], out: &mut [T]) {
        let w = self.stiffness_scale;
        let [nx, ny] = self.grid.extent();
        if self.grid.dim() == 1 {
            out[0] = T::zero();
            out[nx - 1] = T::zero();
            for i in 1..nx - 1 {
                out[i] = w * (u[i] + u[i] - u[i - 1] - u[i + 1]);
            }
        } else {
            let four = T::of(4.0);
            for j in 0..ny {
                for i in 0..nx {
                    let k = i + nx * j;
                    out[k] = if i == 0 || j == 0 || i + 1 == nx || j + 1 == ny {
                        T::zero()
                    } else {
                        w * (four * u[k] - u[k - 1] - u[k + 1] - u[k - nx] - u[k + nx])
                    };
                }
            }
        }
    }

    /// `out = K_dt u = K u − (dt²/4) K M⁻¹ K u`.
    pub fn apply_kdt(&self, u: &[T], out: &mut [T]) {
        let mut ku = vec![T::zero(); u.len()];
        self.apply_stiffness(u, &mut ku);
        let scaled: Vec<T> = ku.iter().zip(&self.inv_mass).map(|(a, b)| *a * *b).collect();
        self.apply_stiffness(&scaled, out);
        let q = self.dt * self.dt / T::of(4.0);
        for (o, k) in out.iter_mut().zip(&ku) {
            *o = *k - q * *o;
        }
    }

    /// Advances Cauchy data by `steps` (negative steps run backwards).
    ///
    /// `observe` sees `(step index, u, v)` after every step, starting with
    /// step 0. Velocity on `∂Υ` is set to zero first, since boundary nodes
    /// carry no degree of freedom.
    pub fn run(&self, h: &CauchyData<T>, steps: i64, mut observe: impl FnMut(i64, &[T], &[T])) -> CauchyData<T> {
        let mut out = h.clone();
        out.u1.zero_boundary();
        let n = self.grid.len();
        let dt = if steps >= 0 { self.dt } else { -self.dt };
        let half = dt * T::of(0.5);
        let mut acc = vec![T::zero(); n];
        {
            let u = out.u0.values().to_vec();
            self.apply_stiffness(&u, &mut acc);
        }
        observe(0, out.u0.values(), out.u1.values());
        let mut ku = vec![T::zero(); n];
        for k in 1..=steps.unsigned_abs() {
            {
                let (u, v) = (out.u0.values_mut(), out.u1.values_mut());
                for i in 0..n {
                    v[i] -= half * acc[i] * self.inv_mass[i];
                    u[i] += dt * v[i];
                }
            }
            self.apply_stiffness(out.u0.values(), &mut ku);
            std::mem::swap(&mut acc, &mut ku);
            {
                let v = out.u1.values_mut();
                for i in 0..n {
                    v[i] -= half * acc[i] * self.inv_mass[i];
                }
            }
            observe(k as i64 * steps.signum(), out.u0.values(), out.u1.values());
        }
        out
    }

    /// `R_s h`.
    pub fn propagate(&self, h: &CauchyData<T>, s: T) -> Result<CauchyData<T>, WaveError> {
        self.grid.check_same(h.grid())?;
        let n = self.steps(s)?;
        Ok(self.run(h, n, |_, _, _| {}))
    }

    /// `R h = ν R_{2T} h`.
    pub fn reflect_map(&self, h: &CauchyData<T>) -> Result<CauchyData<T>, WaveError> {
        self.grid.check_same(h.grid())?;
        Ok(time_reverse(&self.run(h, 2 * self.steps_per_t as i64, |_, _, _| {})))
    }
}

/// `ν (u0, u1) = (u0, −u1)`.
pub fn time_reverse<T: Real>(h: &CauchyData<T>) -> CauchyData<T> {
    CauchyData { u0: h.u0.clone(), u1: h.u1.map(|v| -v) }
}

/// Largest `|∂_t u|` inside the discrete diamond `{d*(x) < T − |t − T|}` over
/// `t ∈ [0, 2T]`, next to the peak of `|∂_t u|` over the whole run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiamondReport<T> {
    pub max_in_diamond: T,
    pub peak: T,
}

impl<T: Real> DiamondReport<T> {
    pub fn relative(&self) -> T {
        if self.peak > T::zero() {
            self.max_in_diamond / self.peak
        } else {
            T::zero()
        }
    }
}

pub fn diamond_vanishing_check<T: Real>(
    prop: &Propagator<T>,
    h: &CauchyData<T>,
    depth: &DepthField<T>,
) -> Result<DiamondReport<T>, WaveError> {
    prop.grid().check_same(h.grid())?;
    let t_ctrl = prop.t_ctrl();
    let d = depth.values();
    let mut rep = DiamondReport { max_in_diamond: T::zero(), peak: T::zero() };
    prop.run(h, 2 * prop.steps_per_t() as i64, |k, _, v| {
        let t = T::of(k as f64) * prop.dt();
        let reach = t_ctrl - (t - t_ctrl).abs();
        for (i, &vi) in v.iter().enumerate() {
            let a = vi.abs();
            rep.peak = rep.peak.max(a);
            if d[i] < reach {
                rep.max_in_diamond = rep.max_in_diamond.max(a);
            }
        }
    });
    Ok(rep)
}
