use grid_core::{CauchyData, Grid, Medium, Real, ScalarField};
use rustfft::{num_complex::Complex, FftPlanner};
use wave_solver::Propagator;

/// Bump `exp(−6s²)(1 − s²)⁴` on `|s| < 1`, zero beyond, and its derivative.
///
/// The polynomial factor closes the support with three continuous
/// derivatives; the Gaussian factor keeps most of the mass away from the
/// edges so the pulse stays well resolved for its support.
fn bump<T: Real>(s: T) -> (T, T) {
    if s.abs() >= T::one() {
        return (T::zero(), T::zero());
    }
    let a = T::of(6.0);
    let w = T::one() - s * s;
    let e = (-a * s * s).exp();
    let w3 = w * w * w;
    let g = e * w3 * w;
    let dg = e * w3 * (-T::of(2.0) * a * s * w - T::of(8.0) * s);
    (g, dg)
}

/// Pulse travelling towards `+x` in 1D, centred at `center`.
///
/// `width` is the half-support in travel time at the local speed `c0`. The
/// pressure is the bump `g`. The velocity is the discrete rightward mode of
/// the leapfrog scheme rather than the continuum `−c0 g′`: for wavenumber `k`,
/// `v̂ = −(2i/dt) s √(1 − s²) ĝ` with `s = (c0 dt/h) sin(kh/2)`, which makes the
/// leftward part vanish to rounding wherever the speed equals `c0`.
pub fn rightward_pulse<T: Real>(prop: &Propagator<T>, center: T, width: T) -> CauchyData<T> {
    let grid = *prop.grid();
    let k0 = nearest(&grid, center);
    let c0 = (grid.spacing() * prop.inv_mass()[k0]).sqrt();
    let half = width * c0;
    let u0 = ScalarField::from_fn(grid, |p| bump((p[0] - center) / half).0);

    let n = grid.len();
    let h = grid.spacing().to_f64_lossy();
    let dt = prop.dt().to_f64_lossy();
    let courant = c0.to_f64_lossy() * dt / h;
    let mut buf: Vec<Complex<f64>> = u0.values().iter().map(|v| Complex::new(v.to_f64_lossy(), 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (j, b) in buf.iter_mut().enumerate() {
        // Signed wavenumber index in (−n/2, n/2].
        let m = if 2 * j > n { j as f64 - n as f64 } else { j as f64 };
        let kh = 2.0 * std::f64::consts::PI * m / n as f64;
        let s = courant * (kh / 2.0).sin();
        let factor = 2.0 / dt * s * (1.0 - s * s).max(0.0).sqrt();
        *b *= Complex::new(0.0, -factor);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let u1 = buf.iter().map(|z| T::of(z.re / n as f64)).collect();
    let u1 = ScalarField::from_values(grid, u1).expect("length matches grid");
    CauchyData::with_dirichlet(u0, u1).expect("fields built on one grid")
}

/// Collimated 2D packet moving at `angle_deg` from `+x`: a radial bump
/// envelope times `cos(κ n·(x − x0))`, with velocity `−c ∂_n u0`.
///
/// The speed is read at the first-axis position of the centre, so the packet
/// should start in a region of constant speed.
pub fn collimated_packet<T: Real>(
    medium: &Medium<T>,
    center: [T; 2],
    width: T,
    angle_deg: T,
    wavenumber: T,
) -> CauchyData<T> {
    let grid = *medium.grid();
    let (s, c) = angle_deg.to_radians().sin_cos();
    let c0 = medium.speed().values()[nearest(medium.grid(), center[0])];
    let half = width * c0;
    let phase = |p: [T; 2]| c * (p[0] - center[0]) + s * (p[1] - center[1]);
    let radius = |p: [T; 2]| ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt() / half;
    let u0 = ScalarField::from_fn(grid, |p| bump(radius(p)).0 * (wavenumber * phase(p)).cos());
    let u1 = ScalarField::from_fn(grid, |p| {
        let r = radius(p);
        let (g, dg) = bump(r);
        // ∂_n of the envelope: dg/dr · (n·(x − x0)) / (r half²).
        let dn_env = if r > T::zero() { dg * phase(p) / (r * half * half) } else { T::zero() };
        let k = wavenumber * phase(p);
        let dn = dn_env * k.cos() - g * wavenumber * k.sin();
        -c0 * dn
    });
    CauchyData::with_dirichlet(u0, u1).expect("fields built on one grid")
}

fn nearest<T: Real>(g: &Grid<T>, x: T) -> usize {
    let k = ((x - g.origin()[0]) / g.spacing()).round().to_usize().unwrap_or(0);
    k.min(g.extent()[0] - 1)
}
