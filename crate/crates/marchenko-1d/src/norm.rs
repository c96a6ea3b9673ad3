use crate::{MarchenkoError, MarchenkoSetup};
use grid_core::{CauchyData, Real, ScalarField};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scattering_control::{rightward_pulse, ControlSetup};

/// Where the power iteration for `‖π*Rπ*R‖` runs.
#[derive(Clone, Debug)]
pub enum Subspace<T> {
    /// All Cauchy data. Waves that never reach `Θ` within `2T` and grid-scale
    /// modes with vanishing group velocity are fixed by `(π*R)²`, so on
    /// this space the estimate climbs to 1 whatever the medium.
    Full,
    /// The span of the given data, each made to vanish on `Θ` first.
    Span(Vec<CauchyData<T>>),
}

#[derive(Clone, Debug)]
pub struct NormEstimate {
    /// Largest eigenvalue found for `(π*Rπ*)²`, which equals
    /// `‖π*Rπ*R‖` on data supported outside `Θ`.
    pub estimate: f64,
    /// Rayleigh quotient after each power step.
    pub history: Vec<f64>,
    /// Dimension actually used (after dropping dependent span vectors).
    pub dimension: usize,
}

/// Smooth rightward pulses of half-width `width` tiling the band of points
/// left of `Θ` that reach `Θ` within `2T`.
///
/// Every pulse lies entirely inside the band. A pulse sticking out past
/// travel time `2T` has a part that never enters `Θ`; that part is fixed by
/// `(π*R)²` and drags the estimate to 1, as do leftward data.
pub fn rightward_subspace<T: Real>(setup: &MarchenkoSetup<T>, width: T) -> Subspace<T> {
    let ctrl = setup.control();
    let c = setup.left_speed();
    let edge = setup.x_b() - setup.eps();
    let reach = T::of(2.0) * ctrl.t_ctrl() * c;
    let half = width * c;
    let step = half / T::of(2.0);
    let mut basis = Vec::new();
    let mut center = edge - half * T::of(1.05);
    while center - half > edge - reach {
        basis.push(rightward_pulse(ctrl.prop(), center, width));
        center -= step;
    }
    Subspace::Span(basis)
}

/// Power iteration for the largest eigenvalue of the self-adjoint operator
/// `(π*Rπ*)²`.
///
/// On a span the operator is compressed first: with Gram matrix `G` and
/// image Gram matrix `H_ij = ⟨π*Rπ*φ_i, π*Rπ*φ_j⟩`, the iteration runs on
/// `W^T H W` where `W` whitens `G`. On the full space it acts on grid data
/// directly, starting from seeded random values.
pub fn operator_norm_estimate<T: Real>(
    ctrl: &ControlSetup<T>,
    subspace: &Subspace<T>,
    iterations: usize,
    seed: u64,
) -> Result<NormEstimate, MarchenkoError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match subspace {
        Subspace::Full => {
            let grid = *ctrl.prop().grid();
            let u0 = ScalarField::from_fn(grid, |_| T::of(rng.gen_range(-1.0..1.0)));
            let u1 = ScalarField::from_fn(grid, |_| T::of(rng.gen_range(-1.0..1.0)));
            let mut v = ctrl.pi_star(&CauchyData::with_dirichlet(u0, u1)?)?;
            let mut history = Vec::with_capacity(iterations);
            for _ in 0..iterations {
                let n = ctrl.norm(&v);
                if !(n > T::zero()) {
                    return Err(MarchenkoError::EmptySubspace);
                }
                v = v.scaled(T::one() / n);
                let a = ctrl.pi_star(&ctrl.reflect(&v)?)?;
                let b = ctrl.pi_star(&ctrl.reflect(&a)?)?;
                history.push(ctrl.inner(&v, &b).to_f64_lossy());
                v = b;
            }
            let estimate = history.last().copied().unwrap_or(0.0);
            Ok(NormEstimate { estimate, history, dimension: ctrl.prop().grid().len() })
        }
        Subspace::Span(raw) => {
            if raw.is_empty() {
                return Err(MarchenkoError::EmptySubspace);
            }
            let mut basis = Vec::with_capacity(raw.len());
            let mut images = Vec::with_capacity(raw.len());
            for phi in raw {
                let phi = ctrl.pi_star(phi)?;
                images.push(ctrl.pi_star(&ctrl.reflect(&phi)?)?);
                basis.push(phi);
            }
            let n = basis.len();
            let gram = DMatrix::from_fn(n, n, |i, j| ctrl.inner(&basis[i], &basis[j]).to_f64_lossy());
            let image_gram = DMatrix::from_fn(n, n, |i, j| ctrl.inner(&images[i], &images[j]).to_f64_lossy());
            let gram = (&gram + gram.transpose()) * 0.5;
            let eig = SymmetricEigen::new(gram);
            let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
            let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 1e-10 * top).collect();
            if keep.is_empty() {
                return Err(MarchenkoError::EmptySubspace);
            }
            let w = DMatrix::from_fn(n, keep.len(), |r, c| {
                let i = keep[c];
                eig.eigenvectors[(r, i)] / eig.eigenvalues[i].sqrt()
            });
            let c = w.transpose() * image_gram * &w;
            let c = (&c + c.transpose()) * 0.5;
            let m = keep.len();
            let mut x = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
            let mut history = Vec::with_capacity(iterations);
            for _ in 0..iterations {
                x /= x.norm();
                let y = &c * &x;
                let q = x.dot(&y);
                let settled = history.last().is_some_and(|&p: &f64| (q - p).abs() <= 1e-14 * q.abs());
                history.push(q);
                x = y;
                if settled {
                    break;
                }
            }
            let estimate = history.last().copied().unwrap_or(0.0);
            Ok(NormEstimate { estimate, history, dimension: m })
        }
    }
}
