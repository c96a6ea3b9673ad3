use crate::Propagator;
use grid_core::{CauchyData, Mask, Real};

/// Energy inner product `⟨f, g⟩ = f0ᵀ K_dt g0 + f1ᵀ M g1`.
pub fn inner<T: Real>(p: &Propagator<T>, f: &CauchyData<T>, g: &CauchyData<T>) -> T {
    let n = p.grid().len();
    let mut kf = vec![T::zero(); n];
    let mut kg = vec![T::zero(); n];
    p.apply_stiffness(f.u0.values(), &mut kf);
    p.apply_stiffness(g.u0.values(), &mut kg);
    let q = p.dt() * p.dt() / T::of(4.0);
    let (m, im) = (p.mass(), p.inv_mass());
    let (g0, f1, g1) = (g.u0.values(), f.u1.values(), g.u1.values());
    let mut acc = T::zero();
    for i in 0..n {
        acc += kf[i] * g0[i] - q * kf[i] * kg[i] * im[i] + m[i] * f1[i] * g1[i];
    }
    acc
}

pub fn norm<T: Real>(p: &Propagator<T>, f: &CauchyData<T>) -> T {
    inner(p, f, f).max(T::zero()).sqrt()
}

/// Energy localized to the node set `W`.
///
/// Gradient terms on edges count fully when both ends lie in `W` and by half
/// when one end does; the `dt²` correction and the kinetic term are summed
/// over the nodes of `W`. Summing over `W` and its complement reproduces
/// `⟨h, h⟩` exactly.
pub fn energy<T: Real>(p: &Propagator<T>, h: &CauchyData<T>, w: &Mask) -> T {
    let g = p.grid();
    let u = h.u0.values();
    let scale = g.spacing().powi(g.dim() as i32 - 2);
    let half = T::of(0.5);
    let mut grad = T::zero();
    for (a, b) in g.faces() {
        let weight = match (w.get(a), w.get(b)) {
            (true, true) => T::one(),
            (false, false) => continue,
            _ => half,
        };
        let du = u[a] - u[b];
        grad += weight * du * du;
    }
    let mut ku = vec![T::zero(); g.len()];
    p.apply_stiffness(u, &mut ku);
    let q = p.dt() * p.dt() / T::of(4.0);
    let correction: T = w.indices().map(|i| ku[i] * ku[i] * p.inv_mass()[i]).sum();
    scale * grad - q * correction + kinetic_energy(p, h, w)
}

/// `Σ_{i∈W} m_i v_i²`, the discrete `∫_W c⁻² |h1|²`.
pub fn kinetic_energy<T: Real>(p: &Propagator<T>, h: &CauchyData<T>, w: &Mask) -> T {
    let v = h.u1.values();
    w.indices().map(|i| p.mass()[i] * v[i] * v[i]).sum()
}
