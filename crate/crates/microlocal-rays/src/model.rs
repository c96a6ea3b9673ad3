use crate::{RayError, Scalar};
use num::Complex;
use num_traits::Float;

/// Vertical travel direction. `Down` moves toward larger `z`, into `Θ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    Up,
    Down,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Up => Dir::Down,
            Dir::Down => Dir::Up,
        }
    }

    pub fn sign<S: Scalar>(self) -> S {
        match self {
            Dir::Up => -S::one(),
            Dir::Down => S::one(),
        }
    }
}

/// What happened at an interface: reflection or transmission.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    R,
    T,
}

/// Horizontally layered medium with a half-space `Θ = {z > theta}`.
///
/// `cutoff` and `inner` are the tops of `Θ″` and `Θ′`, so
/// `theta ≤ cutoff ≤ inner`. Layer `k` lies between `interfaces[k-1]` and
/// `interfaces[k]`; layers `0` and `m` are the outer half-spaces.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredModel<S> {
    interfaces: Vec<S>,
    speeds: Vec<S>,
    theta: S,
    cutoff: S,
    inner: S,
}

impl<S: Scalar> LayeredModel<S> {
    pub fn new(interfaces: Vec<S>, speeds: Vec<S>, theta: S) -> Result<Self, RayError> {
        if speeds.len() != interfaces.len() + 1 {
            return Err(RayError::Model(format!(
                "{} interfaces need {} speeds, got {}",
                interfaces.len(),
                interfaces.len() + 1,
                speeds.len()
            )));
        }
        if speeds.iter().any(|c| *c <= S::zero()) {
            return Err(RayError::Model("wave speeds must be positive".into()));
        }
        if interfaces.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RayError::Model("interfaces must be strictly increasing".into()));
        }
        Ok(LayeredModel { interfaces, speeds, cutoff: theta.clone(), inner: theta.clone(), theta })
    }

    /// Sets the tops of `Θ″` (where `σ*` reaches zero) and `Θ′`.
    pub fn with_nested(mut self, cutoff: S, inner: S) -> Result<Self, RayError> {
        if cutoff < self.theta || inner < cutoff {
            return Err(RayError::Model("need theta <= cutoff <= inner".into()));
        }
        self.cutoff = cutoff;
        self.inner = inner;
        Ok(self)
    }

    pub fn interfaces(&self) -> &[S] {
        &self.interfaces
    }
    pub fn speeds(&self) -> &[S] {
        &self.speeds
    }
    pub fn layer_count(&self) -> usize {
        self.speeds.len()
    }
    pub fn theta(&self) -> &S {
        &self.theta
    }
    pub fn cutoff(&self) -> &S {
        &self.cutoff
    }
    pub fn inner(&self) -> &S {
        &self.inner
    }

    /// Layer containing `z`, or `None` when `z` sits on an interface.
    pub fn layer_at(&self, z: &S) -> Option<usize> {
        let mut k = 0;
        for zi in &self.interfaces {
            if z == zi {
                return None;
            }
            if z > zi {
                k += 1;
            }
        }
        Some(k)
    }

    pub fn inside_theta(&self, z: &S) -> bool {
        *z > self.theta
    }
}

/// Plane-wave constants of one layer for a fixed horizontal slowness.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerWave<S> {
    /// Vertical slowness; `None` when the layer is evanescent.
    pub q: Option<S>,
    /// Vertical group velocity `c² q`.
    pub vz: Option<S>,
    /// Horizontal group velocity `c² p`.
    pub vx: S,
    /// Within the glancing cutoff of horizontal.
    pub glancing: bool,
}

impl<S> LayerWave<S> {
    pub fn propagating(&self) -> bool {
        self.q.is_some() && !self.glancing
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// Pressure amplitudes: `r = (q₁ − q₂)/(q₁ + q₂)`, `t = 1 + r`.
    Pressure,
    /// Flux-normalized amplitudes; every 2×2 block is orthogonal.
    Energy,
}

/// Scattering block of interface `i` between layer `i` (above) and `i + 1`.
///
/// `*_down` act on waves arriving from above, `*_up` on waves from below.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceScatter<S> {
    pub r_down: S,
    pub t_down: S,
    pub r_up: S,
    pub t_up: S,
    /// A glancing layer touches this interface; arriving waves are cut.
    pub blocked: bool,
}

/// The layered medium restricted to one horizontal slowness `p`.
///
/// All amplitude computations run independently per slowness, so this is
/// the object every operation works on.
#[derive(Clone, Debug, PartialEq)]
pub struct SlownessModel<S> {
    model: LayeredModel<S>,
    p: S,
    layers: Vec<LayerWave<S>>,
    scatter: Vec<InterfaceScatter<S>>,
    normalization: Normalization,
}

pub type Slowness64 = SlownessModel<f64>;
pub type ExactSlowness = SlownessModel<num::BigRational>;

impl<S: Scalar> SlownessModel<S> {
    /// Builds the slice from given vertical slownesses, with pressure
    /// amplitudes. This is the constructor for exact arithmetic, where no
    /// square roots are available: `p² + q_k² = 1/c_k²` is checked exactly
    /// for every propagating layer.
    pub fn from_vertical(model: &LayeredModel<S>, p: S, q: Vec<Option<S>>) -> Result<Self, RayError> {
        if q.len() != model.layer_count() {
            return Err(RayError::Model("one vertical slowness per layer".into()));
        }
        for (k, (qk, c)) in q.iter().zip(model.speeds()).enumerate() {
            let target = S::one() / (c.clone() * c.clone());
            let p2 = p.clone() * p.clone();
            match qk {
                Some(qk) => {
                    if *qk <= S::zero() || p2.clone() + qk.clone() * qk.clone() != target {
                        return Err(RayError::Model(format!("layer {k}: p² + q² differs from 1/c²")));
                    }
                }
                None => {
                    if p2 <= target {
                        return Err(RayError::Model(format!("layer {k} propagates but q is missing")));
                    }
                }
            }
        }
        let glancing = vec![false; q.len()];
        Ok(Self::assemble(model, p, q, glancing, Normalization::Pressure, |_, _| unreachable!()))
    }

    fn assemble(
        model: &LayeredModel<S>,
        p: S,
        q: Vec<Option<S>>,
        glancing: Vec<bool>,
        normalization: Normalization,
        energy_t: impl Fn(&S, &S) -> S,
    ) -> Self {
        let layers: Vec<LayerWave<S>> = q
            .into_iter()
            .zip(model.speeds())
            .zip(glancing)
            .map(|((q, c), glancing)| {
                let c2 = c.clone() * c.clone();
                LayerWave { vz: q.clone().map(|q| c2.clone() * q), vx: c2 * p.clone(), q, glancing }
            })
            .collect();
        let two = S::one() + S::one();
        let scatter = (0..model.interfaces().len())
            .map(|i| {
                let (a, b) = (&layers[i], &layers[i + 1]);
                let blocked = a.glancing || b.glancing;
                match (&a.q, &b.q) {
                    (Some(qa), Some(qb)) => {
                        let sum = qa.clone() + qb.clone();
                        let r = (qa.clone() - qb.clone()) / sum.clone();
                        let (t_down, t_up) = match normalization {
                            Normalization::Pressure => {
                                (two.clone() * qa.clone() / sum.clone(), two.clone() * qb.clone() / sum.clone())
                            }
                            Normalization::Energy => {
                                let t = energy_t(qa, qb);
                                (t.clone(), t)
                            }
                        };
                        InterfaceScatter { r_up: -r.clone(), r_down: r, t_down, t_up, blocked }
                    }
                    // Total reflection; the phase of the unimodular
                    // coefficient is not tracked.
                    _ => InterfaceScatter {
                        r_down: S::one(),
                        t_down: S::zero(),
                        r_up: S::one(),
                        t_up: S::zero(),
                        blocked,
                    },
                }
            })
            .collect();
        SlownessModel { model: model.clone(), p, layers, scatter, normalization }
    }

    pub fn model(&self) -> &LayeredModel<S> {
        &self.model
    }
    pub fn p(&self) -> &S {
        &self.p
    }
    pub fn normalization(&self) -> Normalization {
        self.normalization
    }
    pub fn layer(&self, k: usize) -> &LayerWave<S> {
        &self.layers[k]
    }
    pub fn layers(&self) -> &[LayerWave<S>] {
        &self.layers
    }
    pub fn scatter(&self, i: usize) -> &InterfaceScatter<S> {
        &self.scatter[i]
    }
    pub fn interface_count(&self) -> usize {
        self.scatter.len()
    }
    pub fn interface_z(&self, i: usize) -> &S {
        &self.model.interfaces()[i]
    }

    /// Vertical speed in layer `k`; errors unless the layer propagates.
    pub fn vz(&self, k: usize) -> Result<&S, RayError> {
        let l = &self.layers[k];
        if l.glancing {
            return Err(RayError::Glancing { layer: k });
        }
        l.vz.as_ref().ok_or(RayError::Evanescent { layer: k })
    }

    /// The interface and time at which a wave at `(z, t)` in `layer`
    /// moving in `dir` reaches the end of its layer.
    pub fn next_event(&self, layer: usize, dir: Dir, z: &S, t: &S) -> Result<Option<(usize, S)>, RayError> {
        let v = self.vz(layer)?;
        let m = self.interface_count();
        Ok(match dir {
            Dir::Down if layer < m => Some((layer, t.clone() + (self.interface_z(layer).clone() - z.clone()) / v.clone())),
            Dir::Up if layer > 0 => Some((layer - 1, t.clone() + (z.clone() - self.interface_z(layer - 1).clone()) / v.clone())),
            _ => None,
        })
    }

    /// The interface and time at which the same wave entered its layer.
    pub fn prev_event(&self, layer: usize, dir: Dir, z: &S, t: &S) -> Result<Option<(usize, S)>, RayError> {
        let v = self.vz(layer)?;
        let m = self.interface_count();
        Ok(match dir {
            Dir::Down if layer > 0 => Some((layer - 1, t.clone() - (z.clone() - self.interface_z(layer - 1).clone()) / v.clone())),
            Dir::Up if layer < m => Some((layer, t.clone() - (self.interface_z(layer).clone() - z.clone()) / v.clone())),
            _ => None,
        })
    }

    /// Position at time `t_new` of the wave at `(z, t)`, ignoring interfaces.
    pub fn drift(&self, layer: usize, dir: Dir, z: &S, t: &S, t_new: &S) -> Result<S, RayError> {
        let v = self.vz(layer)?;
        Ok(z.clone() + dir.sign::<S>() * v.clone() * (t_new.clone() - t.clone()))
    }

    /// Signed travel time from the plane `z = boundary` to `z`, positive
    /// below the plane, along the slanted ray of this slowness.
    pub fn travel_depth(&self, z: &S, boundary: &S) -> Depth<S> {
        let inside = z > boundary;
        let (lo, hi) = if inside { (boundary, z) } else { (z, boundary) };
        let mut total = S::zero();
        let zs = self.model.interfaces();
        for k in 0..self.layers.len() {
            let top = if k == 0 { None } else { Some(&zs[k - 1]) };
            let bot = zs.get(k);
            let a = match top {
                Some(t) if t > lo => t.clone(),
                _ => lo.clone(),
            };
            let b = match bot {
                Some(b) if b < hi => b.clone(),
                _ => hi.clone(),
            };
            if a >= b {
                continue;
            }
            match self.layers[k].vz.as_ref().filter(|_| !self.layers[k].glancing) {
                Some(v) => total = total + (b - a) / v.clone(),
                None => return if inside { Depth::Inside } else { Depth::Outside },
            }
        }
        Depth::Finite(if inside { total } else { -total })
    }

    /// Energy carried by amplitude `a` in layer `k`, in units where the
    /// energy normalization gives `a²`.
    pub fn flux(&self, k: usize, a: &S) -> f64 {
        let a = a.approx();
        match self.normalization {
            Normalization::Energy => a * a,
            Normalization::Pressure => {
                let q = self.layers[k].q.as_ref().map(|q| q.approx()).unwrap_or(0.0);
                a * a * q
            }
        }
    }
}

impl<F: Float + Scalar> SlownessModel<F> {
    /// Slice of `model` at horizontal slowness `p` with energy-normalized
    /// amplitudes. Layers whose ray is within `glancing_deg` degrees of
    /// horizontal (on either side of the critical slowness) are flagged.
    pub fn new(model: &LayeredModel<F>, p: F, glancing_deg: f64) -> Self {
        Self::with_normalization(model, p, glancing_deg, Normalization::Energy)
    }

    pub fn with_normalization(model: &LayeredModel<F>, p: F, glancing_deg: f64, normalization: Normalization) -> Self {
        let limit = F::from_f64(glancing_deg.to_radians().sin());
        let mut q = Vec::new();
        let mut glancing = Vec::new();
        for c in model.speeds() {
            let d = F::one() / (*c * *c) - p * p;
            let cos = *c * d.abs().sqrt();
            glancing.push(cos < limit);
            q.push(if d > F::zero() { Some(d.sqrt()) } else { None });
        }
        let two = F::one() + F::one();
        Self::assemble(model, p, q, glancing, normalization, |a, b| two * (*a * *b).sqrt() / (*a + *b))
    }
}

/// Signed depth that may be infinite when a total-reflection barrier
/// separates a point from the boundary.
#[derive(Clone, Debug, PartialEq)]
pub enum Depth<S> {
    Finite(S),
    Inside,
    Outside,
}

impl<S: Scalar> Depth<S> {
    pub fn exceeds(&self, x: &S) -> bool {
        match self {
            Depth::Finite(d) => d > x,
            Depth::Inside => true,
            Depth::Outside => false,
        }
    }

    pub fn approx(&self) -> f64 {
        match self {
            Depth::Finite(d) => d.approx(),
            Depth::Inside => f64::INFINITY,
            Depth::Outside => f64::NEG_INFINITY,
        }
    }

    pub fn finite(&self) -> Option<&S> {
        match self {
            Depth::Finite(d) => Some(d),
            _ => None,
        }
    }
}

/// A point of the cotangent bundle with the slowness of its slice.
///
/// The slowness vector is `(p, ±q_layer)`, so `|ξ| = 1/c` holds by
/// construction; `dir` selects the sign of the vertical component.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector<S> {
    pub x: S,
    pub z: S,
    pub t: S,
    pub layer: usize,
    pub dir: Dir,
}

impl<S: Scalar> Covector<S> {
    pub fn new(slice: &SlownessModel<S>, x: S, z: S, t: S, dir: Dir) -> Result<Self, RayError> {
        let layer = slice
            .model()
            .layer_at(&z)
            .ok_or_else(|| RayError::OnInterface { z: z.approx() })?;
        slice.vz(layer)?;
        Ok(Covector { x, z, t, layer, dir })
    }
}

/// Reflection and transmission at one interface for one slowness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RtCoefficients {
    /// Pressure reflection coefficient; unimodular under total reflection.
    pub r: Complex<f64>,
    /// Pressure transmission coefficient `1 + r`.
    pub t: Complex<f64>,
    pub r_energy: f64,
    /// Zero when the transmitted wave is evanescent.
    pub t_energy: f64,
    pub evanescent: bool,
    pub q_in: f64,
    /// Vertical slowness on the far side, imaginary when evanescent.
    pub q_out: Complex<f64>,
}

/// Coefficients for a wave in speed `c_in` meeting speed `c_out` with
/// horizontal slowness `p`.
///
/// Written in vertical slownesses `q = (c⁻² − p²)^{1/2}`, the ratio of
/// cotangents in the angle form becomes `q_in/q_out`, which stays regular
/// at normal incidence.
pub fn rt_coefficients(c_in: f64, c_out: f64, p: f64, glancing_deg: f64) -> Result<RtCoefficients, RayError> {
    if !(c_in > 0.0 && c_out > 0.0) {
        return Err(RayError::Model("wave speeds must be positive".into()));
    }
    let limit = glancing_deg.to_radians().sin();
    let d_in = 1.0 / (c_in * c_in) - p * p;
    if d_in <= 0.0 {
        return Err(RayError::Evanescent { layer: 0 });
    }
    let q_in = d_in.sqrt();
    if c_in * q_in < limit {
        return Err(RayError::Glancing { layer: 0 });
    }
    let d_out = 1.0 / (c_out * c_out) - p * p;
    if c_out * d_out.abs().sqrt() < limit {
        return Err(RayError::Glancing { layer: 1 });
    }
    let q_out = if d_out > 0.0 { Complex::new(d_out.sqrt(), 0.0) } else { Complex::new(0.0, (-d_out).sqrt()) };
    let qi = Complex::new(q_in, 0.0);
    let r = (qi - q_out) / (qi + q_out);
    let t = Complex::new(1.0, 0.0) + r;
    let evanescent = d_out <= 0.0;
    let (r_energy, t_energy) = if evanescent {
        (r.norm(), 0.0)
    } else {
        (r.re, 2.0 * (q_in * q_out.re).sqrt() / (q_in + q_out.re))
    };
    Ok(RtCoefficients { r, t, r_energy, t_energy, evanescent, q_in, q_out })
}
