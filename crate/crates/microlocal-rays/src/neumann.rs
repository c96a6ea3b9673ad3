use crate::symbol::{propagate, reflect, PropagateOptions};
use crate::{Depth, RayError, Scalar, SlownessModel, SymbolVector};
use std::f64::consts::PI;

/// Cosine ramp from 1 at `x = 0` to 0 at `x = 1`.
fn ramp(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        0.5 * (1.0 + (PI * x).cos())
    }
}

/// The cutoff `σ*`: one outside `Θ`, zero inside `Θ″`, and a cosine taper
/// in travel depth across the band between them.
pub fn sigma_star<S: Scalar>(slice: &SlownessModel<S>, z: &S) -> f64 {
    let model = slice.model();
    let band = slice.travel_depth(model.cutoff(), model.theta()).approx();
    match slice.travel_depth(z, model.theta()) {
        Depth::Outside => 1.0,
        Depth::Inside => 0.0,
        Depth::Finite(d) => {
            let d = d.approx();
            if d <= 0.0 {
                1.0
            } else if !(band > 0.0) {
                0.0
            } else {
                ramp(d / band)
            }
        }
    }
}

fn apply_sigma<S: Scalar>(slice: &SlownessModel<S>, v: &SymbolVector<S>) -> SymbolVector<S> {
    let mut out = v.weighted(|_, _, z| S::from_f64(sigma_star(slice, z)));
    out.prune();
    out
}

/// One application of `σ* r̃ σ* r̃`, returning the image and the mass lost
/// to glancing cuts or the event budget.
pub fn apply_k<S: Scalar>(slice: &SlownessModel<S>, v: &SymbolVector<S>, t_ctrl: &S, max_events: usize) -> Result<(SymbolVector<S>, f64), RayError> {
    let two_t = t_ctrl.clone() + t_ctrl.clone();
    let (a, lost_a) = reflect(slice, v, &two_t, max_events)?;
    let (b, lost_b) = reflect(slice, &apply_sigma(slice, &a), &two_t, max_events)?;
    Ok((apply_sigma(slice, &b), lost_a + lost_b))
}

/// `‖K v‖ / ‖v‖` for `K = σ* r̃ σ* r̃`.
pub fn contraction_ratio<S: Scalar>(slice: &SlownessModel<S>, v: &SymbolVector<S>, t_ctrl: &S) -> Result<f64, RayError> {
    let n = v.norm(slice);
    if n == 0.0 {
        return Ok(0.0);
    }
    let (kv, _) = apply_k(slice, v, t_ctrl, usize::MAX)?;
    Ok(kv.norm(slice) / n)
}

#[derive(Clone, Debug)]
pub struct NeumannStep<S: Scalar> {
    pub k: usize,
    pub n: SymbolVector<S>,
    pub norm: f64,
    /// `‖r̃ n_k‖` restricted to `Θ′`.
    pub inside_norm: f64,
    /// `‖r̃ n_k − r̃ reference‖` on `Θ′`, when a reference was given.
    pub error: Option<f64>,
    pub lost_mass: f64,
}

pub struct NeumannOptions<'a, S: Scalar> {
    pub k_max: usize,
    pub max_events: usize,
    /// Usually `h0 + tail` from [`crate::constructive_tail`].
    pub reference: Option<&'a SymbolVector<S>>,
    /// Iterates with more entries than this stop the run.
    pub max_support: usize,
}

impl<S: Scalar> Default for NeumannOptions<'_, S> {
    fn default() -> Self {
        NeumannOptions { k_max: 40, max_events: 1 << 16, reference: None, max_support: 1 << 16 }
    }
}

fn inside_inner<S: Scalar>(slice: &SlownessModel<S>, v: &SymbolVector<S>) -> SymbolVector<S> {
    let inner = slice.model().inner().clone();
    v.restricted(|_, _, z| *z > inner)
}

/// `n_{k+1} = h0 + σ* r̃ σ* r̃ n_k`, starting from `n_0 = h0`.
pub fn symbol_neumann_iterate<S: Scalar>(
    slice: &SlownessModel<S>,
    h0: &SymbolVector<S>,
    t_ctrl: &S,
    opts: &NeumannOptions<'_, S>,
) -> Result<Vec<NeumannStep<S>>, RayError> {
    let two_t = t_ctrl.clone() + t_ctrl.clone();
    let reference = match opts.reference {
        Some(r) => Some(inside_inner(slice, &reflect(slice, r, &two_t, opts.max_events)?.0)),
        None => None,
    };
    let mut steps = Vec::with_capacity(opts.k_max + 1);
    let mut n = h0.clone();
    let mut lost = 0.0;
    for k in 0..=opts.k_max {
        let rn = inside_inner(slice, &reflect(slice, &n, &two_t, opts.max_events)?.0);
        let error = reference.as_ref().map(|r| rn.minus(r).norm(slice));
        steps.push(NeumannStep { k, n: n.clone(), norm: n.norm(slice), inside_norm: rn.norm(slice), error, lost_mass: lost });
        if k == opts.k_max {
            break;
        }
        if n.len() > opts.max_support {
            return Err(RayError::Budget { truncated_mass: n.norm_sq(slice) });
        }
        let (kn, l) = apply_k(slice, &n, t_ctrl, opts.max_events)?;
        lost += l;
        n = h0.plus(&kn);
        n.prune();
    }
    Ok(steps)
}

/// The microlocal almost direct transmission of `h0` at time `T`.
///
/// Covectors deeper than `T` below `Θ′` keep their amplitude, those no
/// deeper than `T` below `Θ″` are dropped, and the ones in between are
/// tapered by the same cosine profile as `σ*`.
pub fn mdt_symbol<S: Scalar>(slice: &SlownessModel<S>, h0: &SymbolVector<S>, t_ctrl: &S) -> Result<SymbolVector<S>, RayError> {
    let p = propagate(slice, h0, t_ctrl, &PropagateOptions::default())?;
    if p.cut_mass > 0.0 || p.truncated_mass > 0.0 {
        return Err(RayError::Budget { truncated_mass: p.cut_mass + p.truncated_mass });
    }
    let t = t_ctrl.approx();
    let model = slice.model();
    let mut out = p.end.weighted(|_, _, z| {
        let d_in = slice.travel_depth(z, model.inner()).approx();
        let d_cut = slice.travel_depth(z, model.cutoff()).approx();
        let w = if d_in > t {
            1.0
        } else if d_cut <= t {
            0.0
        } else {
            // Past the Θ″ depth, before the Θ′ depth.
            let span = d_cut - d_in;
            ramp((t - d_in) / span)
        };
        S::from_f64(w)
    });
    out.prune();
    Ok(out)
}
