use crate::{Dir, RayError, Scalar, SlownessModel, SymbolVector};
use std::collections::BTreeMap;

/// The per-interface 2×2 blocks of one slowness slice.
///
/// Block `i` maps the waves arriving at interface `i` from above and from
/// below to the outgoing up- and down-going waves:
/// `[up; down] = [r_down t_up; t_down r_up] [from_above; from_below]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayeredScatteringMatrix<S> {
    pub blocks: Vec<[[S; 2]; 2]>,
    /// Interfaces where one side does not propagate.
    pub evanescent: Vec<bool>,
}

impl<S: Scalar> LayeredScatteringMatrix<S> {
    pub fn new(slice: &SlownessModel<S>) -> Self {
        let mut blocks = Vec::new();
        let mut evanescent = Vec::new();
        for i in 0..slice.interface_count() {
            let s = slice.scatter(i);
            blocks.push([[s.r_down.clone(), s.t_up.clone()], [s.t_down.clone(), s.r_up.clone()]]);
            evanescent.push(slice.layer(i).q.is_none() || slice.layer(i + 1).q.is_none());
        }
        LayeredScatteringMatrix { blocks, evanescent }
    }

    pub fn apply(&self, i: usize, from_above: &S, from_below: &S) -> (S, S) {
        let b = &self.blocks[i];
        (
            b[0][0].clone() * from_above.clone() + b[0][1].clone() * from_below.clone(),
            b[1][0].clone() * from_above.clone() + b[1][1].clone() * from_below.clone(),
        )
    }

    /// Largest entry of `BᵀB − I` over all blocks.
    pub fn orthogonality_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let b: Vec<Vec<f64>> = b.iter().map(|r| r.iter().map(|x| x.approx()).collect()).collect();
                let mut worst: f64 = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        let g = b[0][i] * b[0][j] + b[1][i] * b[1][j];
                        worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }
}

/// Key of an outgoing wave: interface, layer it enters, direction, time.
pub type WaveKey<S> = (usize, usize, Dir, <S as Scalar>::Key);

#[derive(Clone, Debug)]
pub struct ScatteringSeries<S: Scalar> {
    /// Summed amplitude of every outgoing wave produced within `k_max`
    /// applications of the scattering blocks, with its time.
    pub waves: BTreeMap<WaveKey<S>, (S, S)>,
    /// Energy still arriving at interfaces after the last application.
    pub remaining_mass: f64,
    /// Number of applications that produced something.
    pub terms: usize,
}

/// Geometric series `Σ_k S_sc^k source`, one scattering order at a time.
///
/// Each order collects the waves that reach an interface, combines those
/// meeting from both sides at the same instant, and applies that
/// interface's block. Waves that arrive after `t_end` are discarded.
pub fn layered_scattering_series<S: Scalar>(
    slice: &SlownessModel<S>,
    source: &SymbolVector<S>,
    t_end: Option<&S>,
    k_max: usize,
) -> Result<ScatteringSeries<S>, RayError> {
    let sm = LayeredScatteringMatrix::new(slice);
    let mut out = ScatteringSeries { waves: BTreeMap::new(), remaining_mass: 0.0, terms: 0 };
    // (interface, time) -> (time, from above, from below)
    type Arrivals<S> = BTreeMap<(usize, <S as Scalar>::Key), (S, S, S)>;
    let mut arrivals: Arrivals<S> = BTreeMap::new();
    let send = |arrivals: &mut Arrivals<S>, layer: usize, dir: Dir, z: &S, t: &S, a: S| -> Result<(), RayError> {
        if let Some((i, te)) = slice.next_event(layer, dir, z, t)? {
            if t_end.map_or(true, |e| te < *e) {
                let e = arrivals.entry((i, te.key())).or_insert_with(|| (te.clone(), S::zero(), S::zero()));
                if dir == Dir::Down {
                    e.1 = e.1.clone() + a;
                } else {
                    e.2 = e.2.clone() + a;
                }
            }
        }
        Ok(())
    };
    for (layer, dir, z, a) in source.iter() {
        slice.vz(layer)?;
        send(&mut arrivals, layer, dir, z, source.time(), a.clone())?;
    }
    for _ in 0..k_max {
        if arrivals.is_empty() {
            break;
        }
        out.terms += 1;
        let mut next = BTreeMap::new();
        for ((i, _), (t, above, below)) in std::mem::take(&mut arrivals) {
            if slice.scatter(i).blocked {
                continue;
            }
            let (up, down) = sm.apply(i, &above, &below);
            let zi = slice.interface_z(i);
            for (layer, dir, a) in [(i, Dir::Up, up), (i + 1, Dir::Down, down)] {
                if a.is_zero() || !slice.layer(layer).propagating() {
                    continue;
                }
                let e = out.waves.entry((i, layer, dir, t.key())).or_insert_with(|| (t.clone(), S::zero()));
                e.1 = e.1.clone() + a.clone();
                send(&mut next, layer, dir, zi, &t, a)?;
            }
        }
        arrivals = next;
    }
    out.remaining_mass = arrivals
        .iter()
        .map(|((i, _), (_, above, below))| slice.flux(*i, above) + slice.flux(*i + 1, below))
        .sum();
    Ok(out)
}
