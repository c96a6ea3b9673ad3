use crate::{Covector, Dir, RayError, Scalar, SlownessModel};
use std::collections::BTreeMap;

/// A maximal bicharacteristic inside one layer, given by any point on it.
#[derive(Clone, Debug, PartialEq)]
pub struct Bichar<S> {
    pub layer: usize,
    pub dir: Dir,
    pub z: S,
    pub t: S,
}

impl<S: Scalar> Bichar<S> {
    pub fn through(c: &Covector<S>) -> Self {
        Bichar { layer: c.layer, dir: c.dir, z: c.z.clone(), t: c.t.clone() }
    }

    /// Interface and time where it ends, if it ever meets one.
    pub fn end(&self, slice: &SlownessModel<S>) -> Result<Option<(usize, S)>, RayError> {
        slice.next_event(self.layer, self.dir, &self.z, &self.t)
    }

    /// Interface and time where it began.
    pub fn start(&self, slice: &SlownessModel<S>) -> Result<Option<(usize, S)>, RayError> {
        slice.prev_event(self.layer, self.dir, &self.z, &self.t)
    }

    pub fn at(&self, slice: &SlownessModel<S>, t: &S) -> Result<S, RayError> {
        slice.drift(self.layer, self.dir, &self.z, &self.t, t)
    }
}

type EntryKey<S> = (usize, Dir, <S as Scalar>::Key);

/// Principal-symbol amplitudes at one time for one slowness.
///
/// Entries are keyed by terminal covector `(layer, direction, z)`. With the
/// horizontal slowness fixed, contributions that reach the same covector
/// belong to the same plane-wave component and are added.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolVector<S: Scalar> {
    t: S,
    entries: BTreeMap<EntryKey<S>, (S, S)>,
}

impl<S: Scalar> SymbolVector<S> {
    pub fn new(t: S) -> Self {
        SymbolVector { t, entries: BTreeMap::new() }
    }

    /// Unit amplitude on one covector.
    pub fn single(c: &Covector<S>) -> Self {
        let mut v = Self::new(c.t.clone());
        v.add(c.layer, c.dir, c.z.clone(), S::one());
        v
    }

    pub fn time(&self) -> &S {
        &self.t
    }

    pub fn add(&mut self, layer: usize, dir: Dir, z: S, amp: S) {
        let key = (layer, dir, z.key());
        match self.entries.get_mut(&key) {
            Some(e) => e.1 = e.1.clone() + amp,
            None => {
                self.entries.insert(key, (z, amp));
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Dir, &S, &S)> + '_ {
        self.entries.iter().map(|((l, d, _), (z, a))| (*l, *d, z, a))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Amplitude on the covector `(layer, dir, z)`, zero if absent.
    pub fn amplitude(&self, layer: usize, dir: Dir, z: &S) -> S {
        self.entries.get(&(layer, dir, z.key())).map(|e| e.1.clone()).unwrap_or_else(S::zero)
    }

    /// Drops exact zeros.
    pub fn prune(&mut self) {
        self.entries.retain(|_, e| !e.1.is_zero());
    }

    /// `ℓ²` norm squared in energy units.
    pub fn norm_sq(&self, slice: &SlownessModel<S>) -> f64 {
        self.entries.iter().map(|((l, _, _), (_, a))| slice.flux(*l, a)).sum()
    }

    pub fn norm(&self, slice: &SlownessModel<S>) -> f64 {
        self.norm_sq(slice).sqrt()
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (l, d, z, a) in other.iter() {
            out.add(l, d, z.clone(), a.clone());
        }
        out
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (l, d, z, a) in other.iter() {
            out.add(l, d, z.clone(), -a.clone());
        }
        out
    }

    /// Multiplies every amplitude by `f(layer, dir, z)`.
    pub fn weighted(&self, f: impl Fn(usize, Dir, &S) -> S) -> Self {
        let mut out = self.clone();
        for ((l, d, _), (z, a)) in out.entries.iter_mut() {
            *a = a.clone() * f(*l, *d, z);
        }
        out
    }

    pub fn restricted(&self, keep: impl Fn(usize, Dir, &S) -> bool) -> Self {
        let mut out = self.clone();
        out.entries.retain(|(l, d, _), (z, _)| keep(*l, *d, z));
        out
    }

    /// Time reversal: directions flip and the clock restarts at `t`.
    pub fn reversed(&self, t: S) -> Self {
        let mut out = Self::new(t);
        for (l, d, z, a) in self.iter() {
            out.add(l, d.flip(), z.clone(), a.clone());
        }
        out
    }

    pub fn covectors(&self) -> impl Iterator<Item = (Covector<S>, &S)> + '_ {
        self.iter().map(move |(layer, dir, z, a)| {
            (Covector { x: S::zero(), z: z.clone(), t: self.t.clone(), layer, dir }, a)
        })
    }
}

/// A bicharacteristic piece traversed during coherent propagation.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentRecord<S> {
    /// Starts at `bichar.t`, the event (or initial) time.
    pub bichar: Bichar<S>,
    pub t_end: S,
    pub amp: S,
}

pub struct PropagateOptions<'a, S> {
    pub record_segments: bool,
    /// Segments rejected here are dropped together with their descendants.
    pub keep: Option<&'a dyn Fn(&Bichar<S>) -> Result<bool, RayError>>,
    pub max_events: usize,
}

impl<S> Default for PropagateOptions<'_, S> {
    fn default() -> Self {
        PropagateOptions { record_segments: false, keep: None, max_events: 1 << 20 }
    }
}

#[derive(Clone, Debug)]
pub struct Propagation<S: Scalar> {
    pub end: SymbolVector<S>,
    pub segments: Vec<SegmentRecord<S>>,
    pub events: usize,
    pub cut_mass: f64,
    pub truncated_mass: f64,
}

struct Pending<S> {
    time: S,
    above: S,
    below: S,
}

/// Moves a symbol forward by `duration`, scattering at every interface.
///
/// Events are processed in time order so that waves meeting at the same
/// interface and instant from both sides are combined before scattering.
pub fn propagate<S: Scalar>(
    slice: &SlownessModel<S>,
    init: &SymbolVector<S>,
    duration: &S,
    opts: &PropagateOptions<'_, S>,
) -> Result<Propagation<S>, RayError> {
    let t_end = init.time().clone() + duration.clone();
    let mut out = Propagation {
        end: SymbolVector::new(t_end.clone()),
        segments: Vec::new(),
        events: 0,
        cut_mass: 0.0,
        truncated_mass: 0.0,
    };
    let mut queue: BTreeMap<(S::Key, usize), Pending<S>> = BTreeMap::new();

    let launch = |b: Bichar<S>, amp: S, out: &mut Propagation<S>, queue: &mut BTreeMap<(S::Key, usize), Pending<S>>| -> Result<(), RayError> {
        if amp.is_zero() {
            return Ok(());
        }
        if let Some(keep) = opts.keep {
            if !keep(&b)? {
                return Ok(());
            }
        }
        match b.end(slice)? {
            Some((i, te)) if te < t_end => {
                if opts.record_segments {
                    out.segments.push(SegmentRecord { bichar: b.clone(), t_end: te.clone(), amp: amp.clone() });
                }
                let entry = queue
                    .entry((te.key(), i))
                    .or_insert_with(|| Pending { time: te.clone(), above: S::zero(), below: S::zero() });
                if b.dir == Dir::Down {
                    entry.above = entry.above.clone() + amp;
                } else {
                    entry.below = entry.below.clone() + amp;
                }
            }
            _ => {
                let z = b.at(slice, &t_end)?;
                if opts.record_segments {
                    out.segments.push(SegmentRecord { bichar: b.clone(), t_end: t_end.clone(), amp: amp.clone() });
                }
                out.end.add(b.layer, b.dir, z, amp);
            }
        }
        Ok(())
    };

    for (layer, dir, z, a) in init.iter() {
        slice.vz(layer)?;
        launch(Bichar { layer, dir, z: z.clone(), t: init.time().clone() }, a.clone(), &mut out, &mut queue)?;
    }

    while let Some(((_, i), p)) = queue.pop_first() {
        out.events += 1;
        let arriving = slice.flux(i, &p.above) + slice.flux(i + 1, &p.below);
        if out.events > opts.max_events {
            out.truncated_mass += arriving;
            continue;
        }
        let sc = slice.scatter(i);
        if sc.blocked {
            out.cut_mass += arriving;
            continue;
        }
        let zi = slice.interface_z(i).clone();
        if slice.layer(i).propagating() {
            let up = sc.r_down.clone() * p.above.clone() + sc.t_up.clone() * p.below.clone();
            launch(Bichar { layer: i, dir: Dir::Up, z: zi.clone(), t: p.time.clone() }, up, &mut out, &mut queue)?;
        }
        if slice.layer(i + 1).propagating() {
            let down = sc.t_down.clone() * p.above + sc.r_up.clone() * p.below;
            launch(Bichar { layer: i + 1, dir: Dir::Down, z: zi, t: p.time }, down, &mut out, &mut queue)?;
        }
    }
    Ok(out)
}

/// `r̃ = ν R_{2T}`: propagate over `2T`, then reverse time.
pub fn reflect<S: Scalar>(slice: &SlownessModel<S>, v: &SymbolVector<S>, two_t: &S, max_events: usize) -> Result<(SymbolVector<S>, f64), RayError> {
    let opts = PropagateOptions { max_events, ..Default::default() };
    let p = propagate(slice, v, two_t, &opts)?;
    Ok((p.end.reversed(v.time().clone()), p.cut_mass + p.truncated_mass))
}
