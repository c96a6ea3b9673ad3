use crate::escape::{junction, Escapability, Junction};
use crate::symbol::{propagate, PropagateOptions};
use crate::{Bichar, Certificate, Event, RayError, Scalar, SlownessModel, SymbolVector};

/// A returning bicharacteristic met while building the tail.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturningPiece<S> {
    pub bichar: Bichar<S>,
    pub amplitude: S,
    pub certificate: Certificate,
}

#[derive(Clone, Debug)]
pub struct ConstructiveTail<S: Scalar> {
    /// Cauchy-data symbol at `t = 0`, supported outside `Θ`.
    pub tail: SymbolVector<S>,
    pub returning: Vec<ReturningPiece<S>>,
}

impl<S: Scalar> ConstructiveTail<S> {
    /// `A h0 = h0 + tail`.
    pub fn total(&self, h0: &SymbolVector<S>) -> SymbolVector<S> {
        h0.plus(&self.tail)
    }
}

struct Builder<'a, S: Scalar> {
    esc: Escapability<'a, S>,
    tail: SymbolVector<S>,
}

impl<S: Scalar> Builder<'_, S> {
    fn slice(&self) -> &SlownessModel<S> {
        self.esc.slice
    }

    fn junction_at_end(&self, b: &Bichar<S>, forward: bool) -> Result<Junction<S>, RayError> {
        junction(self.slice(), b, forward)?.ok_or_else(|| RayError::Model("certificate expects an event".into()))
    }

    fn divide(&self, a: S, d: &S, what: &'static str, j: &Junction<S>) -> Result<S, RayError> {
        if d.negligible() {
            return Err(RayError::NearZero { what, interface: j.interface, time: j.time.approx() });
        }
        Ok(a / d.clone())
    }

    /// Tail making amplitude `a` on `b` leave without reaching `D⁺`.
    fn xi_plus(&mut self, b: &Bichar<S>, a: S, cert: &Certificate) -> Result<(), RayError> {
        let j = match cert {
            Certificate::Escaped => return Ok(()),
            _ => self.junction_at_end(b, true)?,
        };
        let transmitted = || j.transmitted.clone().ok_or_else(|| RayError::Model("no transmitted piece".into()));
        let opposite = || j.opposite.clone().ok_or_else(|| RayError::Model("no opposite piece".into()));
        match cert {
            Certificate::Escaped => unreachable!(),
            Certificate::Connecting(parts) => {
                for (ev, c) in parts {
                    match ev {
                        Event::R => self.xi_plus(&j.reflected, a.clone() * j.r_same.clone(), c)?,
                        Event::T => self.xi_plus(&transmitted()?, a.clone() * j.t_same.clone(), c)?,
                    }
                }
            }
            Certificate::Core { via: Event::T, same, opposite: oc } => {
                // Cancel the reflected piece with the opposite wave's
                // transmission; the transmitted piece keeps the rest.
                let b_opp = -self.divide(j.r_same.clone() * a.clone(), &j.t_other, "transmission", &j)?;
                let out = j.t_same.clone() * a + j.r_other.clone() * b_opp.clone();
                self.xi_minus(&opposite()?, b_opp, oc)?;
                self.xi_plus(&transmitted()?, out, same)?;
            }
            Certificate::Core { via: Event::R, same, opposite: oc } => {
                let b_opp = -self.divide(j.t_same.clone() * a.clone(), &j.r_other, "reflection", &j)?;
                let out = j.r_same.clone() * a + j.t_other.clone() * b_opp.clone();
                self.xi_minus(&opposite()?, b_opp, oc)?;
                self.xi_plus(&j.reflected, out, same)?;
            }
        }
        Ok(())
    }

    /// Tail producing amplitude `a` on `b` without touching `D⁺`.
    fn xi_minus(&mut self, b: &Bichar<S>, a: S, cert: &Certificate) -> Result<(), RayError> {
        if let Certificate::Escaped = cert {
            let z = b.at(self.slice(), &S::zero())?;
            self.tail.add(b.layer, b.dir, z, a);
            return Ok(());
        }
        // Backward junction: `reflected` feeds b by reflection from b's
        // side, `transmitted` feeds it from the other side, `opposite` is
        // the other outgoing piece.
        let j = self.junction_at_end(b, false)?;
        match cert {
            Certificate::Escaped => unreachable!(),
            Certificate::Connecting(parts) if parts.len() == 1 => {
                let a_same = self.divide(a, &j.r_same, "reflection", &j)?;
                self.xi_minus(&j.reflected, a_same, &parts[0].1)?;
            }
            Certificate::Connecting(parts) => {
                // Solve the 2×2 block so that b receives `a` and the other
                // outgoing piece receives nothing.
                let det = j.r_same.clone() * j.r_other.clone() - j.t_same.clone() * j.t_other.clone();
                let a_same = self.divide(a.clone() * j.r_other.clone(), &det, "scattering determinant", &j)?;
                let a_other = -self.divide(a * j.t_same.clone(), &det, "scattering determinant", &j)?;
                let feed = j.transmitted.clone().ok_or_else(|| RayError::Model("no transmitted piece".into()))?;
                for (ev, c) in parts {
                    match ev {
                        Event::R => self.xi_minus(&j.reflected, a_same.clone(), c)?,
                        Event::T => self.xi_minus(&feed, a_other.clone(), c)?,
                    }
                }
            }
            Certificate::Core { via, same, opposite: oc } => {
                let other_out = j.opposite.clone().ok_or_else(|| RayError::Model("no opposite piece".into()))?;
                match via {
                    Event::T => {
                        let a_other = self.divide(a, &j.t_other, "transmission", &j)?;
                        let leak = j.r_other.clone() * a_other.clone();
                        let feed = j.transmitted.clone().ok_or_else(|| RayError::Model("no transmitted piece".into()))?;
                        self.xi_minus(&feed, a_other, same)?;
                        self.xi_plus(&other_out, leak, oc)?;
                    }
                    Event::R => {
                        let a_same = self.divide(a, &j.r_same, "reflection", &j)?;
                        let leak = j.t_same.clone() * a_same.clone();
                        self.xi_minus(&j.reflected, a_same, same)?;
                        self.xi_plus(&other_out, leak, oc)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Follows `b` until the first returning piece on every branch.
    fn walk(&mut self, b: &Bichar<S>, a: S, found: &mut Vec<ReturningPiece<S>>) -> Result<(), RayError> {
        if self.esc.returning(b)? {
            let cert = self.esc.plus(b, 0)?.ok_or_else(|| RayError::NotEscapable {
                layer: b.layer,
                dir: b.dir,
                time: b.t.approx(),
                z: b.z.approx(),
            })?;
            self.xi_plus(b, a.clone(), &cert)?;
            found.push(ReturningPiece { bichar: b.clone(), amplitude: a, certificate: cert });
            return Ok(());
        }
        let two_t = self.esc.t_ctrl.clone() + self.esc.t_ctrl.clone();
        let Some(j) = junction(self.slice(), b, true)? else { return Ok(()) };
        if j.time >= two_t {
            return Ok(());
        }
        if j.blocked {
            let i = j.interface;
            let layer = if self.slice().layer(i).glancing { i } else { i + 1 };
            return Err(RayError::Glancing { layer });
        }
        if let Some(t) = j.transmitted.clone() {
            self.walk(&t, a.clone() * j.t_same.clone(), found)?;
        }
        self.walk(&j.reflected.clone(), a * j.r_same.clone(), found)
    }
}

/// Tail of `A h0` from the recursive construction.
///
/// Each returning piece along the broken rays of `h0` is paired with its
/// `(+)` certificate; the certificate then dictates which incoming waves
/// to add (divisions by a reflection or transmission coefficient, or the
/// inverse of a whole scattering block) until every branch ends outside
/// `Θ`. Fails when some returning piece is not `(+)`-escapable.
pub fn constructive_tail<S: Scalar>(
    slice: &SlownessModel<S>,
    h0: &SymbolVector<S>,
    t_ctrl: &S,
    max_depth: usize,
) -> Result<ConstructiveTail<S>, RayError> {
    if !h0.time().is_zero() {
        return Err(RayError::Model("h0 must be given at t = 0".into()));
    }
    let mut builder = Builder {
        esc: Escapability { slice, t_ctrl: t_ctrl.clone(), max_depth, overflow: false },
        tail: SymbolVector::new(S::zero()),
    };
    let mut found = Vec::new();
    for (c, a) in h0.covectors() {
        builder.walk(&Bichar::through(&c), a.clone(), &mut found)?;
    }
    let mut tail = builder.tail;
    tail.prune();
    Ok(ConstructiveTail { tail, returning: found })
}

/// Result of checking that `h0 + tail` isolates the direct transmission.
#[derive(Clone, Debug)]
pub struct IsolationCheck<S> {
    /// `Σ (a_total − a_direct)²` over pieces meeting `D⁺`.
    pub residual: S,
    /// Pieces in `D⁺` where the two fields differ.
    pub contaminated: usize,
    /// Pieces of the direct family inside `D⁺`.
    pub direct_pieces: usize,
}

fn in_d_plus<S: Scalar>(slice: &SlownessModel<S>, b: &Bichar<S>, t_end: &S, t_ctrl: &S) -> Result<bool, RayError> {
    let two_t = t_ctrl.clone() + t_ctrl.clone();
    let lo = if b.t > *t_ctrl { b.t.clone() } else { t_ctrl.clone() };
    let hi = if *t_end < two_t { t_end.clone() } else { two_t.clone() };
    if lo > hi {
        return Ok(false);
    }
    let inner = slice.model().inner();
    for t in [lo, hi] {
        let z = b.at(slice, &t)?;
        if slice.travel_depth(&z, inner).exceeds(&(two_t.clone() - t)) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Propagates `h0 + tail` over `[0, 2T]` and compares it inside `D⁺` with
/// the broken rays of `h0` that never return.
pub fn isolation_residual<S: Scalar>(
    slice: &SlownessModel<S>,
    h0: &SymbolVector<S>,
    tail: &SymbolVector<S>,
    t_ctrl: &S,
) -> Result<IsolationCheck<S>, RayError> {
    let two_t = t_ctrl.clone() + t_ctrl.clone();
    let total = propagate(slice, &h0.plus(tail), &two_t, &PropagateOptions { record_segments: true, ..Default::default() })?;
    let esc = Escapability { slice, t_ctrl: t_ctrl.clone(), max_depth: 0, overflow: false };
    let keep = |b: &Bichar<S>| esc.returning(b).map(|r| !r);
    let direct = propagate(slice, h0, &two_t, &PropagateOptions { record_segments: true, keep: Some(&keep), ..Default::default() })?;

    type Key<S> = (usize, crate::Dir, <S as Scalar>::Key, <S as Scalar>::Key);
    let mut pieces: std::collections::BTreeMap<Key<S>, (Bichar<S>, S, S, S)> = std::collections::BTreeMap::new();
    for (run, segs) in [(0, &total.segments), (1, &direct.segments)] {
        for s in segs {
            let key = (s.bichar.layer, s.bichar.dir, s.bichar.t.key(), s.bichar.z.key());
            let e = pieces
                .entry(key)
                .or_insert_with(|| (s.bichar.clone(), s.t_end.clone(), S::zero(), S::zero()));
            if run == 0 {
                e.2 = e.2.clone() + s.amp.clone();
            } else {
                e.3 = e.3.clone() + s.amp.clone();
            }
        }
    }
    let mut check = IsolationCheck { residual: S::zero(), contaminated: 0, direct_pieces: 0 };
    for (b, t_end, a_total, a_direct) in pieces.values() {
        if !in_d_plus(slice, b, t_end, t_ctrl)? {
            continue;
        }
        if !a_direct.is_zero() {
            check.direct_pieces += 1;
        }
        let d = a_total.clone() - a_direct.clone();
        if !d.is_zero() {
            check.contaminated += 1;
            check.residual = check.residual.clone() + d.clone() * d;
        }
    }
    Ok(check)
}
