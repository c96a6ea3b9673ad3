use crate::{Bichar, Dir, Event, RayError, Scalar, SlownessModel};

/// Witness for `(±)`-escapability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// Outside `Θ` at `t = 2T` (plus) or `t = 0` (minus).
    Escaped,
    /// Every connecting bicharacteristic escapes, listed by event kind.
    Connecting(Vec<(Event, Certificate)>),
    /// The connecting bicharacteristic reached by `via` escapes in the
    /// same sense and the opposite one escapes in the other sense.
    Core { via: Event, same: Box<Certificate>, opposite: Box<Certificate> },
}

impl Certificate {
    /// Number of nodes in the recursion tree.
    pub fn size(&self) -> usize {
        match self {
            Certificate::Escaped => 1,
            Certificate::Connecting(v) => 1 + v.iter().map(|(_, c)| c.size()).sum::<usize>(),
            Certificate::Core { same, opposite, .. } => 1 + same.size() + opposite.size(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub plus: Option<Certificate>,
    pub minus: Option<Certificate>,
    pub returning: bool,
}

/// The bicharacteristics meeting `b` at one end.
///
/// At the far end (`forward`) these are the reflected and transmitted
/// outgoing pieces and the opposite incoming one. At the near end they are
/// the incoming pieces that reflect or transmit into `b` and the other
/// outgoing piece.
pub(crate) struct Junction<S> {
    pub interface: usize,
    pub time: S,
    pub reflected: Bichar<S>,
    /// `None` under total reflection.
    pub transmitted: Option<Bichar<S>>,
    pub opposite: Option<Bichar<S>>,
    /// Coefficients for waves arriving on `b`'s side of the interface.
    pub r_same: S,
    pub t_same: S,
    /// Coefficients for waves arriving from the other side.
    pub r_other: S,
    pub t_other: S,
    pub blocked: bool,
}

pub(crate) fn junction<S: Scalar>(slice: &SlownessModel<S>, b: &Bichar<S>, forward: bool) -> Result<Option<Junction<S>>, RayError> {
    let ev = if forward { b.end(slice)? } else { b.start(slice)? };
    let Some((i, time)) = ev else { return Ok(None) };
    let zi = slice.interface_z(i).clone();
    let sc = slice.scatter(i);
    // `b` sits above the interface when it is layer `i`.
    let above = b.layer == i;
    let other = if above { i + 1 } else { i };
    let (r_same, t_same, r_other, t_other) = if above {
        (sc.r_down.clone(), sc.t_down.clone(), sc.r_up.clone(), sc.t_up.clone())
    } else {
        (sc.r_up.clone(), sc.t_up.clone(), sc.r_down.clone(), sc.t_down.clone())
    };
    let mk = |layer, dir| Bichar { layer, dir, z: zi.clone(), t: time.clone() };
    let other_ok = slice.layer(other).propagating();
    // Forward: outgoing R flips direction in the same layer, T keeps it in
    // the other layer, and the opposite incoming runs in the other layer
    // against b's direction. Backward the roles of incoming and outgoing
    // swap but the geometry is the same.
    let j = Junction {
        interface: i,
        time: time.clone(),
        reflected: mk(b.layer, b.dir.flip()),
        transmitted: other_ok.then(|| mk(other, b.dir)),
        opposite: other_ok.then(|| mk(other, b.dir.flip())),
        r_same,
        t_same,
        r_other,
        t_other,
        blocked: sc.blocked,
    };
    Ok(Some(j))
}

pub(crate) struct Escapability<'a, S> {
    pub slice: &'a SlownessModel<S>,
    pub t_ctrl: S,
    pub max_depth: usize,
    pub overflow: bool,
}

impl<S: Scalar> Escapability<'_, S> {
    fn two_t(&self) -> S {
        self.t_ctrl.clone() + self.t_ctrl.clone()
    }

    pub fn plus(&mut self, b: &Bichar<S>, depth: usize) -> Result<Option<Certificate>, RayError> {
        self.escapable(b, depth, true)
    }

    pub fn minus(&mut self, b: &Bichar<S>, depth: usize) -> Result<Option<Certificate>, RayError> {
        self.escapable(b, depth, false)
    }

    fn escapable(&mut self, b: &Bichar<S>, depth: usize, plus: bool) -> Result<Option<Certificate>, RayError> {
        let horizon = if plus { self.two_t() } else { S::zero() };
        let j = junction(self.slice, b, plus)?;
        let defined_at_horizon = match &j {
            None => true,
            Some(j) => {
                if plus {
                    j.time >= horizon
                } else {
                    j.time <= horizon
                }
            }
        };
        if defined_at_horizon {
            let z = b.at(self.slice, &horizon)?;
            return Ok((!self.slice.model().inside_theta(&z)).then_some(Certificate::Escaped));
        }
        let j = j.expect("event inside the window");
        if j.blocked {
            return Ok(None);
        }
        if depth >= self.max_depth {
            self.overflow = true;
            return Ok(None);
        }
        // Backward, the pieces feeding b by reflection and by transmission
        // have the geometry of the forward reflected and transmitted ones,
        // and the other outgoing piece that of the opposite incoming one.
        let (conn_r, conn_t, opp) = (j.reflected.clone(), j.transmitted.clone(), j.opposite.clone());
        // Case ii: every connecting piece escapes in the same sense.
        let cr = self.escapable(&conn_r, depth + 1, plus)?;
        let ct = match &conn_t {
            Some(t) => Some(self.escapable(t, depth + 1, plus)?),
            None => None,
        };
        match (&cr, &ct) {
            (Some(r), Some(Some(t))) => {
                return Ok(Some(Certificate::Connecting(vec![(Event::R, r.clone()), (Event::T, t.clone())])));
            }
            (Some(r), None) => return Ok(Some(Certificate::Connecting(vec![(Event::R, r.clone())]))),
            _ => {}
        }
        // Case iii, transmission first: its coefficient never vanishes.
        let Some(opp) = opp else { return Ok(None) };
        if let Some(Some(t)) = &ct {
            if let Some(o) = self.escapable(&opp, depth + 1, !plus)? {
                return Ok(Some(Certificate::Core { via: Event::T, same: Box::new(t.clone()), opposite: Box::new(o) }));
            }
        }
        // A reflection route needs a jump in c, i.e. a nonzero coefficient.
        let r_coef = if plus { &j.r_other } else { &j.r_same };
        if let Some(r) = &cr {
            if !r_coef.negligible() {
                if let Some(o) = self.escapable(&opp, depth + 1, !plus)? {
                    return Ok(Some(Certificate::Core { via: Event::R, same: Box::new(r.clone()), opposite: Box::new(o) }));
                }
            }
        }
        Ok(None)
    }

    /// Leaves the backward domain of influence `D⁻` before `t = T`.
    pub fn returning(&self, b: &Bichar<S>) -> Result<bool, RayError> {
        if b.dir == Dir::Down {
            // Depth and time grow together along a downgoing piece.
            return Ok(false);
        }
        let slice = self.slice;
        let t0 = match b.start(slice)? {
            Some((_, ts)) if ts > S::zero() => ts,
            _ => S::zero(),
        };
        let t1 = match b.end(slice)? {
            Some((_, te)) if te < self.t_ctrl => te,
            _ => self.t_ctrl.clone(),
        };
        if t0 >= t1 {
            return Ok(false);
        }
        let inner = slice.model().inner();
        let d0 = slice.travel_depth(&b.at(slice, &t0)?, inner);
        let d1 = slice.travel_depth(&b.at(slice, &t1)?, inner);
        Ok(d0.exceeds(&t0) && !d1.exceeds(&t1))
    }
}

/// Escapability of one bicharacteristic for control time `T`.
///
/// `max_depth` bounds the recursion; running into it without finding a
/// certificate is reported as [`RayError::Unclassified`].
pub fn classify_escapable<S: Scalar>(
    slice: &SlownessModel<S>,
    b: &Bichar<S>,
    t_ctrl: &S,
    max_depth: usize,
) -> Result<Classification, RayError> {
    let mut e = Escapability { slice, t_ctrl: t_ctrl.clone(), max_depth, overflow: false };
    let plus = e.plus(b, 0)?;
    let minus = e.minus(b, 0)?;
    let returning = e.returning(b)?;
    if e.overflow && (plus.is_none() || minus.is_none()) {
        return Err(RayError::Unclassified { layer: b.layer, time: b.t.approx(), z: b.z.approx() });
    }
    Ok(Classification { plus, minus, returning })
}
