use crate::{Covector, Depth, Dir, Event, RayError, Scalar, SlownessModel};

/// One bicharacteristic piece of a broken ray, between two events.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment<S> {
    pub start: Covector<S>,
    pub end: Covector<S>,
    pub duration: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayEvent<S> {
    pub kind: Event,
    pub interface: usize,
    pub time: S,
    /// Amplitude carried away from the event.
    pub amplitude: S,
}

/// Why a traced ray stops.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RayEnd {
    /// Reached the end of the time window.
    Window,
    /// Event budget used up at the next interface.
    Budget,
    /// Next interface borders a glancing layer.
    Glancing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BrokenRay<S> {
    pub segments: Vec<Segment<S>>,
    pub events: Vec<RayEvent<S>>,
    /// Product of the event coefficients.
    pub amplitude: S,
    pub alive: bool,
    pub end: RayEnd,
}

impl<S: Scalar> BrokenRay<S> {
    pub fn code(&self) -> Vec<Event> {
        self.events.iter().map(|e| e.kind).collect()
    }

    pub fn code_string(&self) -> String {
        self.events.iter().map(|e| if e.kind == Event::R { 'R' } else { 'T' }).collect()
    }

    pub fn elapsed(&self) -> S {
        self.segments.iter().fold(S::zero(), |acc, s| acc + s.duration.clone())
    }

    /// `(time, depth)` at the segment end points, depth measured from the
    /// plane `z = boundary`. Each piece has slope ±1.
    pub fn depth_profile(&self, slice: &SlownessModel<S>, boundary: &S) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        for (i, s) in self.segments.iter().enumerate() {
            if i == 0 {
                out.push((s.start.t.approx(), slice.travel_depth(&s.start.z, boundary).approx()));
            }
            out.push((s.end.t.approx(), slice.travel_depth(&s.end.z, boundary).approx()));
        }
        out
    }
}

/// All broken rays from `eta` up to time `t_end` with at most
/// `max_events` reflections or transmissions each.
#[derive(Clone, Debug)]
pub struct RayTrace<S> {
    pub rays: Vec<BrokenRay<S>>,
    /// Energy still travelling when the event budget ran out.
    pub truncated_mass: f64,
    /// Energy removed at glancing interfaces.
    pub cut_mass: f64,
}

impl<S: Scalar> RayTrace<S> {
    /// `Σ amplitude²` in energy units over the traced rays.
    pub fn total_mass(&self, slice: &SlownessModel<S>) -> f64 {
        self.rays
            .iter()
            .map(|r| {
                let layer = r.segments.last().map(|s| s.end.layer).unwrap_or(0);
                slice.flux(layer, &r.amplitude)
            })
            .sum()
    }
}

pub fn trace_rays<S: Scalar>(
    slice: &SlownessModel<S>,
    eta: &Covector<S>,
    t_end: &S,
    max_events: usize,
) -> Result<RayTrace<S>, RayError> {
    slice.vz(eta.layer)?;
    if eta.t > *t_end {
        return Err(RayError::Model("window ends before the start covector".into()));
    }
    let mut out = RayTrace { rays: Vec::new(), truncated_mass: 0.0, cut_mass: 0.0 };
    let mut stack = vec![(eta.clone(), S::one(), Vec::new(), Vec::new())];
    while let Some((cur, amp, segments, events)) = stack.pop() {
        let next = slice.next_event(cur.layer, cur.dir, &cur.z, &cur.t)?;
        let vx = slice.layer(cur.layer).vx.clone();
        let stop_at = match &next {
            Some((_, te)) if te < t_end => te.clone(),
            _ => t_end.clone(),
        };
        let duration = stop_at.clone() - cur.t.clone();
        let end = Covector {
            x: cur.x.clone() + vx * duration.clone(),
            z: slice.drift(cur.layer, cur.dir, &cur.z, &cur.t, &stop_at)?,
            t: stop_at.clone(),
            layer: cur.layer,
            dir: cur.dir,
        };
        let mut segments: Vec<Segment<S>> = segments;
        segments.push(Segment { start: cur.clone(), end: end.clone(), duration });

        let (i, te) = match next {
            Some((i, te)) if te < *t_end => (i, te),
            _ => {
                out.rays.push(BrokenRay { segments, events, amplitude: amp, alive: true, end: RayEnd::Window });
                continue;
            }
        };
        let sc = slice.scatter(i);
        let finish = |end_kind: RayEnd, out: &mut RayTrace<S>, segments: Vec<Segment<S>>, events: Vec<RayEvent<S>>| {
            out.rays.push(BrokenRay { segments, events, amplitude: amp.clone(), alive: false, end: end_kind });
        };
        if sc.blocked {
            out.cut_mass += slice.flux(cur.layer, &amp);
            finish(RayEnd::Glancing, &mut out, segments, events);
            continue;
        }
        if events.len() >= max_events {
            out.truncated_mass += slice.flux(cur.layer, &amp);
            finish(RayEnd::Budget, &mut out, segments, events);
            continue;
        }
        let from_above = cur.dir == Dir::Down;
        let (r, t) = if from_above { (&sc.r_down, &sc.t_down) } else { (&sc.r_up, &sc.t_up) };
        let other = if from_above { i + 1 } else { i };
        let branches = [(Event::T, other, cur.dir, t), (Event::R, cur.layer, cur.dir.flip(), r)];
        for (kind, layer, dir, coef) in branches {
            if !slice.layer(layer).propagating() || coef.is_zero() {
                continue;
            }
            let a = amp.clone() * coef.clone();
            let mut ev = events.clone();
            ev.push(RayEvent { kind, interface: i, time: te.clone(), amplitude: a.clone() });
            let start = Covector { x: end.x.clone(), z: slice.interface_z(i).clone(), t: te.clone(), layer, dir };
            stack.push((start, a, segments.clone(), ev));
        }
    }
    Ok(out)
}

/// Shortest broken-ray time from `eta` to the plane `z = boundary`, signed
/// positive below it.
///
/// Rays may run forward or backward in time; in flat layers the backward
/// continuation is the forward one with the direction flipped, so the
/// search starts in both directions and may leave every interface into
/// either neighbouring layer that propagates. Paths use at most
/// `max_events` interface crossings or reflections.
pub fn cotangent_depth<S: Scalar>(
    slice: &SlownessModel<S>,
    eta: &Covector<S>,
    boundary: &S,
    max_events: usize,
) -> Result<Depth<S>, RayError> {
    slice.vz(eta.layer)?;
    let inside = eta.z > *boundary;
    let zs = slice.model().interfaces();
    let mut best: Option<S> = None;
    let mut overflow = false;
    // Frontier of (interface, events used, elapsed time).
    let mut frontier: Vec<(usize, usize, S)> = Vec::new();
    let mut settled: Vec<(usize, usize)> = Vec::new();

    let consider = |best: &mut Option<S>, t: S| {
        if best.as_ref().map_or(true, |b| t < *b) {
            *best = Some(t);
        }
    };
    let crosses = |layer: usize, from: &S, dir: Dir| -> bool {
        // Whether moving from `from` in `dir` inside `layer` meets the plane
        // before leaving the layer.
        let lo = if layer == 0 { None } else { Some(&zs[layer - 1]) };
        let hi = zs.get(layer);
        match dir {
            Dir::Down => boundary > from && hi.map_or(true, |h| boundary < h),
            Dir::Up => boundary < from && lo.map_or(true, |l| boundary > l),
        }
    };

    for dir in [Dir::Up, Dir::Down] {
        let v = slice.vz(eta.layer)?.clone();
        if crosses(eta.layer, &eta.z, dir) {
            consider(&mut best, (boundary.clone() - eta.z.clone()).abs() / v);
            continue;
        }
        if let Some((i, te)) = slice.next_event(eta.layer, dir, &eta.z, &S::zero())? {
            if max_events == 0 {
                overflow = true;
            } else {
                frontier.push((i, 1, te));
            }
        }
    }

    loop {
        let pos = frontier
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .2.partial_cmp(&b.1 .2).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(k, _)| k);
        let Some(pos) = pos else { break };
        let (i, k, t) = frontier.swap_remove(pos);
        if best.as_ref().map_or(false, |b| t >= *b) {
            break;
        }
        if settled.contains(&(i, k)) {
            continue;
        }
        settled.push((i, k));
        if slice.scatter(i).blocked {
            continue;
        }
        let zi = &zs[i];
        for (layer, dir) in [(i, Dir::Up), (i + 1, Dir::Down)] {
            let l = slice.layer(layer);
            if !l.propagating() {
                continue;
            }
            let v = l.vz.clone().expect("propagating layer");
            if crosses(layer, zi, dir) {
                consider(&mut best, t.clone() + (boundary.clone() - zi.clone()).abs() / v);
                continue;
            }
            if let Some((j, te)) = slice.next_event(layer, dir, zi, &t)? {
                if k + 1 > max_events {
                    overflow = true;
                } else {
                    frontier.push((j, k + 1, te));
                }
            }
        }
    }
    match best {
        Some(d) => Ok(Depth::Finite(if inside { d } else { -d })),
        None if overflow => Err(RayError::Budget { truncated_mass: f64::NAN }),
        None => Ok(if inside { Depth::Inside } else { Depth::Outside }),
    }
}
