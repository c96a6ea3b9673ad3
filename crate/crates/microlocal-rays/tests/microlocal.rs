use microlocal_rays::*;
use num::{BigInt, BigRational, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---------------------------------------------------------------- coefficients

#[test]
fn equal_speeds_give_no_reflection() {
    let rt = rt_coefficients(1.3, 1.3, 0.4, 2.0).unwrap();
    assert!(rt.r.norm() < 1e-15);
    assert!(close(rt.t.re, 1.0, 1e-15));
    assert!(close(rt.t_energy, 1.0, 1e-15));
}

#[test]
fn normal_incidence_from_slow_to_fast() {
    let rt = rt_coefficients(1.0, 2.0, 0.0, 2.0).unwrap();
    assert!(close(rt.r.re, 1.0 / 3.0, 1e-15));
    assert!(close(rt.t.re, 4.0 / 3.0, 1e-15));
    assert!(close(rt.t_energy, 8f64.sqrt() / 3.0, 1e-15));
    // Pressure flux: r²/c₁ + t²/c₂ = 1/c₁.
    assert!(close(rt.r.re.powi(2) / 1.0 + rt.t.re.powi(2) / 2.0, 1.0, 1e-12));
    assert!(close(rt.r_energy.powi(2) + rt.t_energy.powi(2), 1.0, 1e-12));
}

#[test]
fn supercritical_slowness_reflects_totally() {
    let rt = rt_coefficients(1.0, 2.0, 0.9, 2.0).unwrap();
    assert!(rt.evanescent);
    assert!(close(rt.r.norm(), 1.0, 1e-14));
    assert_eq!(rt.t_energy, 0.0);
    assert!(rt.q_out.im > 0.0);
}

#[test]
fn glancing_slowness_is_refused() {
    // Critical slowness for c_out = 2 is 0.5.
    assert!(matches!(rt_coefficients(1.0, 2.0, 0.4999, 2.0), Err(RayError::Glancing { layer: 1 })));
    assert!(matches!(rt_coefficients(1.0, 2.0, 1.2, 2.0), Err(RayError::Evanescent { layer: 0 })));
}

#[test]
fn flux_is_conserved_for_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 500 {
        let c1: f64 = rng.gen_range(0.3..3.0);
        let c2: f64 = rng.gen_range(0.3..3.0);
        let p: f64 = rng.gen_range(0.0..1.0 / c1.max(c2));
        let Ok(rt) = rt_coefficients(c1, c2, p, 2.0) else { continue };
        let q1 = rt.q_in;
        let q2 = rt.q_out.re;
        assert!(close(rt.r.re.powi(2) * q1 + rt.t.re.powi(2) * q2, q1, 1e-12 * q1.max(1.0)));
        assert!(close(rt.r_energy.powi(2) + rt.t_energy.powi(2), 1.0, 1e-12));
        checked += 1;
    }
}

#[test]
fn energy_blocks_are_orthogonal() {
    let model = LayeredModel::new(vec![-0.4, 0.3, 1.1], vec![1.0, 1.7, 0.6, 1.2], 0.0).unwrap();
    for p in [0.0, 0.1, 0.3, 0.45] {
        let slice = Slowness64::new(&model, p, 2.0);
        let sm = LayeredScatteringMatrix::new(&slice);
        assert!(sm.orthogonality_defect() < 1e-12, "p = {p}");
    }
}

// ---------------------------------------------------------------- broken rays

fn down_at(slice: &Slowness64, z: f64) -> Covector<f64> {
    Covector::new(slice, 0.0, z, 0.0, Dir::Down).unwrap()
}

#[test]
fn no_interfaces_gives_one_unbroken_ray() {
    let model = Model64::new(vec![], vec![1.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 0.3, 2.0);
    let tr = trace_rays(&slice, &down_at(&slice, 0.5), &4.0, 10).unwrap();
    assert_eq!(tr.rays.len(), 1);
    assert_eq!(tr.rays[0].code_string(), "");
    assert_eq!(tr.rays[0].amplitude, 1.0);
    assert!(close(tr.rays[0].elapsed(), 4.0, 1e-15));
    // Horizontal drift at c² p.
    assert!(close(tr.rays[0].segments[0].end.x, 1.2, 1e-14));
}

#[test]
fn one_interface_splits_into_reflection_and_transmission() {
    let model = Model64::new(vec![1.0], vec![1.0, 2.0], 0.0).unwrap();
    let p = 0.3;
    let slice = Slowness64::new(&model, p, 2.0);
    let tr = trace_rays(&slice, &down_at(&slice, 0.5), &3.0, 10).unwrap();
    let rt = rt_coefficients(1.0, 2.0, p, 2.0).unwrap();
    let codes: BTreeMap<String, f64> = tr.rays.iter().map(|r| (r.code_string(), r.amplitude)).collect();
    assert_eq!(codes.len(), 2);
    assert!(close(codes["R"], rt.r_energy, 1e-14));
    assert!(close(codes["T"], rt.t_energy, 1e-14));
    for ray in &tr.rays {
        assert!(close(ray.elapsed(), 3.0, 1e-14));
        // Snell: every segment keeps the same slowness, so the horizontal
        // advance is c² p times the duration in each layer.
        for s in &ray.segments {
            let c = model.speeds()[s.start.layer];
            assert!(close(s.end.x - s.start.x, c * c * p * s.duration, 1e-14));
        }
    }
}

/// Walks one explicit event code and reports where it ends.
fn brute_force_walk(
    zs: &[f64],
    cs: &[f64],
    p: f64,
    start: (usize, Dir, f64),
    code: &[Event],
    t_end: f64,
) -> Option<(f64, bool)> {
    let vz = |k: usize| cs[k] * cs[k] * (1.0 / (cs[k] * cs[k]) - p * p).sqrt();
    let (mut layer, mut dir, mut z) = start;
    let mut t = 0.0;
    let mut amp = 1.0;
    let next = |layer: usize, dir: Dir, z: f64| -> Option<(usize, f64)> {
        match dir {
            Dir::Down if layer < zs.len() => Some((layer, (zs[layer] - z) / vz(layer))),
            Dir::Up if layer > 0 => Some((layer - 1, (z - zs[layer - 1]) / vz(layer))),
            _ => None,
        }
    };
    for ev in code {
        let (i, dt) = next(layer, dir, z)?;
        if t + dt >= t_end {
            return None;
        }
        t += dt;
        z = zs[i];
        let other = if layer == i { i + 1 } else { i };
        let rt = rt_coefficients(cs[layer], cs[other], p, 0.0).ok()?;
        match ev {
            Event::R => {
                amp *= rt.r_energy;
                dir = dir.flip();
            }
            Event::T => {
                amp *= rt.t_energy;
                layer = other;
            }
        }
    }
    let more = next(layer, dir, z).map_or(false, |(_, dt)| t + dt < t_end);
    Some((amp, more))
}

#[test]
fn two_interface_codes_match_exhaustive_enumeration() {
    let zs = [1.0, 1.6];
    let cs = [1.0, 2.0, 1.5];
    let p = 0.2;
    let model = Model64::new(zs.to_vec(), cs.to_vec(), 0.0).unwrap();
    let slice = Slowness64::new(&model, p, 2.0);
    for (max_events, t_end) in [(2, 4.0), (3, 5.0), (5, 9.0)] {
        let tr = trace_rays(&slice, &down_at(&slice, 0.5), &t_end, max_events).unwrap();
        let traced: BTreeMap<String, f64> = tr.rays.iter().map(|r| (r.code_string(), r.amplitude)).collect();
        assert_eq!(traced.len(), tr.rays.len(), "codes are unique per ray");

        let mut oracle = BTreeMap::new();
        let mut codes: BTreeSet<Vec<Event>> = BTreeSet::from([vec![]]);
        for _ in 0..max_events {
            let longer: Vec<Vec<Event>> = codes
                .iter()
                .flat_map(|c| [Event::R, Event::T].map(|e| c.iter().copied().chain([e]).collect()))
                .collect();
            codes.extend(longer);
        }
        for code in codes {
            let Some((amp, more)) = brute_force_walk(&zs, &cs, p, (0, Dir::Down, 0.5), &code, t_end) else { continue };
            if amp == 0.0 {
                continue;
            }
            // A ray is terminal when nothing else happens in the window or
            // the budget is spent.
            if !more || code.len() == max_events {
                let s: String = code.iter().map(|e| if *e == Event::R { 'R' } else { 'T' }).collect();
                oracle.insert(s, amp);
            }
        }
        assert_eq!(traced.keys().collect::<Vec<_>>(), oracle.keys().collect::<Vec<_>>(), "budget {max_events}");
        for (k, a) in &traced {
            assert!(close(*a, oracle[k], 1e-14), "{k}");
        }
    }
}

#[test]
fn traced_mass_deficit_is_the_truncated_mass() {
    let model = Model64::new(vec![1.0, 1.6, 2.5], vec![1.0, 2.0, 1.5, 0.8], 0.0).unwrap();
    let slice = Slowness64::new(&model, 0.25, 2.0);
    let tr = trace_rays(&slice, &down_at(&slice, 0.5), &12.0, 6).unwrap();
    assert!(tr.truncated_mass > 0.0);
    let window: f64 = tr
        .rays
        .iter()
        .filter(|r| r.end == RayEnd::Window)
        .map(|r| slice.flux(r.segments.last().unwrap().end.layer, &r.amplitude))
        .sum();
    assert!(close(window + tr.truncated_mass + tr.cut_mass, 1.0, 1e-12));
    for r in &tr.rays {
        assert!(r.amplitude.abs() <= 1.0);
        let dur: f64 = r.segments.iter().map(|s| s.duration).sum();
        assert!(close(dur, r.segments.last().unwrap().end.t, 1e-12));
    }
}

// ---------------------------------------------------------------- series

/// Sums the outgoing amplitude of every distinct event prefix.
fn ray_wave_sums(slice: &Slowness64, tr: &RayTrace<f64>) -> BTreeMap<WaveKey<f64>, f64> {
    let mut prefixes = BTreeMap::new();
    for ray in &tr.rays {
        for (j, ev) in ray.events.iter().enumerate() {
            let code: String = ray.events[..=j].iter().map(|e| if e.kind == Event::R { 'R' } else { 'T' }).collect();
            let out = &ray.segments[j + 1].start;
            prefixes.insert(code, ((ev.interface, out.layer, out.dir, ev.time.key()), ev.amplitude));
        }
    }
    let _ = slice;
    let mut sums = BTreeMap::new();
    for (key, a) in prefixes.into_values() {
        *sums.entry(key).or_insert(0.0) += a;
    }
    sums
}

#[test]
fn single_interface_series_stops_after_one_term() {
    let model = Model64::new(vec![1.0], vec![1.0, 2.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 0.3, 2.0);
    let src = SymbolVector::single(&down_at(&slice, 0.5));
    let s = layered_scattering_series(&slice, &src, None, 10).unwrap();
    assert_eq!(s.terms, 1);
    assert_eq!(s.remaining_mass, 0.0);
    let rt = rt_coefficients(1.0, 2.0, 0.3, 2.0).unwrap();
    let amps: Vec<f64> = s.waves.values().map(|w| w.1).collect();
    assert_eq!(amps.len(), 2);
    assert!(close(amps[0], rt.r_energy, 1e-14));
    assert!(close(amps[1], rt.t_energy, 1e-14));
}

#[test]
fn scattering_series_equals_ray_path_sums() {
    let presets: Vec<(Vec<f64>, Vec<f64>, f64)> = vec![
        (vec![1.0, 1.6], vec![1.0, 2.0, 1.5], 0.2),
        (vec![1.0, 1.6], vec![1.0, 0.5, 1.5], 0.0),
        (vec![0.7, 1.3, 2.2], vec![1.0, 1.4, 0.9, 2.1], 0.3),
    ];
    for (zs, cs, p) in presets {
        let model = Model64::new(zs, cs, 0.0).unwrap();
        let slice = Slowness64::new(&model, p, 2.0);
        let eta = down_at(&slice, 0.5);
        let t_end = 30.0;
        let series = layered_scattering_series(&slice, &SymbolVector::single(&eta), Some(&t_end), 6).unwrap();
        let tr = trace_rays(&slice, &eta, &t_end, 6).unwrap();
        let rays = ray_wave_sums(&slice, &tr);
        assert_eq!(series.waves.len(), rays.len());
        for (k, (_, a)) in &series.waves {
            assert!(close(*a, rays[k], 1e-12), "{k:?}: {a} vs {}", rays[k]);
        }
        // What is left after six orders is what the rays truncated.
        assert!(close(series.remaining_mass, tr.truncated_mass, 1e-12));
    }
}

#[test]
fn evanescent_lower_layer_reflects_everything() {
    // p = 0.6 exceeds 1/c for the bottom layer.
    let model = Model64::new(vec![1.0, 1.8], vec![1.0, 1.2, 3.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 0.6, 2.0);
    let sm = LayeredScatteringMatrix::new(&slice);
    assert!(sm.evanescent[1] && !sm.evanescent[0]);
    assert_eq!(sm.blocks[1][1][0], 0.0);
    assert_eq!(sm.blocks[1][0][0].abs(), 1.0);
    let series = layered_scattering_series(&slice, &SymbolVector::single(&down_at(&slice, 0.5)), None, 40).unwrap();
    let escaped: f64 = series
        .waves
        .iter()
        .filter(|((_, layer, dir, _), _)| *layer == 0 && *dir == Dir::Up)
        .map(|(_, (_, a))| a * a)
        .sum();
    assert!(escaped <= 1.0 + 1e-12);
    assert!(close(escaped + series.remaining_mass, 1.0, 1e-12));
}

// ---------------------------------------------------------------- depth

#[test]
fn vertical_depth_is_travel_time() {
    let model = Model64::new(vec![], vec![1.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 0.0, 2.0);
    for z in [0.3, 1.5, -0.7] {
        let eta = Covector::new(&slice, 0.0, z, 0.0, Dir::Down).unwrap();
        let d = cotangent_depth(&slice, &eta, &0.0, 4).unwrap();
        assert!(close(d.approx(), z, 1e-15));
    }
}

#[test]
fn slanted_covector_is_deeper_than_its_point() {
    let model = Model64::new(vec![], vec![1.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 60f64.to_radians().sin(), 2.0);
    let eta = Covector::new(&slice, 0.0, 1.0, 0.0, Dir::Up).unwrap();
    let d = cotangent_depth(&slice, &eta, &0.0, 4).unwrap();
    assert!(close(d.approx(), 2.0, 1e-14));

    // The grid depth of the same point is the vertical distance.
    use grid_core::{Grid, Medium, Region};
    let g = Grid::new_2d(41, 11, 0.05, [-0.5, -0.25]).unwrap();
    let m = Medium::constant(g, 1.0).unwrap();
    let field = geometry_depth::depth_from_region(&Region::interval(0.0, f64::INFINITY), &m).unwrap();
    let idx = g.index(30, 5);
    assert!(close(g.position(idx)[0], 1.0, 1e-12));
    assert!(close(field.values()[idx], 1.0, 1e-12));
}

#[test]
fn total_reflection_barrier_makes_depth_jump() {
    // Middle layer is evanescent at p = 0.6: a covector below it cannot
    // reach the boundary at all.
    let model = Model64::new(vec![0.5, 0.9], vec![1.0, 3.0, 1.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 0.6, 2.0);
    let above = Covector::new(&slice, 0.0, 0.45, 0.0, Dir::Up).unwrap();
    let below = Covector::new(&slice, 0.0, 0.95, 0.0, Dir::Up).unwrap();
    let d_above = cotangent_depth(&slice, &above, &0.0, 8).unwrap();
    assert!(close(d_above.approx(), 0.45 / 0.8, 1e-14));
    assert_eq!(cotangent_depth(&slice, &below, &0.0, 8).unwrap(), Depth::Inside);
    assert_eq!(slice.travel_depth(&0.95, &0.0), Depth::Inside);
}

#[test]
fn depth_uses_budget() {
    let model = Model64::new(vec![0.5, 0.9], vec![1.0, 1.5, 1.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 0.2, 2.0);
    let deep = Covector::new(&slice, 0.0, 1.5, 0.0, Dir::Down).unwrap();
    assert!(matches!(cotangent_depth(&slice, &deep, &0.0, 1), Err(RayError::Budget { .. })));
    let d = cotangent_depth(&slice, &deep, &0.0, 4).unwrap();
    assert!(close(d.approx(), slice.travel_depth(&1.5, &0.0).approx(), 1e-14));
}

// ---------------------------------------------------------------- escapability

#[test]
fn ray_leaving_theta_has_escaped() {
    let model = Model64::new(vec![], vec![1.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 0.0, 2.0);
    let b = Bichar { layer: 0, dir: Dir::Up, z: 0.5, t: 0.0 };
    let c = classify_escapable(&slice, &b, &1.0, 4).unwrap();
    assert_eq!(c.plus, Some(Certificate::Escaped));
    assert!(c.returning);
    // Started inside and only moving up, it was inside at t = 0.
    assert_eq!(c.minus, None);
}

#[test]
fn trapped_ray_is_returning_but_not_escapable() {
    // A guide straddling ∂Θ between two evanescent layers.
    let model = Model64::new(vec![-0.1, 1.0], vec![3.0, 1.0, 3.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 0.6, 2.0);
    let b = Bichar { layer: 1, dir: Dir::Up, z: 0.5, t: 0.0 };
    let c = classify_escapable(&slice, &b, &1.0, 16).unwrap();
    assert!(c.returning);
    assert_eq!(c.plus, None);
    let h0 = SymbolVector::single(&Covector::new(&slice, 0.0, 0.5, 0.0, Dir::Up).unwrap());
    let err = constructive_tail(&slice, &h0, &1.0, 16).unwrap_err();
    assert!(matches!(err, RayError::NotEscapable { layer: 1, dir: Dir::Up, .. }), "{err}");
}

// ---------------------------------------------------------------- constructive tail

/// Two interfaces, one on each side of ∂Θ = {z = 0}, with `h0` coming up
/// through the inner one and a deep downgoing companion that belongs to the
/// direct family. The rational slownesses at p = 3/5 are q = 8/3, 4/5, 8/25.
struct Instance<S> {
    model: LayeredModel<S>,
    h0: Vec<(Dir, S)>,
    t_ctrl: S,
}

fn instance<S: Scalar>(r: impl Fn(i64, i64) -> S) -> Instance<S> {
    // Vertical speed in the middle layer is 4/5 and in the bottom one
    // 200/289, so the up-going h0 reaches z = 4/5 at t = 5/2.
    let model = LayeredModel::new(vec![r(-4, 5), r(4, 5)], vec![r(15, 41), r(1, 1), r(25, 17)], r(0, 1))
        .unwrap()
        .with_nested(r(1, 10), r(1, 5))
        .unwrap();
    Instance { model, h0: vec![(Dir::Up, r(3656, 1445)), (Dir::Down, r(2, 1))], t_ctrl: r(3, 1) }
}

fn h0_of<S: Scalar>(slice: &SlownessModel<S>, inst: &Instance<S>) -> SymbolVector<S> {
    let mut h0 = SymbolVector::new(S::zero());
    for (dir, z) in &inst.h0 {
        let c = Covector::new(slice, S::zero(), z.clone(), S::zero(), *dir).unwrap();
        h0.add(c.layer, c.dir, c.z, S::one());
    }
    h0
}

fn exact_instance() -> (ExactSlowness, ExactSymbol, BigRational) {
    let inst = instance(rat);
    let q = vec![Some(rat(8, 3)), Some(rat(4, 5)), Some(rat(8, 25))];
    let slice = ExactSlowness::from_vertical(&inst.model, rat(3, 5), q).unwrap();
    let h0 = h0_of(&slice, &inst);
    (slice, h0, inst.t_ctrl)
}

fn float_instance() -> (Slowness64, Symbol64, f64) {
    let inst = instance(|n, d| n as f64 / d as f64);
    let slice = Slowness64::new(&inst.model, 0.6, 2.0);
    let h0 = h0_of(&slice, &inst);
    (slice, h0, inst.t_ctrl)
}

#[test]
fn no_interfaces_need_no_tail() {
    let model = Model64::new(vec![], vec![1.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 0.2, 2.0);
    let h0 = SymbolVector::single(&Covector::new(&slice, 0.0, 0.5, 0.0, Dir::Down).unwrap());
    let tail = constructive_tail(&slice, &h0, &1.0, 8).unwrap();
    assert!(tail.tail.is_empty());
    assert!(tail.returning.is_empty());
}

#[test]
fn instance_certificates_follow_the_recursion() {
    let (slice, h0, t) = exact_instance();
    let up = h0.covectors().find(|(c, _)| c.dir == Dir::Up).unwrap().0;
    let c = classify_escapable(&slice, &Bichar::through(&up), &t, 8).unwrap();
    assert!(c.returning);
    let inner_core = Certificate::Core {
        via: Event::T,
        same: Box::new(Certificate::Escaped),
        opposite: Box::new(Certificate::Escaped),
    };
    let connecting = Certificate::Connecting(vec![(Event::R, Certificate::Escaped), (Event::T, Certificate::Escaped)]);
    assert_eq!(
        c.plus,
        Some(Certificate::Core { via: Event::T, same: Box::new(inner_core), opposite: Box::new(connecting) })
    );
    let down = h0.covectors().find(|(c, _)| c.dir == Dir::Down).unwrap().0;
    let c = classify_escapable(&slice, &Bichar::through(&down), &t, 8).unwrap();
    assert!(!c.returning);
    assert_eq!(c.plus, None);
}

#[test]
fn exact_tail_has_three_singularities_and_isolates() {
    let (slice, h0, t) = exact_instance();
    let tail = constructive_tail(&slice, &h0, &t, 8).unwrap();
    assert_eq!(tail.tail.len(), 3);
    assert_eq!(tail.returning.len(), 1);
    for (layer, _, z, a) in tail.tail.iter() {
        assert!(!slice.model().inside_theta(z), "tail lies outside Θ");
        assert!(layer <= 1);
        assert!(!a.is_zero());
    }
    let check = isolation_residual(&slice, &h0, &tail.tail, &t).unwrap();
    assert!(check.residual.is_zero());
    assert_eq!(check.contaminated, 0);
    assert_eq!(check.direct_pieces, 1);

    // Without the tail the returning wave's reflection pollutes D⁺.
    let bare = isolation_residual(&slice, &h0, &SymbolVector::new(rat(0, 1)), &t).unwrap();
    assert!(bare.contaminated > 0);
    assert!(bare.residual > rat(0, 1));
}

#[test]
fn float_tail_agrees_with_exact_tail_shape() {
    let (slice, h0, t) = float_instance();
    let tail = constructive_tail(&slice, &h0, &t, 8).unwrap();
    assert_eq!(tail.tail.len(), 3);
    let check = isolation_residual(&slice, &h0, &tail.tail, &t).unwrap();
    assert!(check.residual < 1e-24, "{}", check.residual);
}

// ---------------------------------------------------------------- Neumann

#[test]
fn no_interfaces_leave_h0_fixed() {
    let model = Model64::new(vec![], vec![1.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 0.2, 2.0);
    let h0 = SymbolVector::single(&Covector::new(&slice, 0.0, 0.5, 0.0, Dir::Down).unwrap());
    let steps = symbol_neumann_iterate(&slice, &h0, &1.0, &NeumannOptions { k_max: 5, ..Default::default() }).unwrap();
    for s in &steps {
        assert_eq!(s.n, h0);
    }
}

#[test]
fn neumann_iterates_reach_the_constructive_field() {
    let (slice, h0, t) = float_instance();
    let tail = constructive_tail(&slice, &h0, &t, 8).unwrap();
    let a_h0 = tail.total(&h0);
    let opts = NeumannOptions { k_max: 40, reference: Some(&a_h0), ..Default::default() };
    let steps = symbol_neumann_iterate(&slice, &h0, &t, &opts).unwrap();
    let errs: Vec<f64> = steps.iter().map(|s| s.error.unwrap()).collect();
    let first = errs.iter().position(|e| *e < 1e-8);
    assert!(first.is_some(), "errors {errs:?}");
    assert!(errs[0] > 1e-3);
    // The iterates settle on h0 plus the three tail covectors.
    assert_eq!(steps.last().unwrap().n.len(), 5);
    for w in steps.windows(2) {
        assert!(w[1].inside_norm <= w[0].inside_norm + 1e-12, "inside norm grew at k = {}", w[1].k);
    }
    for s in &steps {
        assert_eq!(s.lost_mass, 0.0);
    }
}

fn random_symbol(slice: &Slowness64, rng: &mut ChaCha8Rng) -> Symbol64 {
    let mut v = SymbolVector::new(0.0);
    let n = rng.gen_range(1..12);
    for _ in 0..n {
        let z: f64 = rng.gen_range(-3.0..3.0);
        let Ok(c) = Covector::new(slice, 0.0, z, 0.0, if rng.gen_bool(0.5) { Dir::Up } else { Dir::Down }) else { continue };
        v.add(c.layer, c.dir, c.z, rng.gen_range(-1.0..1.0));
    }
    v
}

#[test]
fn neumann_operator_is_a_contraction() {
    let model = Model64::new(vec![-0.8, 0.4, 1.3], vec![0.7, 1.0, 1.6, 1.1], 0.0)
        .unwrap()
        .with_nested(0.2, 0.5)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let p = rng.gen_range(0.0..0.55);
        let slice = Slowness64::new(&model, p, 2.0);
        let v = random_symbol(&slice, &mut rng);
        if v.is_empty() {
            continue;
        }
        let ratio = contraction_ratio(&slice, &v, &1.5).unwrap();
        assert!(ratio <= 1.0 + 1e-12, "p = {p}: {ratio}");
    }
}

// ---------------------------------------------------------------- MDT

#[test]
fn mdt_keeps_transmission_and_drops_reflection() {
    let model = Model64::new(vec![1.0], vec![1.0, 2.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 0.0, 2.0);
    let h0 = SymbolVector::single(&Covector::new(&slice, 0.0, 0.5, 0.0, Dir::Down).unwrap());
    let full = propagate(&slice, &h0, &1.0, &PropagateOptions::default()).unwrap().end;
    assert_eq!(full.len(), 2);
    let mdt = mdt_symbol(&slice, &h0, &1.0).unwrap();
    assert_eq!(mdt.len(), 1);
    let (layer, dir, z, a) = mdt.iter().next().unwrap();
    assert_eq!((layer, dir), (1, Dir::Down));
    assert!(close(*z, 2.0, 1e-14));
    assert!(close(*a, 8f64.sqrt() / 3.0, 1e-14));
}

#[test]
fn mdt_without_interfaces_keeps_everything() {
    let model = Model64::new(vec![], vec![1.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 0.0, 2.0);
    let h0 = SymbolVector::single(&Covector::new(&slice, 0.0, 0.5, 0.0, Dir::Down).unwrap());
    let mdt = mdt_symbol(&slice, &h0, &1.0).unwrap();
    assert_eq!(mdt.len(), 1);
    assert_eq!(mdt.amplitude(0, Dir::Down, &1.5), 1.0);
}

#[test]
fn gap_covector_is_kept_by_mdt_but_not_by_point_depth() {
    let model = Model64::new(vec![], vec![1.0], 0.0).unwrap();
    let slice = Slowness64::new(&model, 60f64.to_radians().sin(), 2.0);
    let h0 = SymbolVector::single(&Covector::new(&slice, 0.0, 0.25, 0.0, Dir::Down).unwrap());
    let mdt = mdt_symbol(&slice, &h0, &1.0).unwrap();
    let (_, _, z, a) = mdt.iter().next().unwrap();
    assert!(close(*z, 0.75, 1e-14));
    assert_eq!(*a, 1.0);

    use grid_core::{Grid, Medium, Region};
    let g = Grid::new_2d(41, 11, 0.05, [-0.5, -0.25]).unwrap();
    let m = Medium::constant(g, 1.0).unwrap();
    let field = geometry_depth::depth_from_region(&Region::interval(0.0, f64::INFINITY), &m).unwrap();
    let mask = field.level_mask(1.0, geometry_depth::Side::Inside);
    let idx = g.index(25, 5);
    assert!(close(g.position(idx)[0], 0.75, 1e-12));
    assert!(!mask.get(idx), "point depth 0.75 is not deeper than T = 1");
}
