use crate::{DepthError, DepthField};
use grid_core::{DomainNest, Grid, Mask, Medium, Real, Region, ScalarField};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Far,
    Trial,
    Known,
}

struct Entry {
    time: f64,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // Reversed so the binary heap pops the smallest travel time first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.node.cmp(&self.node))
    }
}

/// Depth measured from `∂Θ` of the nest.
pub fn compute_depth<T: Real>(nest: &DomainNest<T>, m: &Medium<T>) -> Result<DepthField<T>, DepthError> {
    nest.grid.check_same(m.grid())?;
    depth_from_region(&nest.theta, m)
}

/// Signed depth measured from the boundary of an arbitrary box.
pub fn depth_from_region<T: Real>(region: &Region<T>, m: &Medium<T>) -> Result<DepthField<T>, DepthError> {
    let grid = *m.grid();
    let slowness = slowness(m)?;
    let dim = grid.dim();
    let h = grid.spacing();
    let mut seeds = Vec::new();
    for i in 0..grid.len() {
        let sd = region.signed_distance(grid.position(i), dim);
        if sd.abs() <= h * T::of(1.000001) {
            seeds.push((i, sd.abs() * slowness[i]));
        }
    }
    let unsigned = march(&grid, &slowness, &seeds);
    let mask = region.mask(&grid);
    let values = unsigned
        .iter()
        .enumerate()
        .map(|(i, &t)| if mask.get(i) { t } else { -t })
        .collect();
    Ok(DepthField { d: ScalarField::from_values(grid, values)?, source: *region })
}

/// Unsigned travel time from a node set (zero on the set).
pub fn travel_time_from<T: Real>(sources: &Mask, m: &Medium<T>) -> Result<ScalarField<T>, DepthError> {
    let grid = *m.grid();
    let slowness = slowness(m)?;
    let seeds: Vec<_> = sources.indices().map(|i| (i, T::zero())).collect();
    Ok(ScalarField::from_values(grid, march(&grid, &slowness, &seeds))?)
}

fn slowness<T: Real>(m: &Medium<T>) -> Result<Vec<T>, DepthError> {
    m.speed()
        .values()
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if c > T::zero() {
                Ok(T::one() / c)
            } else {
                Err(DepthError::NonPositiveSpeed(c.to_f64_lossy(), i))
            }
        })
        .collect()
}

fn march<T: Real>(grid: &Grid<T>, s: &[T], seeds: &[(usize, T)]) -> Vec<T> {
    let n = grid.len();
    let mut t = vec![T::infinity(); n];
    let mut state = vec![State::Far; n];
    let mut heap = BinaryHeap::new();
    for &(i, v) in seeds {
        if v < t[i] {
            t[i] = v;
        }
        state[i] = State::Trial;
    }
    for &(i, _) in seeds {
        heap.push(Entry { time: t[i].to_f64_lossy(), node: i });
    }
    while let Some(Entry { node, time }) = heap.pop() {
        if state[node] == State::Known || time > t[node].to_f64_lossy() {
            continue;
        }
        state[node] = State::Known;
        for nb in grid.neighbors(node) {
            if state[nb] == State::Known {
                continue;
            }
            let cand = update(grid, s, &t, &state, nb);
            if cand < t[nb] {
                t[nb] = cand;
                state[nb] = State::Trial;
                heap.push(Entry { time: cand.to_f64_lossy(), node: nb });
            }
        }
    }
    t
}

/// Upwind update of node `j` from its known neighbours.
///
/// A single known neighbour gives the trapezoid rule `T_nb + h (s_nb + s_j) / 2`,
/// which is exact for 1D piecewise-linear slowness; two known neighbours on
/// different axes give the usual quadratic solve with the node's slowness.
fn update<T: Real>(grid: &Grid<T>, s: &[T], t: &[T], state: &[State], j: usize) -> T {
    let h = grid.spacing();
    let half = T::of(0.5);
    let (i0, j0) = grid.coords(j);
    let [nx, ny] = grid.extent();
    let mut best_axis = [None::<(T, usize)>; 2];
    let mut consider = |axis: usize, nb: usize| {
        if state[nb] == State::Known && best_axis[axis].map_or(true, |(v, _)| t[nb] < v) {
            best_axis[axis] = Some((t[nb], nb));
        }
    };
    if i0 > 0 {
        consider(0, j - 1);
    }
    if i0 + 1 < nx {
        consider(0, j + 1);
    }
    if grid.dim() == 2 {
        if j0 > 0 {
            consider(1, j - nx);
        }
        if j0 + 1 < ny {
            consider(1, j + nx);
        }
    }
    let one_sided = |(v, nb): (T, usize)| v + h * half * (s[nb] + s[j]);
    match (best_axis[0], best_axis[1]) {
        (Some(a), None) | (None, Some(a)) => one_sided(a),
        (None, None) => T::infinity(),
        (Some(a), Some(b)) => {
            let hs = h * s[j];
            let diff = a.0 - b.0;
            if diff.abs() >= hs {
                one_sided(a).min(one_sided(b))
            } else {
                let two = half * (a.0 + b.0 + (T::of(2.0) * hs * hs - diff * diff).sqrt());
                two.min(one_sided(a)).min(one_sided(b))
            }
        }
    }
}
