use crate::{Grid, GridError, Real, ScalarField};

/// Piecewise-constant layering normal to the first axis.
///
/// `speeds[k]` applies between `interfaces[k-1]` and `interfaces[k]`, with the
/// first and last layers unbounded.
#[derive(Clone, Debug, PartialEq)]
pub struct Layered<T> {
    pub interfaces: Vec<T>,
    pub speeds: Vec<T>,
}

impl<T: Real> Layered<T> {
    pub fn new(interfaces: Vec<T>, speeds: Vec<T>) -> Result<Self, GridError> {
        if speeds.len() != interfaces.len() + 1 {
            return Err(GridError::validation(
                "layer count",
                format!("{} speeds for {} interfaces", speeds.len(), interfaces.len()),
            ));
        }
        if speeds.iter().any(|c| !(*c > T::zero()) || !c.is_finite()) {
            return Err(GridError::validation("c > 0", "layer speeds must be positive and finite"));
        }
        if interfaces.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(GridError::validation("interface order", "interfaces must be strictly increasing"));
        }
        Ok(Layered { interfaces, speeds })
    }

    /// Speed of the layer containing `x` (an interface point belongs to the deeper layer).
    pub fn speed_at(&self, x: T) -> T {
        let k = self.interfaces.iter().take_while(|&&z| z <= x).count();
        self.speeds[k]
    }

    /// Node value of `c`: the layer speed, or at a node lying on an interface
    /// the speed whose inverse square is the mean of the two neighbouring
    /// layers' inverse squares (the exact dual-cell average of `c⁻²`).
    pub fn node_speed(&self, x: T, h: T) -> T {
        let tol = h * T::of(1e-9);
        for (k, &z) in self.interfaces.iter().enumerate() {
            if (x - z).abs() <= tol {
                let (a, b) = (self.speeds[k], self.speeds[k + 1]);
                let mean = T::of(0.5) * (T::one() / (a * a) + T::one() / (b * b));
                return T::one() / mean.sqrt();
            }
        }
        self.speed_at(x)
    }

    /// Exact travel time `∫ c⁻¹` along the first axis between two coordinates.
    pub fn travel_time(&self, a: T, b: T) -> T {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mut cuts = vec![lo];
        cuts.extend(self.interfaces.iter().copied().filter(|&z| z > lo && z < hi));
        cuts.push(hi);
        cuts.windows(2)
            .map(|w| (w[1] - w[0]) / self.speed_at(T::of(0.5) * (w[0] + w[1])))
            .sum()
    }
}

/// Wave speed on a grid, optionally remembering the layered model it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Medium<T> {
    c: ScalarField<T>,
    layered: Option<Layered<T>>,
}

impl<T: Real> Medium<T> {
    pub fn constant(grid: Grid<T>, c: T) -> Result<Self, GridError> {
        Self::from_field(ScalarField::constant(grid, c))
    }

    pub fn from_field(c: ScalarField<T>) -> Result<Self, GridError> {
        if let Some(i) = c.values().iter().position(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(GridError::validation("c > 0", format!("speed {} at node {i}", c.values()[i])));
        }
        Ok(Medium { c, layered: None })
    }

    pub fn from_layered(grid: Grid<T>, layered: Layered<T>) -> Self {
        let h = grid.spacing();
        let c = ScalarField::from_fn(grid, |p| layered.node_speed(p[0], h));
        Medium { c, layered: Some(layered) }
    }

    pub fn grid(&self) -> &Grid<T> {
        self.c.grid()
    }
    pub fn speed(&self) -> &ScalarField<T> {
        &self.c
    }
    pub fn layered(&self) -> Option<&Layered<T>> {
        self.layered.as_ref()
    }
    pub fn max_speed(&self) -> T {
        self.c.max_value()
    }
    pub fn min_speed(&self) -> T {
        self.c.min_value()
    }

    /// Interface coordinates along the first axis, if the medium is layered.
    pub fn singular_support(&self) -> &[T] {
        self.layered.as_ref().map(|l| l.interfaces.as_slice()).unwrap_or(&[])
    }
}
