use crate::{Grid, GridError, Mask, Real};

/// An axis-aligned box; infinite bounds give half-spaces and slabs.
///
/// Node masks use the closed box: a node lying exactly on a face counts as
/// inside, which is the same tie rule the depth level sets use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region<T> {
    pub lo: [T; 2],
    pub hi: [T; 2],
}

impl<T: Real> Region<T> {
    pub fn new(lo: [T; 2], hi: [T; 2]) -> Self {
        Region { lo, hi }
    }

    pub fn everything() -> Self {
        Region { lo: [T::neg_infinity(); 2], hi: [T::infinity(); 2] }
    }

    pub fn interval(lo: T, hi: T) -> Self {
        Region { lo: [lo, T::neg_infinity()], hi: [hi, T::infinity()] }
    }

    pub fn contains(&self, p: [T; 2], dim: usize) -> bool {
        (0..dim).all(|a| p[a] >= self.lo[a] && p[a] <= self.hi[a])
    }

    /// Closed-box containment of `self` in `other` over the active axes.
    pub fn is_within(&self, other: &Region<T>, dim: usize) -> bool {
        (0..dim).all(|a| self.lo[a] >= other.lo[a] && self.hi[a] <= other.hi[a])
    }

    /// Euclidean distance from `p` to the boundary of the box, signed positive inside.
    pub fn signed_distance(&self, p: [T; 2], dim: usize) -> T {
        let mut inside = T::infinity();
        let mut outside_sq = T::zero();
        let mut is_inside = true;
        for a in 0..dim {
            let below = self.lo[a] - p[a];
            let above = p[a] - self.hi[a];
            let gap = below.max(above);
            if gap >= T::zero() {
                is_inside = false;
                outside_sq += gap * gap;
            }
            inside = inside.min((-below).min(-above));
        }
        if is_inside {
            inside
        } else {
            -outside_sq.sqrt()
        }
    }

    pub fn mask(&self, grid: &Grid<T>) -> Mask {
        Mask::from_fn(grid, |i| self.contains(grid.position(i), grid.dim()))
    }
}

/// The nested domains of an experiment together with the control time `T`.
#[derive(Clone, Debug)]
pub struct DomainNest<T> {
    pub grid: Grid<T>,
    pub omega: Region<T>,
    pub theta_prime: Region<T>,
    pub theta_dprime: Region<T>,
    pub theta: Region<T>,
    pub t_ctrl: T,
    pub omega_mask: Mask,
    pub theta_prime_mask: Mask,
    pub theta_dprime_mask: Mask,
    pub theta_mask: Mask,
    pub upsilon_mask: Mask,
}

impl<T: Real> DomainNest<T> {
    /// Builds the nest and checks `Ω ⊆ Θ′ ⊆ Θ″ ⊆ Θ ⊆ Υ`.
    ///
    /// The travel-time margin between `Θ` and `∂Υ` needs the medium and is
    /// checked by the configuration loader and by the depth module.
    pub fn new(
        grid: Grid<T>,
        omega: Region<T>,
        theta_prime: Region<T>,
        theta_dprime: Region<T>,
        theta: Region<T>,
        t_ctrl: T,
    ) -> Result<Self, GridError> {
        let d = grid.dim();
        let upsilon = Region::new(grid.origin(), grid.far_corner());
        let chain = [
            ("Ω ⊆ Θ′", omega, theta_prime),
            ("Θ′ ⊆ Θ″", theta_prime, theta_dprime),
            ("Θ″ ⊆ Θ", theta_dprime, theta),
        ];
        for (name, inner, outer) in chain {
            if !inner.is_within(&outer, d) {
                return Err(GridError::validation("nesting", format!("{name} violated: {inner:?} vs {outer:?}")));
            }
        }
        let strictly_inside = (0..d).all(|a| theta.lo[a] > upsilon.lo[a] && theta.hi[a] < upsilon.hi[a]);
        if !strictly_inside {
            return Err(GridError::validation("nesting", format!("Θ ⊆ Υ violated: {theta:?} vs {upsilon:?}")));
        }
        if !(t_ctrl > T::zero()) {
            return Err(GridError::validation("T > 0", format!("control time {t_ctrl}")));
        }
        Ok(DomainNest {
            grid,
            omega,
            theta_prime,
            theta_dprime,
            theta,
            t_ctrl,
            omega_mask: omega.mask(&grid),
            theta_prime_mask: theta_prime.mask(&grid),
            theta_dprime_mask: theta_dprime.mask(&grid),
            theta_mask: theta.mask(&grid),
            upsilon_mask: Mask::full(&grid),
        })
    }

    /// Same nest with a different control time (used when `T` snaps to the step grid).
    pub fn with_t(&self, t_ctrl: T) -> Self {
        DomainNest { t_ctrl, ..self.clone() }
    }
}
