use num::BigRational;
use num_traits::{Num, Signed, ToPrimitive};
use std::fmt::Debug;

/// Arithmetic used by the ray calculus.
///
/// Floating-point types compare keys after rounding to a fixed quantum so
/// that the same event reached along two paths lands in one bucket. Exact
/// rationals use themselves as keys.
pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed {
    type Key: Ord + Clone + Debug;

    fn key(&self) -> Self::Key;
    fn approx(&self) -> f64;
    fn from_f64(x: f64) -> Self;
    /// Whether a divisor this small should be refused.
    fn negligible(&self) -> bool;
}

macro_rules! float_scalar {
    ($t:ty, $quantum:expr, $tiny:expr) => {
        impl Scalar for $t {
            type Key = i64;
            fn key(&self) -> i64 {
                (*self as f64 / $quantum).round() as i64
            }
            fn approx(&self) -> f64 {
                *self as f64
            }
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn negligible(&self) -> bool {
                self.abs() < $tiny
            }
        }
    };
}

float_scalar!(f64, 1e-9, 1e-12);
float_scalar!(f32, 1e-4, 1e-6);

impl Scalar for BigRational {
    type Key = BigRational;
    fn key(&self) -> BigRational {
        self.clone()
    }
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite value")
    }
    fn negligible(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}
