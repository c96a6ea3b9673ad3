use num_traits::{Float, FromPrimitive, NumAssign, NumCast};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar used by every numerical container.
pub trait Real:
    Float + FromPrimitive + NumCast + NumAssign + Sum + Debug + Display + Send + Sync + Default + 'static
{
    /// Converts an `f64` literal or parameter into this scalar.
    fn of(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 value representable in scalar type")
    }

    /// Converts an index or count into this scalar.
    fn of_usize(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("count representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
