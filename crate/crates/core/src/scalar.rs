use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the density-evolution code runs on: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for user supplied probabilities.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable in every Scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar always converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
