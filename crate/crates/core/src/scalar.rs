//! Floating-point abstraction used by the distance and scoring math.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

/// Real scalar the scoring model is computed in: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn lit(value: f64) -> Self {
        <Self as NumCast>::from(value).expect("finite constant representable in scalar")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
