//! Floating-point scalar abstraction shared by the network and learners.

use std::fmt::{Debug, Display, LowerExp};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// f32 or f64.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Short tag used in weight files.
    const TAG: &'static str;

    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal fits the scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {
    const TAG: &'static str = "f32";
}

impl Scalar for f64 {
    const TAG: &'static str = "f64";
}
