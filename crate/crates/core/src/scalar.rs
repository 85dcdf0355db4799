//! Numeric abstraction shared by the model layer, cost evaluation and the
//! enumeration oracle.
//!
//! Everything that only adds, multiplies and compares coefficients is written
//! against [`Scalar`], so the same model can be evaluated in `f64` for the
//! production backend and in exact rationals for oracle checks.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + PartialOrd
    + Copy
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Absolute tolerance used for feasibility comparisons. Zero for exact types.
    fn tolerance() -> Self;

    fn floor(self) -> Self;

    fn ceil(self) -> Self;

    /// Converts instance data (stored as `f64`) into this scalar.
    ///
    /// Panics on non-finite input; instance validation rejects those earlier.
    fn from_data(value: f64) -> Self {
        Self::from_f64(value).unwrap_or_else(|| panic!("cannot represent {value} as a scalar"))
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn approx_le(self, other: Self) -> bool {
        self <= other + Self::tolerance()
    }

    fn approx_eq(self, other: Self) -> bool {
        (self - other).abs() <= Self::tolerance()
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }

    fn floor(self) -> Self {
        f64::floor(self)
    }

    fn ceil(self) -> Self {
        f64::ceil(self)
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-4
    }

    fn floor(self) -> Self {
        f32::floor(self)
    }

    fn ceil(self) -> Self {
        f32::ceil(self)
    }
}

impl Scalar for Ratio<i64> {
    fn tolerance() -> Self {
        Ratio::from_integer(0)
    }

    fn floor(self) -> Self {
        Ratio::floor(&self)
    }

    fn ceil(self) -> Self {
        Ratio::ceil(&self)
    }
}
