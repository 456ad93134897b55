//! Scalar abstraction shared by the numerical modules.

use std::fmt;

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

/// Floating-point scalar the simulator can run on (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + FftNum + Default + fmt::Debug + fmt::Display + fmt::LowerExp
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Converts an ordinary frequency in MHz to angular frequency in rad/s.
#[inline]
pub fn mhz_to_rad<T: Real>(mhz: T) -> T {
    T::TAU() * mhz * T::lit(1e6)
}

/// Converts an angular frequency in rad/s to ordinary frequency in MHz.
#[inline]
pub fn rad_to_mhz<T: Real>(rad: T) -> T {
    rad / (T::TAU() * T::lit(1e6))
}
