//! Scalar abstraction: the whole crate is generic over the floating-point
//! type through [`Real`], instantiated as `f64` in the crate-root aliases.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable throughout the library (`f32`, `f64`).
///
/// Blanket-implemented for any type with the required numeric traits;
/// downstream code never implements this manually.
pub trait Real:
    Float
    + FromPrimitive
    + core::iter::Sum
    + core::fmt::Debug
    + core::fmt::Display
    + serde::Serialize
    + serde::de::DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in scalar type")
    }

    /// Widens (or passes through) to `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + core::iter::Sum
        + core::fmt::Debug
        + core::fmt::Display
        + serde::Serialize
        + serde::de::DeserializeOwned
        + Send
        + Sync
        + 'static
{
}
