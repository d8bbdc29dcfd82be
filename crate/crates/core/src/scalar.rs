use std::fmt;

use nalgebra::{DMatrix, RealField};
use num_traits::{FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::linalg::{faer_thin_svd, ThinSvd};

/// Real scalar the numerical core is generic over.
///
/// Implemented for `f32` and `f64`; tolerances quoted throughout the crate
/// assume `f64`.
pub trait Scalar:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + fmt::Display
    + fmt::LowerExp
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Thin SVD with singular values in descending order.
    fn thin_svd(m: &DMatrix<Self>) -> Option<ThinSvd<Self>>;

    /// Unit roundoff, half the machine epsilon.
    #[inline]
    fn unit_roundoff() -> Self {
        Self::default_epsilon() * Self::lit(0.5)
    }
}

impl Scalar for f32 {
    fn thin_svd(m: &DMatrix<Self>) -> Option<ThinSvd<Self>> {
        faer_thin_svd(m)
    }
}

impl Scalar for f64 {
    fn thin_svd(m: &DMatrix<Self>) -> Option<ThinSvd<Self>> {
        faer_thin_svd(m)
    }
}
