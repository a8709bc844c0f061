//! Scalar abstraction shared by every numerical routine in the crate.

use core::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the closed forms and special functions are generic over.
///
/// Implemented for `f32` and `f64`. Accuracy contracts quoted in the docs are for
/// `f64`; tolerances for other widths scale with [`Float::epsilon`].
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Relative tolerance the adaptive routines aim for by default: 1e-12 in
    /// double precision, a few hundred ulps otherwise.
    #[inline]
    fn default_rel_tol() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(256.0))
    }

    /// Largest relative error bound a Meijer-G evaluation may report before it is
    /// treated as a failure.
    #[inline]
    fn accept_rel_tol() -> Self {
        Self::lit(1e-8).max(Self::epsilon() * Self::lit(4096.0))
    }

    /// Largest relative error bound a closed-form outage or error rate may carry
    /// once the bounds of its terms are propagated through the sums. The bound
    /// is a worst case built from the Meijer-G bounds; observed errors are
    /// usually several orders of magnitude smaller.
    #[inline]
    fn result_rel_tol() -> Self {
        Self::lit(1e-3)
    }
}

impl Real for f32 {}
impl Real for f64 {}
