//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the solver is generic over: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `max(value, k * machine epsilon)`: lets the `f64` tolerances degrade
    /// gracefully when the same code runs in single precision.
    #[inline]
    fn tol_floor(value: f64, k: f64) -> Self {
        Self::lit(value).max(Self::epsilon() * Self::lit(k))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Numerical tolerances used throughout a run.
///
/// Defaults are the double precision values; for `f32` each one is raised to
/// a small multiple of machine epsilon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    /// Exact-geometry comparisons (DD signs, cone membership).
    pub geom: T,
    /// Two image points closer than this are the same inner vertex.
    pub dedupe: T,
    /// KKT residuals, the cache skip test.
    pub kkt: T,
    /// Primal feasibility of scalar solutions.
    pub feas: T,
    /// Duality gap target of the barrier method.
    pub gap: T,
    /// A cut with depth `z* <= cut` is treated as non-cutting.
    pub cut: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            geom: T::tol_floor(1e-9, 1e3),
            dedupe: T::tol_floor(1e-7, 1e4),
            kkt: T::tol_floor(1e-8, 1e3),
            feas: T::tol_floor(1e-8, 1e3),
            gap: T::tol_floor(1e-8, 1e2),
            cut: T::tol_floor(1e-7, 1e4),
        }
    }
}

impl<T: Real> Tolerances<T> {
    pub fn to_f64(&self) -> Tolerances<f64> {
        Tolerances {
            geom: self.geom.as_f64(),
            dedupe: self.dedupe.as_f64(),
            kkt: self.kkt.as_f64(),
            feas: self.feas.as_f64(),
            gap: self.gap.as_f64(),
            cut: self.cut.as_f64(),
        }
    }

    pub fn from_f64(t: &Tolerances<f64>) -> Self {
        Tolerances {
            geom: T::lit(t.geom),
            dedupe: T::lit(t.dedupe),
            kkt: T::lit(t.kkt),
            feas: T::lit(t.feas),
            gap: T::lit(t.gap),
            cut: T::lit(t.cut),
        }
    }
}
