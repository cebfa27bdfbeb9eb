//! Numerical verification of two-weight Hardy-type inequalities on metric
//! measure spaces that admit a polar decomposition.
//!
//! Everything is reduced to radial quantities: a space is described by its
//! surface density `S(r)`, weights are closed-form radial expressions, and the
//! characterizing constants are one-dimensional integrals and suprema.
//!
//! The numerical core is generic over the scalar type (`f32` or `f64`); the
//! `*64` aliases below fix it to `f64`, which is what the tolerances in the
//! documentation assume.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub mod asymptotics;
pub mod hardy_core;
pub mod inequalities;
pub mod kernels;
pub mod polar_space;
pub mod quadrature;
pub mod weights;

/// Floating point type the library computes in.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn cst<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a scalar to `f64` (lossless for the supported types).
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub use asymptotics::{InfClass, ZeroClass};
pub use hardy_core::{
    BReport, BValue, Direction, HardyError, HardyProblem, RadialTestFunction, SandwichReport,
    TestKind, Verdict, Which,
};
pub use inequalities::{InequalityKind, InequalitySpec, RatioReport, RatioVerdict, Validation};
pub use kernels::{KernelBound, KernelVariant};
pub use polar_space::{CharacterSurrogate, Density, PolarSpace};
pub use quadrature::{End, Integrand, QuadError, QuadResult, QuadValue, SupResult};
pub use weights::{Integrability, WeightExpr, WeightParseError};

pub type PolarSpace64 = PolarSpace<f64>;
pub type WeightExpr64 = WeightExpr<f64>;
pub type HardyProblem64 = HardyProblem<f64>;
pub type BReport64 = BReport<f64>;
pub type RadialTestFunction64 = RadialTestFunction<f64>;
pub type KernelBound64 = KernelBound<f64>;
pub type InequalitySpec64 = InequalitySpec<f64>;
pub type RatioReport64 = RatioReport<f64>;
pub type QuadResult64 = QuadResult<f64>;
