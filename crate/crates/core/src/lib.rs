//! Grid-exact machinery for the uncentered Hardy-Littlewood maximal operator
//! and weighted Lorentz quasi-norms on discretized boxes in one and two
//! dimensions.
//!
//! The crate provides:
//!
//! - [`measure`]: uniform grid domains, nonnegative grid functions, grid sets,
//!   gridded weights `u` with exact set measures, and parametric weights `w`
//!   on the half-line with closed-form primitives.
//! - [`maximal`]: the uncentered maximal operator over grid-aligned cubes,
//!   as a transparent enumeration oracle and as fast kernels that are
//!   bit-identical to the oracle.
//! - [`rearrange`]: distribution functions, the decreasing rearrangement, and
//!   the Hardy averaging operator on decreasing step functions.
//! - [`lorentz`]: weighted Lorentz quasi-norms evaluated exactly by
//!   layer-cake sums over the finitely many levels of a grid function.
//! - [`classes`]: constant evaluators for the A_p, A_1, B_p, B_{p,inf} and
//!   doubling conditions, plus a seeded adversarial search over cube/subset
//!   families.
//! - [`verify`]: numerical checks of the inequality chain connecting the
//!   maximal operator, the Hardy operator and the Lorentz norms, and the
//!   weak-vs-strong operator-norm growth experiment.
//!
//! All core types are generic over the scalar via [`Real`]; concrete `f64`
//! aliases live at the crate root ([`GridFunction64`] and friends).

// Precondition guards are written as negated comparisons (`!(x > 0)`) so
// that NaN arguments fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classes;
pub mod error;
pub mod lorentz;
pub mod maximal;
pub mod measure;
pub mod rearrange;
pub mod rng;
pub mod scalar;
pub mod verify;
pub mod weight;

pub use error::Error;
pub use scalar::Real;

/// Convenience result alias for fallible operations in this crate.
pub type Result<V> = std::result::Result<V, Error>;

pub use measure::{GridDomain, GridFunction, GridSet, WeightSpec, WeightU};
pub use weight::{MaybeDivergent, WeightW};

/// `f64` grid function.
pub type GridFunction64 = measure::GridFunction<f64>;
/// `f64` gridded weight.
pub type WeightU64 = measure::WeightU<f64>;
/// `f64` parametric weight on the half-line.
pub type WeightW64 = weight::WeightW<f64>;
/// `f64` decreasing step function.
pub type DecreasingStep64 = rearrange::DecreasingStep<f64>;
/// `f64` Lorentz-space parameters.
pub type LorentzParams64 = lorentz::LorentzParams<f64>;
/// `f64` cube/subset family.
pub type CubeFamily64 = classes::CubeFamily<f64>;
