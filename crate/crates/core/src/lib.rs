//! Exact evaluation and empirical stratification of offset families of
//! multiplicative character sums over finite fields
//!
//! `S(x_1, .., x_r) = sum_m prod_i chi_i(F_i(m + x_i))`.
//!
//! Values live in `Z[zeta_D]` as [`CycloInt`]s generic over the coefficient
//! type; the aliases below fix the widths used throughout.

pub mod bounds;
pub mod census;
pub mod config;
pub mod cyclo;
pub mod error;
pub mod experiment;
pub mod ffield;
pub mod grid;
pub mod invariance;
pub mod moments;
pub mod mpoly;
pub mod rfunc;
pub mod strata;
pub mod subspace;
pub mod sums;

pub use cyclo::CycloInt;
pub use error::{Error, Result};
pub use ffield::{make_field, Character, Extension, Fe, FieldCtx};
pub use rfunc::FactoredRational;
pub use sums::SumFamily;

/// Single character sums.
pub type Cyclo = CycloInt<i64>;
/// Moments and other products of sums.
pub type WideCyclo = CycloInt<i128>;
/// Unbounded coefficients.
pub type BigCyclo = CycloInt<num_bigint::BigInt>;
