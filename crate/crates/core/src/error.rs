use thiserror::Error;

/// Errors raised by the laboratory. Every variant names the precondition
/// that was violated.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("field size {p}^{k} exceeds the table budget {budget}")]
    TableBudget { p: u64, k: u32, budget: u64 },

    #[error("no multiplicative generator found for F_{p}^{k}")]
    NoGenerator { p: u64, k: u32 },

    #[error("subfield degree {m} does not divide extension degree {k}")]
    NotSubfield { m: u32, k: u32 },

    #[error("no character of order {d} on a field with {q} elements ({d} does not divide {q} - 1)")]
    NoCharacter { d: u64, q: u64 },

    #[error("character order {d} does not divide the ambient root-of-unity order {ambient}")]
    AmbientOrder { d: u64, ambient: u64 },

    #[error("cyclotomic orders differ: {0} vs {1}")]
    MismatchedOrder(u64, u64),

    #[error("automorphism index {u} is not coprime to {order}")]
    NotAutomorphism { u: u64, order: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("iteration count {needed} exceeds the budget {budget} for {what}")]
    Budget { what: String, needed: u128, budget: u128 },

    #[error("rational function is not {d}th-power-free")]
    NotPowerFree { d: u64 },

    #[error("degree {deg} exceeds the configured cap {cap}")]
    DegreeCap { deg: u32, cap: u32 },

    #[error("factors of a {n}-variable rational function are not asserted absolutely irreducible")]
    UnassertedIrreducibility { n: usize },

    #[error("rational function is a perfect {d}th power over the algebraic closure; the Weil bound does not apply")]
    PerfectPower { d: u64 },

    #[error("zero polynomial where a nonzero one is required")]
    ZeroPolynomial,

    #[error("polynomial does not split over any extension within the budget")]
    SplitBudget,

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
