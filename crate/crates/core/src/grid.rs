//! Row-major enumeration of `F^n` and of tuples of points.
//!
//! A point `(c_0, ..., c_{n-1})` has index `((c_0 q + c_1) q + ...) q + c_{n-1}`,
//! so the last coordinate varies fastest.

use crate::error::{Error, Result};
use crate::ffield::Fe;

/// `q^n`, or `None` on overflow.
pub fn count(q: u64, n: usize) -> Option<u64> {
    q.checked_pow(n as u32)
}

pub fn decode(mut idx: u64, q: u64, n: usize) -> Vec<Fe> {
    let mut out = vec![Fe::ZERO; n];
    for slot in out.iter_mut().rev() {
        *slot = Fe((idx % q) as u32);
        idx /= q;
    }
    out
}

pub fn decode_into(mut idx: u64, q: u64, out: &mut [Fe]) {
    for slot in out.iter_mut().rev() {
        *slot = Fe((idx % q) as u32);
        idx /= q;
    }
}

pub fn encode(point: &[Fe], q: u64) -> u64 {
    point.iter().fold(0u64, |acc, c| acc * q + c.0 as u64)
}

/// Fail unless `needed <= budget`.
pub fn check_budget(what: &str, needed: Option<u128>, budget: u128) -> Result<u128> {
    match needed {
        Some(n) if n <= budget => Ok(n),
        other => Err(Error::Budget {
            what: what.to_string(),
            needed: other.unwrap_or(u128::MAX),
            budget,
        }),
    }
}

/// `q^exp` in `u128`, `None` on overflow.
pub fn pow128(q: u64, exp: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(q as u128)?;
    }
    Some(acc)
}
