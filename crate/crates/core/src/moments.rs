//! Moments of character sums, computed directly and through the elementary
//! transformation that swaps the offset sum with the point sum.
//!
//! The engine handles an arbitrary tuple of Galois automorphisms
//! `sigma_1..sigma_s`:
//!
//! ```text
//! sum_x prod_j sigma_j(S(x)) = sum_{m_1..m_s} prod_i sum_{x_i} prod_j sigma_j(chi_i(F_i(m_j + x_i)))
//! ```
//!
//! and the `2s`-th moment is the tuple `(id^s, conj^s)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::cyclo::CycloInt;
use crate::error::{Error, Result};
use crate::ffield::Fe;
use crate::grid;
use crate::sums::{SumFamily, SumTables};

/// Exact moments use 128-bit coefficients; the products grow like
/// `q^{2 s n}`.
pub type Moment = CycloInt<i128>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub equal: bool,
    pub sigmas: Vec<u64>,
    pub lhs: Vec<i128>,
    pub rhs: Vec<i128>,
    pub lhs_integer: Option<i128>,
}

/// `(1, ..., 1, D-1, ..., D-1)` with `s` of each.
pub fn moment_sigmas(ambient: u64, s: usize) -> Vec<u64> {
    let conj = if ambient == 1 { 1 } else { ambient - 1 };
    std::iter::repeat_n(1, s).chain(std::iter::repeat_n(conj, s)).collect()
}

fn widen(z: &CycloInt<i64>) -> Moment {
    z.map_coeffs(|&c| c as i128)
}

fn sum_all(order: u64, parts: impl ParallelIterator<Item = Moment>) -> Moment {
    parts.reduce(|| Moment::zero(order), |a, b| &a + &b)
}

/// `sum_{x in L^{n r}} prod_j sigma_j(S(x))`.
pub fn identity_lhs(tabs: &SumTables, sigmas: &[u64]) -> Result<Moment> {
    let d = tabs.ambient();
    let (n, r) = (tabs.n(), tabs.r());
    let q = tabs.field().q();
    for &u in sigmas {
        Moment::one(d).galois(u)?;
    }
    let total = tabs.point_count().pow(r as u32);
    Ok(sum_all(
        d,
        (0..total).into_par_iter().map(|idx| {
            let flat = grid::decode(idx, q, n * r);
            let offsets: Vec<Vec<Fe>> = (0..r).map(|i| flat[i * n..(i + 1) * n].to_vec()).collect();
            let s = widen(&tabs.sum_s(&offsets).expect("offsets are in range"));
            sigmas
                .iter()
                .fold(Moment::one(d), |acc, &u| &acc * &s.galois(u).unwrap())
        }),
    ))
}

/// `sum_{m in L^{n s}} prod_i T_i^sigma(m)`.
pub fn identity_rhs(tabs: &SumTables, sigmas: &[u64]) -> Result<Moment> {
    let d = tabs.ambient();
    let n = tabs.n();
    let q = tabs.field().q();
    let k = sigmas.len();
    for &u in sigmas {
        Moment::one(d).galois(u)?;
    }
    let total = tabs.point_count().pow(k as u32);
    Ok(sum_all(
        d,
        (0..total).into_par_iter().map(|idx| {
            let flat = grid::decode(idx, q, n * k);
            let tagged: Vec<(Vec<Fe>, u64)> = sigmas
                .iter()
                .enumerate()
                .map(|(j, &u)| (flat[j * n..(j + 1) * n].to_vec(), u))
                .collect();
            (0..tabs.r()).fold(Moment::one(d), |acc, i| {
                &acc * &widen(&tabs.sum_general(i, &tagged).expect("validated above"))
            })
        }),
    ))
}

fn require_positive(s: usize) -> Result<()> {
    if s == 0 {
        return Err(Error::Invalid("moment order s must be at least 1".into()));
    }
    Ok(())
}

/// `M(r, s) = sum_x |S(x)|^{2s}` summed over all offset tuples.
pub fn moment_direct(fam: &SumFamily, s: usize, e: u32) -> Result<Moment> {
    require_positive(s)?;
    fam.check_budget("direct moment", e, fam.r() as u64 + 1)?;
    let tabs = fam.tables(e)?;
    Ok(direct_from_tables(&tabs, s))
}

/// The same moment as a sum over `2s` offsets of products of `T_i`.
pub fn moment_via_transform(fam: &SumFamily, s: usize, e: u32) -> Result<Moment> {
    require_positive(s)?;
    fam.check_budget("transformed moment", e, 2 * s as u64 + 1)?;
    let tabs = fam.tables(e)?;
    identity_rhs(&tabs, &moment_sigmas(fam.ambient(), s))
}

/// Evaluate both sides of the general identity for the given automorphisms.
pub fn verify_general(fam: &SumFamily, sigmas: &[u64], e: u32) -> Result<IdentityReport> {
    let k = fam.r().max(sigmas.len()) as u64 + 1;
    fam.check_budget("identity verification", e, k)?;
    let tabs = fam.tables(e)?;
    let lhs = identity_lhs(&tabs, sigmas)?;
    let rhs = identity_rhs(&tabs, sigmas)?;
    Ok(IdentityReport {
        equal: lhs == rhs,
        sigmas: sigmas.to_vec(),
        lhs_integer: lhs.as_integer(),
        lhs: lhs.coeffs().to_vec(),
        rhs: rhs.coeffs().to_vec(),
    })
}

/// Both sides of the `2s`-th moment identity.
pub fn verify_identity(fam: &SumFamily, s: usize, e: u32) -> Result<IdentityReport> {
    require_positive(s)?;
    let k = fam.r().max(2 * s) as u64 + 1;
    fam.check_budget("identity verification", e, k)?;
    let tabs = fam.tables(e)?;
    let sigmas = moment_sigmas(fam.ambient(), s);
    let lhs = direct_from_tables(&tabs, s);
    let rhs = identity_rhs(&tabs, &sigmas)?;
    Ok(IdentityReport {
        equal: lhs == rhs,
        sigmas,
        lhs_integer: lhs.as_integer(),
        lhs: lhs.coeffs().to_vec(),
        rhs: rhs.coeffs().to_vec(),
    })
}

fn direct_from_tables(tabs: &SumTables, s: usize) -> Moment {
    let d = tabs.ambient();
    let q = tabs.field().q();
    let (n, r) = (tabs.n(), tabs.r());
    let total = tabs.point_count().pow(r as u32);
    sum_all(
        d,
        (0..total).into_par_iter().map(|idx| {
            let flat = grid::decode(idx, q, n * r);
            let offsets: Vec<Vec<Fe>> = (0..r).map(|i| flat[i * n..(i + 1) * n].to_vec()).collect();
            let v = widen(&tabs.sum_s(&offsets).unwrap());
            (&v * &v.conj()).pow(s as u32)
        }),
    )
}
