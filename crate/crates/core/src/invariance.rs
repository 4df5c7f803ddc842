//! Translation invariance of polynomials: stabilizers over finite fields,
//! the rational probe for integer polynomials, and power-freeness of
//! reductions modulo primes.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffield::{make_field, Fe, FieldCtx};
use crate::grid;
use crate::mpoly::{Exponents, MPoly};
use crate::rfunc::{FactoredRational, Splitter};

/// All `m` in `F_{q^e}^n` with `F(x + m) = F(x)`.
pub fn invariance_over_field(ctx: &Arc<FieldCtx>, f: &MPoly, e: u32, budget: u64) -> Result<Vec<Vec<Fe>>> {
    if f.is_zero() || f.is_constant() {
        let qe = grid::check_budget("stabilizer enumeration", grid::pow128(ctx.q(), e as u64), budget as u128)? as u64;
        let total = grid::check_budget("stabilizer enumeration", grid::pow128(qe, f.nvars() as u64), budget as u128)?;
        return Ok((0..total as u64).map(|i| grid::decode(i, qe, f.nvars())).collect());
    }
    FactoredRational::from_poly(ctx, f, false)?.stabilizer(e, budget)
}

/// A polynomial with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntPoly {
    nvars: usize,
    #[serde(serialize_with = "terms_as_strings")]
    terms: BTreeMap<Exponents, BigInt>,
}

fn terms_as_strings<S: serde::Serializer>(t: &BTreeMap<Exponents, BigInt>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(t.len()))?;
    for (e, c) in t {
        seq.serialize_element(&(e, c.to_string()))?;
    }
    seq.end()
}

impl IntPoly {
    pub fn from_terms<I, C>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponents, C)>,
        C: Into<BigInt>,
    {
        let mut out = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::Dimension {
                    expected: nvars,
                    got: e.len(),
                });
            }
            *out.entry(e).or_insert_with(BigInt::zero) += c.into();
        }
        out.retain(|_, c| !c.is_zero());
        Ok(IntPoly { nvars, terms: out })
    }

    /// `c_0 + c_1 x + ..`.
    pub fn univariate(coeffs: &[i64]) -> Self {
        let terms = coeffs.iter().enumerate().map(|(i, &c)| (vec![i as u32], c));
        IntPoly::from_terms(1, terms).expect("one variable")
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn reduce(&self, ctx: &FieldCtx) -> MPoly {
        let p = BigInt::from(ctx.p());
        let terms = self.terms.iter().map(|(e, c)| {
            let r = ((c % &p) + &p) % &p;
            (e.clone(), ctx.from_int(r.to_i64().expect("reduced below p")))
        });
        MPoly::from_terms(ctx, self.nvars, terms).expect("same shape")
    }

    pub fn derivative(&self, i: usize) -> IntPoly {
        let mut out = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            *out.entry(e2).or_insert_with(BigInt::zero) += c * BigInt::from(e[i]);
        }
        out.retain(|_, c| !c.is_zero());
        IntPoly {
            nvars: self.nvars,
            terms: out,
        }
    }

    /// `F(x + m)` by binomial expansion; `None` past `term_budget` terms.
    pub fn translate(&self, m: &[BigInt], term_budget: u64) -> Option<IntPoly> {
        let work: u64 = self
            .terms
            .keys()
            .map(|e| e.iter().map(|&a| a as u64 + 1).product::<u64>())
            .sum();
        if work > term_budget {
            return None;
        }
        let mut out: BTreeMap<Exponents, BigInt> = BTreeMap::new();
        for (e, c) in &self.terms {
            // expand prod_i (x_i + m_i)^{e_i} one variable at a time
            let mut partial: Vec<(Exponents, BigInt)> = vec![(vec![0; self.nvars], c.clone())];
            for (i, &a) in e.iter().enumerate() {
                let mut next = Vec::with_capacity(partial.len() * (a as usize + 1));
                let mut binom = BigInt::one();
                for k in 0..=a {
                    let factor = &binom * m[i].pow(a - k);
                    for (ex, v) in &partial {
                        let mut ex = ex.clone();
                        ex[i] = k;
                        next.push((ex, v * &factor));
                    }
                    binom = binom * BigInt::from(a - k) / BigInt::from(k + 1);
                }
                partial = next;
            }
            for (ex, v) in partial {
                *out.entry(ex).or_insert_with(BigInt::zero) += v;
            }
        }
        out.retain(|_, c| !c.is_zero());
        Some(IntPoly {
            nvars: self.nvars,
            terms: out,
        })
    }
}

/// Kernel of a rational matrix, as primitive integer vectors.
fn integer_kernel(rows: &[Vec<BigRational>], ncols: usize) -> Vec<Vec<BigInt>> {
    let mut a: Vec<Vec<BigRational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..ncols {
        let Some(found) = (top..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(top, found);
        let inv = a[top][col].recip();
        for x in a[top].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot = a[top].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == top || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot) {
                *x = &*x - &f * y;
            }
        }
        pivots.push(col);
        top += 1;
    }
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![BigRational::zero(); ncols];
            v[free] = BigRational::one();
            for (row, &pc) in a.iter().zip(&pivots) {
                v[pc] = -row[free].clone();
            }
            let lcm = v.iter().fold(BigInt::one(), |acc, x| num_integer::lcm(acc, x.denom().clone()));
            let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
            let g = ints.iter().fold(BigInt::zero(), |acc, x| num_integer::gcd(acc, x.clone()));
            ints.into_iter().map(|x| x / &g).collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Only `m = 0`.
    Trivial,
    /// A positive-dimensional space of invariant translations.
    Invariant,
    /// The substitution cross-check could not be completed.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeRow {
    pub p: u64,
    /// `#{m in F_p^n : F(x + m) = F(x) mod p}`.
    pub stabilizer_size: u64,
    pub dimension: u32,
    pub nontrivial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RationalInvariance {
    pub status: Status,
    pub dimension: usize,
    /// Primitive integer spanning vectors of the invariant space.
    #[serde(serialize_with = "vectors_as_strings")]
    pub basis: Vec<Vec<BigInt>>,
    pub primes: Vec<PrimeRow>,
}

fn vectors_as_strings<S: serde::Serializer>(v: &[Vec<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let strs: Vec<Vec<String>> = v.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    serde::Serialize::serialize(&strs, s)
}

/// Invariant translations of an integer polynomial over the rationals, and
/// the stabilizer of its reduction modulo each probe prime.
///
/// In characteristic zero `F(x + m) = F(x)` forces `F(x + t m) = F(x)` for
/// every integer `t`, hence for all `t`, and so is equivalent to
/// `sum_i m_i dF/dx_i = 0`: a linear system in `m` solved exactly. Each
/// basis vector is then checked by substitution.
pub fn rational_invariance_probe(f: &IntPoly, primes: &[u64], budget: u64) -> Result<RationalInvariance> {
    let n = f.nvars();
    let derivs: Vec<IntPoly> = (0..n).map(|i| f.derivative(i)).collect();
    let monos: std::collections::BTreeSet<&Exponents> = derivs.iter().flat_map(|d| d.terms.keys()).collect();
    let rows: Vec<Vec<BigRational>> = monos
        .iter()
        .map(|mono| {
            derivs
                .iter()
                .map(|d| BigRational::from_integer(d.terms.get(*mono).cloned().unwrap_or_default()))
                .collect()
        })
        .collect();
    let basis = integer_kernel(&rows, n);
    let verified = basis.iter().all(|m| match f.translate(m, budget) {
        Some(g) => g == *f,
        None => false,
    });
    let status = match (verified, basis.is_empty()) {
        (false, _) => Status::Inconclusive,
        (true, true) => Status::Trivial,
        (true, false) => Status::Invariant,
    };
    let mut rows = Vec::with_capacity(primes.len());
    for &p in primes {
        let ctx = make_field(p, 1)?;
        let size = invariance_over_field(&ctx, &f.reduce(&ctx), 1, budget)?.len() as u64;
        let dimension = (size as f64).log(p as f64).round() as u32;
        rows.push(PrimeRow {
            p,
            stabilizer_size: size,
            dimension,
            nontrivial: size > 1,
        });
    }
    Ok(RationalInvariance {
        status,
        dimension: basis.len(),
        basis,
        primes: rows,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PowerFreeRow {
    pub p: u64,
    pub reduced_degree: u32,
    pub max_multiplicity: u32,
    pub power_free: bool,
}

/// Whether the reduction of a univariate integer polynomial modulo each
/// prime has every root multiplicity below `d`. A reduction to zero is a
/// `d`th power.
pub fn power_free_mod_p(f: &IntPoly, d: u32, primes: &[u64], budget: u64) -> Result<Vec<PowerFreeRow>> {
    if f.nvars() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: f.nvars(),
        });
    }
    if d < 2 {
        return Err(Error::Invalid("power-freeness needs d >= 2".into()));
    }
    let mut splitter = Splitter::new(budget);
    primes
        .iter()
        .map(|&p| {
            let ctx = make_field(p, 1)?;
            let g = f.reduce(&ctx);
            if g.is_zero() {
                return Ok(PowerFreeRow {
                    p,
                    reduced_degree: 0,
                    max_multiplicity: u32::MAX,
                    power_free: false,
                });
            }
            let max_multiplicity = if g.is_constant() {
                0
            } else {
                splitter
                    .root_multiplicities(&ctx, &[(g.clone(), 1)])?
                    .values()
                    .map(|&m| m as u32)
                    .max()
                    .unwrap_or(0)
            };
            Ok(PowerFreeRow {
                p,
                reduced_degree: g.degree(),
                max_multiplicity,
                power_free: max_multiplicity < d,
            })
        })
        .collect()
}

/// The first `count` odd primes.
pub fn odd_primes(count: usize) -> Vec<u64> {
    (3u64..).step_by(2).filter(|&n| crate::ffield::is_prime(n)).take(count).collect()
}

pub fn int_vector(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const B: u64 = 1 << 20;

    /// Brute-force stabilizer of an integer polynomial mod p by evaluating
    /// `F(x + m) - F(x)` at every `x`.
    fn oracle_stabilizer(f: &IntPoly, p: i64) -> usize {
        let n = f.nvars();
        let eval = |x: &[i64]| -> i64 {
            f.terms
                .iter()
                .map(|(e, c)| {
                    let c = (c % BigInt::from(p)).to_i64().unwrap().rem_euclid(p);
                    e.iter().zip(x).fold(c, |acc, (&a, &xi)| (0..a).fold(acc, |v, _| v * xi % p))
                })
                .sum::<i64>()
                .rem_euclid(p)
        };
        let pts: Vec<Vec<i64>> = (0..p.pow(n as u32))
            .map(|mut i| {
                (0..n)
                    .map(|_| {
                        let d = i % p;
                        i /= p;
                        d
                    })
                    .collect()
            })
            .collect();
        pts.iter()
            .filter(|m| {
                pts.iter().all(|x| {
                    let xm: Vec<i64> = x.iter().zip(m.iter()).map(|(a, b)| (a + b) % p).collect();
                    eval(&xm) == eval(x)
                })
            })
            .count()
    }

    #[test]
    fn field_examples() {
        let f3 = make_field(3, 1).unwrap();
        let x = MPoly::var(1, 0);
        assert_eq!(invariance_over_field(&f3, &x, 1, B).unwrap(), vec![vec![Fe(0)]]);

        // x^3 - x over F_9 is invariant under exactly F_3
        let as3 = MPoly::from_terms(&f3, 1, vec![(vec![3], Fe(1)), (vec![1], f3.from_int(-1))]).unwrap();
        let st = invariance_over_field(&f3, &as3, 2, B).unwrap();
        assert_eq!(st.len(), 3);

        let x1 = MPoly::var(2, 0);
        let st = invariance_over_field(&f3, &x1, 1, B).unwrap();
        assert_eq!(st.len(), 3);
        assert!(st.iter().all(|m| m[0] == Fe(0)));
    }

    #[test]
    fn stabilizer_is_a_subgroup() {
        let f5 = make_field(5, 1).unwrap();
        let g = MPoly::from_terms(&f5, 2, vec![(vec![5, 0], Fe(1)), (vec![1, 0], f5.from_int(-1)), (vec![0, 1], Fe(0))]).unwrap();
        let st = invariance_over_field(&f5, &g, 1, B).unwrap();
        assert!(st.contains(&vec![Fe(0), Fe(0)]));
        for a in &st {
            for b in &st {
                let s: Vec<Fe> = a.iter().zip(b).map(|(&x, &y)| f5.add(x, y)).collect();
                assert!(st.contains(&s));
            }
        }
    }

    #[test]
    fn sum_of_squares() {
        let f = IntPoly::from_terms(2, vec![(vec![2, 0], 1), (vec![0, 2], 1)]).unwrap();
        let rep = rational_invariance_probe(&f, &[2, 3, 5, 7], B).unwrap();
        assert_eq!(rep.status, Status::Trivial);
        // mod 2 the square is additive: (x1 + x2 + m1 + m2)^2 shifts by (m1 + m2)^2
        let sizes: Vec<u64> = rep.primes.iter().map(|r| r.stabilizer_size).collect();
        assert_eq!(sizes, vec![2, 1, 1, 1]);
        for r in &rep.primes {
            assert_eq!(r.stabilizer_size as usize, oracle_stabilizer(&f, r.p as i64));
        }
    }

    #[test]
    fn coordinate_and_product() {
        let x1 = IntPoly::from_terms(2, vec![(vec![1, 0], 1)]).unwrap();
        let rep = rational_invariance_probe(&x1, &[3], B).unwrap();
        assert_eq!(rep.status, Status::Invariant);
        assert_eq!(rep.basis, vec![int_vector(&[0, 1])]);
        assert_eq!(rep.primes[0].dimension, 1);

        let x1x2 = IntPoly::from_terms(2, vec![(vec![1, 1], 1)]).unwrap();
        let rep = rational_invariance_probe(&x1x2, &odd_primes(5), B).unwrap();
        assert_eq!(rep.status, Status::Trivial);
        assert!(rep.primes.iter().all(|r| !r.nontrivial));
    }

    #[test]
    fn function_of_a_difference() {
        // (x1 - x2)^2 + 3(x1 - x2) is constant along (1, 1)
        let f = IntPoly::from_terms(2, vec![(vec![2, 0], 1), (vec![1, 1], -2), (vec![0, 2], 1), (vec![1, 0], 3), (vec![0, 1], -3)]).unwrap();
        let rep = rational_invariance_probe(&f, &[5], B).unwrap();
        assert_eq!(rep.status, Status::Invariant);
        assert_eq!(rep.basis, vec![int_vector(&[1, 1])]);
    }

    #[test]
    fn substitution_budget_gives_inconclusive() {
        let f = IntPoly::from_terms(2, vec![(vec![3, 0], 1)]).unwrap();
        let rep = rational_invariance_probe(&f, &[], 2).unwrap();
        assert_eq!(rep.status, Status::Inconclusive);
    }

    #[test]
    fn exceptional_primes_of_a_cubic() {
        // x^3 + x: trivial over the rationals; mod p a nontrivial shift would
        // need 3 m x^2 = 0, so only p = 3 can be exceptional
        let f = IntPoly::univariate(&[0, 1, 0, 1]);
        let rep = rational_invariance_probe(&f, &odd_primes(20), B).unwrap();
        let bad: Vec<u64> = rep.primes.iter().filter(|r| r.nontrivial).map(|r| r.p).collect();
        let expected: Vec<u64> = rep
            .primes
            .iter()
            .map(|r| r.p)
            .filter(|&p| oracle_stabilizer(&f, p as i64) > 1)
            .collect();
        assert_eq!(bad, expected);
        assert!(bad.iter().all(|&p| p == 3));
    }

    #[test]
    fn power_free_examples() {
        let f = IntPoly::univariate(&[1, 0, 1]);
        let rows = power_free_mod_p(&f, 2, &[2, 3, 5], B).unwrap();
        assert_eq!(rows.iter().map(|r| r.power_free).collect::<Vec<_>>(), vec![false, true, true]);
        assert_eq!(rows[0].max_multiplicity, 2);
        let x = IntPoly::univariate(&[0, 1]);
        for d in 2..5 {
            assert!(power_free_mod_p(&x, d, &odd_primes(6), B).unwrap().iter().all(|r| r.power_free));
        }
        let p3 = IntPoly::univariate(&[0, 0, 3]);
        assert!(!power_free_mod_p(&p3, 2, &[3], B).unwrap()[0].power_free);
    }

    proptest! {
        #[test]
        fn translation_round_trips(c in proptest::collection::vec(-5i64..5, 1..5), m in -4i64..4) {
            let f = IntPoly::univariate(&c);
            let g = f.translate(&int_vector(&[m]), 1000).unwrap();
            let back = g.translate(&int_vector(&[-m]), 1000).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
