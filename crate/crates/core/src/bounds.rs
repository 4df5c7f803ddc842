//! Codimension bounds from the bootstrapping inequalities.
//!
//! Notation: `c(r, j)` is a lower bound for the codimension of the `j`-th
//! exceptional locus of an `r`-parameter family in `n` variables and `m(r, s)`
//! an upper bound for the excess growth exponent of the `2s`-th moment.
//!
//! * (1) `c(r, j) >= max_s (j s - floor(m(r, s)))`
//! * (2) `m(r, s) <= max_j (j s - c(r, j))`
//! * (3) `m(r, s) <= n s - n r / 2 + max_j (j r / 2 - c'(2s, j))`, where `c'` is
//!   the bound for the transformed family with `2s` parameters.
//!
//! All `m` values are exact rationals; floors are applied only where (1)
//! applies them.

use std::collections::HashMap;

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

pub type Q = Ratio<i64>;

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

fn ceil_half(r: i64) -> i64 {
    (r + 1).div_euclid(2)
}

/// `(a, b)` with `floor((r-1)/2) = (n-1) a + b`, `0 <= b < n-1`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaParams {
    pub a: i64,
    pub b: i64,
}

impl ThetaParams {
    pub fn new(n: i64, r: i64) -> Result<Self> {
        if n < 2 || r < 1 {
            return Err(Error::Invalid(format!("division data needs n >= 2 and r >= 1, got n = {n}, r = {r}")));
        }
        let (a, b) = ((r - 1) / 2).div_rem(&(n - 1));
        Ok(ThetaParams { a, b })
    }
}

/// Closed-form codimension exponent `theta_j(n, r)`.
pub fn theta(n: i64, r: i64, j: i64) -> Result<i64> {
    if n < 1 || r < 1 || j < 0 || j > n {
        return Err(Error::Invalid(format!("theta needs n, r >= 1 and 0 <= j <= n, got ({n}, {r}, {j})")));
    }
    if j == 0 {
        return Ok(0);
    }
    if j == n {
        return Ok(ceil_half(n * r));
    }
    let ThetaParams { a, b } = ThetaParams::new(n, r)?;
    Ok(j * a + 0.max(b + j - (n - 1)))
}

/// Search horizon for every max over `s`.
pub fn horizon(n: i64, r: i64) -> i64 {
    (2 * n * r).max(n * ceil_half(r) + 1)
}

/// Inequality (1). `m[s - 1]` is the bound for `s`.
pub fn c_lower_from_m(m: &[Q], j: i64) -> i64 {
    m.iter()
        .enumerate()
        .map(|(i, ms)| j * (i as i64 + 1) - ms.floor().to_integer())
        .fold(0, i64::max)
}

/// Inequality (2).
pub fn m_upper_from_c(c: &[i64], s: i64) -> Q {
    c.iter()
        .enumerate()
        .map(|(j, cj)| q(j as i64 * s - cj))
        .max()
        .unwrap_or_else(|| q(0))
}

/// Inequality (3), with `cprime[j]` bounding the `2s`-parameter family.
pub fn m_upper_from_cprime(cprime: &[i64], n: i64, r: i64, s: i64) -> Q {
    let half_r = Q::new(r, 2);
    let best = cprime
        .iter()
        .enumerate()
        .map(|(j, cj)| half_r * j as i64 - cj)
        .max()
        .unwrap_or_else(|| q(0));
    q(n * s) - half_r * n + best
}

/// Starting bound from the Weil estimate: `0` up to `s = r / 2n`, then `n s - r / 2`.
pub fn initial_m_bound(n: i64, r: i64, s: i64) -> Q {
    if 2 * n * s <= r {
        q(0)
    } else {
        q(n * s) - Q::new(r, 2)
    }
}

/// `max_{0 <= s <= s_max} min{(n-1) s, ceil(r/2) - s + prev(2s), r - s}`.
pub fn theta_plus(prev: impl Fn(i64) -> i64, n: i64, r: i64, s_max: i64) -> i64 {
    (0..=s_max)
        .map(|s| ((n - 1) * s).min(ceil_half(r) - s + prev(2 * s)).min(r - s))
        .fold(0, i64::max)
}

/// Iterates of `theta^(0) = 0`, `theta^(i+1) = (theta^(i))^+`, memoised.
///
/// Each term of the max is bounded by `min((n-1) s, r - s)`, which lets the
/// search skip `s` without recursing whenever that cannot beat the current
/// best. Without the cut the recursion touches arguments up to `r 2^i`.
pub struct ThetaIter {
    n: i64,
    memo: HashMap<(u32, i64), i64>,
}

impl ThetaIter {
    pub fn new(n: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid(format!("iteration needs n >= 2, got {n}")));
        }
        Ok(ThetaIter { n, memo: HashMap::new() })
    }

    pub fn get(&mut self, r: i64, i: u32) -> i64 {
        if i == 0 {
            return 0;
        }
        if let Some(&v) = self.memo.get(&(i, r)) {
            return v;
        }
        let mut best = 0;
        for s in 1..=r {
            if r - s <= best {
                break;
            }
            if ((self.n - 1) * s).min(r - s) <= best {
                continue;
            }
            let prev = self.get(2 * s, i - 1);
            let v = ((self.n - 1) * s).min(ceil_half(r) - s + prev).min(r - s);
            best = best.max(v);
        }
        self.memo.insert((i, r), best);
        best
    }
}

pub fn theta_iter(n: i64, r: i64, i: u32) -> Result<i64> {
    Ok(ThetaIter::new(n)?.get(r, i))
}

/// `max_s min{j s, (j-n+1) s + ceil(r/2) - 1, (j-n) s + r}`, clamped at 0.
pub fn displayed_bound(n: i64, r: i64, j: i64, s_max: i64) -> i64 {
    (0..=s_max)
        .map(|s| (j * s).min((j - n + 1) * s + ceil_half(r) - 1).min((j - n) * s + r))
        .fold(0, i64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundTable {
    pub n: i64,
    pub r: i64,
    pub s_max: i64,
    /// `c[j]` for `j = 0..=n`.
    pub c: Vec<i64>,
    /// `m[s - 1]` for `s = 1..=s_max`.
    #[serde(serialize_with = "ser_ratios")]
    pub m: Vec<Q>,
    /// Per-stage codimension bounds in pipeline order.
    pub stages: Vec<Stage>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stage {
    pub name: &'static str,
    pub c: Vec<i64>,
}

fn ser_ratios<S: serde::Serializer>(v: &[Q], ser: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = ser.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

fn table_from_m(n: i64, m: &[Q]) -> Vec<i64> {
    (0..=n).map(|j| c_lower_from_m(m, j)).collect()
}

fn initial_table(n: i64, r: i64) -> (Vec<Q>, Vec<i64>) {
    let m: Vec<Q> = (1..=horizon(n, r)).map(|s| initial_m_bound(n, r, s)).collect();
    let c = table_from_m(n, &m);
    (m, c)
}

/// The whole bootstrap for shape `(n, r)`:
///
/// 1. the Weil starting bound, through (1);
/// 2. the starting bound at shape `(n, 2s)` fed through (3) and (1), which
///    produces `c(r, n) = ceil(n r / 2)`;
/// 3. iterating `theta^+` to `i = r - 1`, giving `c(r, n-1) = floor((r-1)/2)`;
/// 4. one more pass of (3) and (1) with `c'(2s, n-1) = s - 1`,
///    `c'(2s, n) = n s`, trivial elsewhere.
///
/// Panics if the result differs from the closed form, which would be an
/// implementation bug.
pub fn bootstrap_fixed_point(n: i64, r: i64) -> Result<BoundTable> {
    if n < 2 || r < 1 {
        return Err(Error::Invalid(format!("bootstrap needs n >= 2 and r >= 1, got ({n}, {r})")));
    }
    let s_max = horizon(n, r);
    let mut stages = Vec::new();

    let (m1, c1) = initial_table(n, r);
    stages.push(Stage { name: "initial", c: c1 });

    let m2: Vec<Q> = (1..=s_max)
        .map(|s| {
            let (_, cprime) = initial_table(n, 2 * s);
            m1[(s - 1) as usize].min(m_upper_from_cprime(&cprime, n, r, s))
        })
        .collect();
    let c2 = table_from_m(n, &m2);
    assert_eq!(c2[n as usize], ceil_half(n * r), "top codimension after one transform");
    stages.push(Stage { name: "transform", c: c2 });

    let mut iter = ThetaIter::new(n)?;
    let limit = iter.get(r, (r - 1).max(0) as u32);
    assert_eq!(limit, (r - 1) / 2, "iteration limit");
    let mut c3 = vec![0; n as usize + 1];
    c3[n as usize - 1] = limit;
    stages.push(Stage { name: "iterate", c: c3 });

    let m4: Vec<Q> = (1..=s_max)
        .map(|s| {
            let mut cprime = vec![0; n as usize + 1];
            cprime[n as usize - 1] = s - 1;
            cprime[n as usize] = n * s;
            m2[(s - 1) as usize].min(m_upper_from_cprime(&cprime, n, r, s))
        })
        .collect();
    let c4 = table_from_m(n, &m4);
    stages.push(Stage { name: "final", c: c4.clone() });

    let c: Vec<i64> = (0..=n as usize)
        .map(|j| stages.iter().map(|st| st.c[j]).max().unwrap())
        .collect();
    for j in 0..=n {
        let closed = theta(n, r, j)?;
        assert_eq!(c[j as usize], closed, "bootstrap vs closed form at (n, r, j) = ({n}, {r}, {j})");
        if j < n {
            assert_eq!(displayed_bound(n, r, j, s_max), closed, "max-min form at j = {j}");
        }
    }
    Ok(BoundTable { n, r, s_max, c, m: m4, stages })
}

/// Whether feeding `c(r, j) = ceil(r/2) - 1` for `0 < j < n` and
/// `c(r, n) = ceil(n r / 2)` back through (3) and (1) gains nothing.
pub fn no_improvement_check(n: i64, r: i64) -> Result<bool> {
    if n < 2 || r < 1 {
        return Err(Error::Invalid(format!("check needs n >= 2 and r >= 1, got ({n}, {r})")));
    }
    let m: Vec<Q> = (1..=horizon(n, r))
        .map(|s| {
            let mut cprime = vec![s - 1; n as usize + 1];
            cprime[0] = 0;
            cprime[n as usize] = n * s;
            m_upper_from_cprime(&cprime, n, r, s)
        })
        .collect();
    let c = table_from_m(n, &m);
    for j in 0..n {
        if c[j as usize] > theta(n, r, j)? {
            return Ok(false);
        }
    }
    Ok(c[n as usize] == ceil_half(n * r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn theta_examples() {
        assert_eq!(theta(4, 9, 0).unwrap(), 0);
        assert_eq!(ThetaParams::new(2, 5).unwrap(), ThetaParams { a: 2, b: 0 });
        assert_eq!(theta(2, 5, 1).unwrap(), 2);
        assert_eq!(theta(2, 5, 2).unwrap(), 5);
        assert_eq!(theta(3, 13, 1).unwrap(), 3);
        assert_eq!(theta(3, 7, 2).unwrap(), 3);
        assert_eq!(theta(3, 7, 3).unwrap(), 11);
        assert_eq!(theta(1, 5, 1).unwrap(), 3);
        assert!(theta(2, 5, 3).is_err());
        assert!(ThetaParams::new(1, 5).is_err());
    }

    #[test]
    fn notation_identities() {
        for n in 2..=6 {
            for r in 1..=40 {
                assert_eq!(theta(n, r, 1).unwrap(), (r - 1) / (2 * (n - 1)));
                assert_eq!(theta(n, r, n - 1).unwrap(), (r - 1) / 2);
                for j in 0..=n {
                    assert!(theta(n, r, j).unwrap() >= j * ((r - 1) / (2 * (n - 1))));
                }
            }
        }
    }

    #[test]
    fn c_lower_examples() {
        assert_eq!(c_lower_from_m(&[q(0); 5], 1), 5);
        let m: Vec<Q> = (1..=10).map(|s| initial_m_bound(1, 4, s)).collect();
        assert_eq!(m[1], q(0));
        assert_eq!(m[3], q(2));
        assert_eq!(c_lower_from_m(&m, 1), 2);
        assert_eq!(c_lower_from_m(&m, 0), 0);
    }

    #[test]
    fn m_upper_examples() {
        assert_eq!(m_upper_from_c(&[0], 4), q(0));
        let th: Vec<i64> = (0..=2).map(|j| theta(2, 5, j).unwrap()).collect();
        assert_eq!(th, vec![0, 2, 5]);
        assert_eq!(m_upper_from_c(&th, 2), q(0));
        assert_eq!(m_upper_from_c(&[0, 0, 0], 3), q(6));
    }

    #[test]
    fn m_from_cprime_examples() {
        let (n, r, s) = (3, 5, 4);
        assert_eq!(m_upper_from_cprime(&[0, 0, 0, 0], n, r, s), q(n * s));
        // c'(2s, j) = j floor(s/n), c'(2s, n) = n s with s >= n ceil(r/2)
        for (n, r) in [(2, 5), (3, 4), (2, 8)] {
            let s = n * ceil_half(r);
            let mut cp: Vec<i64> = (0..=n).map(|j| j * (s / n)).collect();
            cp[n as usize] = n * s;
            assert_eq!(m_upper_from_cprime(&cp, n, r, s), q(n * s) - Q::new(n * r, 2));
        }
        let cp: Vec<i64> = (0..=2).map(|j| theta(2, 16, j).unwrap()).collect();
        assert_eq!(cp, vec![0, 7, 16]);
        assert_eq!(m_upper_from_cprime(&cp, 2, 8, 8), q(8));
    }

    #[test]
    fn initial_bound_examples() {
        assert_eq!(initial_m_bound(1, 4, 1), q(0));
        assert_eq!(initial_m_bound(1, 4, 4), q(2));
        assert_eq!(initial_m_bound(2, 8, 2), q(0));
        assert_eq!(q(2 * 2) - Q::new(8, 2), q(0));
    }

    #[test]
    fn theta_plus_examples() {
        assert_eq!(theta_plus(|_| 0, 2, 8, 8), 2);
        assert_eq!(theta_plus(|_| 0, 2, 2, 2), 0);
        for n in 2..=4 {
            for r in 1..=40 {
                let fixed = theta_plus(|x| ceil_half(x) - 1, n, r, r);
                assert_eq!(fixed, ceil_half(r) - 1);
            }
        }
    }

    #[test]
    fn theta_iter_examples() {
        assert_eq!(theta_iter(2, 8, 1).unwrap(), 2);
        assert_eq!(theta_iter(2, 8, 3).unwrap(), 3);
        for r in 1..=40 {
            assert_eq!(theta_iter(2, r, (r - 1).max(0) as u32).unwrap(), (r - 1) / 2);
        }
        assert!(theta_iter(1, 5, 3).is_err());
    }

    #[test]
    fn pruned_iteration_matches_plain_recursion() {
        fn plain(n: i64, r: i64, i: u32) -> i64 {
            if i == 0 {
                return 0;
            }
            theta_plus(|x| plain(n, x, i - 1), n, r, r)
        }
        for n in 2..=4 {
            for r in 1..=12 {
                for i in 0..=4 {
                    assert_eq!(theta_iter(n, r, i).unwrap(), plain(n, r, i), "({n}, {r}, {i})");
                }
            }
        }
    }

    #[test]
    fn iteration_is_monotone_bounded_and_n_free_in_the_limit() {
        for n in 2..=5 {
            let mut it = ThetaIter::new(n).unwrap();
            for r in 1..=40 {
                let mut prev = 0;
                for i in 0..=40 {
                    let v = it.get(r, i);
                    assert!(v >= prev);
                    assert!(v < ceil_half(r));
                    prev = v;
                }
                assert_eq!(prev, (r - 1) / 2);
            }
        }
    }

    #[test]
    fn even_r_closed_form_for_n2() {
        for r in (2..=30).step_by(2) {
            for i in 0..=6u32 {
                let expected = r * i as i64 / (2 * (i as i64 + 1));
                assert_eq!(theta_iter(2, r, i).unwrap(), expected);
            }
        }
    }

    #[test]
    fn bootstrap_examples() {
        assert_eq!(bootstrap_fixed_point(2, 5).unwrap().c, vec![0, 2, 5]);
        assert_eq!(bootstrap_fixed_point(3, 7).unwrap().c, vec![0, 1, 3, 11]);
        assert_eq!(bootstrap_fixed_point(2, 1).unwrap().c, vec![0, 0, 1]);
    }

    #[test]
    fn bootstrap_grid() {
        for n in 2..=5 {
            for r in 1..=20 {
                let t = bootstrap_fixed_point(n, r).unwrap();
                for s in 1..=t.s_max {
                    for j in 0..=n {
                        assert!(t.m[(s - 1) as usize] >= q(j * s - t.c[j as usize]));
                    }
                }
            }
        }
    }

    #[test]
    fn no_improvement() {
        for n in 2..=3 {
            for r in 1..=30 {
                assert!(no_improvement_check(n, r).unwrap(), "({n}, {r})");
            }
        }
        assert!(no_improvement_check(4, 9).unwrap());
    }

    proptest! {
        #[test]
        fn closure_is_idempotent(n in 1i64..5, r in 1i64..8, raw in prop::collection::vec(0i64..40, 5)) {
            let s_max = horizon(n, r);
            let mut c: Vec<i64> = raw.into_iter().take(n as usize + 1).map(|x| x % (n * r + 2)).collect();
            c.resize(n as usize + 1, 0);
            c[0] = 0;
            let close = |c: &[i64]| -> Vec<i64> {
                let m: Vec<Q> = (1..=s_max).map(|s| m_upper_from_c(c, s)).collect();
                table_from_m(n, &m)
            };
            let once = close(&c);
            prop_assert_eq!(close(&once), once);
        }
    }
}
