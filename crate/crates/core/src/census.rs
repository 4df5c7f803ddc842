//! Perfect-power censuses over offset tuples, the factor-matching graphs
//! behind their counting argument, and empirical Weil-bound checks.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffield::{Character, Extension, Fe, DEFAULT_TABLE_BUDGET};
use crate::grid;
use crate::rfunc::{FactoredRational, Splitter};
use crate::sums::{SumFamily, DEFAULT_ITERATION_BUDGET};

/// `(+1, ..., +1, -1, ..., -1)` with `s` of each: the moment case.
pub fn moment_exponents(s: usize) -> Vec<i64> {
    std::iter::repeat_n(1, s).chain(std::iter::repeat_n(-1, s)).collect()
}

/// Undirected graph on copies `0..r` of `F`: `i ~ i'` when a translate of
/// factor `j` in copy `i` is associate to some factor of copy `i'`, in
/// either direction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorGraph {
    pub vertices: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl FactorGraph {
    pub fn isolated(&self) -> Vec<usize> {
        (0..self.vertices)
            .filter(|&v| !self.edges.iter().any(|&(a, b)| a == v || b == v))
            .collect()
    }

    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        (0..self.vertices).filter(|&v| find(&mut parent, v) == v).count()
    }
}

/// `G_{m,j}` for a tuple of offsets in the field of `f`.
pub fn factor_graph(f: &FactoredRational, tuple: &[Vec<Fe>], j: usize) -> Result<FactorGraph> {
    if j >= f.factors().len() {
        return Err(Error::Invalid(format!("factor index {j} out of range")));
    }
    let ctx = f.ctx();
    let translated: Vec<Vec<_>> = tuple
        .iter()
        .map(|m| {
            if m.len() != f.nvars() {
                return Err(Error::Dimension {
                    expected: f.nvars(),
                    got: m.len(),
                });
            }
            Ok(f.factors().iter().map(|(g, _)| g.translate(ctx, m).monic(ctx).1).collect())
        })
        .collect::<Result<_>>()?;
    let mut edges = BTreeSet::new();
    for i in 0..tuple.len() {
        for k in i + 1..tuple.len() {
            let fwd = translated[k].contains(&translated[i][j]);
            let back = translated[i].contains(&translated[k][j]);
            if fwd || back {
                edges.insert((i, k));
            }
        }
    }
    Ok(FactorGraph {
        vertices: tuple.len(),
        edges,
    })
}

/// `F` over `F_{q^e}` rewritten with absolutely irreducible factors, plus
/// the map sending offsets from `F_{q^e}` into the field of those factors.
struct Prepared {
    small: Arc<Extension>,
    big: Arc<Extension>,
    absolute: FactoredRational,
}

fn prepare(f: &FactoredRational, e: u32) -> Result<Prepared> {
    let small = Arc::new(Extension::new(f.ctx(), e, DEFAULT_TABLE_BUDGET)?);
    let lifted = f.over_extension(&small);
    if f.nvars() == 1 {
        let mut splitter = Splitter::new(DEFAULT_TABLE_BUDGET);
        let (big, absolute) = lifted.linear_factors(&mut splitter)?;
        Ok(Prepared { small, big, absolute })
    } else {
        if !f.absolutely_irreducible() {
            return Err(Error::UnassertedIrreducibility { n: f.nvars() });
        }
        let big = Arc::new(Extension::trivial(small.field()));
        Ok(Prepared {
            small,
            big,
            absolute: lifted,
        })
    }
}

impl Prepared {
    fn tuple(&self, idx: u64, r: usize) -> Vec<Vec<Fe>> {
        let n = self.absolute.nvars();
        let flat = grid::decode(idx, self.small.field().q(), n * r);
        (0..r)
            .map(|i| flat[i * n..(i + 1) * n].iter().map(|&x| self.big.embed(x)).collect())
            .collect()
    }

    fn small_tuple(&self, idx: u64, r: usize) -> Vec<Vec<Fe>> {
        let n = self.absolute.nvars();
        let flat = grid::decode(idx, self.small.field().q(), n * r);
        (0..r).map(|i| flat[i * n..(i + 1) * n].to_vec()).collect()
    }

    /// Multiplicities of absolutely irreducible factors all divisible by `d`.
    fn is_perfect(&self, tuple: &[Vec<Fe>], exponents: &[i64], d: i64) -> bool {
        let offs: Vec<(Vec<Fe>, i64)> = tuple.iter().cloned().zip(exponents.iter().copied()).collect();
        let prod = self.absolute.product_of_translates(&offs).expect("offsets validated");
        prod.factors().iter().all(|(_, b)| b.rem_euclid(d) == 0)
    }
}

fn validate(f: &FactoredRational, d: u64, exponents: &[i64]) -> Result<()> {
    if d < 2 {
        return Err(Error::Invalid("census power d must be at least 2".into()));
    }
    if exponents.is_empty() {
        return Err(Error::Invalid("census needs at least one exponent".into()));
    }
    if let Some(a) = exponents.iter().find(|a| a.gcd(&(d as i64)) != 1) {
        return Err(Error::Invalid(format!("exponent {a} is not coprime to d = {d}")));
    }
    if f.nvars() == 0 {
        return Err(Error::Invalid("census needs at least one variable".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusReport {
    /// Size of the field the offsets range over.
    pub q: u64,
    pub e: u32,
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub d: u64,
    pub exponents: Vec<i64>,
    pub tuples: u128,
    pub count: u128,
    /// `count / q^{n floor(r/2)}`.
    pub ratio: f64,
    pub stabilizer: u64,
    /// `log2` of the explicit constant of the counting argument.
    pub log2_constant: f64,
    /// The counting bound, clamped to the tuple count.
    pub bound: u128,
    pub bound_pass: bool,
    /// Largest `|T|` over tuples that are not perfect powers, when a
    /// character was supplied.
    pub max_abs_t: Option<f64>,
    /// `max_abs_t / q^{n - 1/2}`.
    pub max_ratio: Option<f64>,
    pub absolutely_irreducible: bool,
}

/// Count tuples `(m_1, .., m_r)` in `F_{q^e}^{n r}` for which
/// `prod F(x + m_i)^{a_i}` is a perfect `d`-th power over the closure.
pub fn perfect_power_census(
    f: &FactoredRational,
    d: u64,
    exponents: &[i64],
    e: u32,
    chi: Option<&Character>,
    budget: u64,
) -> Result<CensusReport> {
    validate(f, d, exponents)?;
    let n = f.nvars();
    let r = exponents.len();
    let tuples = grid::check_budget(
        "perfect-power census",
        grid::pow128(f.ctx().q(), e as u64 * (n * r) as u64),
        budget as u128,
    )?;
    let prep = prepare(f, e)?;
    let qe = prep.small.field().q();

    let tables = match chi {
        Some(chi) => Some(
            SumFamily::without_power_check(f.ctx(), n, vec![chi.clone()], vec![f.clone()], u32::MAX)?
                .with_budget(budget)
                .tables(e)?,
        ),
        None => None,
    };

    let (count, max_abs) = (0..tuples as u64)
        .into_par_iter()
        .map(|idx| {
            let t = prep.tuple(idx, r);
            if prep.is_perfect(&t, exponents, d as i64) {
                (1u128, None)
            } else if let Some(tabs) = &tables {
                let offs: Vec<(Vec<Fe>, i64)> =
                    prep.small_tuple(idx, r).into_iter().zip(exponents.iter().copied()).collect();
                let v = tabs.sum_powers(0, &offs).expect("offsets in range");
                (0u128, Some(v.abs::<f64>()))
            } else {
                (0u128, None)
            }
        })
        .reduce(
            || (0u128, None),
            |a, b| {
                let m = match (a.1, b.1) {
                    (Some(x), Some(y)) => Some(f64::max(x, y)),
                    (x, None) => x,
                    (None, y) => y,
                };
                (a.0 + b.0, m)
            },
        );

    let stabilizer = f.stabilizer(e, budget)?.len() as u64;
    let half = grid::pow128(qe, (n * (r / 2)) as u64).unwrap_or(u128::MAX) as f64;
    let deg = f.degree() as f64;
    let rr = r as f64;
    let log2_constant = (rr * (rr + 1.0) / 2.0) * deg + rr * rr * deg * (2.0 * deg).log2();
    let log2_rhs = log2_constant + half.log2() + (stabilizer as f64).log2() * (r as f64 / 2.0).ceil();
    let bound = if log2_rhs >= (tuples as f64).log2() {
        tuples
    } else {
        let c = 2f64.powf(log2_constant).ceil() as u128;
        let t = (stabilizer as u128).pow(r.div_ceil(2) as u32);
        c.saturating_mul(half as u128).saturating_mul(t).min(tuples)
    };
    let sqrt_weight = (qe as f64).powf(n as f64 - 0.5);
    Ok(CensusReport {
        q: qe,
        e,
        n,
        r,
        s: r / 2,
        d,
        exponents: exponents.to_vec(),
        tuples,
        count,
        ratio: count as f64 / half,
        stabilizer,
        log2_constant,
        bound,
        bound_pass: count <= bound,
        max_abs_t: max_abs,
        max_ratio: max_abs.map(|m| m / sqrt_weight),
        absolutely_irreducible: f.nvars() == 1 || f.absolutely_irreducible(),
    })
}

/// The moment preset of [`perfect_power_census`].
pub fn moment_census(f: &FactoredRational, d: u64, s: usize, e: u32) -> Result<CensusReport> {
    perfect_power_census(f, d, &moment_exponents(s), e, None, DEFAULT_ITERATION_BUDGET)
}

/// Same as the census but only reports the counting inequality.
pub fn census_bound_check(f: &FactoredRational, d: u64, exponents: &[i64], e: u32, budget: u64) -> Result<CensusReport> {
    perfect_power_census(f, d, exponents, e, None, budget)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub perfect_tuples: u128,
    pub violations: u128,
    pub pass: bool,
}

/// Every perfect-power tuple has no isolated vertex in any `G_{m,j}`.
pub fn census_structure_check(
    f: &FactoredRational,
    d: u64,
    exponents: &[i64],
    e: u32,
    budget: u64,
) -> Result<StructureReport> {
    validate(f, d, exponents)?;
    let n = f.nvars();
    let r = exponents.len();
    let tuples = grid::check_budget(
        "census structure check",
        grid::pow128(f.ctx().q(), e as u64 * (n * r) as u64),
        budget as u128,
    )?;
    let prep = prepare(f, e)?;
    let nf = prep.absolute.factors().len();
    let (perfect, bad) = (0..tuples as u64)
        .into_par_iter()
        .map(|idx| {
            let t = prep.tuple(idx, r);
            if !prep.is_perfect(&t, exponents, d as i64) {
                return (0u128, 0u128);
            }
            let ok = (0..nf).all(|j| factor_graph(&prep.absolute, &t, j).unwrap().isolated().is_empty());
            (1, if ok { 0 } else { 1 })
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(StructureReport {
        perfect_tuples: perfect,
        violations: bad,
        pass: bad == 0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeilRow {
    pub e: u32,
    pub q: u64,
    pub value: Vec<i64>,
    pub abs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeilReport {
    pub rows: Vec<WeilRow>,
    pub max_ratio: f64,
    pub c_user: f64,
    pub pass: bool,
}

/// `|sum_x chi(Norm F(x))| / q^{e (n - 1/2)}` at each probe degree.
pub fn weil_check(f: &FactoredRational, chi: &Character, degrees: &[u32], c_user: f64, budget: u64) -> Result<WeilReport> {
    let d = chi.order();
    if f.is_perfect_dth_power(d)? {
        return Err(Error::PerfectPower { d });
    }
    let n = f.nvars();
    let fam = SumFamily::without_power_check(f.ctx(), n, vec![chi.clone()], vec![f.clone()], u32::MAX)?
        .with_budget(budget);
    let mut rows = Vec::new();
    for &e in degrees {
        let tabs = fam.tables(e)?;
        let v = tabs.sum_s(&[vec![Fe::ZERO; n]])?;
        let qe = tabs.field().q();
        let abs = v.abs::<f64>();
        rows.push(WeilRow {
            e,
            q: qe,
            value: v.coeffs().to_vec(),
            abs,
            ratio: abs / (qe as f64).powf(n as f64 - 0.5),
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(WeilReport {
        rows,
        max_ratio,
        c_user,
        pass: max_ratio <= c_user,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::{make_field, FieldCtx};
    use crate::mpoly::MPoly;

    fn upoly(ctx: &FieldCtx, coeffs: &[i64]) -> MPoly {
        let c: Vec<Fe> = coeffs.iter().map(|&x| ctx.from_int(x)).collect();
        MPoly::univariate(ctx, &c)
    }

    fn rat(p: u64, polys: &[(&[i64], i64)]) -> FactoredRational {
        let f = make_field(p, 1).unwrap();
        let raw = polys.iter().map(|(c, b)| (upoly(&f, c), *b)).collect();
        FactoredRational::new(&f, 1, Fe::ONE, raw, false).unwrap()
    }

    /// Counts `(m_1..m_4)` with `(x+m_1)(x+m_2)/((x+m_3)(x+m_4))` a square,
    /// from the multiset of roots with signed multiplicities.
    fn oracle_linear(q: i64, exps: &[i64], d: i64) -> u128 {
        let r = exps.len() as u32;
        let mut count = 0;
        for idx in 0..q.pow(r) {
            let ms: Vec<i64> = (0..r).map(|i| idx / q.pow(r - 1 - i) % q).collect();
            let mut mult = std::collections::HashMap::new();
            for (m, a) in ms.iter().zip(exps) {
                *mult.entry(*m).or_insert(0i64) += a;
            }
            if mult.values().all(|v| v % d == 0) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn linear_census_counts() {
        for q in [3u64, 5, 7] {
            let f = rat(q, &[(&[0, 1], 1)]);
            let s1 = moment_census(&f, 2, 1, 1).unwrap();
            assert_eq!(s1.count, q as u128);
            let s2 = moment_census(&f, 2, 2, 1).unwrap();
            assert_eq!(s2.count, oracle_linear(q as i64, &[1, 1, -1, -1], 2));
            let q = q as u128;
            assert_eq!(s2.count, 3 * q * q - 2 * q);
        }
    }

    #[test]
    fn square_is_a_negative_control() {
        let f5 = make_field(5, 1).unwrap();
        let sq = FactoredRational::new(&f5, 1, Fe::ONE, vec![(upoly(&f5, &[0, 1]), 2)], false).unwrap();
        assert_eq!(moment_census(&sq, 2, 1, 1).unwrap().count, 25);
    }

    #[test]
    fn same_sign_exponents() {
        let f = rat(5, &[(&[0, 1], 1)]);
        let rep = census_bound_check(&f, 2, &[1, 1], 1, 1 << 20).unwrap();
        assert_eq!(rep.count, 5);
        assert!(rep.bound_pass);
        assert!(census_bound_check(&f, 2, &[2, 1], 1, 1 << 20).is_err());
    }

    #[test]
    fn artin_schreier_census_over_f3_and_f9() {
        let f = rat(3, &[(&[0, -1, 0, 1], 1)]);
        for e in [1u32, 2] {
            let rep = census_bound_check(&f, 2, &[1, -1], e, 1 << 20).unwrap();
            assert_eq!(rep.stabilizer, 3);
            // pairs differing by an element of F_3 are squares
            assert!(rep.count >= rep.q as u128 * 3);
            assert!(rep.bound_pass);
        }
    }

    #[test]
    fn factor_graph_examples() {
        let f7 = make_field(7, 1).unwrap();
        let fx = FactoredRational::from_poly(&f7, &upoly(&f7, &[0, 1]), true).unwrap();
        let g = factor_graph(&fx, &[vec![Fe(3)], vec![Fe(3)]], 0).unwrap();
        assert_eq!(g.edges.into_iter().collect::<Vec<_>>(), vec![(0, 1)]);
        let g = factor_graph(&fx, &[vec![Fe(0)], vec![Fe(1)]], 0).unwrap();
        assert!(g.edges.is_empty());
        assert_eq!(g.components(), 2);

        // x(x+1) at offsets 0 and 3: translates {x, x+1} and {x+3, x+4}
        let g2 = rat(7, &[(&[0, 1], 1), (&[1, 1], 1)]);
        let g = factor_graph(&g2, &[vec![Fe(0)], vec![Fe(3)]], 0).unwrap();
        assert!(g.edges.is_empty());
        // offsets 0 and 1 share x+1
        let g = factor_graph(&g2, &[vec![Fe(0)], vec![Fe(1)]], 0).unwrap();
        assert_eq!(g.edges.len(), 1);
    }

    #[test]
    fn structure_checks() {
        for (f, s, p) in [
            (rat(5, &[(&[0, 1], 1)]), 1, 5),
            (rat(5, &[(&[0, 1, 1], 1)]), 1, 5),
            (rat(3, &[(&[0, 1], 1)]), 2, 3),
        ] {
            let _ = p;
            let rep = census_structure_check(&f, 2, &moment_exponents(s), 1, 1 << 20).unwrap();
            assert!(rep.pass);
            assert!(rep.perfect_tuples > 0);
        }
    }

    #[test]
    fn census_is_translation_invariant() {
        let f = rat(5, &[(&[0, 1, 1], 1)]);
        let prep = prepare(&f, 1).unwrap();
        let exps = moment_exponents(1);
        for idx in 0..25u64 {
            let t = prep.tuple(idx, 2);
            let base = prep.is_perfect(&t, &exps, 2);
            for u in 0..5u32 {
                let shifted: Vec<Vec<Fe>> = t
                    .iter()
                    .map(|m| vec![prep.absolute.ctx().add(m[0], prep.big.embed(Fe(u)))])
                    .collect();
                assert_eq!(prep.is_perfect(&shifted, &exps, 2), base);
            }
        }
    }

    #[test]
    fn linear_factor_test_agrees_with_splitting_test() {
        let f = rat(3, &[(&[1, 0, 1], 1), (&[0, 1], -1)]);
        let prep = prepare(&f, 1).unwrap();
        let exps = moment_exponents(1);
        for idx in 0..9u64 {
            let small = prep.small_tuple(idx, 2);
            let offs: Vec<(Vec<Fe>, i64)> = small.into_iter().zip(exps.iter().copied()).collect();
            let direct = f.product_of_translates(&offs).unwrap().is_perfect_dth_power(2).unwrap();
            assert_eq!(direct, prep.is_perfect(&prep.tuple(idx, 2), &exps, 2));
        }
    }

    #[test]
    fn trivial_stabilizer_gives_diagonal_only() {
        for e in [1u32, 2] {
            let f = rat(3, &[(&[1, 0, 1], 1)]);
            let rep = moment_census(&f, 2, 1, e).unwrap();
            assert_eq!(rep.stabilizer, 1);
            assert_eq!(rep.count, rep.q as u128);
        }
    }

    #[test]
    fn weil_examples() {
        let f7 = make_field(7, 1).unwrap();
        let chi = Character::new(&f7, 2, 1, 2).unwrap();
        let g = FactoredRational::from_poly(&f7, &upoly(&f7, &[0, 1, 1]), false).unwrap();
        let rep = weil_check(&g, &chi, &[1], 2.0, 1 << 20).unwrap();
        assert_eq!(rep.rows[0].value, vec![-1]);
        assert!((rep.max_ratio - 1.0 / 7f64.sqrt()).abs() < 1e-12);
        assert!(rep.pass);

        let x = FactoredRational::from_poly(&f7, &upoly(&f7, &[0, 1]), false).unwrap();
        let rep = weil_check(&x, &chi, &[1, 2], 2.0, 1 << 20).unwrap();
        assert!(rep.rows.iter().all(|r| r.abs == 0.0));

        let sq = FactoredRational::new(&f7, 1, Fe::ONE, vec![(upoly(&f7, &[0, 1]), 2)], false).unwrap();
        assert_eq!(weil_check(&sq, &chi, &[1], 2.0, 1 << 20).unwrap_err(), Error::PerfectPower { d: 2 });
    }

    #[test]
    fn census_reports_t_sums() {
        let f7 = make_field(7, 1).unwrap();
        let chi = Character::new(&f7, 2, 1, 2).unwrap();
        let g = FactoredRational::from_poly(&f7, &upoly(&f7, &[0, 1, 1]), false).unwrap();
        let rep = perfect_power_census(&g, 2, &[1, -1], 1, Some(&chi), 1 << 20).unwrap();
        assert_eq!(rep.count, 7);
        assert!(rep.max_ratio.unwrap() <= 3.0);
    }
}
