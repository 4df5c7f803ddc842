//! Stratification experiments: classify offset tuples by `|S|` against the
//! weight thresholds `tau_j = C q^{(n + j - 1)/2}`, count exceptional
//! tuples globally and inside boxes, and check the box point-count bound.

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds;
use crate::error::{Error, Result};
use crate::ffield::{Fe, FieldCtx};
use crate::grid;
use crate::mpoly::MPoly;
use crate::sums::{SumFamily, SumTables};

/// Relative slack for `|S| > tau`, so that a sum sitting exactly on a
/// threshold is never counted through rounding.
const STRICT: f64 = 1e-12;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sample { size: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StratumCensus {
    pub q: u64,
    pub e: u32,
    pub n: usize,
    pub r: usize,
    pub c_user: f64,
    pub mode: Mode,
    pub tuples: u128,
    pub evaluated: u64,
    /// `tau_j` for `j = 0..=n`.
    pub thresholds: Vec<f64>,
    /// Tuples seen with `|S| > tau_j`.
    pub counts: Vec<u64>,
    /// `N_j`, scaled to the whole tuple space when sampling.
    pub estimates: Vec<f64>,
    /// `log_q N_j`, absent when `N_j = 0`.
    pub exponents: Vec<Option<f64>>,
    /// `n r - exponent`.
    pub empirical_codim: Vec<Option<f64>>,
    pub theta: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StratumRow {
    pub tuple: Vec<u32>,
    pub abs: f64,
}

pub fn thresholds(q: u64, n: usize, c_user: f64) -> Vec<f64> {
    (0..=n)
        .map(|j| c_user * (q as f64).powf((n + j) as f64 / 2.0 - 0.5))
        .collect()
}

fn exceeds(abs: f64, tau: f64) -> bool {
    abs > tau * (1.0 + STRICT)
}

fn s_abs(tabs: &SumTables, idx: u64) -> f64 {
    let (n, r) = (tabs.n(), tabs.r());
    let flat = grid::decode(idx, tabs.field().q(), n * r);
    let offs: Vec<Vec<Fe>> = (0..r).map(|i| flat[i * n..(i + 1) * n].to_vec()).collect();
    tabs.sum_s(&offs).expect("offsets in range").abs::<f64>()
}

fn theta_row(n: usize, r: usize) -> Vec<i64> {
    (0..=n)
        .map(|j| bounds::theta(n as i64, r as i64, j as i64).unwrap_or(0))
        .collect()
}

/// Count tuples above each threshold, exactly or on a seeded sample.
/// Up to `row_limit` `(tuple, |S|)` rows are returned in enumeration order.
pub fn stratum_census(
    fam: &SumFamily,
    e: u32,
    c_user: f64,
    mode: Mode,
    row_limit: usize,
) -> Result<(StratumCensus, Vec<StratumRow>)> {
    let (n, r) = (fam.n(), fam.r());
    let space = grid::pow128(fam.ctx().q(), e as u64 * (n * r) as u64)
        .ok_or_else(|| Error::Invalid("tuple space overflows".into()))?;
    let indices: Vec<u64> = match mode {
        Mode::Exact => {
            fam.check_budget("exact stratification", e, r as u64 + 1)?;
            (0..space as u64).collect()
        }
        Mode::Sample { size, seed } => {
            let per = fam.point_count(e).unwrap_or(u128::MAX);
            grid::check_budget(
                "sampled stratification",
                (size as u128).checked_mul(per),
                fam.budget() as u128,
            )?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..size).map(|_| rng.gen_range(0..space as u64)).collect()
        }
    };
    let tabs = fam.tables(e)?;
    let q = tabs.field().q();
    let taus = thresholds(q, n, c_user);
    let values: Vec<f64> = indices.par_iter().map(|&i| s_abs(&tabs, i)).collect();
    let mut counts = vec![0u64; n + 1];
    for &v in &values {
        for (c, &t) in counts.iter_mut().zip(&taus) {
            if exceeds(v, t) {
                *c += 1;
            }
        }
    }
    let scale = space as f64 / values.len().max(1) as f64;
    let estimates: Vec<f64> = counts.iter().map(|&c| c as f64 * scale).collect();
    let exponents: Vec<Option<f64>> = estimates
        .iter()
        .map(|&x| (x > 0.0).then(|| x.ln() / (q as f64).ln()))
        .collect();
    let rows = indices
        .iter()
        .zip(&values)
        .take(row_limit)
        .map(|(&i, &abs)| StratumRow {
            tuple: grid::decode(i, q, n * r).iter().map(|c| c.0).collect(),
            abs,
        })
        .collect();
    Ok((
        StratumCensus {
            q,
            e,
            n,
            r,
            c_user,
            mode,
            tuples: space,
            evaluated: values.len() as u64,
            thresholds: taus,
            counts,
            estimates,
            empirical_codim: exponents.iter().map(|x| x.map(|v| (n * r) as f64 - v)).collect(),
            exponents,
            theta: theta_row(n, r),
        },
        rows,
    ))
}

/// CSV dump of `(tuple, |S|)` rows, the tuple as space-separated indices.
pub fn write_rows<W: Write>(out: W, rows: &[StratumRow]) -> Result<()> {
    let io = |e: csv::Error| Error::Invalid(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tuple", "abs"]).map_err(io)?;
    for row in rows {
        let t: Vec<String> = row.tuple.iter().map(|c| c.to_string()).collect();
        w.write_record([t.join(" "), format!("{:.12}", row.abs)]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Invalid(format!("csv output failed: {e}")))?;
    Ok(())
}

/// Per-coordinate subsets of a box. Bounds use the side sizes in
/// increasing order, `#B_1 <= .. <= #B_N`; points keep coordinate order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoxSpec {
    sets: Vec<Vec<Fe>>,
}

impl BoxSpec {
    pub fn new(ctx: &FieldCtx, mut sets: Vec<Vec<Fe>>) -> Result<Self> {
        for s in sets.iter_mut() {
            s.sort();
            s.dedup();
            if s.is_empty() {
                return Err(Error::Invalid("box sides must be nonempty".into()));
            }
            if s.iter().any(|c| c.0 as u64 >= ctx.q()) {
                return Err(Error::Invalid("box element outside the field".into()));
            }
        }
        Ok(BoxSpec { sets })
    }

    /// `F^N` itself.
    pub fn full(ctx: &FieldCtx, dim: usize) -> Self {
        BoxSpec {
            sets: vec![ctx.elements().collect(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.sets.len()
    }

    pub fn sides(&self) -> &[Vec<Fe>] {
        &self.sets
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.sets.iter().map(|s| s.len() as u64).collect()
    }

    pub fn sorted_sizes(&self) -> Vec<u64> {
        let mut v = self.sizes();
        v.sort();
        v
    }

    pub fn volume(&self) -> u128 {
        self.sets.iter().map(|s| s.len() as u128).product()
    }

    /// The `idx`-th point in row-major order over the sides.
    pub fn point(&self, mut idx: u128) -> Vec<Fe> {
        let mut out = vec![Fe::ZERO; self.sets.len()];
        for (slot, side) in out.iter_mut().zip(&self.sets).rev() {
            let k = side.len() as u128;
            *slot = side[(idx % k) as usize];
            idx /= k;
        }
        out
    }

    /// `b^{-theta}` for `r` copies: with `theta = n0 r + eta`,
    /// `(#B_1 .. #B_{n0})^{-r} (#B_{n0+1})^{-eta}`.
    pub fn b_power(&self, theta: i64, r: usize) -> f64 {
        let r = r as i64;
        let (n0, eta) = (theta / r, theta % r);
        let sizes = self.sorted_sizes();
        let mut v = 1.0f64;
        for s in sizes.iter().take(n0 as usize) {
            v /= (*s as f64).powi(r as i32);
        }
        if let Some(s) = sizes.get(n0 as usize) {
            v /= (*s as f64).powi(eta as i32);
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxExceptionalReport {
    pub j: usize,
    pub threshold: f64,
    pub box_sizes: Vec<u64>,
    pub tuples: u128,
    pub count: u64,
    pub theta: i64,
    /// `(#B)^r b^{-theta_j}`.
    pub shape: f64,
    pub c_prime: Option<f64>,
    pub bound: Option<f64>,
    pub pass: Option<bool>,
}

/// Exceptional tuples `(x^(1), .., x^(r))` in `B^r` with `|S| > tau_j`.
pub fn box_exceptional_count(
    fam: &SumFamily,
    e: u32,
    c_user: f64,
    j: usize,
    bx: &BoxSpec,
    c_prime: Option<f64>,
) -> Result<BoxExceptionalReport> {
    let (n, r) = (fam.n(), fam.r());
    if bx.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            got: bx.dim(),
        });
    }
    if j > n {
        return Err(Error::Invalid(format!("stratum index {j} exceeds n = {n}")));
    }
    let tuples = bx
        .volume()
        .checked_pow(r as u32)
        .ok_or_else(|| Error::Invalid("box tuple space overflows".into()))?;
    grid::check_budget(
        "box exceptional count",
        tuples.checked_mul(fam.point_count(e).unwrap_or(u128::MAX)),
        fam.budget() as u128,
    )?;
    let tabs = fam.tables(e)?;
    let ext = tabs.extension().clone();
    let q = tabs.field().q();
    let tau = thresholds(q, n, c_user)[j];
    let vol = bx.volume();
    let count = (0..tuples)
        .into_par_iter()
        .filter(|&idx| {
            let mut rest = idx;
            let mut offs = Vec::with_capacity(r);
            for _ in 0..r {
                offs.push(bx.point(rest % vol).iter().map(|&c| ext.embed(c)).collect::<Vec<_>>());
                rest /= vol;
            }
            offs.reverse();
            let v = tabs.sum_s(&offs).expect("offsets in range").abs::<f64>();
            exceeds(v, tau)
        })
        .count() as u64;
    let theta = bounds::theta(n as i64, r as i64, j as i64).unwrap_or(0);
    let shape = tuples as f64 * bx.b_power(theta, r);
    let bound = c_prime.map(|c| c * shape);
    Ok(BoxExceptionalReport {
        j,
        threshold: tau,
        box_sizes: bx.sizes(),
        tuples,
        count,
        theta,
        shape,
        c_prime,
        bound,
        pass: bound.map(|b| count as f64 <= b),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxCountReport {
    pub count: u128,
    pub bound: u128,
    pub theta: usize,
    pub degree: u64,
    pub pass: bool,
}

/// Points of `{f = 0 for f in polys}` inside the box, against
/// `d prod_{i > theta} #B_i`.
pub fn box_count_variety(
    ctx: &Arc<FieldCtx>,
    polys: &[MPoly],
    bx: &BoxSpec,
    theta: usize,
    degree: u64,
    budget: u64,
) -> Result<BoxCountReport> {
    if let Some(f) = polys.iter().find(|f| f.nvars() != bx.dim()) {
        return Err(Error::Dimension {
            expected: bx.dim(),
            got: f.nvars(),
        });
    }
    if theta > bx.dim() {
        return Err(Error::Invalid(format!("codimension {theta} exceeds dimension {}", bx.dim())));
    }
    let vol = grid::check_budget("box point count", Some(bx.volume()), budget as u128)?;
    let count = (0..vol)
        .into_par_iter()
        .filter(|&i| {
            let x = bx.point(i);
            polys.iter().all(|f| f.eval(ctx, &x).is_zero())
        })
        .count() as u128;
    let bound = bx.sorted_sizes()[theta..]
        .iter()
        .fold(degree as u128, |acc, &s| acc.saturating_mul(s as u128));
    Ok(BoxCountReport {
        count,
        bound,
        theta,
        degree,
        pass: count <= bound,
    })
}

/// A variety cut out by one hypersurface per disjoint block of variables:
/// codimension = number of blocks, degree = product of the degrees.
#[derive(Clone, Debug)]
pub struct BoxInstance {
    pub p: u64,
    pub polys: Vec<MPoly>,
    pub theta: usize,
    pub degree: u64,
    pub sides: Vec<Vec<Fe>>,
}

/// Seeded suite of product-of-hypersurface instances in at most `max_dim`
/// variables over the given prime fields.
pub fn random_box_instances(seed: u64, count: usize, primes: &[u64], max_dim: usize) -> Result<Vec<BoxInstance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = primes[rng.gen_range(0..primes.len())];
        let ctx = crate::ffield::make_field(p, 1)?;
        let dim = rng.gen_range(1..=max_dim);
        let blocks = rng.gen_range(1..=dim);
        // random cut points split 0..dim into `blocks` nonempty runs
        let mut cuts: Vec<usize> = (1..dim).collect();
        for i in (1..cuts.len()).rev() {
            cuts.swap(i, rng.gen_range(0..=i));
        }
        cuts.truncate(blocks - 1);
        cuts.sort();
        let mut bounds_ = vec![0];
        bounds_.extend(cuts);
        bounds_.push(dim);
        let mut polys = Vec::new();
        let mut degree = 1u64;
        for w in bounds_.windows(2) {
            let vars: Vec<usize> = (w[0]..w[1]).collect();
            let deg = rng.gen_range(1..=3u32);
            let mut terms = Vec::new();
            // a pure power of the first block variable keeps the degree exact
            let mut lead = vec![0u32; dim];
            lead[vars[0]] = deg;
            terms.push((lead, Fe(rng.gen_range(1..p as u32))));
            for _ in 0..rng.gen_range(0..4) {
                let mut ex = vec![0u32; dim];
                let mut left = rng.gen_range(0..deg);
                for &v in &vars {
                    let take = rng.gen_range(0..=left);
                    ex[v] = take;
                    left -= take;
                }
                terms.push((ex, Fe(rng.gen_range(0..p as u32))));
            }
            let f = MPoly::from_terms(&ctx, dim, terms)?;
            degree *= f.degree() as u64;
            polys.push(f);
        }
        let sides = (0..dim)
            .map(|_| {
                let k = rng.gen_range(1..=p as usize);
                let mut all: Vec<Fe> = ctx.elements().collect();
                for i in (1..all.len()).rev() {
                    all.swap(i, rng.gen_range(0..=i));
                }
                all.truncate(k);
                all
            })
            .collect();
        out.push(BoxInstance {
            p,
            theta: polys.len(),
            polys,
            degree,
            sides,
        });
    }
    Ok(out)
}
