//! Sparse multivariate polynomials over a [`FieldCtx`].
//!
//! A polynomial does not carry its field; every operation that needs field
//! arithmetic takes the context explicitly.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::ffield::{Fe, FieldCtx};

pub type Exponents = Vec<u32>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Exponents, Fe>,
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| {
                        let v = if self.nvars == 1 {
                            "x".to_string()
                        } else {
                            format!("x{}", i + 1)
                        };
                        if k == 1 {
                            v
                        } else {
                            format!("{v}^{k}")
                        }
                    })
                    .collect();
                if mono.is_empty() {
                    format!("{:?}", c)
                } else if *c == Fe::ONE {
                    mono.join("*")
                } else {
                    format!("{:?}*{}", c, mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Graded lexicographic comparison of exponent vectors.
pub fn grlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

/// Binomial coefficients `C(e, 0..=e)` reduced mod `p`.
fn binomial_row(e: u32, p: u64) -> Vec<u64> {
    let mut row = vec![1u64];
    for _ in 0..e {
        let mut next = vec![1u64; row.len() + 1];
        for i in 1..row.len() {
            next[i] = (row[i - 1] + row[i]) % p;
        }
        row = next;
    }
    row
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Fe) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Fe::ONE)
    }

    /// The variable `x_i` (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(e, Fe::ONE);
        p
    }

    /// Sum of the given terms, combining repeated monomials.
    pub fn from_terms<I>(ctx: &FieldCtx, nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponents, Fe)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::Dimension {
                    expected: nvars,
                    got: e.len(),
                });
            }
            p.add_term(ctx, e, c);
        }
        Ok(p)
    }

    /// Dense univariate polynomial from ascending coefficients.
    pub fn univariate(ctx: &FieldCtx, coeffs: &[Fe]) -> Self {
        let mut p = Self::zero(1);
        for (i, &c) in coeffs.iter().enumerate() {
            p.add_term(ctx, vec![i as u32], c);
        }
        p
    }

    fn add_term(&mut self, ctx: &FieldCtx, e: Exponents, c: Fe) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = ctx.add(*o.get(), c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Exponents, Fe> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    /// Total degree; the zero polynomial has degree 0 here.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Constant term.
    pub fn constant_term(&self) -> Fe {
        self.terms
            .get(&vec![0; self.nvars])
            .copied()
            .unwrap_or(Fe::ZERO)
    }

    /// Leading term under graded lexicographic order.
    pub fn leading_term(&self) -> Option<(&Exponents, Fe)> {
        self.terms
            .iter()
            .max_by(|a, b| grlex(a.0, b.0))
            .map(|(e, &c)| (e, c))
    }

    pub fn leading_coeff(&self) -> Fe {
        self.leading_term().map(|(_, c)| c).unwrap_or(Fe::ZERO)
    }

    pub fn add(&self, ctx: &FieldCtx, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(ctx, e.clone(), c);
        }
        out
    }

    pub fn sub(&self, ctx: &FieldCtx, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(ctx, e.clone(), ctx.neg(c));
        }
        out
    }

    pub fn scale(&self, ctx: &FieldCtx, c: Fe) -> MPoly {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, &a)| (e.clone(), ctx.mul(a, c)))
                .collect(),
        }
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &MPoly) -> MPoly {
        let mut out = Self::zero(self.nvars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(ctx, e, ctx.mul(ca, cb));
            }
        }
        out
    }

    pub fn pow(&self, ctx: &FieldCtx, k: u32) -> MPoly {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = acc.mul(ctx, self);
        }
        acc
    }

    pub fn eval(&self, ctx: &FieldCtx, point: &[Fe]) -> Fe {
        debug_assert_eq!(point.len(), self.nvars);
        let mut acc = Fe::ZERO;
        for (e, &c) in &self.terms {
            let mut t = c;
            for (&xi, &k) in point.iter().zip(e) {
                if k > 0 {
                    t = ctx.mul(t, ctx.pow(xi, k as u64));
                }
            }
            acc = ctx.add(acc, t);
        }
        acc
    }

    pub fn checked_eval(&self, ctx: &FieldCtx, point: &[Fe]) -> Result<Fe> {
        if point.len() != self.nvars {
            return Err(Error::Dimension {
                expected: self.nvars,
                got: point.len(),
            });
        }
        Ok(self.eval(ctx, point))
    }

    /// `f(x + m)`.
    pub fn translate(&self, ctx: &FieldCtx, m: &[Fe]) -> MPoly {
        assert_eq!(m.len(), self.nvars, "translation vector dimension");
        if m.iter().all(|c| c.is_zero()) {
            return self.clone();
        }
        let p = ctx.p();
        // (x_i + m_i)^k as univariate coefficient lists, cached per (i, k)
        let mut cache: BTreeMap<(usize, u32), Vec<Fe>> = BTreeMap::new();
        let mut expand = |i: usize, k: u32| -> Vec<Fe> {
            cache
                .entry((i, k))
                .or_insert_with(|| {
                    binomial_row(k, p)
                        .iter()
                        .enumerate()
                        .map(|(j, &b)| {
                            ctx.mul(ctx.from_int(b as i64), ctx.pow(m[i], (k - j as u32) as u64))
                        })
                        .collect()
                })
                .clone()
        };
        let mut out = Self::zero(self.nvars);
        for (e, &c) in &self.terms {
            // partial products: list of (exponents, coeff)
            let mut partial: Vec<(Exponents, Fe)> = vec![(vec![0; self.nvars], c)];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let row = expand(i, k);
                let mut next = Vec::with_capacity(partial.len() * row.len());
                for (pe, pc) in &partial {
                    for (j, &rc) in row.iter().enumerate() {
                        if rc.is_zero() {
                            continue;
                        }
                        let mut ne = pe.clone();
                        ne[i] = j as u32;
                        next.push((ne, ctx.mul(*pc, rc)));
                    }
                }
                partial = next;
            }
            for (pe, pc) in partial {
                out.add_term(ctx, pe, pc);
            }
        }
        out
    }

    /// Split off the leading coefficient: `self = lc * monic`.
    pub fn monic(&self, ctx: &FieldCtx) -> (Fe, MPoly) {
        let lc = self.leading_coeff();
        match ctx.inv(lc) {
            None => (Fe::ZERO, self.clone()),
            Some(inv) => (lc, self.scale(ctx, inv)),
        }
    }

    /// Apply a coefficient map, e.g. an embedding into an extension field.
    pub fn map_coeffs(&self, f: impl Fn(Fe) -> Fe) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| (e.clone(), f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// Ascending dense coefficients of a univariate polynomial.
    pub fn to_dense(&self) -> Vec<Fe> {
        assert_eq!(self.nvars, 1, "dense form is univariate only");
        let mut out = vec![Fe::ZERO; self.degree() as usize + 1];
        for (e, &c) in &self.terms {
            out[e[0] as usize] = c;
        }
        while out.len() > 1 && out.last() == Some(&Fe::ZERO) {
            out.pop();
        }
        if self.is_zero() {
            out.clear();
        }
        out
    }

    /// Variables the polynomial actually depends on.
    pub fn support_vars(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&i| self.terms.keys().any(|e| e[i] > 0))
            .collect()
    }
}

/// The constant `c` with `g = c * f`, if one exists. `assoc_scalar(0, 0)` is
/// `Some(1)` by convention.
pub fn assoc_scalar(ctx: &FieldCtx, f: &MPoly, g: &MPoly) -> Option<Fe> {
    match (f.is_zero(), g.is_zero()) {
        (true, true) => return Some(Fe::ONE),
        (true, false) | (false, true) => return None,
        _ => {}
    }
    if f.nvars != g.nvars || f.terms.len() != g.terms.len() {
        return None;
    }
    let c = ctx.div(g.leading_coeff(), f.leading_coeff())?;
    for (e, &a) in &f.terms {
        match g.terms.get(e) {
            Some(&b) if b == ctx.mul(a, c) => {}
            _ => return None,
        }
    }
    Some(c)
}
