//! Rational functions in factored form: evaluation, translation, associate
//! merging, power tests, univariate splitting and translation stabilizers.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::ffield::{Extension, Fe, FieldCtx, DEFAULT_TABLE_BUDGET};
use crate::grid;
use crate::mpoly::MPoly;

/// Value of a rational function at a point. Zeros of the numerator and of
/// the denominator are deliberately not distinguished.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EvalResult {
    Value(Fe),
    ZeroOrPole,
}

/// `c * prod f_j^{b_j}` with monic, pairwise distinct, nonconstant `f_j`.
///
/// The monic normalisation (leading coefficient 1 in graded lex order) makes
/// associate factors literally equal, so merging is a map insert.
#[derive(Clone)]
pub struct FactoredRational {
    ctx: Arc<FieldCtx>,
    nvars: usize,
    constant: Fe,
    factors: Vec<(MPoly, i64)>,
    absolutely_irreducible: bool,
}

impl std::fmt::Debug for FactoredRational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.constant)?;
        for (p, b) in &self.factors {
            write!(f, " * ({:?})^{}", p, b)?;
        }
        Ok(())
    }
}

impl PartialEq for FactoredRational {
    fn eq(&self, other: &Self) -> bool {
        *self.ctx == *other.ctx
            && self.nvars == other.nvars
            && self.constant == other.constant
            && self.factors == other.factors
    }
}

impl FactoredRational {
    /// Merge raw factors into canonical form.
    pub fn new(
        ctx: &Arc<FieldCtx>,
        nvars: usize,
        constant: Fe,
        raw: Vec<(MPoly, i64)>,
        absolutely_irreducible: bool,
    ) -> Result<Self> {
        if constant.is_zero() {
            return Err(Error::Invalid("constant of a rational function must be nonzero".into()));
        }
        let mut c = constant;
        let mut merged: BTreeMap<MPoly, i64> = BTreeMap::new();
        for (f, b) in raw {
            if f.nvars() != nvars {
                return Err(Error::Dimension {
                    expected: nvars,
                    got: f.nvars(),
                });
            }
            if f.is_zero() {
                return Err(Error::ZeroPolynomial);
            }
            if b == 0 {
                continue;
            }
            let (lc, monic) = f.monic(ctx);
            c = ctx.mul(c, ctx.pow_signed(lc, b).expect("leading coefficient is nonzero"));
            if monic.is_constant() {
                continue;
            }
            *merged.entry(monic).or_insert(0) += b;
        }
        Ok(FactoredRational {
            ctx: ctx.clone(),
            nvars,
            constant: c,
            factors: merged.into_iter().filter(|(_, b)| *b != 0).collect(),
            absolutely_irreducible,
        })
    }

    pub fn from_poly(ctx: &Arc<FieldCtx>, f: &MPoly, absolutely_irreducible: bool) -> Result<Self> {
        Self::new(ctx, f.nvars(), Fe::ONE, vec![(f.clone(), 1)], absolutely_irreducible)
    }

    pub fn one(ctx: &Arc<FieldCtx>, nvars: usize) -> Self {
        FactoredRational {
            ctx: ctx.clone(),
            nvars,
            constant: Fe::ONE,
            factors: Vec::new(),
            absolutely_irreducible: true,
        }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn constant(&self) -> Fe {
        self.constant
    }

    pub fn factors(&self) -> &[(MPoly, i64)] {
        &self.factors
    }

    pub fn absolutely_irreducible(&self) -> bool {
        self.absolutely_irreducible
    }

    /// `max(deg numerator, deg denominator)`.
    pub fn degree(&self) -> u32 {
        let (mut num, mut den) = (0i64, 0i64);
        for (f, b) in &self.factors {
            let d = f.degree() as i64;
            if *b > 0 {
                num += b * d;
            } else {
                den += -b * d;
            }
        }
        num.max(den) as u32
    }

    pub fn evaluate(&self, x: &[Fe]) -> Result<EvalResult> {
        if x.len() != self.nvars {
            return Err(Error::Dimension {
                expected: self.nvars,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[Fe]) -> EvalResult {
        let ctx = &*self.ctx;
        let mut acc = self.constant;
        for (f, b) in &self.factors {
            let v = f.eval(ctx, x);
            if v.is_zero() {
                return EvalResult::ZeroOrPole;
            }
            acc = ctx.mul(acc, ctx.pow_signed(v, *b).unwrap());
        }
        EvalResult::Value(acc)
    }

    /// `F(x + m)`.
    pub fn translate(&self, m: &[Fe]) -> Result<Self> {
        if m.len() != self.nvars {
            return Err(Error::Dimension {
                expected: self.nvars,
                got: m.len(),
            });
        }
        let raw = self
            .factors
            .iter()
            .map(|(f, b)| (f.translate(&self.ctx, m), *b))
            .collect();
        Self::new(&self.ctx, self.nvars, self.constant, raw, self.absolutely_irreducible)
    }

    /// `prod_j F(x + m_j)^{a_j}`, merged.
    pub fn product_of_translates(&self, offsets: &[(Vec<Fe>, i64)]) -> Result<Self> {
        let mut raw = Vec::with_capacity(self.factors.len() * offsets.len());
        let mut total = 0i64;
        for (m, a) in offsets {
            if m.len() != self.nvars {
                return Err(Error::Dimension {
                    expected: self.nvars,
                    got: m.len(),
                });
            }
            total += a;
            for (f, b) in &self.factors {
                raw.push((f.translate(&self.ctx, m), b * a));
            }
        }
        let c = self.ctx.pow_signed(self.constant, total).unwrap();
        Self::new(&self.ctx, self.nvars, c, raw, self.absolutely_irreducible)
    }

    /// The same function with coefficients embedded in an extension field.
    pub fn over_extension(&self, ext: &Extension) -> Self {
        assert!(**ext.base() == *self.ctx, "extension must be built over this field");
        if ext.degree() == 1 {
            return self.clone();
        }
        FactoredRational {
            ctx: ext.field().clone(),
            nvars: self.nvars,
            constant: ext.embed(self.constant),
            factors: self
                .factors
                .iter()
                .map(|(f, b)| (f.map_coeffs(|c| ext.embed(c)), *b))
                .collect(),
            absolutely_irreducible: self.absolutely_irreducible,
        }
    }

    /// Every merged multiplicity lies strictly between `-d` and `d`.
    pub fn is_dth_power_free(&self, d: u64) -> bool {
        self.factors.iter().all(|(_, b)| b.unsigned_abs() < d)
    }

    /// Whether `F` is a perfect `d`-th power over the algebraic closure.
    /// The constant is ignored since every constant is a `d`-th power there.
    pub fn is_perfect_dth_power(&self, d: u64) -> Result<bool> {
        let mut splitter = Splitter::new(DEFAULT_TABLE_BUDGET);
        self.is_perfect_dth_power_with(d, &mut splitter)
    }

    pub fn is_perfect_dth_power_with(&self, d: u64, splitter: &mut Splitter) -> Result<bool> {
        if d == 0 {
            return Err(Error::Invalid("power d must be positive".into()));
        }
        let d = d as i64;
        match self.nvars {
            0 => Ok(true),
            1 => {
                let mults = splitter.root_multiplicities(&self.ctx, &self.factors)?;
                Ok(mults.values().all(|m| m.rem_euclid(d) == 0))
            }
            n => {
                if !self.absolutely_irreducible {
                    return Err(Error::UnassertedIrreducibility { n });
                }
                Ok(self.factors.iter().all(|(_, b)| b.rem_euclid(d) == 0))
            }
        }
    }

    /// All `m` in `F_{q^e}^n` with `F(x + m) = F(x)`, in row-major order.
    pub fn stabilizer(&self, e: u32, budget: u64) -> Result<Vec<Vec<Fe>>> {
        let ext = Extension::new(&self.ctx, e, budget.max(DEFAULT_TABLE_BUDGET))?;
        let qe = ext.field().q();
        let total = grid::check_budget(
            "stabilizer enumeration",
            grid::pow128(qe, self.nvars as u64),
            budget as u128,
        )?;
        let lifted = self.over_extension(&ext);
        let mut out = Vec::new();
        for idx in 0..total as u64 {
            let m = grid::decode(idx, qe, self.nvars);
            if lifted.translate(&m)? == lifted {
                out.push(m);
            }
        }
        Ok(out)
    }
}

/// Roots with multiplicities.
pub type Roots = Vec<(Fe, u32)>;

/// Roots (with multiplicity) of a univariate polynomial over the smallest
/// extension `F_{q^e}` containing all of them.
#[derive(Clone, Debug)]
pub struct Split {
    pub degree: u32,
    pub ext: Arc<Extension>,
    pub lead: Fe,
    pub roots: Vec<(Fe, u32)>,
}

/// Split a nonzero univariate polynomial by exhaustive root search.
pub fn univariate_split(ctx: &Arc<FieldCtx>, f: &MPoly) -> Result<Split> {
    Splitter::new(DEFAULT_TABLE_BUDGET).split(ctx, f)
}

/// Factor a univariate polynomial into monic irreducibles over its own field
/// by grouping the roots into Frobenius orbits.
pub fn factor_univariate(ctx: &Arc<FieldCtx>, f: &MPoly) -> Result<(Fe, Vec<(MPoly, u32)>)> {
    let split = univariate_split(ctx, f)?;
    let ext = &split.ext;
    let big = ext.field();
    let q = ctx.q();
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for &(rho, mu) in &split.roots {
        if seen.contains(&rho) {
            continue;
        }
        // minimal polynomial = prod over the orbit of (x - sigma)
        let mut poly = vec![Fe::ONE];
        let mut sigma = rho;
        loop {
            seen.insert(sigma);
            let mut next = vec![Fe::ZERO; poly.len() + 1];
            for (i, &c) in poly.iter().enumerate() {
                next[i + 1] = big.add(next[i + 1], c);
                next[i] = big.sub(next[i], big.mul(c, sigma));
            }
            poly = next;
            sigma = big.pow(sigma, q);
            if sigma == rho {
                break;
            }
        }
        let coeffs: Vec<Fe> = poly
            .iter()
            .map(|&c| ext.restrict(c).expect("minimal polynomial has base coefficients"))
            .collect();
        out.push((MPoly::univariate(ctx, &coeffs), mu));
    }
    out.sort();
    Ok((ext.restrict(split.lead).unwrap(), out))
}

/// Splitting with caches for extension tables and per-polynomial roots.
pub struct Splitter {
    budget: u64,
    exts: HashMap<(u64, u32, u32), Arc<Extension>>,
    min_degree: HashMap<(u64, u32, MPoly), u32>,
    roots: HashMap<(u64, u32, MPoly, u32), Roots>,
}

impl Splitter {
    pub fn new(budget: u64) -> Self {
        Splitter {
            budget,
            exts: HashMap::new(),
            min_degree: HashMap::new(),
            roots: HashMap::new(),
        }
    }

    fn extension(&mut self, ctx: &Arc<FieldCtx>, e: u32) -> Result<Arc<Extension>> {
        let key = (ctx.p(), ctx.k(), e);
        if let Some(x) = self.exts.get(&key) {
            if **x.base() == **ctx {
                return Ok(x.clone());
            }
        }
        let x = Arc::new(Extension::new(ctx, e, self.budget)?);
        self.exts.insert(key, x.clone());
        Ok(x)
    }

    /// Roots of `f` (monic or not) in `F_{q^e}` with multiplicities.
    fn roots_over(&mut self, ctx: &Arc<FieldCtx>, f: &MPoly, e: u32) -> Result<Vec<(Fe, u32)>> {
        let key = (ctx.p(), ctx.k(), f.clone(), e);
        if let Some(r) = self.roots.get(&key) {
            return Ok(r.clone());
        }
        let ext = self.extension(ctx, e)?;
        let big = ext.field();
        let mut coeffs: Vec<Fe> = f.to_dense().iter().map(|&c| ext.embed(c)).collect();
        let mut roots = Vec::new();
        if coeffs.len() > 1 {
            for x in big.elements() {
                let mut mu = 0;
                loop {
                    // synthetic division by (t - x)
                    let n = coeffs.len();
                    if n < 2 {
                        break;
                    }
                    let mut quot = vec![Fe::ZERO; n - 1];
                    let mut acc = Fe::ZERO;
                    for i in (0..n).rev() {
                        acc = big.add(big.mul(acc, x), coeffs[i]);
                        if i > 0 {
                            quot[i - 1] = acc;
                        }
                    }
                    if !acc.is_zero() {
                        break;
                    }
                    coeffs = quot;
                    mu += 1;
                }
                if mu > 0 {
                    roots.push((x, mu));
                }
                if coeffs.len() < 2 {
                    break;
                }
            }
        }
        self.roots.insert(key, roots.clone());
        Ok(roots)
    }

    pub fn split(&mut self, ctx: &Arc<FieldCtx>, f: &MPoly) -> Result<Split> {
        if f.nvars() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                got: f.nvars(),
            });
        }
        if f.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let deg = f.degree();
        let e = self.minimal_degree(ctx, f)?;
        let ext = self.extension(ctx, e)?;
        let roots = self.roots_over(ctx, f, e)?;
        debug_assert_eq!(roots.iter().map(|r| r.1).sum::<u32>(), deg);
        Ok(Split {
            degree: e,
            lead: ext.embed(f.leading_coeff()),
            ext,
            roots,
        })
    }

    /// Smallest `e` such that `f` splits into linear factors over `F_{q^e}`.
    pub fn minimal_degree(&mut self, ctx: &Arc<FieldCtx>, f: &MPoly) -> Result<u32> {
        let key = (ctx.p(), ctx.k(), f.clone());
        if let Some(&e) = self.min_degree.get(&key) {
            return Ok(e);
        }
        let deg = f.degree();
        let mut e = 1u32;
        loop {
            let fits = ctx
                .q()
                .checked_pow(e)
                .map(|qe| qe <= self.budget)
                .unwrap_or(false);
            if !fits {
                return Err(Error::SplitBudget);
            }
            let roots = self.roots_over(ctx, f, e)?;
            if roots.iter().map(|r| r.1).sum::<u32>() == deg {
                self.min_degree.insert(key, e);
                return Ok(e);
            }
            e += 1;
        }
    }

    /// Roots of every factor over one common splitting field.
    pub fn split_all(
        &mut self,
        ctx: &Arc<FieldCtx>,
        factors: &[(MPoly, i64)],
    ) -> Result<(Arc<Extension>, Vec<Roots>)> {
        let mut common = 1u32;
        for (f, _) in factors {
            common = common.lcm(&self.minimal_degree(ctx, f)?);
        }
        let ext = self.extension(ctx, common)?;
        let roots = factors
            .iter()
            .map(|(f, _)| self.roots_over(ctx, f, common))
            .collect::<Result<Vec<_>>>()?;
        Ok((ext, roots))
    }

    /// Net multiplicity of every root of `prod f_j^{b_j}` over a common
    /// splitting field. Roots are keyed by their encoding in that field.
    pub fn root_multiplicities(
        &mut self,
        ctx: &Arc<FieldCtx>,
        factors: &[(MPoly, i64)],
    ) -> Result<BTreeMap<Fe, i64>> {
        let (_, roots) = self.split_all(ctx, factors)?;
        let mut mults = BTreeMap::new();
        for ((_, b), rs) in factors.iter().zip(roots) {
            for (rho, mu) in rs {
                *mults.entry(rho).or_insert(0) += b * mu as i64;
            }
        }
        Ok(mults)
    }
}

impl FactoredRational {
    /// For `n = 1`: the same function over its splitting field, written as a
    /// product of linear factors `(x - rho)`, which are absolutely
    /// irreducible. The returned extension is over this function's field.
    pub fn linear_factors(&self, splitter: &mut Splitter) -> Result<(Arc<Extension>, FactoredRational)> {
        if self.nvars != 1 {
            return Err(Error::Dimension {
                expected: 1,
                got: self.nvars,
            });
        }
        let (ext, roots) = splitter.split_all(&self.ctx, &self.factors)?;
        let big = ext.field();
        let mut raw = Vec::new();
        for ((_, b), rs) in self.factors.iter().zip(roots) {
            for (rho, mu) in rs {
                let lin = MPoly::univariate(big, &[big.neg(rho), Fe::ONE]);
                raw.push((lin, b * mu as i64));
            }
        }
        let f = FactoredRational::new(big, 1, ext.embed(self.constant), raw, true)?;
        Ok((ext, f))
    }
}
