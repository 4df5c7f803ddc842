//! Exact character sums over `F_{q^e}^n` as elements of `Z[zeta_D]`.
//!
//! Every sum is accumulated as a histogram of `zeta_D` exponents and reduced
//! once at the end, so partial results combine by plain addition.

use std::sync::Arc;

use num_integer::Integer;
use rayon::prelude::*;

use crate::cyclo::CycloInt;
use crate::error::{Error, Result};
use crate::ffield::{Character, Extension, Fe, FieldCtx, DEFAULT_TABLE_BUDGET};
use crate::grid;
use crate::rfunc::{EvalResult, FactoredRational};

/// Default cap on predicted inner-loop iterations.
pub const DEFAULT_ITERATION_BUDGET: u64 = 100_000_000;

/// Marks a zero or pole in an exponent table.
pub const VANISH: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct SumValue {
    pub value: CycloInt<i64>,
    pub abs: f64,
}

impl SumValue {
    pub fn new(value: CycloInt<i64>) -> Self {
        let abs = value.abs::<f64>();
        SumValue { value, abs }
    }
}

/// Characters `chi_1..chi_r` paired with rational functions `F_1..F_r`.
#[derive(Clone, Debug)]
pub struct SumFamily {
    ctx: Arc<FieldCtx>,
    n: usize,
    characters: Vec<Character>,
    rationals: Vec<FactoredRational>,
    degree_cap: u32,
    ambient: u64,
    budget: u64,
}

impl SumFamily {
    /// Validates power-freeness and the degree cap, and moves every
    /// character onto the common ambient order `lcm(2, d_1, ..., d_r)`.
    pub fn new(
        ctx: &Arc<FieldCtx>,
        n: usize,
        characters: Vec<Character>,
        rationals: Vec<FactoredRational>,
        degree_cap: u32,
    ) -> Result<Self> {
        Self::build(ctx, n, characters, rationals, degree_cap, true)
    }

    /// As `new` but without the power-freeness check, for sums where only
    /// "not a perfect power" is required.
    pub fn without_power_check(
        ctx: &Arc<FieldCtx>,
        n: usize,
        characters: Vec<Character>,
        rationals: Vec<FactoredRational>,
        degree_cap: u32,
    ) -> Result<Self> {
        Self::build(ctx, n, characters, rationals, degree_cap, false)
    }

    fn build(
        ctx: &Arc<FieldCtx>,
        n: usize,
        characters: Vec<Character>,
        rationals: Vec<FactoredRational>,
        degree_cap: u32,
        power_free: bool,
    ) -> Result<Self> {
        if characters.len() != rationals.len() {
            return Err(Error::Dimension {
                expected: characters.len(),
                got: rationals.len(),
            });
        }
        let ambient = characters.iter().fold(2u64, |acc, c| acc.lcm(&c.d()));
        let mut chars = Vec::with_capacity(characters.len());
        for (chi, f) in characters.iter().zip(&rationals) {
            if **chi.ctx() != **ctx || **f.ctx() != **ctx {
                return Err(Error::Invalid("all characters and functions must share one base field".into()));
            }
            if f.nvars() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: f.nvars(),
                });
            }
            if power_free && !f.is_dth_power_free(chi.d()) {
                return Err(Error::NotPowerFree { d: chi.d() });
            }
            if f.degree() > degree_cap {
                return Err(Error::DegreeCap {
                    deg: f.degree(),
                    cap: degree_cap,
                });
            }
            chars.push(chi.with_ambient(ambient)?);
        }
        Ok(SumFamily {
            ctx: ctx.clone(),
            n,
            characters: chars,
            rationals,
            degree_cap,
            ambient,
            budget: DEFAULT_ITERATION_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// Reject the family unless every `F_i` has trivial translation
    /// stabilizer over each probe degree.
    pub fn probe_stabilizers(&self, degrees: &[u32]) -> Result<()> {
        for f in &self.rationals {
            for &e in degrees {
                let st = f.stabilizer(e, self.budget)?;
                if st.len() != 1 {
                    return Err(Error::Invalid(format!(
                        "translation stabilizer over degree {e} has {} elements",
                        st.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.rationals.len()
    }

    pub fn ambient(&self) -> u64 {
        self.ambient
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub fn characters(&self) -> &[Character] {
        &self.characters
    }

    pub fn rationals(&self) -> &[FactoredRational] {
        &self.rationals
    }

    /// `|F_{q^e}|^n`.
    pub fn point_count(&self, e: u32) -> Option<u128> {
        grid::pow128(self.ctx.q(), e as u64 * self.n as u64)
    }

    /// Fail unless `q^{e n k}` fits the iteration budget.
    pub fn check_budget(&self, what: &str, e: u32, k: u64) -> Result<u128> {
        grid::check_budget(
            what,
            grid::pow128(self.ctx.q(), e as u64 * self.n as u64 * k),
            self.budget as u128,
        )
    }

    /// Exponent tables of `chi_i(Norm F_i(m))` over all `m` in `F_{q^e}^n`.
    pub fn tables(&self, e: u32) -> Result<SumTables> {
        self.check_budget("exponent tables", e, 1)?;
        let ext = Arc::new(Extension::new(&self.ctx, e, DEFAULT_TABLE_BUDGET)?);
        let big = ext.field().clone();
        let qe = big.q();
        let npts = qe.pow(self.n as u32);
        let tables = self
            .rationals
            .iter()
            .zip(&self.characters)
            .map(|(f, chi)| {
                let lifted = f.over_extension(&ext);
                (0..npts)
                    .into_par_iter()
                    .map(|idx| {
                        let m = grid::decode(idx, qe, self.n);
                        match lifted.eval_unchecked(&m) {
                            EvalResult::ZeroOrPole => VANISH,
                            EvalResult::Value(v) => chi.exponent_on(&ext, v).unwrap(),
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(SumTables {
            ext,
            field: big,
            n: self.n,
            ambient: self.ambient,
            tables,
        })
    }

    pub fn sum_s(&self, e: u32, offsets: &[Vec<Fe>]) -> Result<SumValue> {
        Ok(SumValue::new(self.tables(e)?.sum_s(offsets)?))
    }

    pub fn sum_t(&self, i: usize, e: u32, offsets: &[Vec<Fe>], s: usize) -> Result<SumValue> {
        Ok(SumValue::new(self.tables(e)?.sum_t(i, offsets, s)?))
    }

    pub fn sum_general(&self, i: usize, e: u32, offsets: &[(Vec<Fe>, u64)]) -> Result<SumValue> {
        Ok(SumValue::new(self.tables(e)?.sum_general(i, offsets)?))
    }
}

/// Precomputed character exponents over one extension.
pub struct SumTables {
    ext: Arc<Extension>,
    field: Arc<FieldCtx>,
    n: usize,
    ambient: u64,
    tables: Vec<Vec<u32>>,
}

impl SumTables {
    pub fn extension(&self) -> &Arc<Extension> {
        &self.ext
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        &self.field
    }

    pub fn ambient(&self) -> u64 {
        self.ambient
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.tables.len()
    }

    pub fn point_count(&self) -> u64 {
        self.field.q().pow(self.n as u32)
    }

    /// Exponent table of the `i`-th factor, indexed row-major.
    pub fn table(&self, i: usize) -> &[u32] {
        &self.tables[i]
    }

    fn check_point(&self, v: &[Fe]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: v.len(),
            });
        }
        let q = self.field.q();
        if v.iter().any(|c| c.0 as u64 >= q) {
            return Err(Error::Invalid("offset coordinate outside the field".into()));
        }
        Ok(())
    }

    /// Index of `m + x` given `m` decoded in `buf`.
    #[inline]
    fn shifted(&self, m: &[Fe], x: &[Fe]) -> usize {
        let q = self.field.q();
        m.iter()
            .zip(x)
            .fold(0u64, |acc, (&a, &b)| acc * q + self.field.add(a, b).0 as u64) as usize
    }

    fn sum_with<G>(&self, terms: &[(usize, &[Fe], u64)], mut visit: G)
    where
        G: FnMut(u32),
    {
        let q = self.field.q();
        let d = self.ambient;
        let mut m = vec![Fe::ZERO; self.n];
        'points: for idx in 0..self.point_count() {
            grid::decode_into(idx, q, &mut m);
            let mut t = 0u64;
            for &(i, x, u) in terms {
                let ex = self.tables[i][self.shifted(&m, x)];
                if ex == VANISH {
                    continue 'points;
                }
                t += ex as u64 * u;
            }
            visit((t % d) as u32);
        }
    }

    /// Histogram of exponents of `sum_m prod_k sigma_k chi_{i_k}(F_{i_k}(m + x_k))`.
    fn histogram(&self, terms: &[(usize, &[Fe], u64)]) -> Vec<i64> {
        let mut counts = vec![0i64; self.ambient as usize];
        self.sum_with(terms, |t| counts[t as usize] += 1);
        counts
    }

    /// `S(x^(1), ..., x^(r)) = sum_m prod_i chi_i(Norm F_i(m + x^(i)))`.
    pub fn sum_s(&self, offsets: &[Vec<Fe>]) -> Result<CycloInt<i64>> {
        if offsets.len() != self.r() {
            return Err(Error::Dimension {
                expected: self.r(),
                got: offsets.len(),
            });
        }
        for x in offsets {
            self.check_point(x)?;
        }
        let terms: Vec<_> = offsets.iter().enumerate().map(|(i, x)| (i, x.as_slice(), 1)).collect();
        Ok(CycloInt::from_exponent_counts(self.ambient, self.histogram(&terms)))
    }

    /// `T_i` with the first `s` offsets plain and the last `s` conjugated.
    pub fn sum_t(&self, i: usize, offsets: &[Vec<Fe>], s: usize) -> Result<CycloInt<i64>> {
        if offsets.len() != 2 * s {
            return Err(Error::Dimension {
                expected: 2 * s,
                got: offsets.len(),
            });
        }
        let conj = self.ambient - 1;
        let tagged: Vec<(Vec<Fe>, u64)> = offsets
            .iter()
            .enumerate()
            .map(|(j, m)| (m.clone(), if j < s { 1 } else { conj }))
            .collect();
        self.sum_general(i, &tagged)
    }

    /// `sum_x prod_j sigma_{u_j}(chi_i(Norm F_i(m_j + x)))` with
    /// `sigma_u(zeta) = zeta^u`.
    pub fn sum_general(&self, i: usize, offsets: &[(Vec<Fe>, u64)]) -> Result<CycloInt<i64>> {
        if i >= self.r() {
            return Err(Error::Invalid(format!("factor index {i} out of range")));
        }
        for (m, u) in offsets {
            self.check_point(m)?;
            if u.gcd(&self.ambient) != 1 {
                return Err(Error::NotAutomorphism {
                    u: *u,
                    order: self.ambient,
                });
            }
        }
        let terms: Vec<_> = offsets
            .iter()
            .map(|(m, u)| (i, m.as_slice(), u % self.ambient))
            .collect();
        Ok(CycloInt::from_exponent_counts(self.ambient, self.histogram(&terms)))
    }

    /// `sum_x prod_j chi_i(Norm F_i(m_j + x))^{a_j}` for arbitrary integer
    /// exponents `a_j`.
    pub fn sum_powers(&self, i: usize, offsets: &[(Vec<Fe>, i64)]) -> Result<CycloInt<i64>> {
        if i >= self.r() {
            return Err(Error::Invalid(format!("factor index {i} out of range")));
        }
        for (m, _) in offsets {
            self.check_point(m)?;
        }
        let d = self.ambient as i64;
        let terms: Vec<_> = offsets
            .iter()
            .map(|(m, a)| (i, m.as_slice(), a.rem_euclid(d) as u64))
            .collect();
        Ok(CycloInt::from_exponent_counts(self.ambient, self.histogram(&terms)))
    }
}
