//! JSON experiment configuration and the literal formats for polynomials
//! and factored rational functions.
//!
//! A polynomial is a list of terms `[[e_1, .., e_n], c]`. A coefficient is
//! an integer (reduced into the prime field) or `{"fe": i}` for the field
//! element with encoding `i`. A rational function is either
//! `{"constant": c, "factors": [[poly, mult], ..], "absolutely_irreducible": b}`
//! or, factored automatically when univariate,
//! `{"numerator": poly, "denominator": poly}`.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ffield::{make_field_with_budget, Character, Fe, FieldCtx, DEFAULT_TABLE_BUDGET};
use crate::invariance::IntPoly;
use crate::mpoly::MPoly;
use crate::rfunc::{factor_univariate, FactoredRational};
use crate::strata::BoxSpec;
use crate::subspace::Subspace;
use crate::sums::{SumFamily, DEFAULT_ITERATION_BUDGET};

pub const REPORT_SCHEMA: &str = "charsum-report/1";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Bounds,
    Bootstrap,
    CharSum,
    MomentVerify,
    Census,
    Weil,
    Stratify,
    Boxcount,
    SubspaceDemo,
    Invariance,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Bootstrap => "bootstrap",
            Command::CharSum => "char-sum",
            Command::MomentVerify => "moment-verify",
            Command::Census => "census",
            Command::Weil => "weil",
            Command::Stratify => "stratify",
            Command::Boxcount => "boxcount",
            Command::SubspaceDemo => "subspace-demo",
            Command::Invariance => "invariance",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffLit {
    Int(i64),
    Raw { fe: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term(pub Vec<u32>, pub CoeffLit);

pub type PolyLit = Vec<Term>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorLit(pub PolyLit, pub i64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum RationalLit {
    Factored {
        #[serde(default = "one_coeff")]
        constant: CoeffLit,
        factors: Vec<FactorLit>,
        #[serde(default)]
        absolutely_irreducible: bool,
    },
    Quotient {
        numerator: PolyLit,
        #[serde(default)]
        denominator: Option<PolyLit>,
        #[serde(default)]
        absolutely_irreducible: bool,
    },
}

fn one_coeff() -> CoeffLit {
    CoeffLit::Int(1)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub p: u64,
    #[serde(default = "one_u32")]
    pub k: u32,
}

fn one_u32() -> u32 {
    1
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec { p: 3, k: 1 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySpec {
    pub n: usize,
    /// `[d_i, e_i]`: `chi_i = chi_{d_i}^{e_i}`.
    pub characters: Vec<(u64, i64)>,
    pub rationals: Vec<RationalLit>,
    pub degree_cap: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VarietySpec {
    pub nvars: usize,
    pub polys: Vec<PolyLit>,
    pub theta: usize,
    pub degree: u64,
}

impl Default for VarietySpec {
    fn default() -> Self {
        VarietySpec {
            nvars: 1,
            polys: Vec::new(),
            theta: 0,
            degree: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSpec {
    pub count: usize,
    pub primes: Vec<u64>,
    pub max_dim: usize,
    pub max_n: usize,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        SuiteSpec {
            count: 0,
            primes: Vec::new(),
            max_dim: 3,
            max_n: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubspaceSpec {
    pub p: u32,
    pub dim: usize,
    /// Each subspace as a list of spanning vectors.
    pub subspaces: Vec<Vec<Vec<u32>>>,
}

impl Default for SubspaceSpec {
    fn default() -> Self {
        SubspaceSpec {
            p: 3,
            dim: 2,
            subspaces: vec![vec![vec![1, 0]], vec![vec![1, 0]]],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub field: FieldSpec,
    pub family: FamilySpec,
    /// Extension degrees `e` to probe.
    pub ext_degrees: Vec<u32>,
    pub s_min: usize,
    pub s_max: usize,
    /// Shape for `bounds` and `bootstrap`.
    pub n: i64,
    pub r: i64,
    pub r_max: Option<i64>,
    /// Offset tuples for `char-sum`: `r` vectors of `n` element encodings.
    pub offsets: Vec<Vec<Vec<u32>>>,
    /// Perfect-power order for `census`; defaults to the first character's.
    pub d: Option<u64>,
    /// Census exponents; defaults to `(1,..,1,-1,..,-1)` for each `s`.
    pub exponents: Option<Vec<i64>>,
    pub c_user: f64,
    pub c_prime: Option<f64>,
    /// Stratum index for box exceptional counts.
    pub j: usize,
    /// Boxes as per-coordinate element lists.
    pub boxes: Vec<Vec<Vec<u32>>>,
    pub variety: Option<VarietySpec>,
    pub suite: SuiteSpec,
    pub subspace: SubspaceSpec,
    /// Integer polynomial for `invariance`.
    pub integer_poly: Option<Vec<(Vec<u32>, i64)>>,
    pub primes: Vec<u64>,
    /// Sample size for `stratify`; exact enumeration when absent.
    pub sample: Option<u64>,
    pub seed: u64,
    pub budget: u64,
    pub table_budget: u64,
    /// Row cap for the CSV dump of `stratify`.
    pub row_limit: usize,
    pub csv: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            field: FieldSpec::default(),
            family: FamilySpec::default(),
            ext_degrees: vec![1],
            s_min: 1,
            s_max: 1,
            n: 2,
            r: 2,
            r_max: None,
            offsets: Vec::new(),
            d: None,
            exponents: None,
            c_user: 3.0,
            c_prime: None,
            j: 1,
            boxes: Vec::new(),
            variety: None,
            suite: SuiteSpec::default(),
            subspace: SubspaceSpec::default(),
            integer_poly: None,
            primes: Vec::new(),
            sample: None,
            seed: 0,
            budget: DEFAULT_ITERATION_BUDGET,
            table_budget: DEFAULT_TABLE_BUDGET,
            row_limit: 10_000,
            csv: None,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("config: {e}")))
    }

    pub fn field_ctx(&self) -> Result<Arc<FieldCtx>> {
        make_field_with_budget(self.field.p, self.field.k, self.table_budget)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ext_degrees.is_empty() || self.ext_degrees.contains(&0) {
            return Err(Error::Invalid("ext_degrees: need at least one positive degree".into()));
        }
        if self.s_min == 0 || self.s_min > self.s_max {
            return Err(Error::Invalid(format!(
                "s_min, s_max: need 1 <= s_min <= s_max, got {}..{}",
                self.s_min, self.s_max
            )));
        }
        if !self.c_user.is_finite() || self.c_user <= 0.0 {
            return Err(Error::Invalid("c_user: must be positive and finite".into()));
        }
        if let Some(c) = self.c_prime {
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::Invalid("c_prime: must be positive and finite".into()));
            }
        }
        if self.family.characters.len() != self.family.rationals.len() {
            return Err(Error::Invalid(format!(
                "family: {} characters but {} rational functions",
                self.family.characters.len(),
                self.family.rationals.len()
            )));
        }
        Ok(())
    }

    /// The family, or an error naming the first bad entry.
    pub fn family(&self, power_check: bool) -> Result<SumFamily> {
        let ctx = self.field_ctx()?;
        let fam = &self.family;
        if fam.rationals.is_empty() {
            return Err(Error::Invalid("family: no rational functions given".into()));
        }
        let ambient = fam.characters.iter().fold(2u64, |acc, &(d, _)| num_integer::lcm(acc, d.max(1)));
        let chars = fam
            .characters
            .iter()
            .enumerate()
            .map(|(i, &(d, e))| {
                Character::new(&ctx, d, e, ambient).map_err(|err| Error::Invalid(format!("family.characters[{i}]: {err}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let rats = fam
            .rationals
            .iter()
            .enumerate()
            .map(|(i, lit)| rational(&ctx, fam.n, lit, &format!("family.rationals[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let cap = fam.degree_cap.unwrap_or(u32::MAX);
        let built = if power_check {
            SumFamily::new(&ctx, fam.n, chars, rats, cap)
        } else {
            SumFamily::without_power_check(&ctx, fam.n, chars, rats, cap)
        };
        Ok(built?.with_budget(self.budget))
    }

    pub fn boxes(&self, ctx: &FieldCtx) -> Result<Vec<BoxSpec>> {
        self.boxes
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let sides = b.iter().map(|s| s.iter().map(|&c| Fe(c)).collect()).collect();
                BoxSpec::new(ctx, sides).map_err(|e| Error::Invalid(format!("boxes[{i}]: {e}")))
            })
            .collect()
    }

    pub fn subspaces(&self) -> Result<Vec<Subspace>> {
        let s = &self.subspace;
        s.subspaces
            .iter()
            .enumerate()
            .map(|(i, vs)| Subspace::span(s.p, s.dim, vs).map_err(|e| Error::Invalid(format!("subspace.subspaces[{i}]: {e}"))))
            .collect()
    }

    pub fn integer_poly(&self) -> Result<IntPoly> {
        let terms = self
            .integer_poly
            .as_ref()
            .ok_or_else(|| Error::Invalid("integer_poly: required for invariance".into()))?;
        let nvars = terms.first().map_or(1, |t| t.0.len());
        IntPoly::from_terms(nvars, terms.iter().cloned()).map_err(|e| Error::Invalid(format!("integer_poly: {e}")))
    }
}

pub fn coeff(ctx: &FieldCtx, c: &CoeffLit, path: &str) -> Result<Fe> {
    match *c {
        CoeffLit::Int(v) => Ok(ctx.from_int(v)),
        CoeffLit::Raw { fe } if (fe as u64) < ctx.q() => Ok(Fe(fe)),
        CoeffLit::Raw { fe } => Err(Error::Invalid(format!("{path}: element encoding {fe} outside a field of size {}", ctx.q()))),
    }
}

pub fn poly(ctx: &FieldCtx, nvars: usize, lit: &PolyLit, path: &str) -> Result<MPoly> {
    let mut terms = Vec::with_capacity(lit.len());
    for (t, Term(exps, c)) in lit.iter().enumerate() {
        if exps.len() != nvars {
            return Err(Error::Invalid(format!(
                "{path}[{t}]: exponent vector has {} entries, expected {nvars}",
                exps.len()
            )));
        }
        terms.push((exps.clone(), coeff(ctx, c, &format!("{path}[{t}]"))?));
    }
    MPoly::from_terms(ctx, nvars, terms).map_err(|e| Error::Invalid(format!("{path}: {e}")))
}

pub fn rational(ctx: &Arc<FieldCtx>, nvars: usize, lit: &RationalLit, path: &str) -> Result<FactoredRational> {
    let wrap = |e: Error| Error::Invalid(format!("{path}: {e}"));
    match lit {
        RationalLit::Factored {
            constant,
            factors,
            absolutely_irreducible,
        } => {
            let c = coeff(ctx, constant, &format!("{path}.constant"))?;
            let raw = factors
                .iter()
                .enumerate()
                .map(|(i, FactorLit(p, m))| Ok((poly(ctx, nvars, p, &format!("{path}.factors[{i}]"))?, *m)))
                .collect::<Result<Vec<_>>>()?;
            FactoredRational::new(ctx, nvars, c, raw, *absolutely_irreducible).map_err(wrap)
        }
        RationalLit::Quotient {
            numerator,
            denominator,
            absolutely_irreducible,
        } => {
            let num = poly(ctx, nvars, numerator, &format!("{path}.numerator"))?;
            let den = match denominator {
                Some(d) => poly(ctx, nvars, d, &format!("{path}.denominator"))?,
                None => MPoly::one(nvars),
            };
            if num.is_zero() || den.is_zero() {
                return Err(wrap(Error::ZeroPolynomial));
            }
            if nvars == 1 {
                let (a, fa) = factor_univariate(ctx, &num).map_err(wrap)?;
                let (b, fb) = factor_univariate(ctx, &den).map_err(wrap)?;
                let c = ctx.div(a, b).expect("nonzero leading coefficient");
                let raw = fa
                    .into_iter()
                    .map(|(f, m)| (f, m as i64))
                    .chain(fb.into_iter().map(|(f, m)| (f, -(m as i64))))
                    .collect();
                FactoredRational::new(ctx, 1, c, raw, false).map_err(wrap)
            } else {
                FactoredRational::new(ctx, nvars, Fe::ONE, vec![(num, 1), (den, -1)], *absolutely_irreducible).map_err(wrap)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_keys() {
        let cfg = ExperimentConfig::from_json(r#"{"field": {"p": 5}}"#).unwrap();
        assert_eq!(cfg.field, FieldSpec { p: 5, k: 1 });
        assert_eq!(cfg.c_user, 3.0);
        assert_eq!(cfg.ext_degrees, vec![1]);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"feild": {"p": 5}}"#).is_err());
    }

    #[test]
    fn malformed_literal_reports_position() {
        let err = ExperimentConfig::from_json("{\"family\": {\"n\": 1,\n \"rationals\": [[1, 2]]}}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn family_literals() {
        let cfg = ExperimentConfig::from_json(
            r#"{
                "field": {"p": 5},
                "family": {
                    "n": 1,
                    "characters": [[2, 1], [4, 1]],
                    "rationals": [
                        {"factors": [[[[[1], 1]], 1], [[[[1], 1], [[0], 1]], 1]]},
                        {"numerator": [[[2], 1], [[0], -1]], "denominator": [[[1], 1], [[0], 2]]}
                    ]
                }
            }"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        let fam = cfg.family(true).unwrap();
        assert_eq!(fam.r(), 2);
        assert_eq!(fam.ambient(), 4);
        // (x^2 - 1) / (x + 2) = (x - 1)(x + 1) / (x + 2)
        let f = &fam.rationals()[1];
        assert_eq!(f.factors().len(), 3);
        assert_eq!(f.factors().iter().map(|(_, m)| *m).sum::<i64>(), 1);
    }

    #[test]
    fn bad_exponent_length_names_the_path() {
        let cfg = ExperimentConfig::from_json(
            r#"{"field": {"p": 5}, "family": {"n": 1, "characters": [[2, 1]], "rationals": [{"factors": [[[[[1, 0], 1]], 1]]}]}}"#,
        )
        .unwrap();
        let err = cfg.family(true).unwrap_err().to_string();
        assert!(err.contains("family.rationals[0].factors[0][0]"), "{err}");
    }

    #[test]
    fn raw_field_elements() {
        let ctx = make_field_with_budget(3, 2, 1 << 10).unwrap();
        assert_eq!(coeff(&ctx, &CoeffLit::Raw { fe: 7 }, "c").unwrap(), Fe(7));
        assert!(coeff(&ctx, &CoeffLit::Raw { fe: 9 }, "c").is_err());
    }
}
