//! Small finite fields `F_{p^k}` backed by discrete-log (Zech) tables, the
//! norm maps of an extension tower, and multiplicative characters valued in
//! `Z[zeta_D]`.
//!
//! An element is encoded by the integer whose base-`p` digits are its
//! coordinates in the polynomial basis `1, x, ..., x^(k-1)` of
//! `F_p[x]/(modulus)`. That integer order is the fixed element ordering used
//! by every enumeration in the crate; in particular the prime subfield is
//! `0..p`.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;

use crate::cyclo::CycloInt;
use crate::error::{Error, Result};

/// Default cap on the number of field elements a table may hold.
pub const DEFAULT_TABLE_BUDGET: u64 = 1 << 16;

const NO_LOG: u32 = u32::MAX;

/// A field element, encoded as described in the module docs.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Dense polynomial arithmetic over `F_p`, used only while building tables.
mod fp_poly {
    pub fn trim(mut a: Vec<u32>) -> Vec<u32> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        let dm = m.len() - 1;
        let inv_lead = inv_mod(m[dm], p);
        while r.len() > dm {
            let c = *r.last().unwrap();
            if c != 0 {
                let f = (c as u64 * inv_lead as u64 % p as u64) as u32;
                let shift = r.len() - 1 - dm;
                for (j, &mj) in m.iter().enumerate() {
                    let sub = (f as u64 * mj as u64 % p as u64) as u32;
                    r[shift + j] = (r[shift + j] + p - sub) % p;
                }
            }
            r.pop();
        }
        trim(r)
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        trim(out.into_iter().map(|c| c as u32).collect())
    }

    pub fn inv_mod(a: u32, p: u32) -> u32 {
        pow_mod(a as u64, p as u64 - 2, p as u64) as u32
    }

    pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
        let mut acc = 1 % m;
        b %= m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % m;
            }
            b = b * b % m;
            e >>= 1;
        }
        acc
    }

    /// Digits of `n` in base `p`, `len` of them.
    pub fn digits(mut n: u64, p: u64, len: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push((n % p) as u32);
            n /= p;
        }
        out
    }

    pub fn encode(d: &[u32], p: u64) -> u64 {
        d.iter().rev().fold(0u64, |acc, &c| acc * p + c as u64)
    }

    /// True if the monic `f` of degree `k` has no monic factor of degree in
    /// `1..=k/2`.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let k = f.len() - 1;
        for t in 1..=k / 2 {
            let count = (p as u64).pow(t as u32);
            for low in 0..count {
                let mut g = digits(low, p as u64, t);
                g.push(1);
                if rem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }
}

/// A concrete finite field `F_{p^k}` with log/antilog/Zech tables.
pub struct FieldCtx {
    p: u32,
    k: u32,
    q: u32,
    generator: Fe,
    /// Monic defining polynomial over `F_p`, ascending, length `k + 1`.
    modulus_poly: Vec<u32>,
    log: Vec<u32>,
    antilog: Vec<u32>,
    /// `zech[t] = log(1 + g^t)`, `NO_LOG` where `1 + g^t = 0`.
    zech: Vec<u32>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} (g = {})", self.p, self.k, self.generator.0)
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus_poly == other.modulus_poly
    }
}

impl Eq for FieldCtx {}

/// Build `F_{p^k}` within the default table budget.
pub fn make_field(p: u64, k: u32) -> Result<Arc<FieldCtx>> {
    make_field_with_budget(p, k, DEFAULT_TABLE_BUDGET)
}

pub fn make_field_with_budget(p: u64, k: u32, budget: u64) -> Result<Arc<FieldCtx>> {
    FieldCtx::new(p, k, budget).map(Arc::new)
}

impl FieldCtx {
    pub fn new(p: u64, k: u32, budget: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 {
            return Err(Error::Invalid("extension degree must be at least 1".into()));
        }
        let q = p
            .checked_pow(k)
            .filter(|&q| q <= budget && q <= u32::MAX as u64 / 2)
            .ok_or(Error::TableBudget { p, k, budget })?;
        let p32 = p as u32;
        let ku = k as usize;

        // Smallest monic irreducible polynomial of degree k in the encoding order.
        let modulus_poly = if k == 1 {
            vec![0, 1]
        } else {
            (0..q)
                .map(|low| {
                    let mut f = fp_poly::digits(low, p, ku);
                    f.push(1);
                    f
                })
                .find(|f| f[0] != 0 && fp_poly::is_irreducible(f, p32))
                .expect("irreducible polynomials exist in every degree")
        };

        let mul_raw = |a: u64, b: u64| -> u64 {
            if k == 1 {
                return a * b % p;
            }
            let prod = fp_poly::mul(
                &fp_poly::trim(fp_poly::digits(a, p, ku)),
                &fp_poly::trim(fp_poly::digits(b, p, ku)),
                p32,
            );
            fp_poly::encode(&fp_poly::rem(&prod, &modulus_poly, p32), p)
        };
        let pow_raw = |mut b: u64, mut e: u64| -> u64 {
            let mut acc = 1u64;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul_raw(acc, b);
                }
                b = mul_raw(b, b);
                e >>= 1;
            }
            acc
        };

        let order = q - 1;
        let factors = prime_factors(order);
        let generator = if q == 2 {
            1
        } else {
            (2..q)
                .find(|&a| factors.iter().all(|&l| pow_raw(a, order / l) != 1))
                .ok_or(Error::NoGenerator { p, k })?
        };

        let qs = q as usize;
        let mut log = vec![NO_LOG; qs];
        let mut antilog = vec![0u32; qs - 1];
        let mut cur = 1u64;
        for t in 0..order {
            if log[cur as usize] != NO_LOG {
                return Err(Error::NoGenerator { p, k });
            }
            antilog[t as usize] = cur as u32;
            log[cur as usize] = t as u32;
            cur = mul_raw(cur, generator);
        }
        if cur != 1 {
            return Err(Error::NoGenerator { p, k });
        }

        let mut zech = vec![NO_LOG; qs - 1];
        for t in 0..qs - 1 {
            let a = antilog[t] as u64;
            // adding 1 only touches the constant digit
            let c0 = a % p;
            let sum = a - c0 + (c0 + 1) % p;
            zech[t] = log[sum as usize];
        }

        Ok(FieldCtx {
            p: p32,
            k,
            q: q as u32,
            generator: Fe(generator as u32),
            modulus_poly,
            log,
            antilog,
            zech,
        })
    }

    pub fn p(&self) -> u64 {
        self.p as u64
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q(&self) -> u64 {
        self.q as u64
    }

    pub fn generator(&self) -> Fe {
        self.generator
    }

    pub fn modulus_poly(&self) -> &[u32] {
        &self.modulus_poly
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.q).map(Fe)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (1..self.q).map(Fe)
    }

    /// Discrete log base the generator; `None` for zero.
    #[inline]
    pub fn log(&self, a: Fe) -> Option<u32> {
        let l = self.log[a.index()];
        (l != NO_LOG).then_some(l)
    }

    /// `g^t`.
    #[inline]
    pub fn exp(&self, t: u64) -> Fe {
        Fe(self.antilog[(t % (self.q as u64 - 1)) as usize])
    }

    /// Element of the prime subfield with the given integer value.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.p as i64) as u32)
    }

    /// Coordinates in the polynomial basis.
    pub fn digits(&self, a: Fe) -> Vec<u32> {
        fp_poly::digits(a.0 as u64, self.p as u64, self.k as usize)
    }

    pub fn from_digits(&self, d: &[u32]) -> Fe {
        Fe(fp_poly::encode(d, self.p as u64) as u32)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.k == 1 {
            let s = a.0 + b.0;
            return Fe(if s >= self.p { s - self.p } else { s });
        }
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        let n = self.q - 1;
        let la = self.log[a.index()];
        let lb = self.log[b.index()];
        // a + b = a (1 + b/a)
        let diff = if lb >= la { lb - la } else { lb + n - la };
        let z = self.zech[diff as usize];
        if z == NO_LOG {
            return Fe::ZERO;
        }
        Fe(self.antilog[((la as u64 + z as u64) % n as u64) as usize])
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.is_zero() || self.p == 2 {
            return a;
        }
        if self.k == 1 {
            return Fe(self.p - a.0);
        }
        let n = self.q - 1;
        let l = self.log[a.index()];
        Fe(self.antilog[((l + n / 2) % n) as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.is_zero() || b.is_zero() {
            return Fe::ZERO;
        }
        let n = self.q as u64 - 1;
        let s = (self.log[a.index()] as u64 + self.log[b.index()] as u64) % n;
        Fe(self.antilog[s as usize])
    }

    pub fn inv(&self, a: Fe) -> Option<Fe> {
        let l = self.log(a)? as u64;
        let n = self.q as u64 - 1;
        Some(self.exp((n - l) % n))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Option<Fe> {
        Some(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        match self.log(a) {
            None => Fe::ZERO,
            Some(l) => {
                let n = self.q as u64 - 1;
                self.exp((l as u64 % n) * (e % n) % n)
            }
        }
    }

    /// `a^e` for a possibly negative exponent; `None` for `0^(negative)`.
    pub fn pow_signed(&self, a: Fe, e: i64) -> Option<Fe> {
        if e >= 0 {
            Some(self.pow(a, e as u64))
        } else {
            Some(self.pow(self.inv(a)?, e.unsigned_abs()))
        }
    }

    pub fn frobenius(&self, a: Fe) -> Fe {
        self.pow(a, self.p as u64)
    }

    /// Norm to the subfield `F_{p^m}`, i.e. `a^((q-1)/(p^m-1))`.
    pub fn norm_to_subfield(&self, a: Fe, m: u32) -> Result<Fe> {
        if m == 0 || !self.k.is_multiple_of(m) {
            return Err(Error::NotSubfield { m, k: self.k });
        }
        let sub = (self.p as u64).pow(m) - 1;
        Ok(self.pow(a, (self.q as u64 - 1) / sub))
    }

    pub fn in_subfield(&self, a: Fe, m: u32) -> bool {
        self.pow(a, (self.p as u64).pow(m)) == a
    }

    /// Multiplicative order of a nonzero element.
    pub fn order_of(&self, a: Fe) -> Option<u64> {
        let l = self.log(a)? as u64;
        let n = self.q as u64 - 1;
        Some(n / l.gcd(&n))
    }
}

/// A tower `base subset field` with `[field : base] = degree`, the embedding
/// of `base` into `field`, and the composite `log_base(Norm(a))` table used
/// to evaluate characters of `base` on `field`.
pub struct Extension {
    base: Arc<FieldCtx>,
    field: Arc<FieldCtx>,
    degree: u32,
    embed: Vec<Fe>,
    restrict: Vec<u32>,
    norm_log: Vec<u32>,
}

impl fmt::Debug for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} / {:?}", self.field, self.base)
    }
}

impl Extension {
    pub fn new(base: &Arc<FieldCtx>, degree: u32, budget: u64) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Invalid("extension degree must be at least 1".into()));
        }
        let field = if degree == 1 {
            base.clone()
        } else {
            make_field_with_budget(base.p(), base.k() * degree, budget)?
        };
        let embed: Vec<Fe> = if degree == 1 {
            base.elements().collect()
        } else if base.k() == 1 {
            base.elements().map(|a| Fe(a.0)).collect()
        } else {
            // a root of the base modulus inside the big field
            let m = base.modulus_poly();
            let root = field
                .elements()
                .find(|&x| {
                    let v = m.iter().rev().fold(Fe::ZERO, |acc, &c| {
                        field.add(field.mul(acc, x), Fe(c))
                    });
                    v.is_zero()
                })
                .ok_or_else(|| Error::Invalid("base modulus has no root in extension".into()))?;
            base.elements()
                .map(|a| {
                    base.digits(a).iter().rev().fold(Fe::ZERO, |acc, &c| {
                        field.add(field.mul(acc, root), Fe(c))
                    })
                })
                .collect()
        };
        let mut restrict = vec![NO_LOG; field.q() as usize];
        for (i, &b) in embed.iter().enumerate() {
            restrict[b.index()] = i as u32;
        }
        let big = field.q() - 1;
        let small = base.q() - 1;
        let norm_exp = big / small;
        let norm_log = field
            .elements()
            .map(|a| match field.log(a) {
                None => NO_LOG,
                Some(l) => {
                    let n = field.exp(l as u64 * norm_exp);
                    let b = restrict[n.index()];
                    debug_assert!(b != NO_LOG, "norm lands in the base field");
                    base.log(Fe(b)).unwrap()
                }
            })
            .collect();
        Ok(Extension {
            base: base.clone(),
            field,
            degree,
            embed,
            restrict,
            norm_log,
        })
    }

    pub fn trivial(base: &Arc<FieldCtx>) -> Self {
        Self::new(base, 1, u64::MAX).expect("degree-one extension always exists")
    }

    pub fn base(&self) -> &Arc<FieldCtx> {
        &self.base
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        &self.field
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    #[inline]
    pub fn embed(&self, a: Fe) -> Fe {
        self.embed[a.index()]
    }

    /// Inverse of `embed` on its image.
    pub fn restrict(&self, a: Fe) -> Option<Fe> {
        let r = self.restrict[a.index()];
        (r != NO_LOG).then_some(Fe(r))
    }

    /// Norm down to the base field.
    pub fn norm(&self, a: Fe) -> Fe {
        match self.norm_log(a) {
            None => Fe::ZERO,
            Some(l) => self.base.exp(l as u64),
        }
    }

    /// `log_base(Norm(a))`, `None` for zero.
    #[inline]
    pub fn norm_log(&self, a: Fe) -> Option<u32> {
        let l = self.norm_log[a.index()];
        (l != NO_LOG).then_some(l)
    }
}

/// A multiplicative character `chi = chi_d^e` with `chi_d(g^t) = zeta_d^t`,
/// valued in `Z[zeta_D]` for an ambient order `D` divisible by `d`.
#[derive(Clone)]
pub struct Character {
    ctx: Arc<FieldCtx>,
    d: u64,
    e: u64,
    ambient: u64,
}

impl fmt::Debug for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi_{}^{} on {:?} (D = {})", self.d, self.e, self.ctx, self.ambient)
    }
}

pub fn make_character(ctx: &Arc<FieldCtx>, d: u64, e: i64, ambient: u64) -> Result<Character> {
    Character::new(ctx, d, e, ambient)
}

impl Character {
    pub fn new(ctx: &Arc<FieldCtx>, d: u64, e: i64, ambient: u64) -> Result<Self> {
        if d == 0 || !(ctx.q() - 1).is_multiple_of(d) {
            return Err(Error::NoCharacter { d, q: ctx.q() });
        }
        if ambient == 0 || !ambient.is_multiple_of(d) {
            return Err(Error::AmbientOrder { d, ambient });
        }
        Ok(Character {
            ctx: ctx.clone(),
            d,
            e: e.rem_euclid(d as i64) as u64,
            ambient,
        })
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn e(&self) -> u64 {
        self.e
    }

    pub fn ambient(&self) -> u64 {
        self.ambient
    }

    /// Exact multiplicative order `d / gcd(d, e)`.
    pub fn order(&self) -> u64 {
        self.d / self.d.gcd(&self.e)
    }

    pub fn is_trivial(&self) -> bool {
        self.e == 0
    }

    pub fn inverse(&self) -> Character {
        Character {
            e: (self.d - self.e) % self.d,
            ..self.clone()
        }
    }

    pub fn with_ambient(&self, ambient: u64) -> Result<Character> {
        Character::new(&self.ctx, self.d, self.e as i64, ambient)
    }

    /// Exponent `t` with `chi(g^l) = zeta_D^t`.
    #[inline]
    pub fn exponent_of_log(&self, l: u32) -> u32 {
        let step = self.ambient / self.d * self.e % self.ambient;
        ((step * (l as u64 % self.ambient)) % self.ambient) as u32
    }

    /// Exponent of `chi(a)` as a power of `zeta_D`; `None` when `a = 0`.
    pub fn exponent(&self, a: Fe) -> Option<u32> {
        self.ctx.log(a).map(|l| self.exponent_of_log(l))
    }

    pub fn value(&self, a: Fe) -> CycloInt<i64> {
        match self.exponent(a) {
            None => CycloInt::zero(self.ambient),
            Some(t) => CycloInt::zeta_pow(self.ambient, t as u64),
        }
    }

    /// `chi(Norm(a))` for `a` in the big field of `ext`.
    pub fn exponent_on(&self, ext: &Extension, a: Fe) -> Option<u32> {
        ext.norm_log(a).map(|l| self.exponent_of_log(l))
    }
}
