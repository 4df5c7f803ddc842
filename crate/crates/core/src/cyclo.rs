//! Exact arithmetic in the ring of cyclotomic integers `Z[zeta_D]`.
//!
//! Elements are stored in the power basis `1, zeta, ..., zeta^(phi(D)-1)`,
//! i.e. as integer polynomials reduced modulo the `D`-th cyclotomic
//! polynomial. That basis is a `Z`-basis of the ring, so the stored
//! coefficient vector is canonical and equality is coefficient equality.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use num_integer::Integer;
use num_traits::{Float, FloatConst, FromPrimitive, Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Integer types usable as cyclotomic coefficients.
pub trait Coeff:
    Clone + Integer + Signed + FromPrimitive + ToPrimitive + fmt::Debug + Send + Sync
{
}

impl<T> Coeff for T where
    T: Clone + Integer + Signed + FromPrimitive + ToPrimitive + fmt::Debug + Send + Sync
{
}

fn cyclotomic_cache() -> &'static Mutex<HashMap<u64, Arc<[i64]>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<[i64]>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients (ascending) of the `order`-th cyclotomic polynomial.
///
/// Computed as `(x^D - 1) / prod_{m | D, m < D} Phi_m(x)` by exact division.
pub fn cyclotomic_poly(order: u64) -> Arc<[i64]> {
    assert!(order >= 1, "cyclotomic order must be positive");
    if let Some(p) = cyclotomic_cache().lock().unwrap().get(&order) {
        return p.clone();
    }
    let d = order as usize;
    let mut num = vec![0i64; d + 1];
    num[0] = -1;
    num[d] = 1;
    for m in 1..order {
        if order.is_multiple_of(m) {
            let phi_m = cyclotomic_poly(m);
            num = exact_div_monic(&num, &phi_m);
        }
    }
    let arc: Arc<[i64]> = num.into();
    cyclotomic_cache()
        .lock()
        .unwrap()
        .insert(order, arc.clone());
    arc
}

fn exact_div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; num.len() - dn];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dn];
        quot[i] = c;
        if c != 0 {
            for (j, &b) in den.iter().enumerate() {
                rem[i + j] -= c * b;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "division must be exact");
    quot
}

/// Euler's totient, the degree of the cyclotomic polynomial.
pub fn totient(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// An exact element of `Z[zeta_D]`.
#[derive(Clone)]
pub struct CycloInt<T> {
    order: u64,
    coeffs: Vec<T>,
    modulus: Arc<[i64]>,
}

impl<T: PartialEq> PartialEq for CycloInt<T> {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.coeffs == other.coeffs
    }
}

impl<T: Eq> Eq for CycloInt<T> {}

impl<T: fmt::Debug> fmt::Debug for CycloInt<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycloInt<{}>{:?}", self.order, self.coeffs)
    }
}

impl<T: Coeff> CycloInt<T> {
    pub fn zero(order: u64) -> Self {
        let modulus = cyclotomic_poly(order);
        let deg = modulus.len() - 1;
        CycloInt {
            order,
            coeffs: vec![T::zero(); deg],
            modulus,
        }
    }

    pub fn from_int(order: u64, n: T) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[0] = n;
        z
    }

    pub fn one(order: u64) -> Self {
        Self::from_int(order, T::one())
    }

    /// `zeta_D^t`.
    pub fn zeta_pow(order: u64, t: u64) -> Self {
        let mut counts = vec![T::zero(); order as usize];
        counts[(t % order) as usize] = T::one();
        Self::from_exponent_counts(order, counts)
    }

    /// `sum_t counts[t] * zeta^t` for `t` in `0..order`.
    pub fn from_exponent_counts(order: u64, counts: Vec<T>) -> Self {
        assert_eq!(counts.len() as u64, order, "one count per exponent");
        let modulus = cyclotomic_poly(order);
        let coeffs = reduce(counts, &modulus);
        CycloInt {
            order,
            coeffs,
            modulus,
        }
    }

    /// Reduce an arbitrary integer polynomial (ascending coefficients) in
    /// `zeta` to canonical form.
    pub fn from_poly(order: u64, poly: Vec<T>) -> Self {
        let modulus = cyclotomic_poly(order);
        let coeffs = reduce(poly, &modulus);
        CycloInt {
            order,
            coeffs,
            modulus,
        }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The value as a rational integer, if it is one.
    pub fn as_integer(&self) -> Option<T> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn same_order(&self, other: &Self) -> Result<()> {
        if self.order == other.order {
            Ok(())
        } else {
            Err(Error::MismatchedOrder(self.order, other.order))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Ok(CycloInt {
            order: self.order,
            coeffs,
            modulus: self.modulus.clone(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Ok(CycloInt {
            order: self.order,
            coeffs,
            modulus: self.modulus.clone(),
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        let n = self.coeffs.len();
        let mut prod = vec![T::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                prod[i + j] = prod[i + j].clone() + a.clone() * b.clone();
            }
        }
        Ok(CycloInt {
            order: self.order,
            coeffs: reduce(prod, &self.modulus),
            modulus: self.modulus.clone(),
        })
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// The Galois automorphism `zeta -> zeta^u`; `u` must be a unit mod D.
    pub fn galois(&self, u: u64) -> Result<Self> {
        let d = self.order;
        if u.gcd(&d) != 1 {
            return Err(Error::NotAutomorphism { u, order: d });
        }
        let mut full = vec![T::zero(); d as usize];
        for (t, c) in self.coeffs.iter().enumerate() {
            let idx = ((t as u64 * (u % d)) % d) as usize;
            full[idx] = full[idx].clone() + c.clone();
        }
        Ok(CycloInt {
            order: d,
            coeffs: reduce(full, &self.modulus),
            modulus: self.modulus.clone(),
        })
    }

    /// Complex conjugation, the automorphism `zeta -> zeta^(-1)`.
    pub fn conj(&self) -> Self {
        let u = if self.order == 1 { 1 } else { self.order - 1 };
        self.galois(u).expect("D - 1 is always a unit")
    }

    /// Image under the embedding `zeta_D -> exp(2 pi i / D)`.
    pub fn to_complex<F: Float + FloatConst>(&self) -> Complex<F> {
        let d = F::from(self.order).unwrap();
        let mut acc = Complex::new(F::zero(), F::zero());
        for (t, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let angle = F::TAU() * F::from(t).unwrap() / d;
            let w = F::from(c.to_f64().unwrap_or(f64::NAN)).unwrap();
            acc = acc + Complex::new(angle.cos(), angle.sin()) * w;
        }
        acc
    }

    /// `|z|` under the complex embedding.
    pub fn abs<F: Float + FloatConst>(&self) -> F {
        self.to_complex::<F>().norm()
    }

    pub fn map_coeffs<U: Coeff>(&self, f: impl Fn(&T) -> U) -> CycloInt<U> {
        CycloInt {
            order: self.order,
            coeffs: self.coeffs.iter().map(f).collect(),
            modulus: self.modulus.clone(),
        }
    }
}

fn reduce<T: Coeff>(mut poly: Vec<T>, modulus: &[i64]) -> Vec<T> {
    let deg = modulus.len() - 1;
    if poly.len() > deg {
        for i in (deg..poly.len()).rev() {
            let c = std::mem::replace(&mut poly[i], T::zero());
            if c.is_zero() {
                continue;
            }
            // x^i = x^(i-deg) * (x^deg - Phi) since Phi is monic
            for (j, &m) in modulus[..deg].iter().enumerate() {
                if m != 0 {
                    let mj = T::from_i64(m).unwrap();
                    poly[i - deg + j] = poly[i - deg + j].clone() - c.clone() * mj;
                }
            }
        }
    }
    poly.resize(deg, T::zero());
    poly
}

impl<T: Coeff> Add for &CycloInt<T> {
    type Output = CycloInt<T>;
    fn add(self, rhs: Self) -> CycloInt<T> {
        self.checked_add(rhs).expect("cyclotomic orders must agree")
    }
}

impl<T: Coeff> Sub for &CycloInt<T> {
    type Output = CycloInt<T>;
    fn sub(self, rhs: Self) -> CycloInt<T> {
        self.checked_sub(rhs).expect("cyclotomic orders must agree")
    }
}

impl<T: Coeff> Mul for &CycloInt<T> {
    type Output = CycloInt<T>;
    fn mul(self, rhs: Self) -> CycloInt<T> {
        self.checked_mul(rhs).expect("cyclotomic orders must agree")
    }
}

impl<T: Coeff> Neg for &CycloInt<T> {
    type Output = CycloInt<T>;
    fn neg(self) -> CycloInt<T> {
        self.map_coeffs(|c| -c.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Z = CycloInt<i64>;

    fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn small_cyclotomic_polys() {
        assert_eq!(&*cyclotomic_poly(1), &[-1, 1]);
        assert_eq!(&*cyclotomic_poly(2), &[1, 1]);
        assert_eq!(&*cyclotomic_poly(4), &[1, 0, 1]);
        assert_eq!(&*cyclotomic_poly(6), &[1, -1, 1]);
        assert_eq!(&*cyclotomic_poly(12), &[1, 0, -1, 0, 1]);
        for d in 1..60 {
            assert_eq!(cyclotomic_poly(d).len() as u64 - 1, totient(d));
        }
    }

    #[test]
    fn product_of_cyclotomics_is_x_d_minus_one() {
        for d in 1..40u64 {
            let mut acc = vec![1i64];
            for m in 1..=d {
                if d % m == 0 {
                    acc = poly_mul(&acc, &cyclotomic_poly(m));
                }
            }
            let mut expected = vec![0i64; d as usize + 1];
            expected[0] = -1;
            expected[d as usize] = 1;
            assert_eq!(acc, expected, "D = {d}");
        }
    }

    #[test]
    fn conj_of_i() {
        let i = Z::zeta_pow(4, 1);
        assert_eq!(i.conj(), Z::zeta_pow(4, 3));
        assert_eq!(i.conj(), -&i);
    }

    #[test]
    fn vanishing_geometric_sum() {
        let z = Z::from_exponent_counts(3, vec![1, 1, 1]);
        assert!(z.is_zero());
        assert!(z.abs::<f64>() < 1e-12);
    }

    #[test]
    fn zeta8_times_inverse() {
        let a = Z::zeta_pow(8, 1);
        let b = Z::zeta_pow(8, 7);
        assert_eq!(&a * &b, Z::one(8));
    }

    #[test]
    fn mismatched_orders_error() {
        let a = Z::one(3);
        let b = Z::one(4);
        assert_eq!(a.checked_add(&b), Err(Error::MismatchedOrder(3, 4)));
        assert!(a.checked_mul(&b).is_err());
    }

    #[test]
    fn galois_requires_unit() {
        let a = Z::zeta_pow(6, 1);
        assert!(a.galois(2).is_err());
        assert_eq!(a.galois(5).unwrap(), a.conj());
    }

    #[test]
    fn order_one_and_two() {
        let one = Z::zeta_pow(1, 0);
        assert_eq!(one, Z::one(1));
        let minus = Z::zeta_pow(2, 1);
        assert_eq!(minus.as_integer(), Some(-1));
        assert_eq!(minus.conj(), minus);
    }

    #[test]
    fn bigint_coefficients() {
        use num_bigint::BigInt;
        let a = CycloInt::<BigInt>::zeta_pow(5, 2);
        let b = a.pow(5);
        assert_eq!(b, CycloInt::<BigInt>::one(5));
    }
}
