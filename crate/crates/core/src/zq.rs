//! Arithmetic over `Z_q` for prime `q < 2^61`.
//!
//! Values are kept canonical (`0 <= v < q`). Products go through a 128-bit
//! intermediate, so no reduction tricks are needed for correctness.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_MODULUS_BITS: u32 = 61;

/// A prime modulus together with its bit width `ceil(log2 q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Modulus {
    q: u64,
    bits: u32,
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if !(2..1u64 << MAX_MODULUS_BITS).contains(&q) || !is_prime(q) {
            return Err(Error::InvalidModulus(q));
        }
        Ok(Self { q, bits: ceil_log2(q) })
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.q
    }

    /// Width of a rejection-sampling draw, `ceil(log2 q)`.
    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.q
    }

    #[inline]
    pub fn reduce_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    #[inline]
    pub fn square(&self, a: u64) -> u64 {
        self.mul(a, a)
    }

    #[inline]
    pub fn cube(&self, a: u64) -> u64 {
        self.mul(self.mul(a, a), a)
    }

    /// Centered representative in `(-q/2, q/2]`.
    #[inline]
    pub fn center(&self, a: u64) -> i64 {
        if a > self.q / 2 {
            a as i64 - self.q as i64
        } else {
            a as i64
        }
    }

    pub fn element(&self, value: u64) -> Result<ZqElement> {
        ZqElement::new(value, *self)
    }

    /// Whether `x -> x^3` permutes `Z_q`.
    pub fn cube_is_permutation(&self) -> bool {
        (self.q - 1) % 3 != 0
    }
}

impl TryFrom<u64> for Modulus {
    type Error = Error;
    fn try_from(q: u64) -> Result<Self> {
        Modulus::new(q)
    }
}

impl From<Modulus> for u64 {
    fn from(m: Modulus) -> u64 {
        m.q
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)
    }
}

/// An element of `Z_q` bound to its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZqElement {
    value: u64,
    modulus: Modulus,
}

impl ZqElement {
    pub fn new(value: u64, modulus: Modulus) -> Result<Self> {
        if value >= modulus.q {
            return Err(Error::NonCanonical { value, q: modulus.q });
        }
        Ok(Self { value, modulus })
    }

    pub fn zero(modulus: Modulus) -> Self {
        Self { value: 0, modulus }
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus.q, other.modulus.q));
        }
        Ok(())
    }

    pub fn add(self, other: Self) -> Result<Self> {
        self.check(&other)?;
        Ok(Self { value: self.modulus.add(self.value, other.value), ..self })
    }

    pub fn sub(self, other: Self) -> Result<Self> {
        self.check(&other)?;
        Ok(Self { value: self.modulus.sub(self.value, other.value), ..self })
    }

    pub fn mul(self, other: Self) -> Result<Self> {
        self.check(&other)?;
        Ok(Self { value: self.modulus.mul(self.value, other.value), ..self })
    }

    /// `a^3`, as two multiplications.
    pub fn pow3(self) -> Self {
        Self { value: self.modulus.cube(self.value), ..self }
    }
}

impl fmt::Display for ZqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

pub fn zq_add(a: ZqElement, b: ZqElement) -> Result<ZqElement> {
    a.add(b)
}

pub fn zq_mul(a: ZqElement, b: ZqElement) -> Result<ZqElement> {
    a.mul(b)
}

pub fn zq_pow3(a: ZqElement) -> ZqElement {
    a.pow3()
}

fn ceil_log2(q: u64) -> u32 {
    64 - (q - 1).leading_zeros()
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % m as u128) as u64;
        }
        base = ((base as u128 * base as u128) % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the first twelve prime bases cover all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q17() -> Modulus {
        Modulus::new(17).unwrap()
    }

    fn el(v: u64) -> ZqElement {
        q17().element(v).unwrap()
    }

    #[test]
    fn add_examples() {
        assert_eq!(zq_add(el(9), el(12)).unwrap().value(), 4);
        assert_eq!(zq_add(el(5), el(0)).unwrap().value(), 5);
        assert_eq!(zq_add(el(16), el(1)).unwrap().value(), 0);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(zq_mul(el(5), el(7)).unwrap().value(), 1);
        assert_eq!(zq_mul(el(1), el(9)).unwrap().value(), 9);
        assert_eq!(zq_mul(el(0), el(13)).unwrap().value(), 0);
    }

    #[test]
    fn pow3_examples() {
        assert_eq!(zq_pow3(el(2)).value(), 8);
        assert_eq!(zq_pow3(el(3)).value(), 10);
        assert_eq!(zq_pow3(el(0)).value(), 0);
        assert_eq!(zq_pow3(el(1)).value(), 1);
    }

    #[test]
    fn mismatched_moduli_rejected() {
        let other = Modulus::new(19).unwrap().element(3).unwrap();
        assert_eq!(zq_add(el(3), other), Err(Error::ModulusMismatch(17, 19)));
        assert!(zq_mul(el(3), other).is_err());
    }

    #[test]
    fn modulus_validation() {
        assert!(Modulus::new(16).is_err());
        assert!(Modulus::new(1).is_err());
        assert!(Modulus::new((1 << 61) + 1).is_err());
        let m = Modulus::new(33292289).unwrap();
        assert_eq!(m.bits(), 25);
        assert_eq!(Modulus::new(17).unwrap().bits(), 5);
        assert_eq!(Modulus::new(2).unwrap().bits(), 1);
        // 2^61 - 1 is a Mersenne prime.
        assert_eq!(Modulus::new((1 << 61) - 1).unwrap().bits(), 61);
    }

    #[test]
    fn non_canonical_rejected() {
        assert!(q17().element(17).is_err());
    }

    #[test]
    fn primality_against_trial_division() {
        let naive = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..5000u64 {
            assert_eq!(is_prime(n), naive(n), "n = {n}");
        }
        // strong pseudoprime to several small bases
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn wide_products_do_not_overflow() {
        let m = Modulus::new((1 << 61) - 1).unwrap();
        let a = m.value() - 1;
        assert_eq!(m.mul(a, a), 1);
    }

    #[test]
    fn cube_permutation_q17() {
        let m = q17();
        assert!(m.cube_is_permutation());
        let mut seen = [false; 17];
        for x in 0..17 {
            seen[m.cube(x) as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn center_is_symmetric() {
        let m = q17();
        assert_eq!(m.center(8), 8);
        assert_eq!(m.center(9), -8);
        assert_eq!(m.center(16), -1);
    }
}
