//! Exact scalar arithmetic.
//!
//! Every computation in this crate runs over an exact field: arbitrary
//! precision rationals by default, or a prime field `F_p` selected per
//! session. The field is passed around as a small context value (the
//! elements of `F_p` do not know their modulus).

use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An exact field together with its element type.
///
/// Implementations must be exact: `a + (-a) = 0` and `a * a^-1 = 1` hold on
/// the nose, never approximately.
pub trait Field: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync + 'static;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse. Panics on zero; callers guard.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.mul(a, &self.inv(b))
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    /// Renders an element in the exact coefficient syntax used by the file
    /// formats: decimal integers or `a/b`.
    fn render(&self, a: &Self::Elem) -> String;

    /// Parses the `a/b` / integer syntax.
    fn parse(&self, s: &str) -> Result<Self::Elem>;

    /// All field elements, for finite fields; `None` when infinite.
    fn all_elements(&self) -> Option<Vec<Self::Elem>> {
        None
    }
}

/// The rational numbers with arbitrary precision arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn inv(&self, a: &BigRational) -> BigRational {
        assert!(!a.is_zero(), "inverse of zero");
        a.recip()
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn render(&self, a: &BigRational) -> String {
        if a.denom().is_one() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }

    fn parse(&self, s: &str) -> Result<BigRational> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<BigInt> {
            t.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Parse(format!("bad rational literal `{s}`")))
        };
        match s.split_once('/') {
            Some((num, den)) => {
                let den = parse_int(den)?;
                if den.is_zero() {
                    return Err(Error::Parse(format!("zero denominator in `{s}`")));
                }
                Ok(BigRational::new(parse_int(num)?, den))
            }
            None => Ok(BigRational::from_integer(parse_int(s)?)),
        }
    }
}

/// The prime field `F_p`, `p <= 2^31`. Elements are reduced residues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || p > (1 << 31) {
            return Err(Error::Config(format!("field order {p} out of range")));
        }
        let mut q = 2;
        while q * q <= p {
            if p % q == 0 {
                return Err(Error::Config(format!("{p} is not prime")));
            }
            q += 1;
        }
        Ok(PrimeField { p })
    }

    pub fn order(&self) -> u64 {
        self.p
    }

    fn reduce_i64(&self, n: i64) -> u64 {
        n.rem_euclid(self.p as i64) as u64
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1 % self.p
    }

    fn from_i64(&self, n: i64) -> u64 {
        self.reduce_i64(n)
    }

    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }

    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.p - b % self.p) % self.p
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.p
    }

    fn neg(&self, a: &u64) -> u64 {
        (self.p - a % self.p) % self.p
    }

    fn inv(&self, a: &u64) -> u64 {
        assert!(a % self.p != 0, "inverse of zero");
        // extended Euclid
        let (mut r0, mut r1) = (self.p as i64, (a % self.p) as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        t0.rem_euclid(self.p as i64) as u64
    }

    fn is_zero(&self, a: &u64) -> bool {
        a % self.p == 0
    }

    fn render(&self, a: &u64) -> String {
        (a % self.p).to_string()
    }

    fn all_elements(&self) -> Option<Vec<u64>> {
        Some((0..self.p).collect())
    }

    fn parse(&self, s: &str) -> Result<u64> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (s, None),
        };
        let n: i64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad coefficient `{s}`")))?;
        let mut v = self.reduce_i64(n);
        if let Some(d) = den {
            let d: i64 = d
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient `{s}`")))?;
            let d = self.reduce_i64(d);
            if self.is_zero(&d) {
                return Err(Error::Parse(format!("zero denominator in `{s}` mod {}", self.p)));
            }
            v = self.mul(&v, &self.inv(&d));
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_field_axioms() {
        let k = Rationals;
        let a = k.parse("3/7").unwrap();
        assert_eq!(k.add(&a, &k.neg(&a)), k.zero());
        assert_eq!(k.mul(&a, &k.inv(&a)), k.one());
        assert_eq!(k.render(&a), "3/7");
        assert_eq!(k.render(&k.parse("-4").unwrap()), "-4");
    }

    #[test]
    fn prime_field_axioms() {
        let k = PrimeField::new(7).unwrap();
        for a in 1..7u64 {
            assert_eq!(k.mul(&a, &k.inv(&a)), 1);
            assert_eq!(k.add(&a, &k.neg(&a)), 0);
        }
        assert_eq!(k.parse("10").unwrap(), 3);
        assert_eq!(k.parse("1/2").unwrap(), 4); // 2*4 = 8 = 1 mod 7
        assert!(PrimeField::new(6).is_err());
    }
}
