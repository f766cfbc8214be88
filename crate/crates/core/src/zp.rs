//! Exact arithmetic over Z_p for primes below 2^31.
//!
//! Every product of two reduced residues fits in a `u64`, so no wide
//! arithmetic is needed anywhere in the crate.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus accepted by [`Prime::new`].
pub const MAX_MODULUS: u64 = 1 << 31;

/// A prime modulus `2 <= p <= 2^31`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(value: u64) -> Result<Self> {
        if value > MAX_MODULUS {
            return Err(Error::ModulusTooLarge(value));
        }
        if !is_prime(value) {
            return Err(Error::NotPrime(value));
        }
        Ok(Prime(value))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn reduce(self, v: u64) -> u64 {
        v % self.0
    }

    /// Reduces a signed integer into `[0, p)`.
    pub fn reduce_signed(self, v: i64) -> u64 {
        v.rem_euclid(self.0 as i64) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        (a + b) % self.0
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        (a % self.0) * (b % self.0) % self.0
    }

    pub fn pow(self, base: u64, mut exp: u64) -> u64 {
        let mut b = base % self.0;
        let mut acc = 1 % self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * b % self.0;
            }
            b = b * b % self.0;
            exp >>= 1;
        }
        acc
    }

    pub fn element(self, value: u64) -> ZpElement {
        ZpElement {
            value: value % self.0,
            modulus: self,
        }
    }
}

impl TryFrom<u64> for Prime {
    type Error = Error;

    fn try_from(value: u64) -> Result<Self> {
        Prime::new(value)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A residue `0 <= value < p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ZpElement {
    value: u64,
    modulus: Prime,
}

impl ZpElement {
    pub fn new(value: u64, modulus: Prime) -> Self {
        modulus.element(value)
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> Prime {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn pow(self, exp: u64) -> ZpElement {
        self.modulus.element(self.modulus.pow(self.value, exp))
    }
}

impl std::ops::Add for ZpElement {
    type Output = ZpElement;

    fn add(self, rhs: ZpElement) -> ZpElement {
        debug_assert_eq!(self.modulus, rhs.modulus);
        self.modulus.element(self.value + rhs.value)
    }
}

impl std::ops::Mul for ZpElement {
    type Output = ZpElement;

    fn mul(self, rhs: ZpElement) -> ZpElement {
        debug_assert_eq!(self.modulus, rhs.modulus);
        self.modulus.element(self.value * rhs.value)
    }
}

impl fmt::Display for ZpElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Deterministic Miller-Rabin; bases 2, 3, 5, 7 are exact below 3.2 * 10^9.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13] {
        if n.is_multiple_of(small) {
            return n == small;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let powmod = |b: u64, mut e: u64| {
        let m = n as u128;
        let mut acc = 1u128;
        let mut base = b as u128 % m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            e >>= 1;
        }
        acc as u64
    };
    'witness: for a in [2u64, 3, 5, 7] {
        let mut x = powmod(a, d);
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

/// Multiplicative inverse via the extended Euclidean algorithm.
pub fn mod_inverse(a: ZpElement) -> Result<ZpElement> {
    let p = a.modulus();
    if a.is_zero() {
        return Err(Error::NoInverse(a.value(), p.get()));
    }
    let (mut old_r, mut r) = (a.value() as i64, p.get() as i64);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    Ok(p.element(p.reduce_signed(old_s)))
}

/// Distinct prime factors of `n`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest generator of the multiplicative group of Z_p.
///
/// For `p = 2` the group is trivial and `1` is returned.
pub fn primitive_root(p: Prime) -> ZpElement {
    let pv = p.get();
    if pv == 2 {
        return p.element(1);
    }
    let factors = prime_factors(pv - 1);
    (2..pv)
        .find(|&g| factors.iter().all(|&q| p.pow(g, (pv - 1) / q) != 1))
        .map(|g| p.element(g))
        .expect("every prime has a primitive root")
}

/// Multiplicative order of a nonzero residue.
pub fn multiplicative_order(a: ZpElement) -> Option<u64> {
    if a.is_zero() {
        return None;
    }
    let p = a.modulus();
    let n = p.get() - 1;
    let mut order = n;
    for q in prime_factors(n) {
        while order.is_multiple_of(q) && p.pow(a.value(), order / q) == 1 {
            order /= q;
        }
    }
    Some(order)
}

/// All primes `r` with `lo < r < hi`, ascending.
pub fn primes_in_range(lo: f64, hi: f64) -> Vec<Prime> {
    if hi.is_nan() || lo.is_nan() || hi <= lo || hi <= 2.0 {
        return Vec::new();
    }
    let top = hi.ceil() as usize;
    let sieve = sieve(top);
    let start = if lo < 0.0 { 0 } else { lo.floor() as usize };
    (start..=top.min(sieve.len() - 1))
        .filter(|&r| sieve[r] && (r as f64) > lo && (r as f64) < hi)
        .map(|r| Prime(r as u64))
        .collect()
}

/// Sieve of Eratosthenes over `[0, n]`.
pub fn sieve(n: usize) -> Vec<bool> {
    let mut is = vec![true; n + 1];
    is[0] = false;
    if n >= 1 {
        is[1] = false;
    }
    let mut i = 2;
    while i * i <= n {
        if is[i] {
            let mut j = i * i;
            while j <= n {
                is[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    is
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inverse(p(17).element(3)).unwrap().value(), 6);
        for q in [2, 3, 5, 1013] {
            assert_eq!(mod_inverse(p(q).element(1)).unwrap().value(), 1);
        }
        assert!(matches!(
            mod_inverse(p(17).element(0)),
            Err(Error::NoInverse(0, 17))
        ));
    }

    #[test]
    fn primitive_root_examples() {
        assert_eq!(primitive_root(p(7)).value(), 3);
        assert_eq!(primitive_root(p(17)).value(), 3);
        assert_eq!(primitive_root(p(3)).value(), 2);
        assert_eq!(primitive_root(p(2)).value(), 1);
    }

    #[test]
    fn primitive_root_has_full_order_by_exhaustive_powering() {
        let s = sieve(10_000);
        for q in (3..=10_000u64).filter(|&q| s[q as usize]) {
            let pr = p(q);
            let g = primitive_root(pr).value();
            let mut x = 1;
            let mut order = 0;
            loop {
                x = x * g % q;
                order += 1;
                if x == 1 {
                    break;
                }
            }
            assert_eq!(order, q - 1, "p={q} g={g}");
            // smallest: no smaller candidate has full order
            for c in 2..g {
                assert_ne!(multiplicative_order(pr.element(c)), Some(q - 1));
            }
        }
    }

    #[test]
    fn primes_in_range_examples() {
        let v = |lo, hi| {
            primes_in_range(lo, hi)
                .into_iter()
                .map(Prime::get)
                .collect::<Vec<_>>()
        };
        assert_eq!(v(10.0, 20.0), vec![11, 13, 17, 19]);
        assert_eq!(v(2.5, 3.5), vec![3]);
        assert!(v(14.0, 16.0).is_empty());
        // strict on both ends
        assert_eq!(v(11.0, 13.0), Vec::<u64>::new());
        assert_eq!(v(1.0, 3.0), vec![2]);
    }

    #[test]
    fn primes_in_range_agree_with_trial_division() {
        let trial = |n: u64| {
            n >= 2
                && (2..)
                    .take_while(|d| d * d <= n)
                    .all(|d| !n.is_multiple_of(d))
        };
        let got: Vec<u64> = primes_in_range(1.5, 100_000.5)
            .into_iter()
            .map(Prime::get)
            .collect();
        let want: Vec<u64> = (2..=100_000).filter(|&n| trial(n)).collect();
        assert_eq!(got, want);
        for n in 0..100_000 {
            assert_eq!(is_prime(n), trial(n), "{n}");
        }
    }

    #[test]
    fn prime_validation() {
        assert!(Prime::new(1).is_err());
        assert!(Prime::new(15).is_err());
        assert!(Prime::new(2_147_483_647).is_ok());
        assert!(matches!(
            Prime::new((1 << 31) + 11),
            Err(Error::ModulusTooLarge(_))
        ));
    }

    #[test]
    fn element_ops() {
        let q = p(17);
        let a = q.element(20);
        assert_eq!(a.value(), 3);
        assert_eq!((a + q.element(15)).value(), 1);
        assert_eq!((a * q.element(6)).value(), 1);
        assert_eq!(q.element(3).pow(16).value(), 1);
        assert_eq!(q.reduce_signed(-1), 16);
    }

    proptest::proptest! {
        #[test]
        fn inverse_is_involution(a in 1u64..1013) {
            let e = p(1013).element(a);
            let inv = mod_inverse(e).unwrap();
            proptest::prop_assert_eq!((e * inv).value(), 1);
            proptest::prop_assert_eq!(mod_inverse(inv).unwrap(), e);
        }

        #[test]
        fn inverse_large_prime(a in 1u64..2_147_483_647) {
            let e = p(2_147_483_647).element(a);
            let inv = mod_inverse(e).unwrap();
            proptest::prop_assert_eq!((e * inv).value(), 1);
        }
    }
}
