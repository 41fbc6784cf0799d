//! Exact arithmetic over Q and its completions.
//!
//! Everything here works with closed-form valuation and residue rules. The
//! only numbers are integers and rationals; no floating point is involved
//! except in [`real_sqrt`], which exists for reporting real points.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use num::integer::Integer;
use num::rational::Ratio;
use num::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Serialize a big integer as a decimal string.
pub fn ser_bigint<S: Serializer>(x: &num::BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

/// A place of Q: the real place or a finite prime.
///
/// The derived order puts the real place first, then primes ascending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Real,
    Finite(u64),
}

impl Place {
    pub fn finite(p: u64) -> Result<Place> {
        if is_prime(p) {
            Ok(Place::Finite(p))
        } else {
            Err(Error::InvalidInput(format!("{p} is not prime")))
        }
    }

    pub fn prime(&self) -> Option<u64> {
        match self {
            Place::Real => None,
            Place::Finite(p) => Some(*p),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Place::Real)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "real"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Place> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("real") || s == "inf" {
            return Ok(Place::Real);
        }
        let p: u64 = s
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad place '{s}'")))?;
        Place::finite(p)
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Place::Real => s.serialize_str("real"),
            Place::Finite(p) => s.serialize_u64(*p),
        }
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Place, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        let place = match Raw::deserialize(d)? {
            Raw::Num(p) => Place::finite(p),
            Raw::Str(s) => s.parse(),
        };
        place.map_err(serde::de::Error::custom)
    }
}

/// An element of Q/Z, stored as a reduced fraction in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Qqz {
    num: u64,
    den: u64,
}

impl Qqz {
    pub const ZERO: Qqz = Qqz { num: 0, den: 1 };
    pub const HALF: Qqz = Qqz { num: 1, den: 2 };

    pub fn new(num: i128, den: u64) -> Qqz {
        assert!(den > 0, "Q/Z denominator must be positive");
        let d = den as i128;
        let r = num.rem_euclid(d);
        let g = r.gcd(&d).max(1);
        Qqz {
            num: (r / g) as u64,
            den: (d / g) as u64,
        }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    /// The order of the element in Q/Z.
    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn mul_int(self, k: i128) -> Qqz {
        Qqz::new(self.num as i128 * k, self.den)
    }

    /// Representative in Z/n of `self`, when n·self = 0.
    pub fn to_residue(self, n: u64) -> Option<u64> {
        if n % self.den != 0 {
            return None;
        }
        Some(self.num * (n / self.den))
    }

    pub fn from_residue(r: u64, n: u64) -> Qqz {
        Qqz::new(r as i128, n)
    }
}

impl Add for Qqz {
    type Output = Qqz;
    fn add(self, o: Qqz) -> Qqz {
        let l = self.den.lcm(&o.den);
        let a = self.num as i128 * (l / self.den) as i128;
        let b = o.num as i128 * (l / o.den) as i128;
        Qqz::new(a + b, l)
    }
}

impl AddAssign for Qqz {
    fn add_assign(&mut self, o: Qqz) {
        *self = *self + o;
    }
}

impl Neg for Qqz {
    type Output = Qqz;
    fn neg(self) -> Qqz {
        Qqz::new(-(self.num as i128), self.den)
    }
}

impl Sub for Qqz {
    type Output = Qqz;
    fn sub(self, o: Qqz) -> Qqz {
        self + (-o)
    }
}

impl std::iter::Sum for Qqz {
    fn sum<I: Iterator<Item = Qqz>>(iter: I) -> Qqz {
        iter.fold(Qqz::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Qqz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Qqz {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Qqz {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Qqz, D::Error> {
        let s = String::deserialize(d)?;
        let bad = || serde::de::Error::custom(format!("bad Q/Z value '{s}'"));
        match s.split_once('/') {
            None => {
                let n: i128 = s.trim().parse().map_err(|_| bad())?;
                Ok(Qqz::new(n, 1))
            }
            Some((a, b)) => {
                let n: i128 = a.trim().parse().map_err(|_| bad())?;
                let m: u64 = b.trim().parse().map_err(|_| bad())?;
                if m == 0 {
                    return Err(bad());
                }
                Ok(Qqz::new(n, m))
            }
        }
    }
}

/// Bound on the orders of Q/Z values a computation is allowed to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorsionBound(pub u64);

impl Default for TorsionBound {
    fn default() -> Self {
        TorsionBound(24)
    }
}

impl TorsionBound {
    pub fn admits(&self, q: Qqz) -> bool {
        self.0 % q.denominator() == 0
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = 17u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes up to and including `bound`.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (0..=n).filter(|&k| sieve[k]).map(|k| k as u64).collect()
}

pub fn next_prime(n: u64) -> u64 {
    let mut m = n + 1;
    while !is_prime(m) {
        m += 1;
    }
    m
}

/// Prime factorization of |n| by trial division, primes ascending.
pub fn factor(n: i128) -> Vec<(u64, u32)> {
    let mut m = n.unsigned_abs();
    assert!(m != 0, "cannot factor zero");
    let mut out = Vec::new();
    let mut p: u128 = 2;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m as u64, 1));
    }
    out
}

pub fn prime_divisors(n: i128) -> Vec<u64> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: i128, p: u64) -> u32 {
    assert!(n != 0);
    let p = p as i128;
    let mut m = n;
    let mut v = 0;
    while m % p == 0 {
        m /= p;
        v += 1;
    }
    v
}

/// The squarefree integer in the same square class as `n` (sign kept).
pub fn squarefree_part(n: i128) -> i128 {
    assert!(n != 0);
    let mut out: i128 = n.signum();
    for (p, e) in factor(n) {
        if e % 2 == 1 {
            out *= p as i128;
        }
    }
    out
}

pub fn is_squarefree(n: i128) -> bool {
    n != 0 && factor(n).iter().all(|&(_, e)| e == 1)
}

/// Square-class representative of a nonzero rational: num·den, made squarefree.
pub fn square_class(a: &Rational) -> Result<i128> {
    if a.is_zero() {
        return Err(Error::ZeroInput);
    }
    Ok(squarefree_part(a.numer() * a.denom()))
}

/// Product of two square classes, as a squarefree integer.
pub fn class_mul(a: i128, b: i128) -> i128 {
    let g = a.gcd(&b);
    (a / g) * (b / g)
}

pub fn pow_mod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc: u128 = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

pub fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let e = a.rem_euclid(m).extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m))
}

/// Legendre symbol (a/p) for an odd prime p.
pub fn legendre_symbol(a: i128, p: i128) -> Result<i8> {
    if p <= 2 || !is_prime(p as u64) {
        return Err(Error::NotOddPrime(p));
    }
    let r = a.rem_euclid(p) as u128;
    if r == 0 {
        return Ok(0);
    }
    let e = pow_mod(r, (p as u128 - 1) / 2, p as u128);
    Ok(if e == 1 { 1 } else { -1 })
}

/// A square root of `a` modulo the odd prime `p` (Tonelli–Shanks), if any.
pub fn sqrt_mod_prime(a: i128, p: u64) -> Option<u64> {
    let pp = p as u128;
    let a = a.rem_euclid(p as i128) as u128;
    if p == 2 {
        return Some(a as u64);
    }
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, (pp - 1) / 2, pp) != 1 {
        return None;
    }
    let mut q = pp - 1;
    let mut s = 0;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2u128;
    while pow_mod(z, (pp - 1) / 2, pp) != pp - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, pp);
    let mut t = pow_mod(a, q, pp);
    let mut r = pow_mod(a, (q + 1) / 2, pp);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = tt * tt % pp;
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), pp);
        m = i;
        c = b * b % pp;
        t = t * c % pp;
        r = r * b % pp;
    }
    Some(r as u64)
}

/// A square root of the unit `a` modulo p^k, lifted from a root mod p
/// (odd p) or from a root mod 8 (p = 2, requires a ≡ 1 mod 8).
///
/// The result r satisfies r² ≡ a (mod p^k).
pub fn sqrt_mod_prime_power(a: i128, p: u64, k: u32) -> Option<u128> {
    let modulus = (p as u128).checked_pow(k)?;
    if modulus > (1u128 << 62) {
        return None;
    }
    let m = modulus as i128;
    if (a % p as i128) == 0 {
        return None;
    }
    if p == 2 {
        if k < 3 {
            return (0..modulus).find(|&r| ((r * r) as i128 - a).rem_euclid(m) == 0);
        }
        if a.rem_euclid(8) != 1 {
            return None;
        }
        // x² ≡ a mod 2^j with j ≥ 3; fix one more bit each round.
        let mut x: i128 = 1;
        for j in 3..k {
            if (x * x - a).rem_euclid(1i128 << (j + 1)) != 0 {
                x += 1i128 << (j - 1);
            }
        }
        return Some(x.rem_euclid(m) as u128);
    }
    let r0 = sqrt_mod_prime(a, p)? as i128;
    let mut x = r0;
    let mut pk = p as i128;
    for _ in 1..k {
        pk *= p as i128;
        // Newton step: x ← x − (x² − a)/(2x) mod p^j.
        let inv = inv_mod(2 * x, pk)?;
        let fx = (mul_mod(x, x, pk) - a).rem_euclid(pk);
        x = (x - mul_mod(fx, inv, pk)).rem_euclid(pk);
    }
    Some(x.rem_euclid(m) as u128)
}

pub fn mul_mod(a: i128, b: i128, m: i128) -> i128 {
    let a = a.rem_euclid(m) as u128;
    let b = b.rem_euclid(m) as u128;
    (a * b % m as u128) as i128
}

pub fn real_sqrt(d: i128) -> Option<f64> {
    (d > 0).then(|| (d as f64).sqrt())
}

/// Whether the nonzero rational `a` is a square in the completion at `v`.
pub fn is_local_square(a: &Rational, v: Place) -> Result<bool> {
    let m = square_class(a)?;
    Ok(is_local_square_int(m, v))
}

pub(crate) fn is_local_square_int(m: i128, v: Place) -> bool {
    debug_assert!(m != 0);
    match v {
        Place::Real => m > 0,
        Place::Finite(p) => {
            let e = valuation(m, p);
            if e % 2 == 1 {
                return false;
            }
            let u = m / (p as i128).pow(e);
            if p == 2 {
                u.rem_euclid(8) == 1
            } else {
                legendre_symbol(u, p as i128).expect("odd prime") == 1
            }
        }
    }
}

/// Hilbert symbol (a, b)_v as ±1, for nonzero integers.
pub fn hilbert_symbol_int(a: i128, b: i128, v: Place) -> i8 {
    assert!(a != 0 && b != 0);
    match v {
        Place::Real => {
            if a < 0 && b < 0 {
                -1
            } else {
                1
            }
        }
        Place::Finite(2) => {
            let (alpha, u) = split_valuation(a, 2);
            let (beta, w) = split_valuation(b, 2);
            let eps = |x: i128| ((x - 1) / 2).rem_euclid(2);
            let omega = |x: i128| ((x * x - 1) / 8).rem_euclid(2);
            let u = u.rem_euclid(8);
            let w = w.rem_euclid(8);
            let e = eps(u) * eps(w) + alpha as i128 * omega(w) + beta as i128 * omega(u);
            if e % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Place::Finite(p) => {
            let (alpha, u) = split_valuation(a, p);
            let (beta, w) = split_valuation(b, p);
            let pi = p as i128;
            let mut s: i8 = 1;
            if (alpha * beta) % 2 == 1 && ((pi - 1) / 2) % 2 == 1 {
                s = -s;
            }
            if beta % 2 == 1 {
                s *= legendre_symbol(u, pi).expect("odd prime");
            }
            if alpha % 2 == 1 {
                s *= legendre_symbol(w, pi).expect("odd prime");
            }
            s
        }
    }
}

fn split_valuation(n: i128, p: u64) -> (u32, i128) {
    let e = valuation(n, p);
    (e, n / (p as i128).pow(e))
}

/// Local invariant of the quaternion algebra (a, b) at `v`: 0 or 1/2.
pub fn hilbert_invariant(a: &Rational, b: &Rational, v: Place) -> Result<Qqz> {
    let a = square_class(a)?;
    let b = square_class(b)?;
    Ok(hilbert_invariant_int(a, b, v))
}

pub(crate) fn hilbert_invariant_int(a: i128, b: i128, v: Place) -> Qqz {
    if hilbert_symbol_int(a, b, v) == 1 {
        Qqz::ZERO
    } else {
        Qqz::HALF
    }
}

/// The places where (a, b) can have a nonzero invariant: real, 2 and the
/// primes dividing a·b.
pub fn hilbert_support(a: &Rational, b: &Rational) -> Result<Vec<Place>> {
    let a = square_class(a)?;
    let b = square_class(b)?;
    let mut out = vec![Place::Real, Place::Finite(2)];
    for p in prime_divisors(a * b) {
        if p != 2 {
            out.push(Place::Finite(p));
        }
    }
    Ok(out)
}

/// The places where the invariant of (a, b) is nonzero.
pub fn quaternion_ramification(a: &Rational, b: &Rational) -> Result<Vec<Place>> {
    let (ca, cb) = (square_class(a)?, square_class(b)?);
    Ok(hilbert_support(a, b)?
        .into_iter()
        .filter(|&v| hilbert_symbol_int(ca, cb, v) == -1)
        .collect())
}

pub fn rational_from_str(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidInput(format!("bad rational '{s}'"));
    let s = s.trim();
    match s.split_once('/') {
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
        Some((a, b)) => {
            let n: i128 = a.trim().parse().map_err(|_| bad())?;
            let d: i128 = b.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
    }
}

pub fn rational_to_string(r: &Rational) -> String {
    if r.denom() == &1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn abs_rational(r: &Rational) -> Rational {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i128) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_symbol(2, 17).unwrap(), 1);
        assert_eq!(legendre_symbol(3, 5).unwrap(), -1);
        assert_eq!(legendre_symbol(17, 17).unwrap(), 0);
        assert!(legendre_symbol(3, 2).is_err());
        assert!(legendre_symbol(3, 9).is_err());
    }

    #[test]
    fn legendre_matches_enumeration() {
        for p in primes_up_to(200).into_iter().filter(|&p| p > 2) {
            let squares: std::collections::HashSet<i128> =
                (1..p as i128).map(|x| x * x % p as i128).collect();
            for a in -199i128..200 {
                let r = a.rem_euclid(p as i128);
                let expect = if r == 0 {
                    0
                } else if squares.contains(&r) {
                    1
                } else {
                    -1
                };
                assert_eq!(legendre_symbol(a, p as i128).unwrap(), expect, "({a}/{p})");
            }
        }
    }

    #[test]
    fn local_square_examples() {
        assert!(is_local_square(&q(17), Place::Finite(2)).unwrap());
        assert!(!is_local_square(&q(2), Place::Finite(2)).unwrap());
        assert!(!is_local_square(&q(-1), Place::Real).unwrap());
        assert!(is_local_square(&Rational::new(4, 9), Place::Finite(3)).unwrap());
        assert!(!is_local_square(&Rational::new(1, 3), Place::Finite(3)).unwrap());
        assert_eq!(is_local_square(&q(0), Place::Real), Err(Error::ZeroInput));
    }

    /// (a, b)_2 = 1 iff b is a norm from Q_2(√a): search small norms
    /// x² − a·y² for one in the square class of b.
    fn hilbert_oracle_2(a: i128, b: i128) -> i8 {
        for x in -24i128..=24 {
            for y in -24i128..=24 {
                let n = x * x - a * y * y;
                if n != 0 && is_local_square_int(n * b, Place::Finite(2)) {
                    return 1;
                }
            }
        }
        -1
    }

    #[test]
    fn hilbert_at_two_matches_enumeration() {
        let classes = [1i128, 3, 5, 7, 2, 6, 10, 14];
        for &a in &classes {
            for &b in &classes {
                for sa in [1i128, -1] {
                    for sb in [1i128, -1] {
                        let (a, b) = (sa * a, sb * b);
                        assert_eq!(
                            hilbert_symbol_int(a, b, Place::Finite(2)),
                            hilbert_oracle_2(a, b),
                            "({a},{b})_2"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(hilbert_invariant(&q(-1), &q(-1), Place::Real).unwrap(), Qqz::HALF);
        assert_eq!(hilbert_invariant(&q(-1), &q(-1), Place::Finite(2)).unwrap(), Qqz::HALF);
        for v in [Place::Real, Place::Finite(2), Place::Finite(3), Place::Finite(7)] {
            assert_eq!(hilbert_invariant(&q(1), &q(7), v).unwrap(), Qqz::ZERO);
        }
        assert!(hilbert_invariant(&q(0), &q(1), Place::Real).is_err());
    }

    #[test]
    fn qqz_arithmetic() {
        assert_eq!(Qqz::HALF + Qqz::HALF, Qqz::ZERO);
        assert_eq!(Qqz::new(1, 3) + Qqz::new(1, 6), Qqz::HALF);
        assert_eq!(Qqz::new(-1, 4), Qqz::new(3, 4));
        assert_eq!(Qqz::new(1, 3).to_residue(6), Some(2));
        assert_eq!(Qqz::new(1, 4).to_residue(6), None);
        assert!(TorsionBound::default().admits(Qqz::new(1, 8)));
        assert!(!TorsionBound::default().admits(Qqz::new(1, 5)));
    }

    #[test]
    fn square_roots_lift() {
        let r = sqrt_mod_prime_power(2, 17, 5).unwrap();
        let m = 17u128.pow(5);
        assert_eq!((r * r) % m, 2);
        let r = sqrt_mod_prime_power(17, 2, 10).unwrap();
        assert_eq!((r * r) % 1024, 17);
        assert!(sqrt_mod_prime_power(3, 2, 5).is_none());
        assert!(sqrt_mod_prime_power(2, 5, 3).is_none());
    }

    #[test]
    fn class_mul_is_squarefree_product() {
        assert_eq!(class_mul(2, 17), 34);
        assert_eq!(class_mul(2, 34), 17);
        assert_eq!(class_mul(-3, -1), 3);
        assert_eq!(class_mul(-6, 10), -15);
    }
}
