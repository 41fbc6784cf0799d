//! Rational points on conics z² = a·x² + b·y² by Legendre descent.

use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use serde::Serialize;

use crate::arith::{factor, quaternion_ramification, sqrt_mod_prime, squarefree_part, Rational};

/// A projective point (x : y : z), primitive with z ≥ 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConicPoint {
    #[serde(serialize_with = "crate::arith::ser_bigint")]
    pub x: BigInt,
    #[serde(serialize_with = "crate::arith::ser_bigint")]
    pub y: BigInt,
    #[serde(serialize_with = "crate::arith::ser_bigint")]
    pub z: BigInt,
}

impl ConicPoint {
    pub fn satisfies(&self, a: &Rational, b: &Rational) -> bool {
        if self.x.is_zero() && self.y.is_zero() && self.z.is_zero() {
            return false;
        }
        let q = |r: &Rational| BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()));
        let (x, y, z) = (
            BigRational::from_integer(self.x.clone()),
            BigRational::from_integer(self.y.clone()),
            BigRational::from_integer(self.z.clone()),
        );
        &z * &z == q(a) * &x * &x + q(b) * &y * &y
    }
}

/// A point on z² = a·x² + b·y², or None when some Hilbert invariant of (a, b)
/// is nonzero.
pub fn conic_point(a: &Rational, b: &Rational) -> Option<ConicPoint> {
    if !quaternion_ramification(a, b).ok()?.is_empty() {
        return None;
    }
    // a = A·(t_a/d_a)² with A squarefree.
    let split = |r: &Rational| {
        let m = r.numer() * r.denom();
        let sq = squarefree_part(m);
        let t = num::integer::sqrt(m / sq);
        (sq, t, *r.denom())
    };
    let (ca, ta, da) = split(a);
    let (cb, tb, db) = split(b);
    // z² = A·X² + B·Y² with X = (t_a/d_a)·x, Y = (t_b/d_b)·y.
    let (big_x, big_y, z) = solve_squarefree(ca, cb)?;
    // x = X·d_a/t_a, y = Y·d_b/t_b; clear denominators by t_a·t_b.
    let x = big_x * BigInt::from(da) * BigInt::from(tb);
    let y = big_y * BigInt::from(db) * BigInt::from(ta);
    let z = z * BigInt::from(ta) * BigInt::from(tb);
    let p = normalize(x, y, z);
    debug_assert!(p.satisfies(a, b));
    p.satisfies(a, b).then_some(p)
}

fn normalize(x: BigInt, y: BigInt, z: BigInt) -> ConicPoint {
    let g = x.gcd(&y).gcd(&z);
    let (mut x, mut y, mut z) = (x / &g, y / &g, z / &g);
    if z.is_negative() || (z.is_zero() && (x.is_negative() || (x.is_zero() && y.is_negative()))) {
        x = -x;
        y = -y;
        z = -z;
    }
    ConicPoint { x, y, z }
}

/// r with r² ≡ a mod m for squarefree m, |r| ≤ m/2.
fn sqrt_mod_squarefree(a: i128, m: i128) -> Option<i128> {
    let mut r: i128 = 0;
    let mut modulus: i128 = 1;
    for (p, _) in factor(m) {
        let p = p as i128;
        let s = if p == 2 {
            a.rem_euclid(2)
        } else if a.rem_euclid(p) == 0 {
            0
        } else {
            sqrt_mod_prime(a, p as u64)? as i128
        };
        // CRT: r ≡ current mod modulus, r ≡ s mod p.
        let inv = crate::arith::inv_mod(modulus.rem_euclid(p), p).unwrap_or(0);
        let k = ((s - r).rem_euclid(p) * inv).rem_euclid(p);
        r += modulus * k;
        modulus *= p;
    }
    r = r.rem_euclid(modulus);
    if r > modulus / 2 {
        r -= modulus;
    }
    Some(r)
}

/// (X, Y, Z) with Z² = A·X² + B·Y² for squarefree A, B.
fn solve_squarefree(a: i128, b: i128) -> Option<(BigInt, BigInt, BigInt)> {
    let one = BigInt::one;
    if a == 1 {
        return Some((one(), BigInt::zero(), one()));
    }
    if b == 1 {
        return Some((BigInt::zero(), one(), one()));
    }
    if a.abs() > b.abs() {
        let (y, x, z) = solve_squarefree(b, a)?;
        return Some((x, y, z));
    }
    if b.abs() == 1 {
        // a, b ∈ {−1}: no real point.
        return None;
    }
    let r = sqrt_mod_squarefree(a, b.abs())?;
    let t = (r * r - a) / b;
    if t == 0 {
        return None;
    }
    let t1 = squarefree_part(t);
    let s = num::integer::sqrt(t / t1);
    let (x1, y1, z1) = solve_squarefree(a, t1)?;
    let (a_, r_) = (BigInt::from(a), BigInt::from(r));
    let z = &z1 * &r_ + &a_ * &x1;
    let x = &z1 + &r_ * &x1;
    let y = BigInt::from(t1) * BigInt::from(s) * y1;
    Some((x, y, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i128) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn examples() {
        let p = conic_point(&q(1), &q(1)).unwrap();
        assert_eq!((p.x.clone(), p.y.clone(), p.z.clone()), (1.into(), 0.into(), 1.into()));
        let p = conic_point(&q(5), &q(4)).unwrap();
        assert!(p.satisfies(&q(5), &q(4)));
        assert!(conic_point(&q(-1), &q(-1)).is_none());
        assert!(conic_point(&q(2), &q(5)).is_none());
    }

    #[test]
    fn rational_coefficients() {
        let a = Rational::new(3, 4);
        let b = Rational::new(-5, 9);
        match conic_point(&a, &b) {
            Some(p) => assert!(p.satisfies(&a, &b)),
            None => assert!(!quaternion_ramification(&a, &b).unwrap().is_empty()),
        }
        let a = Rational::new(1, 2);
        let b = Rational::new(1, 2);
        let p = conic_point(&a, &b).unwrap();
        assert!(p.satisfies(&a, &b));
    }

    #[test]
    fn exhaustive_small_coefficients() {
        for a in -40i128..=40 {
            for b in -40i128..=40 {
                if a == 0 || b == 0 {
                    continue;
                }
                let soluble = quaternion_ramification(&q(a), &q(b)).unwrap().is_empty();
                match conic_point(&q(a), &q(b)) {
                    Some(p) => assert!(soluble && p.satisfies(&q(a), &q(b)), "({a},{b})"),
                    None => assert!(!soluble, "({a},{b}) soluble but no point"),
                }
            }
        }
    }
}
