//! Integer and finite-field polynomial helpers: discriminants, factor-degree
//! patterns mod p, and exact determinants.

use num::{BigInt, BigRational, One, ToPrimitive, Zero};

/// Determinant of a square matrix over Q by Gaussian elimination.
pub fn det_rational(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det *= &piv;
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &piv;
            for k in c..n {
                let t = &f * &m[c][k];
                m[r][k] -= t;
            }
        }
    }
    det
}

/// Sylvester matrix of two polynomials (coefficients low degree first).
pub fn sylvester(f: &[BigRational], g: &[BigRational]) -> Vec<Vec<BigRational>> {
    let (m, n) = (f.len() - 1, g.len() - 1);
    let size = m + n;
    let mut s = vec![vec![BigRational::zero(); size]; size];
    for i in 0..n {
        for (j, c) in f.iter().rev().enumerate() {
            s[i][i + j] = c.clone();
        }
    }
    for i in 0..m {
        for (j, c) in g.iter().rev().enumerate() {
            s[n + i][i + j] = c.clone();
        }
    }
    s
}

/// Resultant of two univariate polynomials over Q given with their formal
/// degrees (leading coefficients may vanish; this gives the homogeneous
/// resultant of the corresponding binary forms).
pub fn resultant(f: &[BigRational], g: &[BigRational]) -> BigRational {
    if f.len() == 1 {
        return num::pow(f[0].clone(), g.len() - 1);
    }
    if g.len() == 1 {
        return num::pow(g[0].clone(), f.len() - 1);
    }
    det_rational(sylvester(f, g))
}

fn to_q(f: &[i128]) -> Vec<BigRational> {
    f.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect()
}

/// Discriminant of a monic integer polynomial (coefficients low degree first).
pub fn discriminant(f: &[i128]) -> i128 {
    let n = f.len() - 1;
    if n == 0 {
        return 0;
    }
    if n == 1 {
        return 1;
    }
    let df: Vec<i128> = (1..=n).map(|i| f[i] * i as i128).collect();
    let r = resultant(&to_q(f), &to_q(&df));
    let lead = BigRational::from_integer(BigInt::from(f[n]));
    let mut d = r / lead;
    if (n * (n - 1) / 2) % 2 == 1 {
        d = -d;
    }
    debug_assert!(d.is_integer());
    d.to_integer().to_i128().expect("discriminant overflows i128")
}

/// Coefficient vectors over F_p, low degree first, without trailing zeros.
type Fp = Vec<u64>;

fn trim(mut a: Fp) -> Fp {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn deg(a: &Fp) -> Option<usize> {
    a.len().checked_sub(1)
}

fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn inv(a: u64, p: u64) -> u64 {
    crate::arith::pow_mod(a as u128, p as u128 - 2, p as u128) as u64
}

fn rem(a: &Fp, m: &Fp, p: u64) -> Fp {
    let mut a = trim(a.clone());
    let dm = deg(m).expect("division by zero polynomial");
    let li = inv(m[dm], p);
    while let Some(da) = deg(&a) {
        if da < dm {
            break;
        }
        let q = mulm(a[da], li, p);
        for i in 0..=dm {
            let t = mulm(q, m[i], p);
            a[da - dm + i] = (a[da - dm + i] + p - t) % p;
        }
        a = trim(a);
    }
    a
}

fn div_exact(a: &Fp, m: &Fp, p: u64) -> Fp {
    let mut a = a.clone();
    let dm = deg(m).unwrap();
    let li = inv(m[dm], p);
    let da = deg(&a).unwrap();
    let mut q = vec![0; da - dm + 1];
    for k in (0..=da - dm).rev() {
        let c = mulm(a[k + dm], li, p);
        q[k] = c;
        for i in 0..=dm {
            let t = mulm(c, m[i], p);
            a[k + i] = (a[k + i] + p - t) % p;
        }
    }
    debug_assert!(trim(a).is_empty());
    trim(q)
}

fn mul_mod(a: &Fp, b: &Fp, m: &Fp, p: u64) -> Fp {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulm(x, y, p)) % p;
        }
    }
    rem(&out, m, p)
}

fn pow_mod_poly(base: &Fp, mut e: u64, m: &Fp, p: u64) -> Fp {
    let mut acc = rem(&vec![1], m, p);
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(&acc, &b, m, p);
        }
        b = mul_mod(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

fn gcd(a: &Fp, b: &Fp, p: u64) -> Fp {
    let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn sub(a: &Fp, b: &Fp, p: u64) -> Fp {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

/// Degrees of the irreducible factors of f mod p, ascending. Requires f
/// monic and squarefree mod p (p not dividing the discriminant).
pub fn factor_degrees_mod_p(f: &[i128], p: u64) -> Vec<u32> {
    let mut rest: Fp = trim(f.iter().map(|&c| c.rem_euclid(p as i128) as u64).collect());
    let x: Fp = vec![0, 1];
    let mut h = x.clone();
    let mut out = Vec::new();
    let mut d = 1usize;
    while let Some(dr) = deg(&rest) {
        if dr == 0 {
            break;
        }
        if dr < 2 * d {
            out.push(dr as u32);
            break;
        }
        h = pow_mod_poly(&h, p, &rest, p);
        let g = gcd(&rest, &sub(&h, &x, p), p);
        let dg = deg(&g).unwrap();
        if dg > 0 {
            out.extend(std::iter::repeat(d as u32).take(dg / d));
            rest = div_exact(&rest, &g, p);
            h = rem(&h, &rest, p);
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

/// Number of roots of f mod p, counted without multiplicity, by evaluation.
pub fn count_roots_mod_p(f: &[i128], p: u64) -> usize {
    (0..p)
        .filter(|&x| {
            let mut acc: i128 = 0;
            for &c in f.iter().rev() {
                acc = (acc * x as i128 + c).rem_euclid(p as i128);
            }
            acc == 0
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_up_to;

    #[test]
    fn discriminants() {
        assert_eq!(discriminant(&[-1, -1, 0, 1]), -23);
        // x² − d has discriminant 4d.
        assert_eq!(discriminant(&[-5, 0, 1]), 20);
        // x³ − 2: −27·4.
        assert_eq!(discriminant(&[-2, 0, 0, 1]), -108);
        assert_eq!(discriminant(&[1, 0, 1, 0, 1]), 144);
    }

    #[test]
    fn factor_patterns_match_root_counts() {
        let polys: [&[i128]; 3] = [&[-1, -1, 0, 1], &[-2, 0, 0, 1], &[1, 1, 0, 0, 1]];
        for f in polys {
            let disc = discriminant(f);
            for p in primes_up_to(300) {
                if disc % p as i128 == 0 {
                    continue;
                }
                let pat = factor_degrees_mod_p(f, p);
                assert_eq!(pat.iter().sum::<u32>() as usize, f.len() - 1);
                let linear = pat.iter().filter(|&&d| d == 1).count();
                assert_eq!(linear, count_roots_mod_p(f, p), "f={f:?} p={p}");
            }
        }
    }

    #[test]
    fn cubic_splitting_parity() {
        // For an S3 cubic the pattern [1,2] occurs exactly at primes where
        // the discriminant is a non-residue.
        for p in primes_up_to(500).into_iter().filter(|&p| p > 3 && p != 23) {
            let pat = factor_degrees_mod_p(&[-1, -1, 0, 1], p);
            let nonres = crate::arith::legendre_symbol(-23, p as i128).unwrap() == -1;
            assert_eq!(pat == vec![1, 2], nonres, "p={p}");
        }
    }
}
