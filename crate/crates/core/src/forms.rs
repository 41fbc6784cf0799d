//! Binary forms built from linear and x² − d·y² factors, their Hasse
//! principle analysis, and the construction of degree-8 counterexamples.

use std::collections::BTreeSet;
use std::fmt;

use num::{BigInt, Integer, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{class_mul, is_squarefree, legendre_symbol, prime_divisors, rational_from_str, Place};
use crate::error::{Error, Result};
use crate::fields::{certify_everywhere_local, EtaleAlgebra, FieldSpec, LocalCertificate};

/// A separable binary form: Π (b·x − a·y) over projective roots (a:b) times
/// Π (x² − d·y²) over squarefree d.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FormJson", into = "FormJson")]
pub struct BinaryForm {
    linear: Vec<(i128, i128)>,
    quadratic: Vec<i128>,
}

/// Primitive integer representative of a projective point, first nonzero
/// coordinate positive.
pub fn normalize_root(a: i128, b: i128) -> Result<(i128, i128)> {
    if a == 0 && b == 0 {
        return Err(Error::InvalidInput("(0:0) is not a projective point".into()));
    }
    let g = a.gcd(&b);
    let (mut a, mut b) = (a / g, b / g);
    if a < 0 || (a == 0 && b < 0) {
        a = -a;
        b = -b;
    }
    Ok((a, b))
}

impl BinaryForm {
    pub fn new(linear: Vec<(i128, i128)>, quadratic: Vec<i128>) -> Result<BinaryForm> {
        let mut roots = Vec::new();
        for (a, b) in linear {
            let r = normalize_root(a, b)?;
            if roots.contains(&r) {
                return Err(Error::InvalidInput(format!("repeated root ({}:{})", r.0, r.1)));
            }
            roots.push(r);
        }
        let mut seen = BTreeSet::new();
        for &d in &quadratic {
            if d == 0 || d == 1 || !is_squarefree(d) {
                return Err(Error::InvalidInput(format!(
                    "x² − {d}·y² needs d squarefree and not in {{0, 1}}"
                )));
            }
            if !seen.insert(d) {
                return Err(Error::InvalidInput(format!("repeated factor x² − {d}·y²")));
            }
        }
        if roots.is_empty() && quadratic.is_empty() {
            return Err(Error::InvalidInput("the form has no factors".into()));
        }
        Ok(BinaryForm {
            linear: roots,
            quadratic,
        })
    }

    /// Π (x² − d·y²) over the given classes.
    pub fn quadratic_product(ds: &[i128]) -> Result<BinaryForm> {
        BinaryForm::new(vec![], ds.to_vec())
    }

    pub fn linear_roots(&self) -> &[(i128, i128)] {
        &self.linear
    }

    pub fn quadratic_classes(&self) -> &[i128] {
        &self.quadratic
    }

    pub fn degree(&self) -> usize {
        self.linear.len() + 2 * self.quadratic.len()
    }

    /// Residue fields of the roots, one per irreducible factor.
    pub fn factor_fields(&self) -> Vec<FieldSpec> {
        let mut out = vec![FieldSpec::Rational; self.linear.len()];
        out.extend(self.quadratic.iter().map(|&d| FieldSpec::Quadratic(d)));
        out
    }

    pub fn algebra(&self) -> EtaleAlgebra {
        EtaleAlgebra {
            factors: self.factor_fields(),
        }
    }

    /// Coefficients of x^(deg−i)·y^i for i = 0..=deg.
    pub fn coefficients(&self) -> Vec<BigInt> {
        let mut acc = vec![BigInt::from(1)];
        let mul = |acc: &Vec<BigInt>, f: &[i128]| {
            let mut out = vec![BigInt::zero(); acc.len() + f.len() - 1];
            for (i, a) in acc.iter().enumerate() {
                for (j, &c) in f.iter().enumerate() {
                    out[i + j] += a * c;
                }
            }
            out
        };
        for &(a, b) in &self.linear {
            acc = mul(&acc, &[b, -a]);
        }
        for &d in &self.quadratic {
            acc = mul(&acc, &[1, 0, -d]);
        }
        acc
    }

    /// Value at integer (x, y).
    pub fn eval(&self, x: &BigInt, y: &BigInt) -> BigInt {
        let deg = self.degree();
        self.coefficients()
            .iter()
            .enumerate()
            .map(|(i, c)| c * num::pow(x.clone(), deg - i) * num::pow(y.clone(), i))
            .sum()
    }

    /// The expanded polynomial, e.g. "x^2 - 2*y^2".
    pub fn expanded(&self) -> String {
        let deg = self.degree();
        let mut terms = Vec::new();
        for (i, c) in self.coefficients().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match (deg - i, i) {
                (0, 0) => String::new(),
                (a, 0) => power("x", a),
                (0, b) => power("y", b),
                (a, b) => format!("{}*{}", power("x", a), power("y", b)),
            };
            terms.push((c.clone(), mono));
        }
        join_terms(&terms)
    }
}

fn power(var: &str, e: usize) -> String {
    if e == 1 {
        var.to_string()
    } else {
        format!("{var}^{e}")
    }
}

/// Render Σ c·m with signs folded in; an empty monomial is the constant term.
pub(crate) fn join_terms(terms: &[(BigInt, String)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (k, (c, m)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        let body = if m.is_empty() {
            a.to_string()
        } else if a == BigInt::from(1) {
            m.clone()
        } else {
            format!("{a}*{m}")
        };
        match (k, neg) {
            (0, false) => s.push_str(&body),
            (0, true) => s.push_str(&format!("-{body}")),
            (_, false) => s.push_str(&format!(" + {body}")),
            (_, true) => s.push_str(&format!(" - {body}")),
        }
    }
    s
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .linear
            .iter()
            .map(|&(a, b)| match (a, b) {
                (0, _) => "x".to_string(),
                (_, 0) => "y".to_string(),
                (a, 1) => format!("(x - {a}*y)"),
                (a, b) => format!("({b}*x - {a}*y)"),
            })
            .collect();
        parts.extend(self.quadratic.iter().map(|d| {
            if *d < 0 {
                format!("(x^2 + {}*y^2)", -d)
            } else {
                format!("(x^2 - {d}*y^2)")
            }
        }));
        write!(f, "{}", parts.join(""))
    }
}

#[derive(Serialize, Deserialize)]
struct FormJson {
    #[serde(default)]
    linear: Vec<[String; 2]>,
    #[serde(default)]
    quadratic: Vec<i64>,
}

impl TryFrom<FormJson> for BinaryForm {
    type Error = Error;

    fn try_from(j: FormJson) -> Result<BinaryForm> {
        let mut roots = Vec::new();
        for [a, b] in j.linear {
            let (a, b) = (rational_from_str(&a)?, rational_from_str(&b)?);
            // Clear denominators: (a:b) = (a·den : b·den).
            let l = a.denom().lcm(b.denom());
            roots.push((a.numer() * (l / a.denom()), b.numer() * (l / b.denom())));
        }
        BinaryForm::new(roots, j.quadratic.into_iter().map(i128::from).collect())
    }
}

impl From<BinaryForm> for FormJson {
    fn from(f: BinaryForm) -> FormJson {
        FormJson {
            linear: f.linear.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect(),
            quadratic: f.quadratic.iter().map(|&d| d as i64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Counterexample,
    Soluble,
    LocallyObstructed { witness: Place },
}

#[derive(Debug, Clone, Serialize)]
pub struct HasseReport {
    pub locally_soluble_everywhere: bool,
    pub certificate: LocalCertificate,
    pub globally_soluble: bool,
    pub rational_root: Option<(i128, i128)>,
    #[serde(flatten)]
    pub verdict: Verdict,
}

/// Decide local and global solubility of f(x, y) = 0 on the projective line.
pub fn analyze_form(f: &BinaryForm) -> Result<HasseReport> {
    let certificate = certify_everywhere_local(&f.algebra())?;
    let rational_root = f.linear.first().copied();
    let globally_soluble = rational_root.is_some();
    let verdict = match (certificate.soluble_everywhere, globally_soluble) {
        (_, true) => Verdict::Soluble,
        (true, false) => Verdict::Counterexample,
        (false, false) => Verdict::LocallyObstructed {
            witness: certificate
                .witness
                .ok_or_else(|| Error::Defect("failure without witness".into()))?,
        },
    };
    Ok(HasseReport {
        locally_soluble_everywhere: certificate.soluble_everywhere,
        certificate,
        globally_soluble,
        rational_root,
        verdict,
    })
}

pub const DEFAULT_C_BOUND: u64 = 1_000_000;

/// Smallest c > 0 with c ≡ 1 mod 8, squarefree, a nonzero square modulo every
/// odd prime dividing a·b, and outside the classes of a, b, a·b.
pub fn search_c(a: i128, b: i128, bound: u64) -> Result<i128> {
    let ab = class_mul(a, b);
    let odd: Vec<u64> = prime_divisors(a * b).into_iter().filter(|&p| p != 2).collect();
    let mut c: i128 = 9;
    while c <= bound as i128 {
        let ok = is_squarefree(c)
            && ![a, b, ab].contains(&c)
            && odd
                .iter()
                .all(|&p| legendre_symbol(c, p as i128).map(|s| s == 1).unwrap_or(false));
        if ok {
            return Ok(c);
        }
        c += 8;
    }
    Err(Error::SearchExhausted { bound })
}

/// The form (x² − a·y²)(x² − b·y²)(x² − ab·y²)(x² − c·y²) with c chosen so
/// that Z^f has points everywhere locally but no rational point.
pub fn construct_form(a: i128, b: i128) -> Result<BinaryForm> {
    construct_form_with_bound(a, b, DEFAULT_C_BOUND)
}

pub fn construct_form_with_bound(a: i128, b: i128, bound: u64) -> Result<BinaryForm> {
    for d in [a, b] {
        if d == 0 || !is_squarefree(d) {
            return Err(Error::InvalidInput(format!("{d} is not squarefree")));
        }
    }
    let ab = class_mul(a, b);
    if a == 1 || b == 1 || ab == 1 {
        return Err(Error::InvalidInput(format!(
            "a = {a}, b = {b}: a, b and ab must all be non-squares"
        )));
    }
    let c = search_c(a, b, bound)?;
    let f = BinaryForm::quadratic_product(&[a, b, ab, c])?;
    let report = analyze_form(&f)?;
    if report.verdict != Verdict::Counterexample {
        return Err(Error::Defect(format!(
            "constructed form {f} is not a counterexample: {:?}",
            report.verdict
        )));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sextic_is_a_counterexample() {
        let f = BinaryForm::quadratic_product(&[2, 17, 34]).unwrap();
        let r = analyze_form(&f).unwrap();
        assert_eq!(r.verdict, Verdict::Counterexample);
        assert!(r.locally_soluble_everywhere && !r.globally_soluble);
        assert_eq!(f.degree(), 6);
        assert_eq!(
            f.expanded(),
            "x^6 - 53*x^4*y^2 + 680*x^2*y^4 - 1156*y^6"
        );
    }

    #[test]
    fn analyze_examples() {
        let f = BinaryForm::quadratic_product(&[2]).unwrap();
        let r = analyze_form(&f).unwrap();
        // 2 is not a 2-adic square; 3 and 5 are inert primes as well.
        assert_eq!(
            r.verdict,
            Verdict::LocallyObstructed {
                witness: Place::Finite(2)
            }
        );
        assert!(r.certificate.generic_obstruction);
        for p in [2, 3, 5] {
            assert!(!f.algebra().has_local_point(Place::Finite(p)).unwrap());
        }
        let g = BinaryForm::new(vec![(1, 1)], vec![2]).unwrap();
        assert_eq!(analyze_form(&g).unwrap().verdict, Verdict::Soluble);
    }

    #[test]
    fn construct_examples() {
        let f = construct_form(2, 5).unwrap();
        assert_eq!(f.quadratic_classes(), &[2, 5, 10, 41]);
        assert_eq!(f.degree(), 8);
        let g = construct_form(3, -1).unwrap();
        let c = g.quadratic_classes()[3];
        assert_eq!(c, 73);
        assert!(c > 0 && c % 8 == 1 && legendre_symbol(c, 3).unwrap() == 1);
        assert!(matches!(construct_form(2, 2), Err(Error::InvalidInput(_))));
        assert!(matches!(construct_form(4, 3), Err(Error::InvalidInput(_))));
        assert!(matches!(
            construct_form_with_bound(2, 5, 20),
            Err(Error::SearchExhausted { bound: 20 })
        ));
    }

    #[test]
    fn separability_is_enforced() {
        assert!(BinaryForm::new(vec![(1, 2), (2, 4)], vec![]).is_err());
        assert!(BinaryForm::quadratic_product(&[2, 2]).is_err());
        assert!(BinaryForm::quadratic_product(&[8]).is_err());
        assert!(BinaryForm::new(vec![], vec![]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f: BinaryForm =
            serde_json::from_str(r#"{"linear":[["1","0"],["1/2","3"]],"quadratic":[2,17,34]}"#).unwrap();
        assert_eq!(f.linear_roots(), &[(1, 0), (1, 6)]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"linear":[["1","0"],["1","6"]],"quadratic":[2,17,34]}"#);
        // Root (1:0) is the factor y; the form vanishes there.
        assert!(f.eval(&BigInt::from(1), &BigInt::from(0)).is_zero());
        assert!(f.eval(&BigInt::from(1), &BigInt::from(6)).is_zero());
    }
}
