//! Number fields over Q described by their local splitting behaviour, and
//! étale algebras built from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{
    class_mul, is_local_square_int, is_prime, is_squarefree, legendre_symbol, prime_divisors,
    squarefree_part, Place,
};
use crate::error::{Error, Result};
use crate::galois;
use crate::poly;

/// A finite extension of Q.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FieldJson", into = "FieldJson")]
pub enum FieldSpec {
    Rational,
    Quadratic(i128),
    Biquadratic(i128, i128),
    Profiled(Profile),
    /// Tensor product of the listed fields; valid only when that is a field.
    Tensor(Vec<FieldSpec>),
}

/// Local splitting data of a field that is not described by square classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Profile {
    pub name: String,
    pub degree: u32,
    pub table: BTreeMap<Place, Vec<u32>>,
    pub ramified: BTreeSet<Place>,
    /// Monic integer defining polynomial, low degree first; used to classify
    /// unramified primes missing from the table.
    pub poly: Option<Vec<i128>>,
}

impl Profile {
    /// Square class of the discriminant of the defining polynomial.
    pub fn disc_class(&self) -> Option<i128> {
        let p = self.poly.as_ref()?;
        let d = poly::discriminant(p);
        (d != 0).then(|| squarefree_part(d))
    }
}

impl FieldSpec {
    pub fn quadratic(d: i128) -> Result<FieldSpec> {
        if d == 0 {
            return Err(Error::ZeroInput);
        }
        let d = squarefree_part(d);
        if d == 1 {
            return Err(Error::InvalidInput("Q(√d) with d a square is not quadratic".into()));
        }
        Ok(FieldSpec::Quadratic(d))
    }

    pub fn biquadratic(d1: i128, d2: i128) -> Result<FieldSpec> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::ZeroInput);
        }
        let (a, b) = (squarefree_part(d1), squarefree_part(d2));
        if a == 1 || b == 1 || a == b {
            return Err(Error::InvalidInput(format!(
                "biquadratic classes {d1}, {d2} are not independent"
            )));
        }
        Ok(FieldSpec::Biquadratic(a, b))
    }

    /// The profiled cubic field defined by x³ − x − 1 (discriminant −23).
    pub fn cubic_x3_x_1() -> FieldSpec {
        let mut table = BTreeMap::new();
        table.insert(Place::Real, vec![1, 2]);
        table.insert(Place::Finite(23), vec![1, 2]);
        FieldSpec::Profiled(Profile {
            name: "F".into(),
            degree: 3,
            table,
            ramified: [Place::Finite(23)].into_iter().collect(),
            poly: Some(vec![-1, -1, 0, 1]),
        })
    }

    pub fn degree(&self) -> u32 {
        match self {
            FieldSpec::Rational => 1,
            FieldSpec::Quadratic(_) => 2,
            FieldSpec::Biquadratic(..) => 4,
            FieldSpec::Profiled(p) => p.degree,
            FieldSpec::Tensor(fs) => fs.iter().map(|f| f.degree()).product(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            FieldSpec::Rational => "Q".into(),
            FieldSpec::Quadratic(d) => format!("Q(√{d})"),
            FieldSpec::Biquadratic(a, b) => format!("Q(√{a},√{b})"),
            FieldSpec::Profiled(p) => p.name.clone(),
            FieldSpec::Tensor(fs) => fs.iter().map(|f| f.name()).collect::<Vec<_>>().join("⊗"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FieldSpec::Rational => Ok(()),
            FieldSpec::Quadratic(d) => {
                if *d == 1 || !is_squarefree(*d) {
                    return Err(Error::InvalidInput(format!("Q(√{d}): d must be squarefree ≠ 1")));
                }
                Ok(())
            }
            FieldSpec::Biquadratic(a, b) => {
                for d in [*a, *b] {
                    FieldSpec::Quadratic(d).validate()?;
                }
                if a == b {
                    return Err(Error::InvalidInput("biquadratic classes coincide".into()));
                }
                Ok(())
            }
            FieldSpec::Profiled(p) => {
                if p.degree == 0 {
                    return Err(Error::InvalidInput("profiled degree must be positive".into()));
                }
                for (v, m) in &p.table {
                    if m.iter().sum::<u32>() != p.degree || m.contains(&0) {
                        return Err(Error::InvalidInput(format!(
                            "profile of {} at {v} does not sum to {}",
                            p.name, p.degree
                        )));
                    }
                }
                for v in &p.ramified {
                    if !p.table.contains_key(v) {
                        return Err(Error::InvalidInput(format!(
                            "profile of {} omits its ramified place {v}",
                            p.name
                        )));
                    }
                }
                if let Some(f) = &p.poly {
                    if f.len() != p.degree as usize + 1 || f.last() != Some(&1) {
                        return Err(Error::InvalidInput(format!(
                            "defining polynomial of {} must be monic of degree {}",
                            p.name, p.degree
                        )));
                    }
                    if poly::discriminant(f) == 0 {
                        return Err(Error::InvalidInput(format!(
                            "defining polynomial of {} is inseparable",
                            p.name
                        )));
                    }
                }
                Ok(())
            }
            FieldSpec::Tensor(fs) => {
                if fs.is_empty() {
                    return Err(Error::InvalidInput("empty tensor product".into()));
                }
                for f in fs {
                    f.validate()?;
                }
                // A tensor product is a field iff its Galois orbit has full size.
                let deg = galois::tensor_orbit_size(fs)?;
                if deg != self.degree() as usize {
                    return Err(Error::InvalidInput(format!("{} is not a field", self.name())));
                }
                Ok(())
            }
        }
    }

    /// Primes that may ramify (finite places only).
    pub fn ramified_places(&self) -> BTreeSet<Place> {
        let quad = |d: i128| {
            let mut s: BTreeSet<Place> =
                prime_divisors(d).into_iter().map(Place::Finite).collect();
            if d.rem_euclid(4) != 1 {
                s.insert(Place::Finite(2));
            }
            s
        };
        match self {
            FieldSpec::Rational => BTreeSet::new(),
            FieldSpec::Quadratic(d) => quad(*d),
            FieldSpec::Biquadratic(a, b) => {
                let mut s = quad(*a);
                s.extend(quad(*b));
                s
            }
            FieldSpec::Profiled(p) => p.ramified.clone(),
            FieldSpec::Tensor(fs) => fs.iter().flat_map(|f| f.ramified_places()).collect(),
        }
    }

    /// Generators of the square classes whose roots generate the field, when
    /// the field is multiquadratic.
    pub fn quadratic_generators(&self) -> Option<Vec<i128>> {
        match self {
            FieldSpec::Rational => Some(vec![]),
            FieldSpec::Quadratic(d) => Some(vec![*d]),
            FieldSpec::Biquadratic(a, b) => Some(vec![*a, *b]),
            FieldSpec::Profiled(_) => None,
            FieldSpec::Tensor(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    out.extend(f.quadratic_generators()?);
                }
                Some(out)
            }
        }
    }

    pub fn is_multiquadratic(&self) -> bool {
        self.quadratic_generators().is_some()
    }

    /// Local degrees [K_w : Q_v] over the places w | v, ascending.
    pub fn local_degrees(&self, v: Place) -> Result<Vec<u32>> {
        let mut out = match self {
            FieldSpec::Rational => vec![1],
            FieldSpec::Quadratic(d) => {
                if is_local_square_int(*d, v) {
                    vec![1, 1]
                } else {
                    vec![2]
                }
            }
            FieldSpec::Biquadratic(a, b) => {
                let squares = [*a, *b, class_mul(*a, *b)]
                    .iter()
                    .filter(|&&d| is_local_square_int(d, v))
                    .count()
                    + 1;
                let e = (4 / squares) as u32;
                vec![e; squares]
            }
            FieldSpec::Profiled(p) => profiled_local_degrees(p, v)?,
            FieldSpec::Tensor(fs) => galois::tensor_local_degrees(fs, v)?,
        };
        out.sort_unstable();
        Ok(out)
    }
}

fn profiled_local_degrees(p: &Profile, v: Place) -> Result<Vec<u32>> {
    if let Some(m) = p.table.get(&v) {
        return Ok(m.clone());
    }
    let insufficient = || Error::InsufficientProfile {
        field: p.name.clone(),
        place: v,
    };
    if p.ramified.contains(&v) {
        return Err(insufficient());
    }
    let f = p.poly.as_ref().ok_or_else(insufficient)?;
    match v {
        Place::Real => {
            // Only cubics are classified at the real place without a table.
            if f.len() != 4 {
                return Err(insufficient());
            }
            Ok(if poly::discriminant(f) < 0 { vec![1, 2] } else { vec![1, 1, 1] })
        }
        Place::Finite(q) => {
            let disc = poly::discriminant(f);
            if disc % q as i128 == 0 {
                return Err(insufficient());
            }
            Ok(poly::factor_degrees_mod_p(f, q))
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type")]
enum FieldJson {
    #[serde(rename = "Q")]
    Q,
    #[serde(rename = "quad")]
    Quad { d: i64 },
    #[serde(rename = "biquad")]
    Biquad { d1: i64, d2: i64 },
    #[serde(rename = "profiled")]
    Profiled {
        name: String,
        degree: u32,
        profile: BTreeMap<String, Vec<u32>>,
        #[serde(default)]
        ramified: Vec<Place>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        poly: Option<Vec<i64>>,
    },
    #[serde(rename = "tensor")]
    Tensor { factors: Vec<FieldSpec> },
}

impl TryFrom<FieldJson> for FieldSpec {
    type Error = Error;

    fn try_from(j: FieldJson) -> Result<FieldSpec> {
        let f = match j {
            FieldJson::Q => FieldSpec::Rational,
            FieldJson::Quad { d } => FieldSpec::quadratic(d as i128)?,
            FieldJson::Biquad { d1, d2 } => FieldSpec::biquadratic(d1 as i128, d2 as i128)?,
            FieldJson::Profiled {
                name,
                degree,
                profile,
                ramified,
                poly,
            } => {
                let mut table = BTreeMap::new();
                for (k, mut m) in profile {
                    m.sort_unstable();
                    table.insert(k.parse::<Place>()?, m);
                }
                FieldSpec::Profiled(Profile {
                    name,
                    degree,
                    table,
                    ramified: ramified.into_iter().collect(),
                    poly: poly.map(|c| c.into_iter().map(i128::from).collect()),
                })
            }
            FieldJson::Tensor { factors } => FieldSpec::Tensor(factors),
        };
        f.validate()?;
        Ok(f)
    }
}

impl From<FieldSpec> for FieldJson {
    fn from(f: FieldSpec) -> FieldJson {
        match f {
            FieldSpec::Rational => FieldJson::Q,
            FieldSpec::Quadratic(d) => FieldJson::Quad { d: d as i64 },
            FieldSpec::Biquadratic(d1, d2) => FieldJson::Biquad {
                d1: d1 as i64,
                d2: d2 as i64,
            },
            FieldSpec::Profiled(p) => FieldJson::Profiled {
                name: p.name,
                degree: p.degree,
                profile: p.table.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
                ramified: p.ramified.into_iter().collect(),
                poly: p.poly.map(|c| c.into_iter().map(|x| x as i64).collect()),
            },
            FieldSpec::Tensor(factors) => FieldJson::Tensor { factors },
        }
    }
}

/// A finite product of number fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaleAlgebra {
    pub factors: Vec<FieldSpec>,
}

impl EtaleAlgebra {
    pub fn new(factors: Vec<FieldSpec>) -> Result<EtaleAlgebra> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("an étale algebra needs a factor".into()));
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(EtaleAlgebra { factors })
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|f| f.degree()).sum()
    }

    pub fn has_local_point(&self, v: Place) -> Result<bool> {
        for f in &self.factors {
            if f.local_degrees(v)?.contains(&1) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Outcome of [`certify_everywhere_local`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalCertificate {
    pub soluble_everywhere: bool,
    pub witness: Option<Place>,
    /// Places checked directly: real, 2 and the primes dividing some class.
    pub checked_places: Vec<(Place, bool)>,
    /// Whether some F₂-functional on the span of the classes is 1 on every
    /// class; by Chebotarev such a functional is the Frobenius of infinitely
    /// many primes, each without a local point.
    pub generic_obstruction: bool,
}

/// Square classes as F₂-vectors over the coordinates (sign, primes).
#[derive(Debug, Clone)]
pub struct ClassCoords {
    primes: Vec<u64>,
}

impl ClassCoords {
    pub fn new(classes: &[i128]) -> ClassCoords {
        let primes: BTreeSet<u64> = classes.iter().flat_map(|&d| prime_divisors(d)).collect();
        assert!(primes.len() < 127, "too many primes for a bitmask");
        ClassCoords {
            primes: primes.into_iter().collect(),
        }
    }

    pub fn vector(&self, d: i128) -> u128 {
        let mut v: u128 = (d < 0) as u128;
        for p in prime_divisors(d) {
            let i = self
                .primes
                .binary_search(&p)
                .expect("class outside coordinate system");
            v |= 1 << (i + 1);
        }
        v
    }
}

/// Solve Σ_j x_j·rows[i]_j = rhs_i over F₂ (rows as bitmasks over `ncols`).
pub(crate) fn solve_f2(rows: &[u128], rhs: &[bool], ncols: usize) -> Option<u128> {
    let mut m: Vec<(u128, bool)> = rows.iter().copied().zip(rhs.iter().copied()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(k) = (r..m.len()).find(|&i| m[i].0 >> c & 1 == 1) else {
            continue;
        };
        m.swap(r, k);
        for i in 0..m.len() {
            if i != r && m[i].0 >> c & 1 == 1 {
                m[i].0 ^= m[r].0;
                m[i].1 ^= m[r].1;
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|&(row, b)| row == 0 && b) {
        return None;
    }
    let mut x = 0u128;
    for (i, &c) in pivots.iter().enumerate() {
        if m[i].1 {
            x |= 1 << c;
        }
    }
    Some(x)
}

const WITNESS_SEARCH_BOUND: u64 = 10_000_000;

/// Decide whether an algebra of rational and quadratic fields has a point
/// over every completion of Q.
pub fn certify_everywhere_local(a: &EtaleAlgebra) -> Result<LocalCertificate> {
    let mut classes = Vec::new();
    for f in &a.factors {
        match f {
            FieldSpec::Rational => {
                return Ok(LocalCertificate {
                    soluble_everywhere: true,
                    witness: None,
                    checked_places: vec![],
                    generic_obstruction: false,
                })
            }
            FieldSpec::Quadratic(d) => classes.push(*d),
            other => {
                return Err(Error::Unsupported(format!(
                    "certification needs rational or quadratic factors, got {other}"
                )))
            }
        }
    }
    let mut exceptional: BTreeSet<Place> = [Place::Real, Place::Finite(2)].into_iter().collect();
    for &d in &classes {
        exceptional.extend(prime_divisors(d).into_iter().map(Place::Finite));
    }
    let mut checked = Vec::new();
    for &v in &exceptional {
        checked.push((v, a.has_local_point(v)?));
    }

    // Functional w with w·d_i = 1 for all i; the rows are the class vectors.
    let coords = ClassCoords::new(&classes);
    let rows: Vec<u128> = classes.iter().map(|&d| coords.vector(d)).collect();
    let ncols = coords.primes.len() + 1;
    // Transpose: unknowns are the coordinates of w, one equation per class.
    let generic = solve_f2(&rows, &vec![true; rows.len()], ncols).is_some();

    let mut witness = checked.iter().find(|(_, ok)| !ok).map(|(v, _)| *v);
    if generic {
        let bad_prime = (3..WITNESS_SEARCH_BOUND)
            .step_by(2)
            .filter(|&p| is_prime(p) && !exceptional.contains(&Place::Finite(p)))
            .find(|&p| {
                classes
                    .iter()
                    .all(|&d| legendre_symbol(d, p as i128).expect("odd prime") == -1)
            })
            .ok_or(Error::SearchExhausted {
                bound: WITNESS_SEARCH_BOUND,
            })?;
        let w = Place::Finite(bad_prime);
        witness = Some(witness.map_or(w, |x| x.min(w)));
    }
    Ok(LocalCertificate {
        soluble_everywhere: witness.is_none(),
        witness,
        checked_places: checked,
        generic_obstruction: generic,
    })
}

/// Whether K ⊗_Q L is a field.
pub fn tensor_is_field(k: &FieldSpec, l: &FieldSpec) -> Result<bool> {
    if matches!(k, FieldSpec::Rational) || matches!(l, FieldSpec::Rational) {
        return Ok(true);
    }
    if let (Some(a), Some(b)) = (k.quadratic_generators(), l.quadratic_generators()) {
        // Multiquadratic fields: a field iff the class spans meet trivially.
        let all: Vec<i128> = a.iter().chain(b.iter()).copied().collect();
        return Ok(galois::f2_rank(&all) == galois::f2_rank(&a) + galois::f2_rank(&b));
    }
    let (dk, dl) = (k.degree(), l.degree());
    if num::integer::gcd(dk, dl) == 1 {
        return Ok(true);
    }
    Err(Error::Unsupported(format!(
        "cannot decide whether {k} ⊗ {l} is a field"
    )))
}

/// Legendre symbol helper used by tests of the quadratic splitting law.
pub fn quadratic_inert_odd_primes(d: i128, bound: u64) -> Vec<u64> {
    crate::arith::primes_up_to(bound)
        .into_iter()
        .filter(|&p| p > 2 && d % p as i128 != 0)
        .filter(|&p| legendre_symbol(d, p as i128).unwrap() == -1)
        .collect()
}
