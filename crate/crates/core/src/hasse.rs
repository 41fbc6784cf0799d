//! Local, adelic and rational points on conical curves, and the
//! counterexample classification.

use std::collections::{BTreeSet, HashSet};

use num::{BigInt, Integer, Signed, Zero};
use serde::Serialize;
use serde_json::Value;

use crate::arith::{is_local_square_int, next_prime, sqrt_mod_prime_power, Place, Rational};
use crate::brauer::{curve_brauer_quotient, BrauerQuotient, Side, TruncationWindow};
use crate::conic::{conic_point, ConicPoint};
use crate::curve::{validate_curve, ConicLabel, ConicalCurve, Elem, Geometry};
use crate::error::{Error, Result};
use crate::forms::{analyze_form, BinaryForm};
use crate::graph::{curve_action, tree_fixed_vertex, IncidenceGraph};

/// A rational point of the curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointWitness {
    SingularPoint {
        orbit: String,
    },
    /// A point of the component's conic z² = a·x² + b·y² (a split component
    /// is modelled as z² = x² + y²). `candidates` lists more distinct points
    /// than there are branches through the component, so at least one of
    /// them is a smooth point of the curve.
    SmoothOnComponent {
        orbit: String,
        conic: [String; 2],
        point: ConicPoint,
        candidates: Vec<ConicPoint>,
    },
}

fn conic_coefficients(label: &ConicLabel) -> (Rational, Rational) {
    match label {
        ConicLabel::Split => (Rational::from_integer(1), Rational::from_integer(1)),
        ConicLabel::Quaternion(a, b) => (*a, *b),
    }
}

/// At least `count` distinct rational points on z² = a·x² + b·y², obtained by
/// intersecting the conic with lines through a known point.
fn points_on_conic(a: &Rational, b: &Rational, start: &ConicPoint, count: usize) -> Vec<ConicPoint> {
    let l = a.denom().lcm(b.denom());
    let coef = [
        BigInt::from(a.numer() * (l / a.denom())),
        BigInt::from(b.numer() * (l / b.denom())),
        BigInt::from(-l),
    ];
    let form = |v: &[BigInt; 3]| -> BigInt { (0..3).map(|i| &coef[i] * &v[i] * &v[i]).sum() };
    let bilinear = |u: &[BigInt; 3], v: &[BigInt; 3]| -> BigInt { (0..3).map(|i| &coef[i] * &u[i] * &v[i]).sum() };
    let p0 = [start.x.clone(), start.y.clone(), start.z.clone()];
    // Directions e_i + t·e_j run along a line missing p0, so distinct t give
    // distinct lines through p0 and distinct second intersections.
    let k = (0..3).rev().find(|&k| !p0[k].is_zero()).expect("nonzero point");
    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
    let mut out = vec![start.clone()];
    let mut t: i64 = 0;
    while out.len() < count {
        let mut w = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
        w[i] = BigInt::from(1);
        w[j] = BigInt::from(t);
        t += 1;
        let qw = form(&w);
        let bw = bilinear(&p0, &w);
        let v: Vec<BigInt> = (0..3).map(|i| &qw * &p0[i] - BigInt::from(2) * &bw * &w[i]).collect();
        if v.iter().all(|x| x.is_zero()) {
            continue;
        }
        let g = v[0].gcd(&v[1]).gcd(&v[2]);
        let mut p = ConicPoint {
            x: &v[0] / &g,
            y: &v[1] / &g,
            z: &v[2] / &g,
        };
        if p.z.is_negative() || (p.z.is_zero() && (p.x.is_negative() || (p.x.is_zero() && p.y.is_negative()))) {
            p = ConicPoint {
                x: -p.x,
                y: -p.y,
                z: -p.z,
            };
        }
        if p.satisfies(a, b) && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn smooth_witness(c: &ConicalCurve, orbit: usize) -> Option<PointWitness> {
    let comp = &c.components[orbit];
    let (a, b) = conic_coefficients(&comp.conic);
    let point = conic_point(&a, &b)?;
    let branches = c.branches.iter().filter(|br| br.src.orbit == orbit).count();
    let candidates = points_on_conic(&a, &b, &point, branches + 1);
    Some(PointWitness::SmoothOnComponent {
        orbit: comp.id.clone(),
        conic: [crate::arith::rational_to_string(&a), crate::arith::rational_to_string(&b)],
        point,
        candidates,
    })
}

fn local_points(c: &ConicalCurve, geo: &Geometry, v: Place) -> Result<bool> {
    let dv = geo.model.decomposition_group(v)?;
    for o in 0..c.sing_points.len() {
        if geo.point_sub_orbits(&dv, o).iter().any(|s| s.len() == 1) {
            return Ok(true);
        }
    }
    for (o, comp) in c.components.iter().enumerate() {
        if comp.conic.locally_soluble(v) && geo.comp_sub_orbits(&dv, o).iter().any(|s| s.len() == 1) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Whether the curve has a point over Q_v: a singular point of local degree 1,
/// or a component of local degree 1 whose conic has a Q_v-point (it then has
/// infinitely many, so the branch points can be avoided).
pub fn curve_local_points(c: &ConicalCurve, v: Place) -> Result<bool> {
    local_points(c, &Geometry::new(c)?, v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AdelicStatus {
    Certified,
    CertifiedFailure { witness: Place },
    Uncertified { bound: u64 },
}

/// Outcome of running over the acting group: away from the exceptional
/// places a Frobenius element g gives a local point iff it fixes a vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenericCertificate {
    pub group_order: usize,
    pub elements_checked: usize,
    pub fixed_point_free: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdelicCertificate {
    pub checked_places: Vec<(Place, bool)>,
    pub generic_certificate: Option<GenericCertificate>,
    #[serde(flatten)]
    pub status: AdelicStatus,
}

impl AdelicCertificate {
    pub fn certified(&self) -> bool {
        self.status == AdelicStatus::Certified
    }
}

pub const WITNESS_SEARCH_BOUND: u64 = 1_000_000;

pub fn curve_adelic_points(c: &ConicalCurve) -> Result<AdelicCertificate> {
    let report = validate_curve(c);
    if !report.valid {
        return Err(Error::Precondition(format!("invalid curve: {report}")));
    }
    let geo = match Geometry::new(c) {
        Ok(g) => g,
        Err(Error::InsufficientProfile { .. }) | Err(Error::Unsupported(_)) => {
            return Ok(AdelicCertificate {
                checked_places: vec![],
                generic_certificate: None,
                status: AdelicStatus::Uncertified { bound: 0 },
            })
        }
        Err(e) => return Err(e),
    };
    let exceptional = c.bad_places();
    let mut checked = Vec::new();
    for &v in &exceptional {
        checked.push((v, local_points(c, &geo, v)?));
    }
    // Generic places: Frobenius runs over the whole group.
    let elements = geo.model.elements();
    let mut free = 0;
    for g in elements {
        let fixes_point = (0..c.sing_points.len()).any(|o| {
            (0..c.sing_points[o].size).any(|index| {
                let e = Elem { orbit: o, index };
                geo.act_point(g, e) == e
            })
        });
        let fixes_comp = (0..c.components.len()).any(|o| {
            (0..c.components[o].size).any(|index| {
                let e = Elem { orbit: o, index };
                geo.act_comp(g, e) == e
            })
        });
        if !fixes_point && !fixes_comp {
            free += 1;
        }
    }
    let generic = GenericCertificate {
        group_order: elements.len(),
        elements_checked: elements.len(),
        fixed_point_free: free,
    };
    let mut witness = checked.iter().find(|(_, ok)| !ok).map(|(v, _)| *v);
    if free > 0 {
        // Chebotarev: some prime outside the exceptional set has such a
        // Frobenius; find the smallest one.
        let mut p = 2;
        let mut found = None;
        while p <= WITNESS_SEARCH_BOUND {
            let v = Place::Finite(p);
            if witness.is_some_and(|w| w <= v) {
                break;
            }
            if !exceptional.contains(&v) && !local_points(c, &geo, v)? {
                found = Some(v);
                break;
            }
            p = next_prime(p);
        }
        match (witness, found) {
            (_, Some(v)) => witness = Some(witness.map_or(v, |w| w.min(v))),
            (Some(_), None) => {}
            (None, None) => {
                return Ok(AdelicCertificate {
                    checked_places: checked,
                    generic_certificate: Some(generic),
                    status: AdelicStatus::Uncertified {
                        bound: WITNESS_SEARCH_BOUND,
                    },
                })
            }
        }
    }
    let status = match witness {
        Some(w) => AdelicStatus::CertifiedFailure { witness: w },
        None => AdelicStatus::Certified,
    };
    Ok(AdelicCertificate {
        checked_places: checked,
        generic_certificate: Some(generic),
        status,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RationalPoints {
    pub exists: bool,
    pub witness: Option<PointWitness>,
}

/// A rational point lies either at a Galois-fixed singular point or on a
/// Galois-fixed component whose conic has a rational point.
pub fn curve_rational_points(c: &ConicalCurve) -> RationalPoints {
    if let Some(p) = c.sing_points.iter().find(|p| p.size == 1) {
        return RationalPoints {
            exists: true,
            witness: Some(PointWitness::SingularPoint { orbit: p.id.clone() }),
        };
    }
    for (o, comp) in c.components.iter().enumerate() {
        if comp.size == 1 {
            if let Some(w) = smooth_witness(c, o) {
                return RationalPoints {
                    exists: true,
                    witness: Some(w),
                };
            }
        }
    }
    RationalPoints {
        exists: false,
        witness: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeHasse {
    pub hasse_holds: bool,
    pub fixed_vertex: String,
    pub witness: PointWitness,
}

/// For a tree curve with adelic points: the Galois-fixed vertex of X(C) is a
/// rational singular point or a rational component whose conic is soluble.
pub fn verify_tree_hasse(c: &ConicalCurve) -> Result<TreeHasse> {
    let graph = IncidenceGraph::of_curve(c);
    if !graph.invariants().is_tree {
        return Err(Error::Precondition("the incidence graph is not a tree".into()));
    }
    let adelic = curve_adelic_points(c)?;
    if !adelic.certified() {
        return Err(Error::Precondition(format!(
            "adelic points are not certified: {}",
            serde_json::to_string(&adelic.status)?
        )));
    }
    let geo = Geometry::new(c)?;
    let autos: Vec<Vec<usize>> = curve_action(c, &geo).into_iter().map(|a| a.vertices).collect();
    let vertex = tree_fixed_vertex(&graph, &autos)?;
    let name = graph.names[vertex].clone();
    let witness = if vertex >= c.n_comp_elems() {
        let (orbit, _) = locate(vertex - c.n_comp_elems(), c.sing_points.iter().map(|p| p.size));
        if c.sing_points[orbit].size != 1 {
            return Err(Error::Defect(format!("fixed vertex {name} lies in an orbit of size > 1")));
        }
        PointWitness::SingularPoint {
            orbit: c.sing_points[orbit].id.clone(),
        }
    } else {
        let (orbit, _) = locate(vertex, c.components.iter().map(|p| p.size));
        let comp = &c.components[orbit];
        if comp.size != 1 {
            return Err(Error::Defect(format!("fixed vertex {name} lies in an orbit of size > 1")));
        }
        smooth_witness(c, orbit).ok_or_else(|| {
            Error::Defect(format!(
                "the conic of the fixed component {} has no rational point despite adelic points",
                comp.id
            ))
        })?
    };
    Ok(TreeHasse {
        hasse_holds: true,
        fixed_vertex: name,
        witness,
    })
}

fn locate(mut k: usize, sizes: impl Iterator<Item = usize>) -> (usize, usize) {
    for (o, s) in sizes.enumerate() {
        if k < s {
            return (o, k);
        }
        k -= s;
    }
    panic!("vertex index out of range")
}

pub const TRUNCATION_CAVEAT: &str = "Brauer data verified only in truncation: the n-torsion of Br(C) with support in the places S, modulo the image of Br(Q); the full Brauer group is not certified";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "classification", rename_all = "snake_case")]
pub enum Classification {
    HasRationalPoints,
    LocallyObstructed {
        witness: Place,
    },
    #[serde(rename = "BM_obstructed")]
    BmObstructed {
        witness_class: Option<Value>,
    },
    #[serde(rename = "counterexample_with_trivial_truncated_Brauer")]
    CounterexampleWithTrivialTruncatedBrauer {
        caveat: String,
    },
    /// No rational points, adelic points, a nonzero truncated quotient, but
    /// no obstruction from it.
    CounterexampleUnobstructedInTruncation {
        caveat: String,
    },
    Undetermined {
        reason: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub adelic: AdelicCertificate,
    pub rational: RationalPoints,
    pub brauer: Value,
    pub quotient_dimension: usize,
    #[serde(flatten)]
    pub classification: Classification,
}

/// Largest number of pairing values tracked when testing for a
/// Brauer–Manin obstruction.
const PAIRING_STATE_LIMIT: usize = 1 << 16;

/// Sums Σ_v inv_v(r(P_v)) over local points P_v, v ∈ S, for the quotient
/// representatives; None if the state space is too large.
fn reachable_pairings(c: &ConicalCurve, q: &BrauerQuotient) -> Option<HashSet<Vec<u64>>> {
    let n = q.system.window.n;
    let reps = &q.representatives;
    let mut reach: HashSet<Vec<u64>> = [vec![0; reps.len()]].into_iter().collect();
    for &v in &q.system.window.places {
        let options: BTreeSet<Vec<u64>> = q
            .system
            .columns
            .iter()
            .enumerate()
            .filter(|(_, col)| {
                col.place == v
                    && col.degree == 1
                    && (col.side == Side::Point || c.components[col.orbit].conic.locally_soluble(v))
            })
            .map(|(j, _)| reps.iter().map(|r| r[j]).collect())
            .collect();
        let mut next = HashSet::new();
        for s in &reach {
            for o in &options {
                next.insert(s.iter().zip(o).map(|(a, b)| (a + b) % n).collect::<Vec<u64>>());
            }
        }
        if next.len() > PAIRING_STATE_LIMIT {
            return None;
        }
        reach = next;
    }
    Some(reach)
}

/// A single class pairing nontrivially with every adelic point, if any.
fn obstructing_class(n: u64, r: usize, reach: &HashSet<Vec<u64>>) -> Option<Vec<u64>> {
    let total = (n as usize).checked_pow(r as u32).filter(|&t| t <= PAIRING_STATE_LIMIT)?;
    (1..total).find_map(|mut k| {
        let coeffs: Vec<u64> = (0..r)
            .map(|_| {
                let d = (k % n as usize) as u64;
                k /= n as usize;
                d
            })
            .collect();
        let pairs = |s: &Vec<u64>| coeffs.iter().zip(s).map(|(a, b)| a * b).sum::<u64>() % n != 0;
        reach.iter().all(pairs).then_some(coeffs)
    })
}

pub fn counterexample_report(c: &ConicalCurve, w: &TruncationWindow) -> Result<CounterexampleReport> {
    let adelic = curve_adelic_points(c)?;
    let rational = curve_rational_points(c);
    let q = curve_brauer_quotient(c, w)?;
    let caveat = format!(
        "{TRUNCATION_CAVEAT} (n = {}, S = {{{}}})",
        w.n,
        w.places.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
    );
    let classification = if rational.exists {
        Classification::HasRationalPoints
    } else {
        match &adelic.status {
            AdelicStatus::CertifiedFailure { witness } => Classification::LocallyObstructed { witness: *witness },
            AdelicStatus::Uncertified { bound } => Classification::Undetermined {
                reason: format!("adelic points not certified (search bound {bound})"),
            },
            AdelicStatus::Certified if q.quotient_dimension == 0 => {
                Classification::CounterexampleWithTrivialTruncatedBrauer { caveat }
            }
            AdelicStatus::Certified => match reachable_pairings(c, &q) {
                None => Classification::Undetermined {
                    reason: "pairing state space too large".into(),
                },
                Some(reach) if reach.contains(&vec![0; q.representatives.len()]) => {
                    Classification::CounterexampleUnobstructedInTruncation { caveat }
                }
                Some(reach) => {
                    let n = w.n;
                    let witness_class = obstructing_class(n, q.representatives.len(), &reach).map(|coeffs| {
                        let mut class = vec![0u64; q.system.columns.len()];
                        for (k, r) in coeffs.iter().zip(&q.representatives) {
                            for (x, y) in class.iter_mut().zip(r) {
                                *x = (*x + k * y) % n;
                            }
                        }
                        let single = BrauerQuotient {
                            representatives: vec![class],
                            ..q.clone()
                        };
                        single.to_json(c)["representatives"][0].clone()
                    });
                    Classification::BmObstructed { witness_class }
                }
            },
        }
    };
    Ok(CounterexampleReport {
        brauer: q.to_json(c),
        quotient_dimension: q.quotient_dimension,
        adelic,
        rational,
        classification,
    })
}

/// A point of C^f over Q_v on a line of f = 0, with the ratio x/y given
/// exactly, modulo p^k, or as a decimal for the real place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalPoint {
    pub place: Place,
    pub modulus: String,
    pub xy_ratio: String,
}

pub fn sample_adelic_point(f: &BinaryForm, places: &[Place], precision: u32) -> Result<Vec<LocalPoint>> {
    if !analyze_form(f)?.locally_soluble_everywhere {
        return Err(Error::Precondition("the form has no adelic points".into()));
    }
    if precision == 0 {
        return Err(Error::InvalidInput("precision must be positive".into()));
    }
    let mut out = Vec::new();
    for &v in places {
        if let Some(&(a, b)) = f.linear_roots().first() {
            out.push(LocalPoint {
                place: v,
                modulus: "exact".into(),
                xy_ratio: format!("{a}/{b}"),
            });
            continue;
        }
        let d = *f
            .quadratic_classes()
            .iter()
            .find(|&&d| is_local_square_int(d, v))
            .ok_or_else(|| Error::Defect(format!("no factor has a root at {v}")))?;
        let point = match v {
            Place::Real => LocalPoint {
                place: v,
                modulus: "1e-15".into(),
                xy_ratio: format!("{:.15}", (d as f64).sqrt()),
            },
            Place::Finite(p) => {
                let r = sqrt_mod_prime_power(d, p, precision)
                    .ok_or_else(|| Error::InvalidInput(format!("precision {precision} too large at {p}")))?;
                LocalPoint {
                    place: v,
                    modulus: format!("{p}^{precision}"),
                    xy_ratio: r.to_string(),
                }
            }
        };
        out.push(point);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_cf, build_d};
    use crate::fields::FieldSpec;
    use serde_json::json;

    fn e1() -> BinaryForm {
        BinaryForm::quadratic_product(&[2, 17, 34]).unwrap()
    }

    fn curve_d() -> ConicalCurve {
        build_d(&e1(), &FieldSpec::quadratic(5).unwrap(), &FieldSpec::cubic_x3_x_1()).unwrap()
    }

    fn curve(v: Value) -> ConicalCurve {
        ConicalCurve::from_json(&v).unwrap()
    }

    /// Conjugate lines over Q(√2) through two conjugate points.
    fn conjugate_pair() -> ConicalCurve {
        curve(json!({
            "components": [{"orbit": "A", "field": {"type": "quad", "d": 2}}],
            "sing_points": [{"orbit": "P", "field": {"type": "quad", "d": 2}}],
            "branches": [
                {"src": "A.0", "dst": "P.0"}, {"src": "A.0", "dst": "P.1"},
                {"src": "A.1", "dst": "P.0"}, {"src": "A.1", "dst": "P.1"},
            ],
        }))
    }

    fn conic_star() -> ConicalCurve {
        curve(json!({
            "components": [
                {"orbit": "A", "field": {"type": "Q"}, "conic": {"quaternion": ["5", "4"]}},
                {"orbit": "B", "field": {"type": "quad", "d": 2}},
            ],
            "sing_points": [{"orbit": "P", "field": {"type": "quad", "d": 2}}],
            "branches": [
                {"src": "A.0", "dst": "P.0"}, {"src": "A.0", "dst": "P.1"},
                {"src": "B.0", "dst": "P.0"}, {"src": "B.1", "dst": "P.1"},
            ],
        }))
    }

    #[test]
    fn local_points_examples() {
        assert!(curve_local_points(&build_cf(&e1()).unwrap(), Place::Finite(17)).unwrap());
        // 2 is a square mod 7: the K1 verticals are defined over Q_7.
        assert!(curve_local_points(&curve_d(), Place::Finite(7)).unwrap());
        assert!(!curve_local_points(&conjugate_pair(), Place::Finite(5)).unwrap());
        assert!(curve_local_points(&conjugate_pair(), Place::Finite(7)).unwrap());
    }

    #[test]
    fn adelic_examples() {
        assert!(curve_adelic_points(&build_cf(&e1()).unwrap()).unwrap().certified());
        let d = curve_adelic_points(&curve_d()).unwrap();
        assert!(d.certified());
        assert_eq!(d.generic_certificate.as_ref().unwrap().fixed_point_free, 0);
        let pair = curve_adelic_points(&conjugate_pair()).unwrap();
        assert_eq!(
            pair.status,
            AdelicStatus::CertifiedFailure {
                witness: Place::Finite(2)
            }
        );
    }

    #[test]
    fn rational_point_examples() {
        let r = curve_rational_points(&build_cf(&e1()).unwrap());
        assert_eq!(r.witness, Some(PointWitness::SingularPoint { orbit: "P".into() }));
        assert!(!curve_rational_points(&curve_d()).exists);
        let line = curve(json!({"components": [{"orbit": "A", "field": {"type": "Q"}}]}));
        let r = curve_rational_points(&line);
        assert!(matches!(r.witness, Some(PointWitness::SmoothOnComponent { .. })));
    }

    #[test]
    fn conic_points_from_a_point_at_infinity() {
        // z² = 3x² − 3y² through (1:1:0): lines inside z = 0 must not be used.
        let (a, b) = (Rational::from_integer(3), Rational::from_integer(-3));
        let start = conic_point(&a, &b).unwrap();
        let pts = points_on_conic(&a, &b, &start, 4);
        assert_eq!(pts.len(), 4);
        assert!(pts.iter().all(|p| p.satisfies(&a, &b)));
    }

    #[test]
    fn tree_hasse_examples() {
        let t = verify_tree_hasse(&build_cf(&e1()).unwrap()).unwrap();
        assert_eq!(t.witness, PointWitness::SingularPoint { orbit: "P".into() });
        let t = verify_tree_hasse(&conic_star()).unwrap();
        match t.witness {
            PointWitness::SmoothOnComponent { orbit, candidates, .. } => {
                assert_eq!(orbit, "A");
                assert_eq!(candidates.len(), 3);
                let (a, b) = (Rational::from_integer(5), Rational::from_integer(4));
                assert!(candidates.iter().all(|p| p.satisfies(&a, &b)));
            }
            w => panic!("unexpected witness {w:?}"),
        }
        assert!(verify_tree_hasse(&curve_d()).is_err());
    }

    #[test]
    fn classifications() {
        let w = TruncationWindow::up_to(2, 50, &[]);
        let r = counterexample_report(&curve_d(), &w).unwrap();
        assert!(matches!(
            r.classification,
            Classification::CounterexampleWithTrivialTruncatedBrauer { .. }
        ));
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["classification"], "counterexample_with_trivial_truncated_Brauer");
        assert!(v["caveat"].as_str().unwrap().contains("truncation"));
        let r = counterexample_report(&build_cf(&e1()).unwrap(), &w).unwrap();
        assert_eq!(r.classification, Classification::HasRationalPoints);
        let r = counterexample_report(&conjugate_pair(), &w).unwrap();
        assert_eq!(
            r.classification,
            Classification::LocallyObstructed {
                witness: Place::Finite(2)
            }
        );
    }

    #[test]
    fn sampled_points_lie_on_the_lines() {
        let pts = sample_adelic_point(&e1(), &[Place::Finite(17), Place::Real, Place::Finite(2)], 5).unwrap();
        let r: u128 = pts[0].xy_ratio.parse().unwrap();
        assert_eq!(pts[0].modulus, "17^5");
        assert_eq!((r * r) % 17u128.pow(5), 2);
        assert_eq!(r % 17 == 6 || r % 17 == 11, true);
        let x: f64 = pts[1].xy_ratio.parse().unwrap();
        assert!((x * x - 2.0).abs() < 1e-12);
        let r: u128 = pts[2].xy_ratio.parse().unwrap();
        assert_eq!((r * r) % 32, 17);
    }

    /// Two rational conics, (−1,−1) ramified at {real, 2} and (3,5) ramified
    /// at {3, 5}, meeting in a pair of points over Q(√−10), which splits both.
    /// The class with invariants 1/2 at 2 and 5 on the second conic pairs to
    /// 1/2 with every adelic point: local points at 2 lie on it, while at
    /// real, 3 and 5 they lie on the first conic or nowhere else.
    #[test]
    fn brauer_manin_obstruction_detected() {
        let c = curve(json!({
            "components": [
                {"orbit": "A", "field": {"type": "Q"}, "conic": {"quaternion": ["-1", "-1"]}},
                {"orbit": "B", "field": {"type": "Q"}, "conic": {"quaternion": ["3", "5"]}},
            ],
            "sing_points": [{"orbit": "P", "field": {"type": "quad", "d": -10}}],
            "branches": [
                {"src": "A.0", "dst": "P.0"}, {"src": "A.0", "dst": "P.1"},
                {"src": "B.0", "dst": "P.0"}, {"src": "B.0", "dst": "P.1"},
            ],
        }));
        let w = TruncationWindow::up_to(2, 13, &[]);
        let r = counterexample_report(&c, &w).unwrap();
        assert!(r.adelic.certified());
        assert!(!r.rational.exists);
        let Classification::BmObstructed { witness_class: Some(class) } = &r.classification else {
            panic!("expected an obstruction, got {:?}", r.classification);
        };
        let places: Vec<&Value> = class.as_array().unwrap().iter().map(|e| &e["place"]).collect();
        assert_eq!(places, vec![&json!(2), &json!(5)]);
    }
}
