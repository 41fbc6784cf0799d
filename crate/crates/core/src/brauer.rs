//! Brauer classes as local invariants, and truncated Brauer groups of
//! conical curves.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{factor, hilbert_invariant, quaternion_ramification, Place, Qqz};
use crate::curve::{validate_curve, ConicLabel, ConicalCurve, Elem, Geometry};
use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::galois::GroupElem;
use crate::modlin::{echelon_insert, kernel, quotient_invariants, reduce_mod_span, subgroup_log_order, PrimePower};

/// A Brauer class of a number field given by its nonzero local invariants,
/// keyed by (place of Q, index into the field's local degrees there).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BrauerClass {
    pub field: FieldSpec,
    #[serde(serialize_with = "ser_invariants")]
    pub invariants: BTreeMap<(Place, usize), Qqz>,
}

fn ser_invariants<S: serde::Serializer>(
    m: &BTreeMap<(Place, usize), Qqz>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<Value> = m
        .iter()
        .map(|((p, i), q)| json!({"place": p, "branch": i, "inv": q}))
        .collect();
    v.serialize(s)
}

impl BrauerClass {
    pub fn zero(field: FieldSpec) -> BrauerClass {
        BrauerClass {
            field,
            invariants: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.invariants.values().all(|q| q.is_zero())
    }

    pub fn get(&self, v: Place, branch: usize) -> Qqz {
        self.invariants.get(&(v, branch)).copied().unwrap_or(Qqz::ZERO)
    }

    /// Set an invariant; zero values are dropped.
    pub fn set(&mut self, v: Place, branch: usize, q: Qqz) {
        if q.is_zero() {
            self.invariants.remove(&(v, branch));
        } else {
            self.invariants.insert((v, branch), q);
        }
    }

    pub fn add(&self, other: &BrauerClass) -> Result<BrauerClass> {
        if self.field != other.field {
            return Err(Error::InvalidInput("adding classes over different fields".into()));
        }
        let mut out = self.clone();
        for (&(v, i), &q) in &other.invariants {
            out.set(v, i, self.get(v, i) + q);
        }
        Ok(out)
    }
}

/// Class of the conic over Q.
pub fn conic_class(c: &ConicLabel) -> BrauerClass {
    let mut out = BrauerClass::zero(FieldSpec::Rational);
    if let ConicLabel::Quaternion(a, b) = c {
        for v in quaternion_ramification(a, b).expect("nonzero coefficients") {
            out.set(v, 0, hilbert_invariant(a, b, v).expect("nonzero"));
        }
    }
    out
}

/// Restriction from Q to K: the invariant at a place of K of local degree e
/// over v is e·inv_v.
pub fn restrict_class(x: &BrauerClass, k: &FieldSpec) -> Result<BrauerClass> {
    if x.field != FieldSpec::Rational {
        return Err(Error::InvalidInput("restriction starts from a class over Q".into()));
    }
    let mut out = BrauerClass::zero(k.clone());
    for (&(v, _), &q) in &x.invariants {
        for (i, &e) in k.local_degrees(v)?.iter().enumerate() {
            out.set(v, i, q.mul_int(e as i128));
        }
    }
    Ok(out)
}

/// Sum of all local invariants; zero exactly for global classes.
pub fn reciprocity_check(x: &BrauerClass) -> Qqz {
    x.invariants.values().copied().sum()
}

/// Torsion bound n and place set S of a truncated computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationWindow {
    pub n: u64,
    #[serde(rename = "S")]
    pub places: BTreeSet<Place>,
}

impl TruncationWindow {
    /// The real place and all primes up to `max_prime`, plus `extra`.
    pub fn up_to(n: u64, max_prime: u64, extra: &[Place]) -> TruncationWindow {
        let mut places: BTreeSet<Place> = crate::arith::primes_up_to(max_prime)
            .into_iter()
            .map(Place::Finite)
            .collect();
        places.insert(Place::Real);
        places.insert(Place::Finite(2));
        places.extend(extra.iter().copied());
        TruncationWindow { n, places }
    }

    /// Reject windows missing a place where some label ramifies or some conic
    /// is not locally soluble.
    pub fn check_covers(&self, c: &ConicalCurve) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("torsion bound must be positive".into()));
        }
        let missing: Vec<String> = c
            .bad_places()
            .into_iter()
            .filter(|v| !self.places.contains(v))
            .map(|v| v.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Precondition(format!(
                "window is missing required places {}",
                missing.join(", ")
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Component,
    Point,
}

/// Which presentation of Br(C) to assemble: the full sequence with Br(Π)
/// entering negatively, or (bipartite curves only) the form with the Br(Π)
/// coordinates eliminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    General,
    Eliminated,
}

/// One coordinate: the local invariant, in units of 1/n, at a non-complex
/// place of an orbit's field over a place of S.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub place: Place,
    pub side: Side,
    pub orbit: usize,
    /// Index among the decomposition-group orbits on the orbit's elements.
    pub local: usize,
    pub degree: usize,
    pub members: Vec<usize>,
}

/// The truncated linear system: integer relations on the columns, and
/// generators (mod n) of the subgroup to divide out.
#[derive(Debug, Clone)]
pub struct BrauerSystem {
    pub window: TruncationWindow,
    pub formulation: Formulation,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<i64>>,
    pub diagonal: Vec<Vec<u64>>,
}

impl BrauerSystem {
    pub fn satisfies(&self, x: &[u64]) -> bool {
        let n = self.window.n as i128;
        self.rows.iter().all(|row| {
            row.iter()
                .zip(x)
                .map(|(&a, &b)| a as i128 * b as i128)
                .sum::<i128>()
                .rem_euclid(n)
                == 0
        })
    }
}

fn is_complex(v: Place, size: usize) -> bool {
    v.is_real() && size == 2
}

type ColumnKey = (Side, usize, Place);

struct Layout {
    columns: Vec<Column>,
    /// (side, orbit, place) → per element, its column (None if complex).
    lookup: BTreeMap<ColumnKey, Vec<Option<usize>>>,
    /// gcd of all local degrees at each place, complex places included.
    gcd_degree: BTreeMap<Place, usize>,
}

fn gcd(a: usize, b: usize) -> usize {
    num::integer::gcd(a, b)
}

fn layout(c: &ConicalCurve, geo: &Geometry, w: &TruncationWindow, with_points: bool) -> Result<Layout> {
    let mut columns = Vec::new();
    let mut lookup = BTreeMap::new();
    let mut gcd_degree = BTreeMap::new();
    for &v in &w.places {
        let dv = geo.model.decomposition_group(v)?;
        let mut g = 0;
        let sides = [(Side::Component, c.components.len()), (Side::Point, c.sing_points.len())];
        for (side, count) in sides {
            for o in 0..count {
                let (subs, size) = match side {
                    Side::Component => (geo.comp_sub_orbits(&dv, o), geo.comp_orbit_size(o)),
                    Side::Point => (geo.point_sub_orbits(&dv, o), geo.point_orbit_size(o)),
                };
                let mut at = vec![None; size];
                for (local, members) in subs.into_iter().enumerate() {
                    g = gcd(g, members.len());
                    if is_complex(v, members.len()) || (side == Side::Point && !with_points) {
                        continue;
                    }
                    for &m in &members {
                        at[m] = Some(columns.len());
                    }
                    columns.push(Column {
                        place: v,
                        side,
                        orbit: o,
                        local,
                        degree: members.len(),
                        members,
                    });
                }
                lookup.insert((side, o, v), at);
            }
        }
        gcd_degree.insert(v, g.max(1));
    }
    Ok(Layout {
        columns,
        lookup,
        gcd_degree,
    })
}

/// Sign of each component orbit in a bipartition where every singular point
/// has one branch on each side.
fn bipartition(c: &ConicalCurve) -> Result<Vec<i64>> {
    let mut incident: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for b in &c.branches {
        incident.entry((b.dst.orbit, b.dst.index)).or_default().push(b.src.orbit);
    }
    let mut adj = vec![Vec::new(); c.components.len()];
    for (p, srcs) in &incident {
        if srcs.len() != 2 {
            return Err(Error::Precondition(format!(
                "not bipartite: {} has {} branches",
                c.point_name(Elem { orbit: p.0, index: p.1 }),
                srcs.len()
            )));
        }
        adj[srcs[0]].push(srcs[1]);
        adj[srcs[1]].push(srcs[0]);
    }
    let mut sign = vec![0i64; c.components.len()];
    for start in 0..sign.len() {
        if sign[start] != 0 {
            continue;
        }
        sign[start] = 1;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(o) = queue.pop_front() {
            for &t in &adj[o] {
                if sign[t] == 0 {
                    sign[t] = -sign[o];
                    queue.push_back(t);
                } else if sign[t] == sign[o] {
                    return Err(Error::Precondition(format!(
                        "not bipartite: orbits {} and {} cannot lie on opposite sides",
                        c.components[o].id, c.components[t].id
                    )));
                }
            }
        }
    }
    Ok(sign)
}



fn cyclic_group(g: &GroupElem) -> Vec<GroupElem> {
    let mut out = vec![GroupElem::identity()];
    let mut x = *g;
    while x != GroupElem::identity() {
        out.push(x);
        x = x.compose(g);
    }
    out
}

/// Order of the largest invariant a place outside S can carry while
/// restricting to zero on every orbit: over all Frobenius candidates g, the
/// gcd of the ⟨g⟩-orbit sizes, combined by lcm.
fn sink_order(c: &ConicalCurve, geo: &Geometry) -> u64 {
    let mut m: u64 = 1;
    for g in geo.model.elements() {
        let h = cyclic_group(g);
        let mut d = 0;
        for o in 0..c.components.len() {
            for s in geo.comp_sub_orbits(&h, o) {
                d = gcd(d, s.len());
            }
        }
        for o in 0..c.sing_points.len() {
            for s in geo.point_sub_orbits(&h, o) {
                d = gcd(d, s.len());
            }
        }
        m = num::integer::lcm(m, d.max(1) as u64);
    }
    m
}

/// Integer kernel of a single row, via gcd column reduction.
fn row_kernel(row: &[i128]) -> Vec<Vec<i128>> {
    let r = row.len();
    let mut c = row.to_vec();
    let mut u: Vec<Vec<i128>> = (0..r).map(|i| (0..r).map(|j| (i == j) as i128).collect()).collect();
    loop {
        let Some(j0) = (0..r).filter(|&j| c[j] != 0).min_by_key(|&j| c[j].abs()) else {
            break;
        };
        let mut changed = false;
        for i in 0..r {
            if i == j0 || c[i] == 0 {
                continue;
            }
            let q = c[i].div_euclid(c[j0]);
            c[i] -= q * c[j0];
            for row in u.iter_mut() {
                row[i] -= q * row[j0];
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }
    (0..r)
        .filter(|&j| c[j] == 0)
        .map(|j| (0..r).map(|i| u[i][j]).collect())
        .collect()
}

/// Generators (mod n, on the columns) of the restrictions of the classes of
/// Br(Q) whose restriction is n-torsion and supported in S, together with
/// the conic classes when n is even.
fn diagonal_generators(c: &ConicalCurve, geo: &Geometry, w: &TruncationWindow, lay: &Layout) -> Vec<Vec<u64>> {
    let n = w.n;
    let places: Vec<Place> = w.places.iter().copied().collect();
    // Invariant at v has order dividing m_v.
    let m: Vec<u64> = places
        .iter()
        .map(|v| {
            let g = lay.gcd_degree[v] as u64;
            if v.is_real() {
                num::integer::gcd(2, n * g)
            } else {
                n * g
            }
        })
        .collect();
    let sink = sink_order(c, geo);
    let big_n = m.iter().fold(sink, |acc, &x| num::integer::lcm(acc, x));
    let mut row: Vec<i128> = m.iter().map(|&x| (big_n / x) as i128).collect();
    row.push((big_n / sink) as i128);
    row.push(big_n as i128);
    let mut out = Vec::new();
    for a in row_kernel(&row) {
        let mut vec = vec![0u64; lay.columns.len()];
        for (j, col) in lay.columns.iter().enumerate() {
            let i = places.binary_search(&col.place).expect("column place in window");
            let scale = (col.degree as u64 * n / m[i]) as i128;
            vec[j] = (a[i] * scale).rem_euclid(n as i128) as u64;
        }
        if vec.iter().any(|&x| x != 0) {
            out.push(vec);
        }
    }
    if n % 2 == 0 {
        for (o, comp) in c.components.iter().enumerate() {
            let ram = comp.conic.ramified_places();
            let mut vec = vec![0u64; lay.columns.len()];
            for (j, col) in lay.columns.iter().enumerate() {
                if col.side == Side::Component && col.orbit == o && ram.contains(&col.place) {
                    vec[j] = (col.degree as u64 * (n / 2)) % n;
                }
            }
            if vec.iter().any(|&x| x != 0) {
                out.push(vec);
            }
        }
    }
    out
}

/// Assemble the truncated system for Br(C) in the window.
pub fn assemble(c: &ConicalCurve, w: &TruncationWindow, formulation: Formulation) -> Result<BrauerSystem> {
    let report = validate_curve(c);
    if !report.valid {
        return Err(Error::Precondition(format!("invalid curve: {report}")));
    }
    w.check_covers(c)?;
    let geo = Geometry::new(c)?;
    let lay = layout(c, &geo, w, formulation == Formulation::General)?;
    let ncols = lay.columns.len();
    let col_of = |side: Side, e: Elem, v: Place| -> usize {
        lay.lookup[&(side, e.orbit, v)][e.index].expect("a real branch lies over real places")
    };
    let mut dvs = BTreeMap::new();
    for &v in &w.places {
        dvs.insert(v, geo.model.decomposition_group(v)?);
    }
    let mut rows = Vec::new();
    match formulation {
        Formulation::General => {
            for orbit in geo.branch_orbits(c) {
                for &v in &w.places {
                    for u in geo.branch_sub_orbits(c, &dvs[&v], &orbit) {
                        if is_complex(v, u.len()) {
                            continue;
                        }
                        let b = c.branches[u[0]];
                        let mut row = vec![0i64; ncols];
                        let j = col_of(Side::Component, b.src, v);
                        row[j] += (u.len() / lay.columns[j].degree) as i64;
                        let j = col_of(Side::Point, b.dst, v);
                        row[j] -= (u.len() / lay.columns[j].degree) as i64;
                        rows.push(row);
                    }
                }
            }
        }
        Formulation::Eliminated => {
            let sign = bipartition(c)?;
            let mut at_point: BTreeMap<(usize, usize), Vec<Elem>> = BTreeMap::new();
            for b in &c.branches {
                at_point.entry((b.dst.orbit, b.dst.index)).or_default().push(b.src);
            }
            for po in 0..c.sing_points.len() {
                for &v in &w.places {
                    for u in geo.point_sub_orbits(&dvs[&v], po) {
                        if is_complex(v, u.len()) {
                            continue;
                        }
                        let mut row = vec![0i64; ncols];
                        for &src in &at_point[&(po, u[0])] {
                            let j = col_of(Side::Component, src, v);
                            row[j] += sign[src.orbit] * (u.len() / lay.columns[j].degree) as i64;
                        }
                        rows.push(row);
                    }
                }
            }
        }
    }
    // Real invariants lie in {0, 1/2}.
    for (j, col) in lay.columns.iter().enumerate() {
        if col.place.is_real() {
            let mut row = vec![0i64; ncols];
            row[j] = 2;
            rows.push(row);
        }
    }
    // Global classes: invariants of each orbit's field sum to zero.
    let mut sums: BTreeMap<(Side, usize), Vec<i64>> = BTreeMap::new();
    for (j, col) in lay.columns.iter().enumerate() {
        sums.entry((col.side, col.orbit)).or_insert_with(|| vec![0; ncols])[j] = 1;
    }
    rows.extend(sums.into_values());
    let diagonal = diagonal_generators(c, &geo, w, &lay);
    let sys = BrauerSystem {
        window: w.clone(),
        formulation,
        columns: lay.columns,
        rows,
        diagonal,
    };
    if let Some(bad) = sys.diagonal.iter().find(|x| !sys.satisfies(x)) {
        return Err(Error::Defect(format!("diagonal class outside the kernel: {bad:?}")));
    }
    Ok(sys)
}

/// The truncated Br(C) modulo the image of Br(Q) (and the conic classes).
#[derive(Debug, Clone)]
pub struct BrauerQuotient {
    pub system: BrauerSystem,
    /// Minimal number of generators.
    pub quotient_dimension: usize,
    /// Cyclic orders, each dividing the previous.
    pub invariants: Vec<u64>,
    /// Kernel vectors over Z/n generating the quotient.
    pub representatives: Vec<Vec<u64>>,
}

fn crt_lift(x: &[u64], pk: u64, n: u64) -> Vec<u64> {
    // e ≡ 1 mod p^k, e ≡ 0 mod n/p^k.
    let rest = n / pk;
    let inv = crate::arith::inv_mod((rest % pk) as i128, pk as i128).unwrap_or(0) as u128;
    let e = (rest as u128 * inv) % n as u128;
    x.iter().map(|&a| ((a as u128 * e) % n as u128) as u64).collect()
}

pub fn quotient_of(system: BrauerSystem) -> BrauerQuotient {
    let n = system.window.n;
    let cols = system.columns.len();
    let mut per_prime: Vec<(u64, Vec<u32>, Vec<Vec<u64>>)> = Vec::new();
    for (p, k) in factor(n as i128) {
        let r = PrimePower::new(p, k);
        let a: Vec<Vec<u64>> = system
            .rows
            .iter()
            .map(|row| row.iter().map(|&x| r.reduce(x)).collect())
            .collect();
        let ker = kernel(&r, &a, cols);
        let diag: Vec<Vec<u64>> = system
            .diagonal
            .iter()
            .map(|g| g.iter().map(|&x| x % r.m).collect())
            .collect();
        let exps = quotient_invariants(&r, &ker, &diag, cols);
        let reps = if k == 1 {
            let mut basis = Vec::new();
            for g in &diag {
                echelon_insert(p, &mut basis, g);
            }
            let mut reps = Vec::new();
            for g in &ker {
                let red = reduce_mod_span(p, &basis, g);
                if echelon_insert(p, &mut basis, &red) {
                    reps.push(red);
                }
            }
            reps
        } else {
            let mut current = diag.clone();
            let mut order = subgroup_log_order(&r, &current, cols);
            let mut reps = Vec::new();
            for g in &ker {
                current.push(g.clone());
                let next = subgroup_log_order(&r, &current, cols);
                if next > order {
                    order = next;
                    reps.push(g.clone());
                } else {
                    current.pop();
                }
            }
            reps
        };
        let lifted = reps.iter().map(|x| crt_lift(x, r.m, n)).collect();
        per_prime.push((p, exps, lifted));
    }
    let dim = per_prime.iter().map(|(_, e, _)| e.len()).max().unwrap_or(0);
    let invariants = (0..dim)
        .map(|j| {
            per_prime
                .iter()
                .map(|(p, e, _)| e.get(j).map_or(1, |&x| p.pow(x)))
                .product()
        })
        .collect();
    // Combine the j-th representative of every prime.
    let count = per_prime.iter().map(|(_, _, r)| r.len()).max().unwrap_or(0);
    let representatives = (0..count)
        .map(|j| {
            let mut v = vec![0u64; cols];
            for (_, _, reps) in &per_prime {
                if let Some(x) = reps.get(j) {
                    for (a, b) in v.iter_mut().zip(x) {
                        *a = (*a + b) % n;
                    }
                }
            }
            v
        })
        .collect();
    BrauerQuotient {
        system,
        quotient_dimension: dim,
        invariants,
        representatives,
    }
}

/// Br(C)[n] with support in S, modulo the image of Br(Q).
pub fn curve_brauer_quotient(c: &ConicalCurve, w: &TruncationWindow) -> Result<BrauerQuotient> {
    Ok(quotient_of(assemble(c, w, Formulation::General)?))
}

impl BrauerQuotient {
    pub fn to_json(&self, c: &ConicalCurve) -> Value {
        let n = self.system.window.n;
        let reps: Vec<Value> = self
            .representatives
            .iter()
            .map(|x| {
                let entries: Vec<Value> = x
                    .iter()
                    .zip(&self.system.columns)
                    .filter(|(&a, _)| a != 0)
                    .map(|(&a, col)| {
                        let id = match col.side {
                            Side::Component => &c.components[col.orbit].id,
                            Side::Point => &c.sing_points[col.orbit].id,
                        };
                        json!({
                            "orbit": id,
                            "place": col.place,
                            "branch": col.local,
                            "degree": col.degree,
                            "inv": Qqz::from_residue(a, n),
                        })
                    })
                    .collect();
                Value::Array(entries)
            })
            .collect();
        json!({
            "window": {"n": n, "S": self.system.window.places},
            "quotient_dimension": self.quotient_dimension,
            "invariants": self.invariants,
            "representatives": reps,
        })
    }
}
