//! The combinatorial model of a conical curve: Galois orbits of geometric
//! components, singular points and branches, with field and conic labels.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{hilbert_invariant, quaternion_ramification, rational_from_str, rational_to_string, Place, Rational};
use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::galois::{Atom, GaloisModel, GroupElem};

/// The conic underlying a component orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConicLabel {
    /// A projective line.
    Split,
    /// z² = a·x² + b·y² over Q, base-changed to the component field.
    Quaternion(Rational, Rational),
}

impl ConicLabel {
    pub fn quaternion(a: Rational, b: Rational) -> Result<ConicLabel> {
        if a == Rational::from_integer(0) || b == Rational::from_integer(0) {
            return Err(Error::ZeroInput);
        }
        Ok(ConicLabel::Quaternion(a, b))
    }

    /// Places where the conic has no local point.
    pub fn ramified_places(&self) -> Vec<Place> {
        match self {
            ConicLabel::Split => vec![],
            ConicLabel::Quaternion(a, b) => quaternion_ramification(a, b).expect("nonzero coefficients"),
        }
    }

    pub fn locally_soluble(&self, v: Place) -> bool {
        match self {
            ConicLabel::Split => true,
            ConicLabel::Quaternion(a, b) => hilbert_invariant(a, b, v).expect("nonzero").is_zero(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            ConicLabel::Split => json!("split"),
            ConicLabel::Quaternion(a, b) => {
                json!({"quaternion": [rational_to_string(a), rational_to_string(b)]})
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<ConicLabel> {
        if v == "split" {
            return Ok(ConicLabel::Split);
        }
        let bad = || Error::InvalidInput(format!("bad conic label {v}"));
        let pair = v.get("quaternion").and_then(|q| q.as_array()).ok_or_else(bad)?;
        if pair.len() != 2 {
            return Err(bad());
        }
        let parse = |x: &Value| match x {
            Value::String(s) => rational_from_str(s),
            Value::Number(n) => rational_from_str(&n.to_string()),
            _ => Err(bad()),
        };
        ConicLabel::quaternion(parse(&pair[0])?, parse(&pair[1])?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentOrbit {
    pub id: String,
    pub size: usize,
    pub field: FieldSpec,
    pub conic: ConicLabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointOrbit {
    pub id: String,
    pub size: usize,
    pub field: FieldSpec,
}

/// A geometric point of an orbit: (orbit index, element index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem {
    pub orbit: usize,
    pub index: usize,
}

/// A geometric branch: component element → singular point element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Branch {
    pub src: Elem,
    pub dst: Elem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConicalCurve {
    pub components: Vec<ComponentOrbit>,
    pub sing_points: Vec<PointOrbit>,
    pub branches: Vec<Branch>,
}

impl ConicalCurve {
    pub fn comp_name(&self, e: Elem) -> String {
        format!("{}.{}", self.components[e.orbit].id, e.index)
    }

    pub fn point_name(&self, e: Elem) -> String {
        format!("{}.{}", self.sing_points[e.orbit].id, e.index)
    }

    pub fn branch_name(&self, b: &Branch) -> String {
        format!("{}→{}", self.comp_name(b.src), self.point_name(b.dst))
    }

    pub fn label_fields(&self) -> Vec<FieldSpec> {
        self.components
            .iter()
            .map(|c| c.field.clone())
            .chain(self.sing_points.iter().map(|p| p.field.clone()))
            .collect()
    }

    pub fn n_comp_elems(&self) -> usize {
        self.components.iter().map(|c| c.size).sum()
    }

    pub fn n_point_elems(&self) -> usize {
        self.sing_points.iter().map(|p| p.size).sum()
    }

    /// Vertex numbering of the incidence graph: component elements first.
    pub fn comp_vertex(&self, e: Elem) -> usize {
        self.components[..e.orbit].iter().map(|c| c.size).sum::<usize>() + e.index
    }

    pub fn point_vertex(&self, e: Elem) -> usize {
        self.n_comp_elems() + self.sing_points[..e.orbit].iter().map(|p| p.size).sum::<usize>() + e.index
    }

    /// Places where some label ramifies or some conic has no local point.
    pub fn bad_places(&self) -> Vec<Place> {
        let mut s: std::collections::BTreeSet<Place> = [Place::Real, Place::Finite(2)].into_iter().collect();
        for f in self.label_fields() {
            s.extend(f.ramified_places());
        }
        for c in &self.components {
            s.extend(c.conic.ramified_places());
        }
        s.into_iter().collect()
    }

    pub fn to_json(&self) -> Value {
        let group = GaloisModel::from_fields(&self.label_fields())
            .map(|m| m.to_json())
            .unwrap_or(Value::Null);
        json!({
            "group": group,
            "components": self.components.iter().map(|c| json!({
                "orbit": c.id, "size": c.size, "field": c.field, "conic": c.conic.to_json(),
            })).collect::<Vec<_>>(),
            "sing_points": self.sing_points.iter().map(|p| json!({
                "orbit": p.id, "size": p.size, "field": p.field,
            })).collect::<Vec<_>>(),
            "branches": self.branches.iter().map(|b| json!({
                "src": self.comp_name(b.src), "dst": self.point_name(b.dst),
            })).collect::<Vec<_>>(),
        })
    }

    /// Parse the curve JSON schema. Structural problems (unknown orbit names,
    /// malformed fields) are errors; mathematical defects are left to
    /// [`validate_curve`].
    pub fn from_json(v: &Value) -> Result<ConicalCurve> {
        let raw: RawCurve = serde_json::from_value(v.clone())?;
        let mut components = Vec::new();
        for c in raw.components {
            let conic = match &c.conic {
                Some(v) => ConicLabel::from_json(v)?,
                None => ConicLabel::Split,
            };
            components.push(ComponentOrbit {
                size: c.size.unwrap_or(c.field.degree() as usize),
                id: c.orbit,
                field: c.field,
                conic,
            });
        }
        let sing_points: Vec<PointOrbit> = raw
            .sing_points
            .into_iter()
            .map(|p| PointOrbit {
                size: p.size.unwrap_or(p.field.degree() as usize),
                id: p.orbit,
                field: p.field,
            })
            .collect();
        let comp_ids: HashMap<&str, usize> =
            components.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();
        let point_ids: HashMap<&str, usize> =
            sing_points.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();
        if comp_ids.len() != components.len() || point_ids.len() != sing_points.len() {
            return Err(Error::InvalidInput("orbit identifiers must be unique".into()));
        }
        let resolve = |name: &str, ids: &HashMap<&str, usize>, sizes: &dyn Fn(usize) -> usize| {
            let (o, i) = name
                .rsplit_once('.')
                .ok_or_else(|| Error::InvalidInput(format!("bad element name {name}")))?;
            let orbit = *ids
                .get(o)
                .ok_or_else(|| Error::InvalidInput(format!("unknown orbit {o}")))?;
            let index: usize = i
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad element index in {name}")))?;
            if index >= sizes(orbit) {
                return Err(Error::InvalidInput(format!("element {name} out of range")));
            }
            Ok(Elem { orbit, index })
        };
        let mut branches = Vec::new();
        for b in raw.branches {
            branches.push(Branch {
                src: resolve(&b.src, &comp_ids, &|o| components[o].size)?,
                dst: resolve(&b.dst, &point_ids, &|o| sing_points[o].size)?,
            });
        }
        Ok(ConicalCurve {
            components,
            sing_points,
            branches,
        })
    }
}

#[derive(Deserialize)]
struct RawOrbit {
    orbit: String,
    size: Option<usize>,
    field: FieldSpec,
    conic: Option<Value>,
}

#[derive(Deserialize)]
struct RawBranch {
    src: String,
    dst: String,
}

#[derive(Deserialize)]
struct RawCurve {
    #[serde(default)]
    components: Vec<RawOrbit>,
    #[serde(default)]
    sing_points: Vec<RawOrbit>,
    #[serde(default)]
    branches: Vec<RawBranch>,
}

/// Geometric realisation of the labels: the acting group and the points of
/// every orbit.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub model: GaloisModel,
    comp_atoms: Vec<Vec<Atom>>,
    comp_elems: Vec<Vec<Vec<u8>>>,
    point_atoms: Vec<Vec<Atom>>,
    point_elems: Vec<Vec<Vec<u8>>>,
    branch_index: HashMap<Branch, usize>,
}

impl Geometry {
    pub fn new(c: &ConicalCurve) -> Result<Geometry> {
        let model = GaloisModel::from_fields(&c.label_fields())?;
        let mut comp_atoms = Vec::new();
        let mut comp_elems = Vec::new();
        for o in &c.components {
            let a = model.atoms(&o.field)?;
            comp_elems.push(model.orbit(&a));
            comp_atoms.push(a);
        }
        let mut point_atoms = Vec::new();
        let mut point_elems = Vec::new();
        for o in &c.sing_points {
            let a = model.atoms(&o.field)?;
            point_elems.push(model.orbit(&a));
            point_atoms.push(a);
        }
        let branch_index = c.branches.iter().enumerate().map(|(i, b)| (*b, i)).collect();
        Ok(Geometry {
            model,
            comp_atoms,
            comp_elems,
            point_atoms,
            point_elems,
            branch_index,
        })
    }

    pub fn comp_orbit_size(&self, o: usize) -> usize {
        self.comp_elems[o].len()
    }

    pub fn point_orbit_size(&self, o: usize) -> usize {
        self.point_elems[o].len()
    }

    fn act_in(&self, g: &GroupElem, atoms: &[Atom], elems: &[Vec<u8>], e: Elem) -> Elem {
        let y = self.model.act(g, atoms, &elems[e.index]);
        Elem {
            orbit: e.orbit,
            index: elems.binary_search(&y).expect("orbit is closed"),
        }
    }

    pub fn act_comp(&self, g: &GroupElem, e: Elem) -> Elem {
        self.act_in(g, &self.comp_atoms[e.orbit], &self.comp_elems[e.orbit], e)
    }

    pub fn act_point(&self, g: &GroupElem, e: Elem) -> Elem {
        self.act_in(g, &self.point_atoms[e.orbit], &self.point_elems[e.orbit], e)
    }

    pub fn act_branch(&self, g: &GroupElem, b: &Branch) -> Branch {
        Branch {
            src: self.act_comp(g, b.src),
            dst: self.act_point(g, b.dst),
        }
    }

    pub fn branch_id(&self, b: &Branch) -> Option<usize> {
        self.branch_index.get(b).copied()
    }

    /// Orbits of `group` on the elements of a component orbit.
    pub fn comp_sub_orbits(&self, group: &[GroupElem], o: usize) -> Vec<Vec<usize>> {
        self.model.sub_orbits(group, &self.comp_atoms[o], &self.comp_elems[o])
    }

    pub fn point_sub_orbits(&self, group: &[GroupElem], o: usize) -> Vec<Vec<usize>> {
        self.model.sub_orbits(group, &self.point_atoms[o], &self.point_elems[o])
    }

    /// Orbits of `group` on a set of branches closed under it, as lists of
    /// branch indices ordered by smallest index.
    pub fn branch_sub_orbits(&self, c: &ConicalCurve, group: &[GroupElem], members: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut members = members.to_vec();
        members.sort_unstable();
        for &i in &members {
            if seen.contains(&i) {
                continue;
            }
            let mut o: Vec<usize> = group
                .iter()
                .map(|g| {
                    self.branch_id(&self.act_branch(g, &c.branches[i]))
                        .expect("branch set is not Galois-stable")
                })
                .collect::<HashSet<_>>()
                .into_iter()
                .collect();
            o.sort_unstable();
            seen.extend(o.iter().copied());
            out.push(o);
        }
        out
    }

    /// Galois orbits of branches (requires an equivariant branch set).
    pub fn branch_orbits(&self, c: &ConicalCurve) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..c.branches.len()).collect();
        self.branch_sub_orbits(c, self.model.elements(), &all)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub check: String,
    pub subject: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub issues: Vec<Issue>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return write!(f, "valid");
        }
        for i in &self.issues {
            writeln!(f, "[{}] {}: {}", i.check, i.subject, i.message)?;
        }
        Ok(())
    }
}

/// Check every invariant of the model and report each failure.
pub fn validate_curve(c: &ConicalCurve) -> ValidationReport {
    let mut issues = Vec::new();
    let mut push = |check: &str, subject: String, message: String| {
        issues.push(Issue {
            check: check.into(),
            subject,
            message,
        })
    };
    let mut fields_ok = true;
    for (id, size, field) in c
        .components
        .iter()
        .map(|o| (&o.id, o.size, &o.field))
        .chain(c.sing_points.iter().map(|o| (&o.id, o.size, &o.field)))
    {
        if let Err(e) = field.validate() {
            push("field", id.clone(), e.to_string());
            fields_ok = false;
        } else if field.degree() as usize != size {
            push("orbit_size", id.clone(), format!("size {size} but field degree {}", field.degree()));
            fields_ok = false;
        }
    }
    let mut seen = HashSet::new();
    for b in &c.branches {
        if !seen.insert(*b) {
            push("branch", c.branch_name(b), "duplicate branch".into());
        }
    }
    let geometry = if fields_ok {
        match Geometry::new(c) {
            Ok(g) => Some(g),
            Err(e) => {
                push("galois", "labels".into(), e.to_string());
                None
            }
        }
    } else {
        None
    };
    if let Some(geo) = &geometry {
        let mut equivariant = true;
        for g in geo.model.generators() {
            for b in &c.branches {
                if geo.branch_id(&geo.act_branch(&g, b)).is_none() {
                    push(
                        "equivariance",
                        c.branch_name(b),
                        format!("image {} is not a branch", c.branch_name(&geo.act_branch(&g, b))),
                    );
                    equivariant = false;
                }
            }
        }
        if equivariant {
            for o in geo.branch_orbits(c) {
                let b = c.branches[o[0]];
                let (ls, ps) = (c.components[b.src.orbit].size, c.sing_points[b.dst.orbit].size);
                if o.len() % ls != 0 || o.len() % ps != 0 {
                    push("branch_field", c.branch_name(&b), "orbit size not divisible by endpoint degrees".into());
                }
            }
            check_conics_split_at_branches(c, geo, &mut push);
        }
    }
    let mut incident = vec![0usize; c.n_point_elems()];
    for b in &c.branches {
        incident[c.point_vertex(b.dst) - c.n_comp_elems()] += 1;
    }
    for (o, p) in c.sing_points.iter().enumerate() {
        for i in 0..p.size {
            let e = Elem { orbit: o, index: i };
            let k = incident[c.point_vertex(e) - c.n_comp_elems()];
            if k < 2 {
                push("singular_point", c.point_name(e), format!("{k} incident branches, need at least 2"));
            }
        }
    }
    let g = crate::graph::IncidenceGraph::of_curve(c);
    if g.vertex_count() == 0 || g.component_count() != 1 {
        push("connected", "graph".into(), format!("{} connected pieces", g.component_count()));
    }
    ValidationReport {
        valid: issues.is_empty(),
        issues,
    }
}

/// A conic through a point of a branch orbit must split over its field.
fn check_conics_split_at_branches(c: &ConicalCurve, geo: &Geometry, push: &mut impl FnMut(&str, String, String)) {
    let orbits = geo.branch_orbits(c);
    for (k, comp) in c.components.iter().enumerate() {
        let bad = comp.conic.ramified_places();
        if bad.is_empty() {
            continue;
        }
        for o in orbits.iter().filter(|o| c.branches[o[0]].src.orbit == k) {
            for &v in &bad {
                let Ok(dv) = geo.model.decomposition_group(v) else {
                    continue;
                };
                if geo.branch_sub_orbits(c, &dv, o).iter().any(|w| w.len() % 2 == 1) {
                    push(
                        "conic",
                        comp.id.clone(),
                        format!(
                            "conic is not split at {v} over the field of branch {}",
                            c.branch_name(&c.branches[o[0]])
                        ),
                    );
                    break;
                }
            }
        }
    }
}

/// Group together orbits with their geometric elements for display.
pub fn element_names(c: &ConicalCurve) -> BTreeMap<usize, String> {
    let mut out = BTreeMap::new();
    for (o, comp) in c.components.iter().enumerate() {
        for i in 0..comp.size {
            let e = Elem { orbit: o, index: i };
            out.insert(c.comp_vertex(e), c.comp_name(e));
        }
    }
    for (o, p) in c.sing_points.iter().enumerate() {
        for i in 0..p.size {
            let e = Elem { orbit: o, index: i };
            out.insert(c.point_vertex(e), c.point_name(e));
        }
    }
    out
}
