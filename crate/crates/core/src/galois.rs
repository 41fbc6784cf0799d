//! A finite Galois group acting on the geometric points of étale algebras.
//!
//! The group is the Galois group of the compositum of the label fields. For
//! multiquadratic labels it is the dual of the F₂-span of their square
//! classes. One profiled cubic with a defining polynomial is also supported:
//! its splitting field has group S3, glued to the quadratic part along the
//! discriminant character.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde_json::{json, Value};

use crate::arith::{class_mul, is_local_square_int, Place};
use crate::error::{Error, Result};
use crate::fields::{solve_f2, ClassCoords, FieldSpec, Profile};

/// Element (bits, perm): bit j flips √b_j for the j-th basis class; perm acts
/// on the three roots of the cubic (identity when there is none).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElem {
    pub bits: u64,
    pub perm: [u8; 3],
}

pub const ID3: [u8; 3] = [0, 1, 2];

impl GroupElem {
    pub fn identity() -> GroupElem {
        GroupElem { bits: 0, perm: ID3 }
    }

    /// The product g·h (apply h first).
    pub fn compose(&self, h: &GroupElem) -> GroupElem {
        let p = [
            self.perm[h.perm[0] as usize],
            self.perm[h.perm[1] as usize],
            self.perm[h.perm[2] as usize],
        ];
        GroupElem {
            bits: self.bits ^ h.bits,
            perm: p,
        }
    }
}

fn perm_sign(p: &[u8; 3]) -> u8 {
    let inversions = (0..3)
        .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
        .filter(|&(i, j)| p[i] > p[j])
        .count();
    (inversions % 2) as u8
}

const S3: [[u8; 3]; 6] = [
    [0, 1, 2],
    [1, 0, 2],
    [0, 2, 1],
    [2, 1, 0],
    [1, 2, 0],
    [2, 0, 1],
];

/// A building block of a label field: a square root or the cubic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Atom {
    Sq(u64),
    Cubic,
}

#[derive(Debug, Clone)]
struct Cubic {
    profile: Profile,
    disc: i128,
    disc_bits: u64,
}

#[derive(Debug, Clone)]
pub struct GaloisModel {
    basis: Vec<i128>,
    cubic: Option<Cubic>,
    elements: Vec<GroupElem>,
}

/// F₂-rank of a list of square classes.
pub fn f2_rank(classes: &[i128]) -> usize {
    let coords = ClassCoords::new(classes);
    let mut rows: Vec<u128> = Vec::new();
    for &c in classes {
        let mut v = coords.vector(c);
        for r in &rows {
            let top = 127 - r.leading_zeros();
            if v >> top & 1 == 1 {
                v ^= r;
            }
        }
        if v != 0 {
            rows.push(v);
            rows.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    rows.len()
}

fn parity(x: u64) -> u8 {
    (x.count_ones() % 2) as u8
}

impl GaloisModel {
    /// Build the group of the compositum of the given fields.
    pub fn from_fields(fields: &[FieldSpec]) -> Result<GaloisModel> {
        let mut classes = Vec::new();
        let mut cubic: Option<Profile> = None;
        let mut stack: Vec<&FieldSpec> = fields.iter().collect();
        while let Some(f) = stack.pop() {
            match f {
                FieldSpec::Rational => {}
                FieldSpec::Quadratic(d) => classes.push(*d),
                FieldSpec::Biquadratic(a, b) => classes.extend([*a, *b]),
                FieldSpec::Tensor(fs) => stack.extend(fs.iter()),
                FieldSpec::Profiled(p) => {
                    if p.degree == 1 {
                        continue;
                    }
                    if p.degree != 3 || p.poly.is_none() {
                        return Err(Error::Unsupported(format!(
                            "profiled label {} requires explicitly supplied actions",
                            p.name
                        )));
                    }
                    match &cubic {
                        Some(q) if q.poly != p.poly => {
                            return Err(Error::Unsupported(
                                "at most one cubic label field is supported".into(),
                            ))
                        }
                        Some(_) => {}
                        None => cubic = Some(p.clone()),
                    }
                }
            }
        }
        let disc = match &cubic {
            Some(p) => Some(
                p.disc_class()
                    .ok_or_else(|| Error::InvalidInput("cubic polynomial is inseparable".into()))?,
            ),
            None => None,
        };
        if let Some(d) = disc {
            if d != 1 {
                classes.push(d);
            }
        }
        classes.sort_unstable();
        classes.dedup();
        // Greedy basis in a deterministic order: by absolute value, then sign.
        classes.sort_by_key(|&c| (c.unsigned_abs(), c < 0));
        let mut basis = Vec::new();
        for c in classes {
            let mut trial = basis.clone();
            trial.push(c);
            if f2_rank(&trial) == trial.len() {
                basis = trial;
            }
        }
        assert!(basis.len() < 64, "square-class basis too large");
        let mut model = GaloisModel {
            basis,
            cubic: None,
            elements: vec![],
        };
        if let (Some(profile), Some(disc)) = (cubic, disc) {
            let disc_bits = if disc == 1 { 0 } else { model.express(disc)? };
            model.cubic = Some(Cubic {
                profile,
                disc,
                disc_bits,
            });
        }
        model.elements = model.enumerate();
        Ok(model)
    }

    fn enumerate(&self) -> Vec<GroupElem> {
        let r = self.basis.len();
        let mut out = Vec::new();
        for bits in 0..(1u64 << r) {
            match &self.cubic {
                None => out.push(GroupElem { bits, perm: ID3 }),
                Some(c) => {
                    let s = parity(bits & c.disc_bits);
                    for p in S3 {
                        if perm_sign(&p) == s {
                            out.push(GroupElem { bits, perm: p });
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn basis(&self) -> &[i128] {
        &self.basis
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[GroupElem] {
        &self.elements
    }

    pub fn has_cubic(&self) -> bool {
        self.cubic.is_some()
    }

    pub fn generators(&self) -> Vec<GroupElem> {
        let mut gens = Vec::new();
        for j in 0..self.basis.len() {
            let bits = 1u64 << j;
            let perm = match &self.cubic {
                Some(c) if parity(bits & c.disc_bits) == 1 => [1, 0, 2],
                _ => ID3,
            };
            gens.push(GroupElem { bits, perm });
        }
        if self.cubic.is_some() {
            gens.push(GroupElem {
                bits: 0,
                perm: [1, 2, 0],
            });
        }
        gens
    }

    /// Coordinates of a square class in the basis.
    pub fn express(&self, class: i128) -> Result<u64> {
        let outside = || Error::InvalidInput(format!("square class {class} is outside the label span"));
        if class == 1 {
            return Ok(0);
        }
        let mut all = self.basis.clone();
        all.push(class);
        let coords = ClassCoords::new(&all);
        let cols: Vec<u128> = self.basis.iter().map(|&b| coords.vector(b)).collect();
        let target = coords.vector(class);
        // Row i of the system: Σ_j x_j·(col_j)_i = target_i.
        let rows: Vec<u128> = (0..128)
            .map(|i| {
                cols.iter()
                    .enumerate()
                    .fold(0u128, |acc, (j, c)| acc | ((c >> i & 1) << j))
            })
            .collect();
        let rhs: Vec<bool> = (0..128).map(|i| target >> i & 1 == 1).collect();
        solve_f2(&rows, &rhs, self.basis.len())
            .map(|x| x as u64)
            .ok_or_else(outside)
    }

    fn class_of(&self, bits: u64) -> i128 {
        (0..self.basis.len())
            .filter(|j| bits >> j & 1 == 1)
            .fold(1, |acc, j| class_mul(acc, self.basis[j]))
    }

    /// Atoms of a label field, in the order its coordinates are stored.
    pub fn atoms(&self, f: &FieldSpec) -> Result<Vec<Atom>> {
        Ok(match f {
            FieldSpec::Rational => vec![],
            FieldSpec::Quadratic(d) => vec![Atom::Sq(self.express(*d)?)],
            FieldSpec::Biquadratic(a, b) => vec![Atom::Sq(self.express(*a)?), Atom::Sq(self.express(*b)?)],
            FieldSpec::Profiled(p) if p.degree == 1 => vec![],
            FieldSpec::Profiled(_) => vec![Atom::Cubic],
            FieldSpec::Tensor(fs) => {
                let mut out = Vec::new();
                for g in fs {
                    out.extend(self.atoms(g)?);
                }
                out
            }
        })
    }

    pub fn act(&self, g: &GroupElem, atoms: &[Atom], x: &[u8]) -> Vec<u8> {
        atoms
            .iter()
            .zip(x)
            .map(|(a, &c)| match a {
                Atom::Sq(bits) => c ^ parity(g.bits & bits),
                Atom::Cubic => g.perm[c as usize],
            })
            .collect()
    }

    /// The geometric points of Spec(f): the orbit of the base embedding,
    /// sorted; an element's index is its position in this list.
    pub fn orbit(&self, atoms: &[Atom]) -> Vec<Vec<u8>> {
        let start = vec![0u8; atoms.len()];
        let mut seen: BTreeSet<Vec<u8>> = BTreeSet::new();
        seen.insert(start.clone());
        let mut queue = VecDeque::from([start]);
        let gens = self.generators();
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y = self.act(g, atoms, &x);
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Decomposition group at v, determined up to conjugacy.
    pub fn decomposition_group(&self, v: Place) -> Result<Vec<GroupElem>> {
        let r = self.basis.len();
        let squares: Vec<u64> = (0..(1u64 << r))
            .filter(|&m| is_local_square_int(self.class_of(m), v))
            .collect();
        let dv: Vec<u64> = (0..(1u64 << r))
            .filter(|&b| squares.iter().all(|&w| parity(b & w) == 0))
            .collect();
        let Some(c) = &self.cubic else {
            return Ok(dv.into_iter().map(|bits| GroupElem { bits, perm: ID3 }).collect());
        };
        let pattern = FieldSpec::Profiled(c.profile.clone()).local_degrees(v)?;
        let h: Vec<[u8; 3]> = match pattern.as_slice() {
            [1, 1, 1] => vec![ID3],
            [1, 2] => vec![ID3, [0, 2, 1]],
            [3] if is_local_square_int(c.disc, v) => vec![ID3, [1, 2, 0], [2, 0, 1]],
            [3] => S3.to_vec(),
            other => {
                return Err(Error::Defect(format!("impossible cubic pattern {other:?}")));
            }
        };
        let mut out = Vec::new();
        for &bits in &dv {
            for p in &h {
                if perm_sign(p) == parity(bits & c.disc_bits) {
                    out.push(GroupElem { bits, perm: *p });
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Orbits of a subgroup on the given orbit, as sorted index lists ordered
    /// by their smallest index.
    pub fn sub_orbits(&self, group: &[GroupElem], atoms: &[Atom], orbit: &[Vec<u8>]) -> Vec<Vec<usize>> {
        let index = |x: &Vec<u8>| orbit.binary_search(x).expect("orbit not closed");
        let mut seen = vec![false; orbit.len()];
        let mut out = Vec::new();
        for i in 0..orbit.len() {
            if seen[i] {
                continue;
            }
            let mut o: Vec<usize> = group
                .iter()
                .map(|g| index(&self.act(g, atoms, &orbit[i])))
                .collect::<HashSet<_>>()
                .into_iter()
                .collect();
            o.sort_unstable();
            for &j in &o {
                seen[j] = true;
            }
            out.push(o);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        match &self.cubic {
            None => json!({"kind": "elem2", "rank": self.basis.len(), "classes": self.basis}),
            Some(c) => json!({
                "kind": "elem2_x_S3",
                "rank": self.basis.len(),
                "classes": self.basis,
                "cubic": c.profile.name,
                "disc_class": c.disc,
                "order": self.order(),
            }),
        }
    }
}

/// Size of the Galois orbit of Spec of the tensor product of the fields;
/// equals the degree exactly when the tensor product is a field.
pub fn tensor_orbit_size(fs: &[FieldSpec]) -> Result<usize> {
    let model = GaloisModel::from_fields(fs)?;
    let atoms = model.atoms(&FieldSpec::Tensor(fs.to_vec()))?;
    Ok(model.orbit(&atoms).len())
}

pub fn tensor_local_degrees(fs: &[FieldSpec], v: Place) -> Result<Vec<u32>> {
    let model = GaloisModel::from_fields(fs)?;
    let atoms = model.atoms(&FieldSpec::Tensor(fs.to_vec()))?;
    let orbit = model.orbit(&atoms);
    let dv = model.decomposition_group(v)?;
    let mut out: Vec<u32> = model
        .sub_orbits(&dv, &atoms, &orbit)
        .iter()
        .map(|o| o.len() as u32)
        .collect();
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_up_to;

    fn q(d: i128) -> FieldSpec {
        FieldSpec::quadratic(d).unwrap()
    }

    #[test]
    fn group_orders_from_labels() {
        let m = GaloisModel::from_fields(&[q(2), q(17), q(34)]).unwrap();
        assert_eq!(m.order(), 4);
        assert_eq!(m.basis(), &[2, 17]);
        assert_eq!(GaloisModel::from_fields(&[FieldSpec::Rational]).unwrap().order(), 1);
        assert_eq!(GaloisModel::from_fields(&[q(2)]).unwrap().order(), 2);
        let m = GaloisModel::from_fields(&[q(5), FieldSpec::cubic_x3_x_1()]).unwrap();
        assert_eq!(m.order(), 12);
    }

    #[test]
    fn orbits_have_field_degree() {
        let m = GaloisModel::from_fields(&[q(2), q(17), q(5), FieldSpec::cubic_x3_x_1()]).unwrap();
        for f in [q(2), q(34), q(5), FieldSpec::cubic_x3_x_1(), FieldSpec::biquadratic(2, 17).unwrap()] {
            let atoms = m.atoms(&f).unwrap();
            assert_eq!(m.orbit(&atoms).len() as u32, f.degree(), "{f}");
        }
    }

    #[test]
    fn decomposition_orbits_match_local_degrees() {
        let fields = [q(2), q(17), q(34), q(5), q(-1), FieldSpec::cubic_x3_x_1()];
        let m = GaloisModel::from_fields(&fields).unwrap();
        let mut places = vec![Place::Real];
        places.extend(primes_up_to(200).into_iter().map(Place::Finite));
        for v in places {
            let dv = m.decomposition_group(v).unwrap();
            for f in &fields {
                let atoms = m.atoms(f).unwrap();
                let orbit = m.orbit(&atoms);
                let mut sizes: Vec<u32> = m
                    .sub_orbits(&dv, &atoms, &orbit)
                    .iter()
                    .map(|o| o.len() as u32)
                    .collect();
                sizes.sort_unstable();
                assert_eq!(sizes, f.local_degrees(v).unwrap(), "{f} at {v}");
            }
        }
    }

    #[test]
    fn decomposition_group_is_a_subgroup() {
        let m = GaloisModel::from_fields(&[q(5), q(-1), FieldSpec::cubic_x3_x_1()]).unwrap();
        for v in [Place::Real, Place::Finite(2), Place::Finite(5), Place::Finite(23), Place::Finite(59)] {
            let dv = m.decomposition_group(v).unwrap();
            let set: HashSet<_> = dv.iter().copied().collect();
            for a in &dv {
                for b in &dv {
                    assert!(set.contains(&a.compose(b)));
                }
            }
        }
    }

    #[test]
    fn profiled_without_polynomial_is_rejected() {
        let mut f = FieldSpec::cubic_x3_x_1();
        if let FieldSpec::Profiled(p) = &mut f {
            p.poly = None;
        }
        assert!(matches!(GaloisModel::from_fields(&[f]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn express_classes() {
        let m = GaloisModel::from_fields(&[q(2), q(17)]).unwrap();
        assert_eq!(m.express(34).unwrap(), 0b11);
        assert_eq!(m.express(17).unwrap(), 0b10);
        assert!(m.express(5).is_err());
        assert!(m.express(-1).is_err());
    }

    #[test]
    fn tensor_fields() {
        assert_eq!(tensor_orbit_size(&[q(2), q(5)]).unwrap(), 4);
        assert_eq!(tensor_orbit_size(&[q(2), q(2)]).unwrap(), 2);
        assert_eq!(tensor_orbit_size(&[q(2), q(17), q(34)]).unwrap(), 4);
        assert_eq!(tensor_orbit_size(&[q(-23), FieldSpec::cubic_x3_x_1()]).unwrap(), 6);
    }
}
