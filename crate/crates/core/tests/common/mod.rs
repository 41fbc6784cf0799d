//! Random curve and graph generators shared by the integration tests.
#![allow(dead_code)]

use conical::arith::Rational;
use conical::brauer::{conic_class, restrict_class, BrauerSystem};
use conical::curve::{validate_curve, ConicLabel, ConicalCurve};
use conical::fields::FieldSpec;
use conical::graph::IncidenceGraph;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub use rand::SeedableRng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

const QUAD: [i128; 9] = [-1, 2, -2, 3, 5, -3, 7, 13, -7];
const CONIC: [i128; 10] = [-1, 2, -2, 3, -3, 5, 6, -6, 7, 10];

fn field(d: Option<i128>) -> Value {
    match d {
        None => json!({"type": "Q"}),
        Some(d) => json!({"type": "quad", "d": d}),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Comp,
    Point,
}

#[derive(Default)]
struct Builder {
    comps: Vec<Value>,
    points: Vec<Value>,
    branches: Vec<Value>,
}

impl Builder {
    fn comp(&mut self, d: Option<i128>, conic: Option<(i128, i128)>) -> String {
        let id = format!("C{}", self.comps.len());
        let mut v = json!({"orbit": id, "field": field(d)});
        if let Some((a, b)) = conic {
            v["conic"] = json!({"quaternion": [a.to_string(), b.to_string()]});
        }
        self.comps.push(v);
        id
    }

    fn point(&mut self, d: Option<i128>) -> String {
        let id = format!("P{}", self.points.len());
        self.points.push(json!({"orbit": id, "field": field(d)}));
        id
    }

    fn branch(&mut self, src: &str, i: usize, dst: &str, j: usize) {
        self.branches.push(json!({"src": format!("{src}.{i}"), "dst": format!("{dst}.{j}")}));
    }

    fn finish(self) -> ConicalCurve {
        let c = ConicalCurve::from_json(&json!({
            "components": self.comps, "sing_points": self.points, "branches": self.branches,
        }))
        .unwrap();
        let report = validate_curve(&c);
        assert!(report.valid, "generator produced an invalid curve: {report}\n{}", c.to_json());
        c
    }
}

fn random_conic(rng: &mut Rng8) -> Option<(i128, i128)> {
    if rng.gen_bool(0.5) {
        None
    } else {
        Some((*CONIC.choose(rng).unwrap(), *CONIC.choose(rng).unwrap()))
    }
}

/// Whether the conic has a point over Q(√d) (over Q for None): every branch
/// through a component is a point of its conic.
fn splits(conic: Option<(i128, i128)>, d: Option<i128>) -> bool {
    let Some((a, b)) = conic else { return true };
    let label = ConicLabel::Quaternion(Rational::from_integer(a), Rational::from_integer(b));
    let field = match d {
        None => FieldSpec::Rational,
        Some(d) => FieldSpec::quadratic(d).unwrap(),
    };
    restrict_class(&conic_class(&label), &field).unwrap().is_zero()
}

/// A quadratic class over which all the given conics split, if one exists.
fn splitting_quad(rng: &mut Rng8, conics: &[Option<(i128, i128)>]) -> Option<i128> {
    let ok: Vec<i128> = QUAD.iter().copied().filter(|&e| conics.iter().all(|&c| splits(c, Some(e)))).collect();
    ok.choose(rng).copied()
}

/// A random conical curve whose geometric incidence graph is a tree. Rational
/// orbits carry random conics; conjugate pairs over Q(√d) are split lines and
/// propagate element-wise so that no cycle appears.
pub fn tree_curve(rng: &mut Rng8, max_orbits: usize) -> ConicalCurve {
    let mut b = Builder::default();
    // Branches through a rational component are points of its conic, and only
    // the root meets nothing but conjugate pairs, so only the root gets a
    // possibly nonsplit conic.
    let root_conic = loop {
        let c = random_conic(rng);
        if splitting_quad(rng, &[c]).is_some() {
            break c;
        }
    };
    let root = b.comp(None, root_conic);
    // (orbit id, kind, field, branches already incident per element)
    let mut open = vec![(root, Kind::Comp, None::<i128>, 0usize)];
    let mut count = 1;
    while let Some((id, kind, d, have)) = open.pop() {
        let want_more = count < max_orbits && rng.gen_bool(0.7);
        // A singular point needs at least two branches per element.
        let forced = kind == Kind::Point && have < 2;
        if !want_more && !forced {
            continue;
        }
        let children = if forced { 1 } else { rng.gen_range(1..=2) };
        for _ in 0..children {
            count += 1;
            match (kind, d) {
                (Kind::Comp, None) => {
                    let conic = if id == "C0" { root_conic } else { None };
                    let quad = splitting_quad(rng, &[conic]);
                    if quad.is_none() || (splits(conic, None) && rng.gen_bool(0.5)) {
                        let p = b.point(None);
                        b.branch(&id, 0, &p, 0);
                        open.push((p, Kind::Point, None, 1));
                    } else {
                        let e = quad.unwrap();
                        let p = b.point(Some(e));
                        b.branch(&id, 0, &p, 0);
                        b.branch(&id, 0, &p, 1);
                        open.push((p, Kind::Point, Some(e), 1));
                    }
                }
                (Kind::Point, None) => {
                    if rng.gen_bool(0.5) {
                        let c = b.comp(None, None);
                        b.branch(&c, 0, &id, 0);
                        open.push((c, Kind::Comp, None, 1));
                    } else {
                        let e = *QUAD.choose(rng).unwrap();
                        let c = b.comp(Some(e), None);
                        b.branch(&c, 0, &id, 0);
                        b.branch(&c, 1, &id, 0);
                        open.push((c, Kind::Comp, Some(e), 1));
                    }
                }
                (Kind::Comp, Some(e)) => {
                    let p = b.point(Some(e));
                    b.branch(&id, 0, &p, 0);
                    b.branch(&id, 1, &p, 1);
                    open.push((p, Kind::Point, Some(e), 1));
                }
                (Kind::Point, Some(e)) => {
                    let c = b.comp(Some(e), None);
                    b.branch(&c, 0, &id, 0);
                    b.branch(&c, 1, &id, 1);
                    open.push((c, Kind::Comp, Some(e), 1));
                }
            }
        }
        if kind == Kind::Point {
            // Re-examine: the point may still accept further children.
            let got = have + children;
            if got < 3 && count < max_orbits && rng.gen_bool(0.3) {
                open.push((id, kind, d, got));
            }
        }
    }
    b.finish()
}

/// Rational components (random conics) joined pairwise by rational points or
/// conjugate pairs of points; usually not a tree.
pub fn graph_curve(rng: &mut Rng8, comps: usize, points: usize) -> ConicalCurve {
    let mut b = Builder::default();
    // Every conic is (e, t) for one common e, so Q(√e) always splits a pair.
    let e0 = *QUAD.choose(rng).unwrap();
    let conics: Vec<Option<(i128, i128)>> = (0..comps)
        .map(|_| random_conic(rng).map(|(_, t)| (e0, t)))
        .collect();
    let ids: Vec<String> = conics.iter().map(|&c| b.comp(None, c)).collect();
    // A spanning path keeps the curve connected.
    let mut pairs: Vec<(usize, usize)> = (1..comps).map(|i| (i - 1, i)).collect();
    while pairs.len() < points.max(comps - 1) {
        let i = rng.gen_range(0..comps);
        let j = rng.gen_range(0..comps);
        if i != j {
            pairs.push((i.min(j), i.max(j)));
        }
    }
    for (i, j) in pairs {
        let quad = splitting_quad(rng, &[conics[i], conics[j]]);
        let rational = splits(conics[i], None) && splits(conics[j], None);
        if rational && (quad.is_none() || rng.gen_bool(0.5)) {
            let p = b.point(None);
            b.branch(&ids[i], 0, &p, 0);
            b.branch(&ids[j], 0, &p, 0);
        } else {
            let e = quad.expect("Q(√e0) splits every conic");
            let p = b.point(Some(e));
            for e in 0..2 {
                b.branch(&ids[i], 0, &p, e);
                b.branch(&ids[j], 0, &p, e);
            }
        }
    }
    b.finish()
}

/// Two split rational lines meeting in the conjugate pair Spec Q(√−1).
pub fn control_curve() -> ConicalCurve {
    let mut b = Builder::default();
    let a = b.comp(None, None);
    let c = b.comp(None, None);
    let p = b.point(Some(-1));
    for e in 0..2 {
        b.branch(&a, 0, &p, e);
        b.branch(&c, 0, &p, e);
    }
    b.finish()
}

/// A bipartite tree with a nontrivial symmetry group: a center vertex with
/// `copies` identical random rooted subtrees. Returns the graph and
/// generators (vertex permutations) permuting the copies, all conjugated by
/// a random relabelling within each side.
pub fn symmetric_tree(rng: &mut Rng8, max_vertices: usize) -> (IncidenceGraph, Vec<Vec<usize>>) {
    let copies = rng.gen_range(1..=4usize);
    let budget = ((max_vertices - 1) / copies).max(1);
    let size = rng.gen_range(1..=budget);
    // Random rooted tree on `size` vertices: parent[i] < i.
    let parent: Vec<usize> = (0..size).map(|i| if i == 0 { 0 } else { rng.gen_range(0..i) }).collect();
    let mut depth = vec![0usize; size];
    for i in 1..size {
        depth[i] = depth[parent[i]] + 1;
    }
    let center_is_comp = rng.gen_bool(0.5);
    // Global vertex 0 is the center; copy k vertex i is 1 + k·size + i.
    let n = 1 + copies * size;
    let is_comp = |v: usize| -> bool {
        if v == 0 {
            center_is_comp
        } else {
            // The subtree root is adjacent to the center.
            let d = depth[(v - 1) % size] + 1;
            center_is_comp == (d % 2 == 0)
        }
    };
    let mut edges = Vec::new();
    for k in 0..copies {
        let base = 1 + k * size;
        edges.push((0, base));
        for i in 1..size {
            edges.push((base + parent[i], base + i));
        }
    }
    // Number components first, then points, each side randomly shuffled.
    let mut comps: Vec<usize> = (0..n).filter(|&v| is_comp(v)).collect();
    let mut pts: Vec<usize> = (0..n).filter(|&v| !is_comp(v)).collect();
    comps.shuffle(rng);
    pts.shuffle(rng);
    let mut label = vec![0usize; n];
    for (i, &v) in comps.iter().chain(&pts).enumerate() {
        label[v] = i;
    }
    let ncomp = comps.len();
    let g = IncidenceGraph::new(
        ncomp,
        n - ncomp,
        edges
            .iter()
            .map(|&(u, v)| {
                let (c, p) = if is_comp(u) { (u, v) } else { (v, u) };
                (label[c], label[p])
            })
            .collect(),
    );
    let copy_perm = |sigma: &[usize]| -> Vec<usize> {
        let mut perm = vec![0usize; n];
        for v in 0..n {
            let w = if v == 0 {
                0
            } else {
                let (k, i) = ((v - 1) / size, (v - 1) % size);
                1 + sigma[k] * size + i
            };
            perm[label[v]] = label[w];
        }
        perm
    };
    let mut gens = Vec::new();
    let cycle: Vec<usize> = (0..copies).map(|k| (k + 1) % copies).collect();
    gens.push(copy_perm(&cycle));
    if copies > 2 {
        let mut swap: Vec<usize> = (0..copies).collect();
        swap.swap(0, 1);
        gens.push(copy_perm(&swap));
    }
    (g, gens)
}

// Bitset linear algebra over F_2, independent of the library's modlin code.

fn to_bits(v: impl Iterator<Item = i64>) -> Vec<u64> {
    let mut bits = Vec::new();
    for (j, x) in v.enumerate() {
        if j % 64 == 0 {
            bits.push(0u64);
        }
        if x.rem_euclid(2) == 1 {
            bits[j / 64] |= 1 << (j % 64);
        }
    }
    bits
}

fn f2_rank(mut rows: Vec<Vec<u64>>, cols: usize) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        let (w, b) = (c / 64, 1u64 << (c % 64));
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][w] & b != 0) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && row[w] & b != 0 {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// dim_F2(ker rows) − dim_F2(span diagonal), for a system with n = 2.
pub fn f2_quotient_dimension(sys: &BrauerSystem) -> usize {
    let cols = sys.columns.len();
    let rows = sys.rows.iter().map(|r| to_bits(r.iter().copied())).collect();
    let diag = sys.diagonal.iter().map(|r| to_bits(r.iter().map(|&x| x as i64))).collect();
    cols - f2_rank(rows, cols) - f2_rank(diag, cols)
}
