//! Builders for the curves attached to a binary form: the star C^f, the
//! bipartite curve D, and the pencil partner of D.

use num::{BigInt, BigRational, One, Zero};
use serde::Serialize;

use crate::curve::{Branch, ComponentOrbit, ConicLabel, ConicalCurve, Elem, PointOrbit};
use crate::error::{Error, Result};
use crate::fields::{tensor_is_field, FieldSpec};
use crate::forms::{join_terms, BinaryForm};
use crate::galois::GaloisModel;
use crate::poly::resultant;

/// The acting group for multiquadratic labels.
pub fn galois_from_labels(labels: &[FieldSpec]) -> Result<GaloisModel> {
    fn profiled(f: &FieldSpec) -> bool {
        match f {
            FieldSpec::Profiled(p) => p.degree > 1,
            FieldSpec::Tensor(fs) => fs.iter().any(profiled),
            _ => false,
        }
    }
    if let Some(f) = labels.iter().find(|f| profiled(f)) {
        return Err(Error::Unsupported(format!(
            "profiled label {} requires explicitly supplied actions",
            f.name()
        )));
    }
    GaloisModel::from_fields(labels)
}

fn factor_ids(f: &BinaryForm) -> Vec<String> {
    (1..=f.factor_fields().len()).map(|i| format!("K{i}")).collect()
}

/// The lines f(x, y) = 0 through P = (0:0:1): one split orbit per factor of
/// f, all meeting at the rational point P.
pub fn build_cf(f: &BinaryForm) -> Result<ConicalCurve> {
    if f.degree() < 2 {
        return Err(Error::InvalidInput("C^f needs a form of degree at least 2".into()));
    }
    let mut components = Vec::new();
    let mut branches = Vec::new();
    for (o, (id, field)) in factor_ids(f).into_iter().zip(f.factor_fields()).enumerate() {
        let size = field.degree() as usize;
        for index in 0..size {
            branches.push(Branch {
                src: Elem { orbit: o, index },
                dst: Elem { orbit: 0, index: 0 },
            });
        }
        components.push(ComponentOrbit {
            id,
            size,
            field,
            conic: ConicLabel::Split,
        });
    }
    Ok(ConicalCurve {
        components,
        sing_points: vec![PointOrbit {
            id: "P".into(),
            size: 1,
            field: FieldSpec::Rational,
        }],
        branches,
    })
}

/// Required degrees of L and F for a form of degree d.
pub fn horizontal_degrees(d: usize) -> (u32, u32) {
    if d % 2 == 0 {
        (d as u32 / 2 - 1, d as u32 / 2)
    } else {
        ((d as u32 - 1) / 2, (d as u32 + 1) / 2)
    }
}

fn check_d_preconditions(f: &BinaryForm, l: &FieldSpec, ff: &FieldSpec) -> Result<()> {
    let d = f.degree();
    if d < 5 {
        return Err(Error::Precondition(format!("D needs deg f ≥ 5, got {d}")));
    }
    l.validate()?;
    ff.validate()?;
    let (dl, df) = horizontal_degrees(d);
    if l.degree() != dl || ff.degree() != df {
        return Err(Error::Precondition(format!(
            "for d = {d} the horizontal fields need degrees {dl} and {df}, got {} and {}",
            l.degree(),
            ff.degree()
        )));
    }
    for k in f.factor_fields() {
        for h in [l, ff] {
            if !tensor_is_field(h, &k)? {
                return Err(Error::Precondition(format!(
                    "{} ⊗ {} is not a field",
                    h.name(),
                    k.name()
                )));
            }
        }
    }
    Ok(())
}

/// D = (Z^f × P¹) ∪ (P¹ × Spec L) ∪ (P¹ × Spec F) in P¹ × P¹.
pub fn build_d(f: &BinaryForm, l: &FieldSpec, ff: &FieldSpec) -> Result<ConicalCurve> {
    check_d_preconditions(f, l, ff)?;
    let verticals = f.factor_fields();
    let mut all = verticals.clone();
    all.push(l.clone());
    all.push(ff.clone());
    let model = GaloisModel::from_fields(&all)?;
    let components: Vec<ComponentOrbit> = factor_ids(f)
        .into_iter()
        .zip(verticals.iter().cloned())
        .chain([("L".to_string(), l.clone()), ("F".to_string(), ff.clone())])
        .map(|(id, field)| ComponentOrbit {
            id,
            size: field.degree() as usize,
            field,
            conic: ConicLabel::Split,
        })
        .collect();
    let nv = verticals.len();
    let mut sing_points = Vec::new();
    let mut branches = Vec::new();
    for i in 0..nv {
        for h in [nv, nv + 1] {
            let (kv, kh) = (&components[i].field, &components[h].field);
            let field = FieldSpec::Tensor(vec![kv.clone(), kh.clone()]);
            let (av, ah) = (model.atoms(kv)?, model.atoms(kh)?);
            let (ov, oh) = (model.orbit(&av), model.orbit(&ah));
            let elems = model.orbit(&model.atoms(&field)?);
            let po = sing_points.len();
            for (index, x) in elems.iter().enumerate() {
                let (xv, xh) = x.split_at(av.len());
                let iv = ov.binary_search(&xv.to_vec()).expect("factor coordinates");
                let ih = oh.binary_search(&xh.to_vec()).expect("factor coordinates");
                let dst = Elem { orbit: po, index };
                branches.push(Branch {
                    src: Elem { orbit: i, index: iv },
                    dst,
                });
                branches.push(Branch {
                    src: Elem { orbit: h, index: ih },
                    dst,
                });
            }
            sing_points.push(PointOrbit {
                id: format!("{}{}", components[i].id, components[h].id),
                size: elems.len(),
                field,
            });
        }
    }
    Ok(ConicalCurve {
        components,
        sing_points,
        branches,
    })
}

/// Defining polynomial (low degree first) of a horizontal field, i.e. the
/// points of Spec(K) ⊂ P¹ as roots of u/v.
pub fn defining_polynomial(k: &FieldSpec) -> Result<Vec<i128>> {
    match k {
        FieldSpec::Rational => Ok(vec![0, 1]),
        FieldSpec::Quadratic(d) => Ok(vec![-d, 0, 1]),
        FieldSpec::Biquadratic(a, b) => Ok(vec![(a - b) * (a - b), 0, -2 * (a + b), 0, 1]),
        FieldSpec::Profiled(p) if p.poly.is_some() => Ok(p.poly.clone().unwrap()),
        FieldSpec::Profiled(p) if p.degree == 1 => Ok(vec![0, 1]),
        _ => Err(Error::Unsupported(format!(
            "no defining polynomial known for {}",
            k.name()
        ))),
    }
}

fn q(c: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(c))
}

fn poly_mul(f: &[BigRational], g: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        for (j, b) in g.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Σ m_k·u^k·v^(deg−k) for linear polynomials u, v in one variable.
fn compose_homogeneous(m: &[i128], u: &[BigRational], v: &[BigRational]) -> Vec<BigRational> {
    let deg = m.len() - 1;
    let mut out = vec![BigRational::zero(); deg + 1];
    for (k, &c) in m.iter().enumerate() {
        let mut term = vec![q(c)];
        for _ in 0..k {
            term = poly_mul(&term, u);
        }
        for _ in k..deg {
            term = poly_mul(&term, v);
        }
        for (o, t) in out.iter_mut().zip(term) {
            *o += t;
        }
    }
    out
}

/// Polynomial in t = x/y (low degree first, formal degree = factor degree)
/// cutting out the vertical lines of one factor of f.
fn vertical_polynomials(f: &BinaryForm) -> Vec<Vec<i128>> {
    let mut out: Vec<Vec<i128>> = f.linear_roots().iter().map(|&(a, b)| vec![-a, b]).collect();
    out.extend(f.quadratic_classes().iter().map(|&d| vec![-d, 0, 1]));
    out
}

fn eval_int(m: &[i128], t: i128) -> i128 {
    m.iter().rev().fold(0, |acc, &c| acc * t + c)
}

/// Whether the (1,1)-curve a·X'U' + X'·v + y·U' (X' = x − p·y, U' = u − q·v)
/// meets the vertical lines g = 0 only away from the horizontal lines m = 0.
fn misses_grid(a: i128, p: i128, qv: i128, g: &[i128], m: &[i128]) -> bool {
    // On x/y = t: c = a(t − p) + 1, and the point is (u : v) = (q·c − (t − p) : c).
    let c = vec![q(1 - a * p), q(a)];
    let u = vec![q(qv * (1 - a * p) + p), q(qv * a - 1)];
    let h = compose_homogeneous(m, &u, &c);
    let g: Vec<BigRational> = g.iter().map(|&x| q(x)).collect();
    !resultant(&g, &h).is_zero()
}

/// Intersection data of one component of C with one orbit of lines of D.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Crossing {
    pub c_component: String,
    pub d_orbit: String,
    /// Geometric intersection points; each is a single transverse point per
    /// geometric line, the intersection number being 1.
    pub points: usize,
    pub misses_singular: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PencilReport {
    #[serde(skip)]
    pub curve_c_model: ConicalCurve,
    pub base_point: [[i128; 2]; 2],
    pub tangent_direction: String,
    pub r: String,
    pub s: String,
    pub pencil: String,
    pub class_r: (usize, usize),
    pub class_s: (usize, usize),
    pub class_check: bool,
    pub transversality: Vec<Crossing>,
    pub transverse: bool,
    pub smoothness_checked: bool,
}

impl PencilReport {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("serializable report");
        v["curve_C_model"] = self.curve_c_model.to_json();
        v
    }
}

fn homogeneous_text(m: &[i128], a: &str, b: &str) -> String {
    let deg = m.len() - 1;
    let mono = |k: usize| {
        let part = |var: &str, e: usize| match e {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{e}"),
        };
        [part(a, k), part(b, deg - k)]
            .into_iter()
            .filter(|s| !s.is_empty())
            .collect::<Vec<_>>()
            .join("*")
    };
    let terms: Vec<(BigInt, String)> = (0..=deg)
        .rev()
        .filter(|&k| m[k] != 0)
        .map(|k| (BigInt::from(m[k]), mono(k)))
        .collect();
    join_terms(&terms)
}

fn candidates() -> impl Iterator<Item = i128> {
    (0..).flat_map(|k: i128| if k == 0 { vec![0] } else { vec![k, -k] })
}

const PENCIL_SEARCH: i128 = 50;

/// The tree-shaped curve C linearly equivalent to D, with the equations of
/// the pencil λ·r + μ·s spanned by D and C.
pub fn build_pencil(f: &BinaryForm, l: &FieldSpec, ff: &FieldSpec) -> Result<PencilReport> {
    check_d_preconditions(f, l, ff)?;
    let d = f.degree();
    let (ml, mf) = (defining_polynomial(l)?, defining_polynomial(ff)?);
    let verticals = vertical_polynomials(f);
    let n_conics = if d % 2 == 0 { d - 1 } else { d };
    let conics: Vec<i128> = (0..n_conics as i128).collect();
    // Base point P = ((p:1), (q:1)) off D, with every conic missing D_sing.
    let mut chosen = None;
    'search: for p in candidates().take(PENCIL_SEARCH as usize) {
        if verticals.iter().any(|g| eval_int(g, p) == 0) {
            continue;
        }
        for qv in candidates().take(PENCIL_SEARCH as usize) {
            if eval_int(&ml, qv) == 0 || eval_int(&mf, qv) == 0 {
                continue;
            }
            let ok = conics.iter().all(|&a| {
                verticals
                    .iter()
                    .all(|g| misses_grid(a, p, qv, g, &ml) && misses_grid(a, p, qv, g, &mf))
            });
            if ok {
                chosen = Some((p, qv));
                break 'search;
            }
        }
    }
    let (p, qv) = chosen.ok_or(Error::SearchExhausted {
        bound: PENCIL_SEARCH as u64,
    })?;

    let ids = factor_ids(f);
    let mut components = Vec::new();
    let mut transversality = Vec::new();
    let mut s_factors = Vec::new();
    let h_orbits = [("L", &ml, l), ("F", &mf, ff)];
    for (i, &a) in conics.iter().enumerate() {
        let id = format!("C{}", i + 1);
        // a·X'U' + X'·v + y·U' expanded in xu, xv, yu, yv.
        let coeffs = [a, 1 - a * qv, 1 - a * p, a * p * qv - p - qv];
        let terms: Vec<(BigInt, String)> = ["x*u", "x*v", "y*u", "y*v"]
            .iter()
            .zip(coeffs)
            .filter(|(_, c)| *c != 0)
            .map(|(m, c)| (BigInt::from(c), m.to_string()))
            .collect();
        s_factors.push(format!("({})", join_terms(&terms)));
        for (g, (kid, k)) in verticals.iter().zip(ids.iter().zip(f.factor_fields())) {
            transversality.push(Crossing {
                c_component: id.clone(),
                d_orbit: kid.clone(),
                points: k.degree() as usize,
                misses_singular: misses_grid(a, p, qv, g, &ml) && misses_grid(a, p, qv, g, &mf),
            });
        }
        for (hid, m, h) in h_orbits {
            transversality.push(Crossing {
                c_component: id.clone(),
                d_orbit: hid.into(),
                points: h.degree() as usize,
                misses_singular: verticals.iter().all(|g| misses_grid(a, p, qv, g, m)),
            });
        }
        components.push(id);
    }
    if d % 2 == 0 {
        // The ruling line x = p·y through P.
        let id = "M".to_string();
        let terms = [(BigInt::one(), "x".to_string()), (BigInt::from(-p), "y".to_string())];
        let terms: Vec<_> = terms.into_iter().filter(|(c, _)| !c.is_zero()).collect();
        s_factors.insert(0, format!("({})", join_terms(&terms)));
        for kid in &ids {
            transversality.push(Crossing {
                c_component: id.clone(),
                d_orbit: kid.clone(),
                points: 0,
                misses_singular: true,
            });
        }
        for (hid, _, h) in h_orbits {
            transversality.push(Crossing {
                c_component: id.clone(),
                d_orbit: hid.into(),
                points: h.degree() as usize,
                misses_singular: true,
            });
        }
        components.insert(0, id);
    }
    let curve = ConicalCurve {
        components: components
            .iter()
            .map(|id| ComponentOrbit {
                id: id.clone(),
                size: 1,
                field: FieldSpec::Rational,
                conic: ConicLabel::Split,
            })
            .collect(),
        sing_points: vec![PointOrbit {
            id: "P".into(),
            size: 1,
            field: FieldSpec::Rational,
        }],
        branches: (0..components.len())
            .map(|o| Branch {
                src: Elem { orbit: o, index: 0 },
                dst: Elem { orbit: 0, index: 0 },
            })
            .collect(),
    };
    let r = format!(
        "({})*({})*({})",
        f.expanded(),
        homogeneous_text(&ml, "u", "v"),
        homogeneous_text(&mf, "u", "v")
    );
    let s = s_factors.join("*");
    let class_r = (d, (l.degree() + ff.degree()) as usize);
    let class_s = (n_conics + (d % 2 == 0) as usize, n_conics);
    let transverse = transversality.iter().all(|c| c.misses_singular);
    Ok(PencilReport {
        curve_c_model: curve,
        base_point: [[p, 1], [qv, 1]],
        tangent_direction: format!("(x - {p}*y)/y + (u - {qv}*v)/v = 0"),
        pencil: format!("lambda*{r} + mu*{s}"),
        r,
        s,
        class_r,
        class_s,
        class_check: class_r == class_s,
        transversality,
        transverse,
        smoothness_checked: false,
    })
}
