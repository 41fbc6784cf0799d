//! Linear algebra over Z/p^k: kernels and subgroup orders via Smith-style
//! reduction with minimal-valuation pivots.

use crate::arith::{inv_mod, valuation};

#[derive(Debug, Clone, Copy)]
pub struct PrimePower {
    pub p: u64,
    pub k: u32,
    pub m: u64,
}

impl PrimePower {
    pub fn new(p: u64, k: u32) -> PrimePower {
        PrimePower { p, k, m: p.pow(k) }
    }

    fn val(&self, x: u64) -> u32 {
        if x == 0 {
            self.k
        } else {
            valuation(x as i128, self.p).min(self.k)
        }
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.m as u128) as u64
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.m - b) % self.m
    }

    fn unit_inverse(&self, u: u64) -> u64 {
        inv_mod(u as i128, self.m as i128).expect("unit") as u64
    }

    pub fn reduce(&self, x: i64) -> u64 {
        x.rem_euclid(self.m as i64) as u64
    }
}

/// Diagonalize `a` (rows × cols) in place; returns the pivot valuations and,
/// if `track` is set, the column transform U with a_original·U = a_final.
fn diagonalize(r: &PrimePower, a: &mut [Vec<u64>], cols: usize, track: bool) -> (Vec<u32>, Vec<Vec<u64>>) {
    let rows = a.len();
    let mut u: Vec<Vec<u64>> = if track {
        (0..cols).map(|i| (0..cols).map(|j| (i == j) as u64).collect()).collect()
    } else {
        vec![]
    };
    let mut vals = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Minimal valuation entry in the remaining block.
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                let v = r.val(x);
                if v < r.k && best.is_none_or(|b| v < b.0) {
                    best = Some((v, i, j));
                    if v == 0 {
                        break;
                    }
                }
            }
            if best.is_some_and(|b| b.0 == 0) {
                break;
            }
        }
        let Some((e, pi, pj)) = best else { break };
        a.swap(t, pi);
        if pj != t {
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            if track {
                for row in u.iter_mut() {
                    row.swap(t, pj);
                }
            }
        }
        // Scale column t so the pivot is exactly p^e.
        let pe = r.p.pow(e);
        let unit = a[t][t] / pe;
        let inv = r.unit_inverse(unit % r.m);
        for row in a.iter_mut() {
            row[t] = r.mul(row[t], inv);
        }
        if track {
            for row in u.iter_mut() {
                row[t] = r.mul(row[t], inv);
            }
        }
        // Clear column t below/above with row operations.
        for i in 0..rows {
            if i == t || a[i][t] == 0 {
                continue;
            }
            let f = a[i][t] / pe;
            for j in 0..cols {
                let s = r.mul(f, a[t][j]);
                a[i][j] = r.sub(a[i][j], s);
            }
        }
        // Clear row t with column operations.
        for j in 0..cols {
            if j == t || a[t][j] == 0 {
                continue;
            }
            let f = a[t][j] / pe;
            for row in a.iter_mut() {
                let s = r.mul(f, row[t]);
                row[j] = r.sub(row[j], s);
            }
            if track {
                for row in u.iter_mut() {
                    let s = r.mul(f, row[t]);
                    row[j] = r.sub(row[j], s);
                }
            }
        }
        vals.push(e);
        t += 1;
    }
    (vals, u)
}

/// Generators of {x : a·x = 0} in (Z/p^k)^cols.
pub fn kernel(r: &PrimePower, a: &[Vec<u64>], cols: usize) -> Vec<Vec<u64>> {
    let mut a = a.to_vec();
    let (vals, u) = diagonalize(r, &mut a, cols, true);
    let column = |j: usize, scale: u64| -> Vec<u64> { (0..cols).map(|i| r.mul(u[i][j], scale)).collect() };
    let mut out = Vec::new();
    for (t, &e) in vals.iter().enumerate() {
        if e > 0 {
            out.push(column(t, r.p.pow(r.k - e)));
        }
    }
    for j in vals.len()..cols {
        out.push(column(j, 1));
    }
    out
}

/// log_p of the order of the subgroup generated by the given vectors.
pub fn subgroup_log_order(r: &PrimePower, gens: &[Vec<u64>], cols: usize) -> u32 {
    if gens.is_empty() {
        return 0;
    }
    let mut a = gens.to_vec();
    let (vals, _) = diagonalize(r, &mut a, cols, false);
    vals.iter().map(|&e| r.k - e).sum()
}

/// Exponents a_1 ≥ a_2 ≥ … with K/I ≅ ⊕ Z/p^{a_j}, for subgroups I ⊆ K.
pub fn quotient_invariants(r: &PrimePower, k_gens: &[Vec<u64>], i_gens: &[Vec<u64>], cols: usize) -> Vec<u32> {
    // s_j = log|p^j·K + I|; the number of factors of exponent > j is s_j − s_{j+1}.
    let scaled = |j: u32| -> Vec<Vec<u64>> {
        let f = r.p.pow(j) % r.m;
        k_gens
            .iter()
            .map(|g| g.iter().map(|&x| r.mul(x, f)).collect())
            .chain(i_gens.iter().cloned())
            .collect()
    };
    let s: Vec<u32> = (0..=r.k).map(|j| subgroup_log_order(r, &scaled(j), cols)).collect();
    let above = |j: u32| if j < r.k { s[j as usize] - s[j as usize + 1] } else { 0 };
    let mut exps = Vec::new();
    for e in (1..=r.k).rev() {
        for _ in 0..above(e - 1) - above(e) {
            exps.push(e);
        }
    }
    exps
}

/// Reduce v modulo the row space of an echelon basis over a prime field.
pub fn reduce_mod_span(p: u64, basis: &[(usize, Vec<u64>)], v: &[u64]) -> Vec<u64> {
    let mut v = v.to_vec();
    for (pivot, row) in basis {
        let c = v[*pivot];
        if c != 0 {
            for (x, &y) in v.iter_mut().zip(row) {
                *x = (*x + p - (c * y) % p) % p;
            }
        }
    }
    v
}

/// Insert v into a reduced echelon basis over F_p (pivot entries are 1 and
/// pivots are cleared from all other rows); false if v is dependent.
pub fn echelon_insert(p: u64, basis: &mut Vec<(usize, Vec<u64>)>, v: &[u64]) -> bool {
    let mut v = reduce_mod_span(p, basis, v);
    let Some(pivot) = v.iter().position(|&x| x != 0) else {
        return false;
    };
    let inv = inv_mod(v[pivot] as i128, p as i128).unwrap() as u64;
    for x in v.iter_mut() {
        *x = (*x * inv) % p;
    }
    for (_, row) in basis.iter_mut() {
        let c = row[pivot];
        if c != 0 {
            for (x, &y) in row.iter_mut().zip(&v) {
                *x = (*x + p - (c * y) % p) % p;
            }
        }
    }
    basis.push((pivot, v));
    true
}
