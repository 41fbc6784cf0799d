//! The incidence graph X(C): vertices are geometric components and singular
//! points, edges are branches oriented from component to point.

use std::collections::VecDeque;

use serde::Serialize;

use crate::curve::{element_names, ConicalCurve, Geometry};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceGraph {
    /// Vertices 0..n_comp are components, n_comp.. are singular points.
    pub n_comp: usize,
    pub n_point: usize,
    /// (component vertex, point vertex) per edge.
    pub edges: Vec<(usize, usize)>,
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphInvariants {
    pub vertices: usize,
    pub edges: usize,
    pub connected: bool,
    pub bipartite_ok: bool,
    pub is_tree: bool,
    pub h1_rank: usize,
}

/// A permutation of vertices together with the induced permutation of edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphAutomorphism {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl IncidenceGraph {
    pub fn new(n_comp: usize, n_point: usize, edges: Vec<(usize, usize)>) -> IncidenceGraph {
        let names = (0..n_comp)
            .map(|i| format!("L{i}"))
            .chain((0..n_point).map(|i| format!("P{i}")))
            .collect();
        IncidenceGraph {
            n_comp,
            n_point,
            edges,
            names,
        }
    }

    pub fn of_curve(c: &ConicalCurve) -> IncidenceGraph {
        let edges = c
            .branches
            .iter()
            .map(|b| (c.comp_vertex(b.src), c.point_vertex(b.dst)))
            .collect();
        let mut g = IncidenceGraph::new(c.n_comp_elems(), c.n_point_elems(), edges);
        g.names = element_names(c).into_values().collect();
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.n_comp + self.n_point
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            adj[a].push((b, i));
            adj[b].push((a, i));
        }
        adj
    }

    /// Connected component label of every vertex.
    fn component_labels(&self) -> (usize, Vec<usize>) {
        let adj = self.adjacency();
        let mut label = vec![usize::MAX; self.vertex_count()];
        let mut count = 0;
        for s in 0..self.vertex_count() {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &(w, _) in &adj[u] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        q.push_back(w);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().0
    }

    /// Rank of H₁ = E − V + #components.
    pub fn h1_rank(&self) -> usize {
        self.edge_count() + self.component_count() - self.vertex_count()
    }

    pub fn invariants(&self) -> GraphInvariants {
        let connected = self.component_count() == 1;
        let bipartite_ok = self
            .edges
            .iter()
            .all(|&(a, b)| a < self.n_comp && b >= self.n_comp && b < self.vertex_count());
        let h1 = self.h1_rank();
        GraphInvariants {
            vertices: self.vertex_count(),
            edges: self.edge_count(),
            connected,
            bipartite_ok,
            is_tree: connected && h1 == 0,
            h1_rank: h1,
        }
    }

    /// Fundamental cycles of a BFS spanning forest, one per chord; each is an
    /// edge vector with coefficient +1 on its chord.
    pub fn cycle_basis(&self) -> (Vec<usize>, Vec<Vec<i64>>) {
        let adj = self.adjacency();
        let n = self.vertex_count();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        let mut tree = vec![false; self.edge_count()];
        for s in 0..n {
            if depth[s] != usize::MAX {
                continue;
            }
            depth[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &(w, e) in &adj[u] {
                    if depth[w] == usize::MAX {
                        depth[w] = depth[u] + 1;
                        parent[w] = Some((u, e));
                        tree[e] = true;
                        q.push_back(w);
                    }
                }
            }
        }
        // Signed edge vector of the tree path from u up to the root.
        let to_root = |mut u: usize, sign: i64, z: &mut Vec<i64>| {
            while let Some((p, e)) = parent[u] {
                // Edge e is oriented comp → point; walking u → p.
                let forward = self.edges[e].0 == u;
                z[e] += if forward { sign } else { -sign };
                u = p;
            }
        };
        let mut chords = Vec::new();
        let mut cycles = Vec::new();
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if tree[e] {
                continue;
            }
            let mut z = vec![0i64; self.edge_count()];
            z[e] = 1;
            // Chord goes a → b; close it with the path b → root → a.
            to_root(b, 1, &mut z);
            to_root(a, -1, &mut z);
            chords.push(e);
            cycles.push(z);
        }
        (chords, cycles)
    }

    /// Matrix of an edge permutation on the cycle basis (column j is the
    /// image of cycle j). Orientation is preserved because automorphisms
    /// map components to components.
    pub fn homology_matrix(&self, edge_perm: &[usize]) -> Vec<Vec<i64>> {
        let (chords, cycles) = self.cycle_basis();
        let r = chords.len();
        let mut m = vec![vec![0i64; r]; r];
        for (j, z) in cycles.iter().enumerate() {
            let mut image = vec![0i64; self.edge_count()];
            for (e, &coef) in z.iter().enumerate() {
                image[edge_perm[e]] += coef;
            }
            for (i, &ch) in chords.iter().enumerate() {
                m[i][j] = image[ch];
            }
        }
        m
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph X {\n");
        for v in 0..self.vertex_count() {
            let shape = if v < self.n_comp { "box" } else { "ellipse" };
            s.push_str(&format!("  \"{}\" [shape={shape}];\n", self.names[v]));
        }
        for &(a, b) in &self.edges {
            s.push_str(&format!("  \"{}\" -> \"{}\";\n", self.names[a], self.names[b]));
        }
        s.push_str("}\n");
        s
    }
}

/// Vertex and edge permutations of the acting group's generators.
pub fn curve_action(c: &ConicalCurve, geo: &Geometry) -> Vec<GraphAutomorphism> {
    geo.model
        .generators()
        .iter()
        .map(|g| {
            let mut vertices = vec![0; c.n_comp_elems() + c.n_point_elems()];
            for (o, comp) in c.components.iter().enumerate() {
                for index in 0..comp.size {
                    let e = crate::curve::Elem { orbit: o, index };
                    vertices[c.comp_vertex(e)] = c.comp_vertex(geo.act_comp(g, e));
                }
            }
            for (o, p) in c.sing_points.iter().enumerate() {
                for index in 0..p.size {
                    let e = crate::curve::Elem { orbit: o, index };
                    vertices[c.point_vertex(e)] = c.point_vertex(geo.act_point(g, e));
                }
            }
            let edges = c
                .branches
                .iter()
                .map(|b| geo.branch_id(&geo.act_branch(g, b)).expect("equivariant branches"))
                .collect();
            GraphAutomorphism { vertices, edges }
        })
        .collect()
}

/// Integer matrices of the generators on H₁(X(C), Z).
pub fn homology_action(c: &ConicalCurve) -> Result<Vec<Vec<Vec<i64>>>> {
    let geo = Geometry::new(c)?;
    let g = IncidenceGraph::of_curve(c);
    Ok(curve_action(c, &geo)
        .iter()
        .map(|a| g.homology_matrix(&a.edges))
        .collect())
}

/// A vertex of a tree fixed by every given automorphism: the center found by
/// leaf stripping. A two-vertex center joins a component to a point, and
/// automorphisms preserve that bipartition, so both are fixed; the singular
/// point is returned.
pub fn tree_fixed_vertex(g: &IncidenceGraph, autos: &[Vec<usize>]) -> Result<usize> {
    let inv = g.invariants();
    if !inv.is_tree {
        return Err(Error::Precondition("the incidence graph is not a tree".into()));
    }
    let n = g.vertex_count();
    let adj = g.adjacency();
    let mut degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut removed = vec![false; n];
    let mut remaining = n;
    let mut leaves: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    while remaining > 2 {
        let mut next = Vec::new();
        for &v in &leaves {
            removed[v] = true;
            remaining -= 1;
            for &(w, _) in &adj[v] {
                if !removed[w] {
                    degree[w] -= 1;
                    if degree[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        leaves = next;
    }
    let center: Vec<usize> = (0..n).filter(|&v| !removed[v]).collect();
    let v = *center
        .iter()
        .find(|&&v| v >= g.n_comp)
        .unwrap_or(&center[0]);
    if autos.iter().any(|a| a[v] != v) {
        return Err(Error::Defect(format!("tree center {} is not fixed", g.names[v])));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_cycle() -> IncidenceGraph {
        // Components 0, 1; points 2, 3; each component meets both points.
        IncidenceGraph::new(2, 2, vec![(0, 2), (0, 3), (1, 2), (1, 3)])
    }

    #[test]
    fn four_cycle_homology() {
        let g = four_cycle();
        assert_eq!(g.h1_rank(), 1);
        // Swap the two components: edges (0,2)↔(1,2), (0,3)↔(1,3).
        let m = g.homology_matrix(&[2, 3, 0, 1]);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0][0].abs(), 1);
        assert_eq!(m[0][0] * m[0][0], 1);
        // Swapping components reverses the cycle.
        assert_eq!(m[0][0], -1);
        // Swapping both components and points preserves it.
        assert_eq!(g.homology_matrix(&[3, 2, 1, 0])[0][0], 1);
    }

    #[test]
    fn cycles_are_closed() {
        let g = IncidenceGraph::new(
            3,
            3,
            vec![(0, 3), (1, 3), (2, 3), (0, 4), (1, 4), (2, 5), (0, 5)],
        );
        let (_, cycles) = g.cycle_basis();
        assert_eq!(cycles.len(), g.h1_rank());
        for z in cycles {
            let mut boundary = vec![0i64; g.vertex_count()];
            for (e, &c) in z.iter().enumerate() {
                boundary[g.edges[e].1] += c;
                boundary[g.edges[e].0] -= c;
            }
            assert!(boundary.iter().all(|&b| b == 0));
        }
    }

    #[test]
    fn path_center() {
        // component 0 – point 2 – component 1, components swapped.
        let g = IncidenceGraph::new(2, 1, vec![(0, 2), (1, 2)]);
        assert_eq!(tree_fixed_vertex(&g, &[vec![1, 0, 2]]).unwrap(), 2);
        // A single edge: both center vertices fixed, the point is preferred.
        let e = IncidenceGraph::new(1, 1, vec![(0, 1)]);
        assert_eq!(tree_fixed_vertex(&e, &[]).unwrap(), 1);
        // A lone smooth component.
        let one = IncidenceGraph::new(1, 0, vec![]);
        assert_eq!(one.invariants().h1_rank, 0);
        assert_eq!(tree_fixed_vertex(&one, &[]).unwrap(), 0);
    }

    #[test]
    fn non_tree_rejected() {
        assert!(matches!(
            tree_fixed_vertex(&four_cycle(), &[]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn dot_output() {
        let g = IncidenceGraph::new(1, 1, vec![(0, 1)]);
        assert_eq!(
            g.to_dot(),
            "digraph X {\n  \"L0\" [shape=box];\n  \"P0\" [shape=ellipse];\n  \"L0\" -> \"P0\";\n}\n"
        );
    }
}
