//! The `MS`-partite graph of `LS`-classes.
//!
//! Two classes from different `S`-classes are adjacent when their union
//! has maximum column weight at most 1. A one-per-partite selection is an
//! `MS`-clique exactly when the union of its classes has weight at most 1,
//! which makes the graph a handy oracle for the partition search on small
//! cases.

use std::fmt;

use crate::classes::{check_layering, ls_members};
use crate::error::{Error, Result};
use crate::pcm::{RowIndexSet, SparsePcm};

/// Vertex `v` is `C(m, s, l)` with `v = (m*S + s)*L + l`; the partite of
/// `v` is `v / L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGraph {
    block_rows: usize,
    lift: usize,
    layers: usize,
    shift: usize,
    adjacency: Vec<Vec<bool>>,
    edges: usize,
}

impl ClassGraph {
    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn partite_count(&self) -> usize {
        self.block_rows * self.shift
    }

    /// `(m, s, l)` of vertex `v`.
    pub fn vertex(&self, v: usize) -> (usize, usize, usize) {
        let p = v / self.layers;
        (p / self.shift, p % self.shift, v % self.layers)
    }

    pub fn index(&self, m: usize, s: usize, l: usize) -> usize {
        (m * self.shift + s) * self.layers + l
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u][v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            (u + 1..self.vertex_count())
                .filter(move |&v| self.adjacency[u][v])
                .map(move |v| (u, v))
        })
    }

    /// Row indices of the class at vertex `v`.
    pub fn members(&self, v: usize) -> Vec<usize> {
        let (m, s, l) = self.vertex(v);
        ls_members(m, s, l, self.layers, self.shift, self.lift).collect()
    }

    fn union(&self, vs: &[usize]) -> RowIndexSet {
        let mut rows: Vec<usize> = vs.iter().flat_map(|&v| self.members(v)).collect();
        rows.sort_unstable();
        RowIndexSet::from_sorted(rows)
    }

    fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(i, &u)| vs[i + 1..].iter().all(|&v| self.adjacency[u][v]))
    }
}

/// Builds the graph: vertices are all `MSL` classes, edges join classes
/// from different `S`-classes whose union has weight at most 1.
pub fn build_class_graph(h: &SparsePcm, layers: usize, shift: usize) -> Result<ClassGraph> {
    check_layering(h.lift(), layers, shift)?;
    let mut g = ClassGraph {
        block_rows: h.block_rows(),
        lift: h.lift(),
        layers,
        shift,
        adjacency: Vec::new(),
        edges: 0,
    };
    let n = h.block_rows() * shift * layers;
    g.adjacency = vec![vec![false; n]; n];
    for u in 0..n {
        for v in u + 1..n {
            if u / layers == v / layers {
                continue;
            }
            if h.column_weight(&g.union(&[u, v]), None).max <= 1 {
                g.adjacency[u][v] = true;
                g.adjacency[v][u] = true;
                g.edges += 1;
            }
        }
    }
    Ok(g)
}

/// Outcome of the exhaustive clique check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueReport {
    pub vertices: usize,
    pub edges: usize,
    pub selections: u64,
    pub cliques: u64,
    pub solutions: u64,
    /// First selection (as vertex indices) where the two tests disagree.
    pub counterexample: Option<Vec<usize>>,
}

impl CliqueReport {
    pub fn consistent(&self) -> bool {
        self.counterexample.is_none() && self.cliques == self.solutions
    }
}

impl fmt::Display for CliqueReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices {}", self.vertices)?;
        writeln!(f, "edges {}", self.edges)?;
        writeln!(f, "selections {}", self.selections)?;
        writeln!(f, "cliques {}", self.cliques)?;
        writeln!(f, "solutions {}", self.solutions)?;
        match &self.counterexample {
            Some(c) => {
                let s: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                writeln!(f, "counterexample {}", s.join(" "))
            }
            None => writeln!(f, "counterexample none"),
        }
    }
}

/// Default cap on `MSL` for [`verify_clique_equivalence`].
pub const DEFAULT_VERTEX_GUARD: usize = 20;

/// Walks every one-per-partite selection and compares "is an `MS`-clique"
/// with "union has weight at most 1".
pub fn verify_clique_equivalence(
    h: &SparsePcm,
    layers: usize,
    shift: usize,
    max_vertices: usize,
) -> Result<CliqueReport> {
    check_layering(h.lift(), layers, shift)?;
    let parts = h.block_rows() * shift;
    let n = parts * layers;
    if n > max_vertices {
        return Err(Error::TooLarge(format!(
            "{n} class vertices exceed the guard of {max_vertices}"
        )));
    }
    if parts < 2 {
        return Err(Error::InvalidSpec(
            "the clique test needs at least two S-classes".into(),
        ));
    }
    let g = build_class_graph(h, layers, shift)?;
    let mut report = CliqueReport {
        vertices: n,
        edges: g.edge_count(),
        selections: 0,
        cliques: 0,
        solutions: 0,
        counterexample: None,
    };
    let mut sel = vec![0usize; parts];
    loop {
        let vs: Vec<usize> = sel.iter().enumerate().map(|(p, &l)| p * layers + l).collect();
        let clique = g.is_clique(&vs);
        let solution = h.column_weight(&g.union(&vs), None).max <= 1;
        report.selections += 1;
        report.cliques += clique as u64;
        report.solutions += solution as u64;
        if clique != solution && report.counterexample.is_none() {
            report.counterexample = Some(vs);
        }
        // odometer step, last partite fastest
        let mut p = parts;
        loop {
            if p == 0 {
                return Ok(report);
            }
            p -= 1;
            sel[p] += 1;
            if sel[p] < layers {
                break;
            }
            sel[p] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::BaseMatrix;
    use crate::codes;
    use crate::pcm::expand;
    use proptest::prelude::*;

    #[test]
    fn example_graph() {
        let h = expand(&codes::example());
        let g = build_class_graph(&h, 2, 2).unwrap();
        assert_eq!((g.vertex_count(), g.partite_count()), (8, 4));
        let d = [g.index(0, 0, 0), g.index(0, 1, 0), g.index(1, 0, 0), g.index(1, 1, 1)];
        assert!(g.is_clique(&d));
        assert_eq!(h.column_weight(&g.union(&d), None).max, 1);
        for (u, v) in g.edges() {
            assert_ne!(u / 2, v / 2);
            assert!(g.has_edge(v, u));
        }
        let r = verify_clique_equivalence(&h, 2, 2, DEFAULT_VERTEX_GUARD).unwrap();
        assert!(r.consistent());
        assert!(r.cliques >= 1);
        assert_eq!(r.selections, 16);
    }

    #[test]
    fn singleton_classes() {
        let h = expand(&codes::example());
        assert_eq!(build_class_graph(&h, 4, 1).unwrap().vertex_count(), 8);
    }

    #[test]
    fn edgeless_graph() {
        // both block rows are identical circulants in one column: every pair
        // of classes from different blocks collides
        let (b, _) = BaseMatrix::parse("2 2 2\n0 1\n1 0\n").unwrap();
        let h = expand(&b);
        let g = build_class_graph(&h, 1, 1).unwrap();
        assert_eq!(g.edge_count(), 0);
        let r = verify_clique_equivalence(&h, 1, 1, 20).unwrap();
        assert_eq!((r.cliques, r.solutions), (0, 0));
    }

    #[test]
    fn guard_and_divisibility() {
        let h = expand(&codes::example());
        assert!(matches!(
            verify_clique_equivalence(&h, 4, 1, 4),
            Err(Error::TooLarge(_))
        ));
        assert!(matches!(build_class_graph(&h, 3, 1), Err(Error::Divisibility(_))));
    }

    fn toy_matrix() -> impl Strategy<Value = BaseMatrix> {
        prop::collection::vec(-1i64..4, 4).prop_map(|e| {
            BaseMatrix::from_entries(2, 2, 4, &e).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn cliques_match_solutions(b in toy_matrix(), li in 0usize..2, si in 0usize..2) {
            let h = expand(&b);
            let layers = [2usize, 4][li];
            let shift = if layers == 2 { [1usize, 2][si] } else { 1 };
            let r = verify_clique_equivalence(&h, layers, shift, 20).unwrap();
            prop_assert!(r.consistent(), "{}", r);
        }
    }
}
