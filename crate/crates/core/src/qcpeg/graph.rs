//! Lifted Tanner graphs stored at the base level.
//!
//! A cyclic edge set `(c_i, v_j)_Z` is kept as the check node `i` joined to
//! the first variable node `v_{nZ}` of block column `n`; the other `Z - 1`
//! edges follow by rotation. Node ids used by the searches are `j` for
//! variable nodes and `NZ + i` for check nodes.

use std::collections::VecDeque;

use crate::base::BaseMatrix;
use crate::error::{Error, Result};

/// Quasi-cyclic Tanner graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    block_rows: usize,
    block_cols: usize,
    lift: usize,
    // per block column: sorted check indices adjacent to v_{nZ}
    first_vn: Vec<Vec<usize>>,
    row_ces: Vec<usize>,
}

impl TannerGraph {
    pub fn new(block_rows: usize, block_cols: usize, lift: usize) -> Self {
        Self {
            block_rows,
            block_cols,
            lift,
            first_vn: vec![Vec::new(); block_cols],
            row_ces: vec![0; block_rows],
        }
    }

    /// Graph of an existing base matrix. Shift `v` in cell `(m, n)` joins
    /// `v_{nZ}` to check `mZ + (Z - v) mod Z`.
    pub fn from_base(b: &BaseMatrix) -> Self {
        let z = b.lift();
        let mut g = Self::new(b.rows(), b.cols(), z);
        for m in 0..b.rows() {
            for n in 0..b.cols() {
                for &v in b.cell(m, n) {
                    g.first_vn[n].push(m * z + (z - v) % z);
                    g.row_ces[m] += 1;
                }
            }
        }
        for list in &mut g.first_vn {
            list.sort_unstable();
        }
        g
    }

    pub fn to_base(&self) -> BaseMatrix {
        let z = self.lift;
        let mut cells = vec![Vec::new(); self.block_rows * self.block_cols];
        for (n, list) in self.first_vn.iter().enumerate() {
            for &i in list {
                cells[(i / z) * self.block_cols + n].push((z - i % z) % z);
            }
        }
        BaseMatrix::new(self.block_rows, self.block_cols, z, cells)
            .expect("graph cells are valid shifts")
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn lift(&self) -> usize {
        self.lift
    }

    /// Number of lifted edges.
    pub fn edge_count(&self) -> usize {
        self.ces_count() * self.lift
    }

    /// Number of cyclic edge sets.
    pub fn ces_count(&self) -> usize {
        self.row_ces.iter().sum()
    }

    /// `N(v_{nZ})`, sorted.
    pub fn first_neighbors(&self, block_col: usize) -> &[usize] {
        &self.first_vn[block_col]
    }

    /// `N(v_j)` for any variable node: `pi^z` of the block-first list.
    pub fn vn_neighbors(&self, j: usize) -> Vec<usize> {
        let z = self.lift;
        let (n, r) = (j / z, j % z);
        let mut out: Vec<usize> = self.first_vn[n]
            .iter()
            .map(|&i| i - i % z + (i % z + r) % z)
            .collect();
        out.sort_unstable();
        out
    }

    /// `N(c_i)`, sorted.
    pub fn cn_neighbors(&self, i: usize) -> Vec<usize> {
        let z = self.lift;
        let (b, r) = (i / z, i % z);
        let mut out = Vec::new();
        for (n, list) in self.first_vn.iter().enumerate() {
            for &x in list.iter().filter(|&&x| x / z == b) {
                out.push(n * z + (r + z - x % z) % z);
            }
        }
        out.sort_unstable();
        out
    }

    /// Degree of every check node in block row `m`.
    pub fn row_degree(&self, m: usize) -> usize {
        self.row_ces[m]
    }

    pub fn column_degree(&self, n: usize) -> usize {
        self.first_vn[n].len()
    }

    pub fn contains(&self, check: usize, block_col: usize) -> bool {
        self.first_vn[block_col].binary_search(&check).is_ok()
    }

    /// True when block column `n` already has an edge into block row `m`.
    pub fn cell_used(&self, block_row: usize, block_col: usize) -> bool {
        self.first_vn[block_col]
            .iter()
            .any(|&x| x / self.lift == block_row)
    }

    /// Adds `(c_check, v_{nZ})_Z`.
    pub fn add_ces(&mut self, check: usize, block_col: usize) -> Result<()> {
        if check >= self.block_rows * self.lift || block_col >= self.block_cols {
            return Err(Error::Dimension(format!(
                "edge ({check}, block {block_col}) out of range"
            )));
        }
        let list = &mut self.first_vn[block_col];
        match list.binary_search(&check) {
            Ok(_) => Err(Error::InvalidSpec(format!(
                "check {check} already joined to block column {block_col}"
            ))),
            Err(pos) => {
                list.insert(pos, check);
                self.row_ces[check / self.lift] += 1;
                Ok(())
            }
        }
    }

    fn num_vn(&self) -> usize {
        self.block_cols * self.lift
    }

    fn node_count(&self) -> usize {
        (self.block_rows + self.block_cols) * self.lift
    }
}

/// Unreachable / no cycle.
pub const INFINITE: u32 = u32::MAX;

/// Base-level adjacency used to walk the lifted graph, with an optional
/// extra cyclic edge set and one lifted edge removed.
pub(crate) struct Walker<'a> {
    g: &'a TannerGraph,
    // per block row: (block column, check offset of v_{nZ})
    rows: Vec<Vec<(usize, usize)>>,
    extra: Option<(usize, usize)>,
    skip: Option<(usize, usize)>,
    dist: Vec<u32>,
    queue: VecDeque<usize>,
    scratch: Vec<usize>,
}

impl<'a> Walker<'a> {
    pub(crate) fn new(g: &'a TannerGraph) -> Self {
        let z = g.lift;
        let mut rows = vec![Vec::new(); g.block_rows];
        for (n, list) in g.first_vn.iter().enumerate() {
            for &i in list {
                rows[i / z].push((n, i % z));
            }
        }
        Self {
            g,
            rows,
            extra: None,
            skip: None,
            dist: vec![INFINITE; g.node_count()],
            queue: VecDeque::new(),
            scratch: Vec::new(),
        }
    }

    /// Temporarily adds `(c_check, v_{nZ})_Z` and hides its lifted edge
    /// `(c_check, v_{nZ})`.
    pub(crate) fn with_candidate(&mut self, check: usize, block_col: usize) {
        self.extra = Some((check, block_col));
        self.skip = Some((check, block_col * self.g.lift));
    }

    pub(crate) fn clear_candidate(&mut self) {
        self.extra = None;
        self.skip = None;
    }

    fn for_each_neighbor(&self, node: usize, mut f: impl FnMut(usize)) {
        let z = self.g.lift;
        let nv = self.g.num_vn();
        if node < nv {
            let (n, r) = (node / z, node % z);
            let mut visit = |i: usize| {
                let c = i - i % z + (i % z + r) % z;
                if self.skip != Some((c, node)) {
                    f(nv + c);
                }
            };
            for &i in &self.g.first_vn[n] {
                visit(i);
            }
            if let Some((i, en)) = self.extra {
                if en == n {
                    visit(i);
                }
            }
        } else {
            let c = node - nv;
            let (b, r) = (c / z, c % z);
            let mut visit = |n: usize, a: usize| {
                let v = n * z + (r + z - a) % z;
                if self.skip != Some((c, v)) {
                    f(v);
                }
            };
            for &(n, a) in &self.rows[b] {
                visit(n, a);
            }
            if let Some((i, en)) = self.extra {
                if i / z == b {
                    visit(en, i % z);
                }
            }
        }
    }

    /// Breadth-first distances from `source`, stopping early once `target`
    /// is settled or the frontier passes `cap`. Returns the distance to
    /// `target` (or [`INFINITE`]).
    pub(crate) fn bfs(&mut self, source: usize, target: Option<usize>, cap: u32) -> u32 {
        self.dist.fill(INFINITE);
        self.queue.clear();
        self.dist[source] = 0;
        self.queue.push_back(source);
        while let Some(u) = self.queue.pop_front() {
            let du = self.dist[u];
            if du >= cap {
                break;
            }
            let mut found = false;
            let mut next = std::mem::take(&mut self.scratch);
            next.clear();
            self.for_each_neighbor(u, |w| next.push(w));
            for &w in &next {
                if self.dist[w] == INFINITE {
                    self.dist[w] = du + 1;
                    if Some(w) == target {
                        found = true;
                    }
                    self.queue.push_back(w);
                }
            }
            self.scratch = next;
            if found {
                break;
            }
        }
        target.map_or(0, |t| self.dist[t])
    }

    pub(crate) fn distances(&self) -> &[u32] {
        &self.dist
    }

    /// Length of the shortest cycle through `root` (BFS cross edges).
    fn shortest_cycle_at(&mut self, root: usize) -> u32 {
        let n = self.g.node_count();
        let mut parent = vec![usize::MAX; n];
        self.dist.fill(INFINITE);
        self.queue.clear();
        self.dist[root] = 0;
        self.queue.push_back(root);
        let mut best = INFINITE;
        while let Some(u) = self.queue.pop_front() {
            let du = self.dist[u];
            if 2 * du + 1 >= best {
                break;
            }
            let mut next = std::mem::take(&mut self.scratch);
            next.clear();
            self.for_each_neighbor(u, |w| next.push(w));
            for &w in &next {
                if w == parent[u] {
                    continue;
                }
                if self.dist[w] == INFINITE {
                    self.dist[w] = du + 1;
                    parent[w] = u;
                    self.queue.push_back(w);
                } else {
                    best = best.min(du + self.dist[w] + 1);
                }
            }
            self.scratch = next;
        }
        best
    }
}

/// Length of the shortest cycle through the edge `(c_check, v_{nZ})` once
/// the cyclic edge set `(c_check, v_{nZ})_Z` is added, or [`INFINITE`].
pub fn shortest_cycle_through(g: &TannerGraph, check: usize, block_col: usize) -> u32 {
    let mut w = Walker::new(g);
    exact_cycle(&mut w, check, block_col, INFINITE)
}

/// Exact cycle length through the candidate edge, given that some cycle of
/// length `upper` is already known to exist.
pub(crate) fn exact_cycle(w: &mut Walker<'_>, check: usize, block_col: usize, upper: u32) -> u32 {
    let nv = w.g.num_vn();
    w.with_candidate(check, block_col);
    let cap = if upper == INFINITE { INFINITE } else { upper - 1 };
    let d = w.bfs(block_col * w.g.lift, Some(nv + check), cap);
    w.clear_candidate();
    if d == INFINITE {
        upper
    } else {
        (d + 1).min(upper)
    }
}

/// Girth of the lifted graph, or [`INFINITE`] when it is a forest. Every
/// cycle can be rotated onto a block-first variable node, so those are the
/// only roots needed.
pub fn girth(g: &TannerGraph) -> u32 {
    let mut w = Walker::new(g);
    (0..g.block_cols)
        .map(|n| w.shortest_cycle_at(n * g.lift))
        .min()
        .unwrap_or(INFINITE)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::codes;
    use crate::pcm::expand;
    use proptest::prelude::*;

    /// Plain adjacency lists of the lifted graph, built from the expanded
    /// matrix. Parallel edges appear once per copy.
    pub(crate) fn lifted_adjacency(b: &BaseMatrix) -> Vec<Vec<usize>> {
        let h = expand(b);
        let nv = h.num_cols();
        let mut adj = vec![Vec::new(); nv + h.num_rows()];
        for i in 0..h.num_rows() {
            for (c, v) in h.row(i) {
                for _ in 0..v {
                    adj[c].push(nv + i);
                    adj[nv + i].push(c);
                }
            }
        }
        adj
    }

    // Iterative deepening over simple paths: the shortest closed simple
    // walk from `start` back to itself.
    fn dfs(adj: &[Vec<usize>], path: &mut Vec<usize>, on: &mut [bool], depth: usize, limit: usize) -> bool {
        let u = *path.last().unwrap();
        for (k, &w) in adj[u].iter().enumerate() {
            // do not walk back over the same edge copy
            if path.len() >= 2 && w == path[path.len() - 2] {
                let copies = adj[u].iter().filter(|&&x| x == w).count();
                let first = adj[u].iter().position(|&x| x == w).unwrap();
                if copies == 1 || k == first {
                    continue;
                }
            }
            if w == path[0] && depth + 1 == limit && limit >= 2 {
                return true;
            }
            if !on[w] && depth + 1 < limit {
                on[w] = true;
                path.push(w);
                if dfs(adj, path, on, depth + 1, limit) {
                    return true;
                }
                path.pop();
                on[w] = false;
            }
        }
        false
    }

    pub(crate) fn oracle_girth(b: &BaseMatrix, max: usize) -> u32 {
        let adj = lifted_adjacency(b);
        for limit in (2..=max).step_by(2) {
            for s in 0..adj.len() {
                let mut on = vec![false; adj.len()];
                on[s] = true;
                if dfs(&adj, &mut vec![s], &mut on, 0, limit) {
                    return limit as u32;
                }
            }
        }
        INFINITE
    }

    // Shortest cycle through edge (c, v): shortest path between the two
    // endpoints with that edge removed, by plain BFS on adjacency lists.
    fn oracle_cycle_through(b: &BaseMatrix, check: usize, vn: usize) -> u32 {
        let adj = lifted_adjacency(b);
        let nv = b.cols() * b.lift();
        let (s, t) = (vn, nv + check);
        let mut dist = vec![INFINITE; adj.len()];
        let mut q = VecDeque::from([s]);
        dist[s] = 0;
        let mut skipped = false;
        while let Some(u) = q.pop_front() {
            for &w in &adj[u] {
                if u == s && w == t && !skipped {
                    skipped = true;
                    continue;
                }
                if dist[w] == INFINITE {
                    dist[w] = dist[u] + 1;
                    q.push_back(w);
                }
            }
        }
        if dist[t] == INFINITE {
            INFINITE
        } else {
            dist[t] + 1
        }
    }

    #[test]
    fn base_round_trip() {
        let b = codes::b0();
        let g = TannerGraph::from_base(&b);
        assert_eq!(g.to_base(), b);
        assert_eq!(g.ces_count(), 79);
        let h = expand(&b);
        let nb = h.column_neighbors();
        for j in [0, 1, 383, 384, 5000] {
            assert_eq!(g.vn_neighbors(j), nb[j]);
        }
        for i in [0, 7, 1919] {
            let row: Vec<usize> = h.row_cols(i).iter().map(|&c| c as usize).collect();
            assert_eq!(g.cn_neighbors(i), row);
        }
    }

    #[test]
    fn empty_graph_has_no_cycles() {
        let g = TannerGraph::new(2, 3, 4);
        assert_eq!(shortest_cycle_through(&g, 5, 1), INFINITE);
        assert_eq!(girth(&g), INFINITE);
    }

    #[test]
    fn example_girth_matches_oracle() {
        let b = codes::example();
        let g = TannerGraph::from_base(&b);
        assert_eq!(girth(&g), oracle_girth(&b, 16));
    }

    #[test]
    fn two_shifts_in_one_cell() {
        // shifts 0 and d in a single cell: the cycle length is 2 * ord(d)
        for (z, d, ord) in [(8usize, 2usize, 4u32), (6, 3, 2), (5, 1, 5), (8, 4, 2)] {
            let (b, _) = BaseMatrix::parse(&format!("1 1 {z}\n0,{d}\n")).unwrap();
            let g = TannerGraph::from_base(&b);
            assert_eq!(girth(&g), 2 * ord, "z={z} d={d}");
            assert_eq!(oracle_girth(&b, 12), 2 * ord);
            let single = TannerGraph::from_base(&BaseMatrix::parse(&format!("1 1 {z}\n0\n")).unwrap().0);
            let check = (z - d) % z;
            assert_eq!(shortest_cycle_through(&single, check, 0), 2 * ord);
        }
    }

    fn small_base() -> impl Strategy<Value = BaseMatrix> {
        (1usize..3, 2usize..4, prop::sample::select(vec![3usize, 4, 5])).prop_flat_map(|(m, n, z)| {
            prop::collection::vec(-1i64..z as i64, m * n)
                .prop_map(move |e| BaseMatrix::from_entries(m, n, z, &e).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn cycle_through_candidate_matches_oracle(b in small_base(), pick in 0usize..64) {
            let g = TannerGraph::from_base(&b);
            let z = b.lift();
            let free: Vec<(usize, usize)> = (0..b.rows() * z)
                .flat_map(|i| (0..b.cols()).map(move |n| (i, n)))
                .filter(|&(i, n)| !g.contains(i, n))
                .collect();
            prop_assume!(!free.is_empty());
            let (i, n) = free[pick % free.len()];
            let mut with = g.clone();
            with.add_ces(i, n).unwrap();
            let expect = oracle_cycle_through(&with.to_base(), i, n * z);
            prop_assert_eq!(shortest_cycle_through(&g, i, n), expect);
        }

        #[test]
        fn girth_matches_oracle(b in small_base()) {
            let ours = girth(&TannerGraph::from_base(&b));
            let oracle = oracle_girth(&b, 12);
            if ours <= 12 {
                prop_assert_eq!(ours, oracle);
            } else {
                prop_assert_eq!(oracle, INFINITE);
            }
        }
    }
}
