//! Quasi-cyclic progressive edge growth.
//!
//! Block columns are processed in order; for each edge slot one check node
//! is chosen and its whole cyclic edge set is added. The choice applies, in
//! order: structural admissibility (strategy dependent), longest shortest
//! cycle through the new edges, smallest check degree, and a seeded
//! uniform pick.

mod graph;
mod verify;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::base::BaseMatrix;
use crate::error::{Error, Result};

pub use graph::{girth, shortest_cycle_through, TannerGraph, INFINITE};
pub use verify::{verify_construction, VerifyReport, VerifyTarget};

use graph::{exact_cycle, Walker};

/// Check-node admissibility rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Plain QC-PEG: any check not yet joined to the column.
    Girth,
    /// Keeps `|{x in N(v_j) : x = 0 mod L}| <= omega_LB` for every `j`.
    OmegaBound,
    /// Keeps layer distance at least `k` for the canonical scheme.
    Distance(usize),
}

impl Strategy {
    /// 1, 2 or 3.
    pub fn number(&self) -> u8 {
        match self {
            Strategy::Girth => 1,
            Strategy::OmegaBound => 2,
            Strategy::Distance(_) => 3,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Girth => write!(f, "1"),
            Strategy::OmegaBound => write!(f, "2"),
            Strategy::Distance(k) => write!(f, "3 (k={k})"),
        }
    }
}

/// Inputs of a construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionSpec {
    pub block_rows: usize,
    pub block_cols: usize,
    pub lift: usize,
    pub layers: usize,
    /// Degree of each block column, in processing order.
    pub degrees: Vec<usize>,
    pub strategy: Strategy,
    pub seed: u64,
    /// Permit several shifts in one cell.
    pub allow_multi_edge: bool,
}

impl ConstructionSpec {
    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// `ceil(max d / L)`.
    pub fn omega_lb(&self) -> usize {
        self.max_degree().div_ceil(self.layers.max(1))
    }

    /// `floor(L / max d)`.
    pub fn d_ub(&self) -> usize {
        match self.max_degree() {
            0 => self.layers,
            d => self.layers / d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n, z) = (self.block_rows, self.block_cols, self.lift);
        if m == 0 || n == 0 || z == 0 {
            return Err(Error::InvalidSpec("M, N and Z must be positive".into()));
        }
        if self.degrees.len() != n {
            return Err(Error::InvalidSpec(format!(
                "{} degrees given for {n} block columns",
                self.degrees.len()
            )));
        }
        let cap = if self.allow_multi_edge { m * z } else { m };
        if self.max_degree() > cap {
            return Err(Error::InvalidSpec(format!(
                "degree {} exceeds the {cap} available check positions",
                self.max_degree()
            )));
        }
        if self.strategy != Strategy::Girth && (self.layers == 0 || z % self.layers != 0) {
            return Err(Error::InvalidSpec(format!(
                "L = {} must divide Z = {z}",
                self.layers
            )));
        }
        if let Strategy::Distance(k) = self.strategy {
            if k == 0 || k > self.d_ub() || k > z {
                return Err(Error::InvalidSpec(format!(
                    "layer distance {k} outside [1, d_UB = {}]",
                    self.d_ub()
                )));
            }
        }
        Ok(())
    }
}

/// Criterion 1: checks that may join block column `block_col`, ascending.
pub fn admissible_checks(g: &TannerGraph, spec: &ConstructionSpec, block_col: usize) -> Vec<usize> {
    (0..g.block_rows() * g.lift())
        .filter(|&i| admissible(g, spec, block_col, i))
        .collect()
}

fn admissible(g: &TannerGraph, spec: &ConstructionSpec, n: usize, i: usize) -> bool {
    if g.contains(i, n) {
        return false;
    }
    let z = g.lift();
    let nb = g.first_neighbors(n);
    if !spec.allow_multi_edge && nb.iter().any(|&x| x / z == i / z) {
        return false;
    }
    let l = spec.layers;
    match spec.strategy {
        Strategy::Girth => true,
        // x in N(v_{nZ}) with x = -r (mod L) is x = 0 (mod L) in N(v_{nZ+r})
        Strategy::OmegaBound => nb.iter().filter(|&&x| x % l == i % l).count() < spec.omega_lb(),
        Strategy::Distance(k) => nb.iter().all(|&x| {
            let d = (i % l + l - x % l) % l;
            let residues_apart = d >= k && d <= l - k;
            let same_block_apart = x / z != i / z || {
                let e = (i % z + z - x % z) % z;
                !(1..k).contains(&e) && !(1..k).contains(&((z - e) % z))
            };
            residues_apart && same_block_apart
        }),
    }
}

fn add3(a: u32, b: u32, c: u32) -> u32 {
    a.saturating_add(b).saturating_add(c)
}

/// Cycles through the new edge that use three or more new edges have
/// length at least 12 when every cell holds one shift, so bounds up to
/// this value are exact.
const EXACT_UP_TO: u32 = 12;

/// Criterion 2: the candidates whose shortest new cycle is longest.
///
/// Distances from `v_{nZ}` and from each `c_{bZ}` give, by rotation, the
/// shortest cycle using one or two new edges; cases that bound cannot
/// settle fall back to a breadth-first search in the augmented graph.
fn longest_cycle_survivors(
    g: &TannerGraph,
    n: usize,
    cands: &[usize],
    exact_only: bool,
) -> (Vec<usize>, u32) {
    let z = g.lift();
    let nv = g.block_cols() * z;
    let mut walker = Walker::new(g);
    let bounds: Vec<u32> = if exact_only {
        vec![INFINITE; cands.len()]
    } else {
        walker.bfs(n * z, None, INFINITE);
        let dv = walker.distances().to_vec();
        let mut dc: Vec<Option<Vec<u32>>> = vec![None; g.block_rows()];
        for &i in cands {
            let b = i / z;
            if dc[b].is_none() {
                walker.bfs(nv + b * z, None, INFINITE);
                dc[b] = Some(walker.distances()[nv + b * z..nv + (b + 1) * z].to_vec());
            }
        }
        cands
            .iter()
            .map(|&i| {
                let (b, a) = (i / z, i % z);
                let dcc = dc[b].as_ref().unwrap();
                let vc = |x: usize| dv[nv + b * z + x % z];
                let mut best = dv[nv + i].saturating_add(1);
                for t in 1..z {
                    best = best
                        .min(add3(2, dcc[t], dv[n * z + t]))
                        .min(add3(2, vc(a + z - t), vc(a + t)));
                }
                best
            })
            .collect()
    };
    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&x, &y| bounds[y].cmp(&bounds[x]));
    let mut best = 0;
    let mut survivors = Vec::new();
    for idx in order {
        let ub = bounds[idx];
        if ub < best {
            break;
        }
        let value = if !exact_only && ub <= EXACT_UP_TO {
            ub
        } else {
            exact_cycle(&mut walker, cands[idx], n, ub)
        };
        if value > best {
            best = value;
            survivors.clear();
        }
        if value == best {
            survivors.push(cands[idx]);
        }
    }
    survivors.sort_unstable();
    (survivors, best)
}

/// Picks the check node for the next slot of block column `block_col`.
pub fn select_check(
    g: &TannerGraph,
    spec: &ConstructionSpec,
    block_col: usize,
    slot: usize,
    rng: &mut impl Rng,
) -> Result<usize> {
    let cands = admissible_checks(g, spec, block_col);
    if cands.is_empty() {
        return Err(Error::NoCandidate {
            column: block_col,
            slot,
        });
    }
    let (survivors, _) = longest_cycle_survivors(g, block_col, &cands, spec.allow_multi_edge);
    let min_deg = survivors
        .iter()
        .map(|&i| g.row_degree(i / g.lift()))
        .min()
        .unwrap();
    let survivors: Vec<usize> = survivors
        .into_iter()
        .filter(|&i| g.row_degree(i / g.lift()) == min_deg)
        .collect();
    Ok(survivors[rng.random_range(0..survivors.len())])
}

/// Runs the construction and returns the Tanner graph.
pub fn construct_graph(spec: &ConstructionSpec) -> Result<TannerGraph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut g = TannerGraph::new(spec.block_rows, spec.block_cols, spec.lift);
    for n in 0..spec.block_cols {
        for slot in 0..spec.degrees[n] {
            let i = select_check(&g, spec, n, slot, &mut rng)?;
            log::trace!("column {n} slot {slot}: check {i}");
            g.add_ces(i, n)?;
        }
    }
    Ok(g)
}

/// Runs the construction and returns the base matrix.
pub fn construct(spec: &ConstructionSpec) -> Result<BaseMatrix> {
    construct_graph(spec).map(|g| g.to_base())
}

/// Comment header recording how a matrix was built and checked.
pub fn construction_header(spec: &ConstructionSpec, report: Option<&VerifyReport>) -> String {
    let degrees: Vec<String> = spec.degrees.iter().map(|d| d.to_string()).collect();
    let mut out = format!(
        "# qc-peg M={} N={} Z={} L={}\n# degrees {}\n# strategy {} seed {}{}\n",
        spec.block_rows,
        spec.block_cols,
        spec.lift,
        spec.layers,
        degrees.join(","),
        spec.strategy,
        spec.seed,
        if spec.allow_multi_edge { " multi-edge" } else { "" }
    );
    if let Some(r) = report {
        out.push_str(&format!("# verification {}\n", r.summary()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::Strategy;
    use rand::Rng;
    use crate::codes;
    use crate::pcm::expand;
    use proptest::prelude::*;

    fn spec(m: usize, n: usize, z: usize, l: usize, d: Vec<usize>, s: Strategy, seed: u64) -> ConstructionSpec {
        ConstructionSpec {
            block_rows: m,
            block_cols: n,
            lift: z,
            layers: l,
            degrees: d,
            strategy: s,
            seed,
            allow_multi_edge: false,
        }
    }

    #[test]
    fn single_circulant() {
        let s = spec(1, 1, 7, 1, vec![1], Strategy::Girth, 3);
        let b = construct(&s).unwrap();
        assert_eq!(b.cell(0, 0).len(), 1);
    }

    #[test]
    fn degrees_are_met_and_deterministic() {
        let s = spec(3, 6, 16, 4, vec![1, 2, 3, 2, 3, 2], Strategy::Girth, 11);
        let a = construct(&s).unwrap();
        assert_eq!(a.column_degrees(), s.degrees);
        assert_eq!(construct(&s).unwrap(), a);
        let other = construct(&ConstructionSpec { seed: 12, ..s.clone() }).unwrap();
        assert_eq!(other.column_degrees(), s.degrees);
    }

    #[test]
    fn invalid_specs() {
        let bad_l = spec(2, 2, 8, 3, vec![1, 1], Strategy::OmegaBound, 0);
        assert!(matches!(construct(&bad_l), Err(Error::InvalidSpec(_))));
        let bad_k = spec(2, 2, 8, 4, vec![2, 2], Strategy::Distance(3), 0);
        assert!(matches!(construct(&bad_k), Err(Error::InvalidSpec(_))));
        let too_heavy = spec(2, 2, 8, 4, vec![3, 1], Strategy::Girth, 0);
        assert!(matches!(construct(&too_heavy), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn strategy_two_filters_even_orbit() {
        // L = 2, omega_LB = 1 and v_0 already joined to an even check: every
        // even check is excluded
        let s = spec(2, 1, 4, 2, vec![2], Strategy::OmegaBound, 0);
        let mut g = TannerGraph::new(2, 1, 4);
        g.add_ces(2, 0).unwrap();
        let ok = admissible_checks(&g, &s, 0);
        assert_eq!(ok, vec![5, 7]);
    }

    // Strategy-2 admissibility written on the lifted neighbourhoods:
    // every v_{nZ+r} keeps at most omega_LB checks = 0 (mod L).
    fn direct_strategy_two(g: &TannerGraph, s: &ConstructionSpec, n: usize, cand: Option<usize>) -> bool {
        let z = g.lift();
        let l = s.layers;
        if let Some(i) = cand {
            if g.contains(i, n) || (!s.allow_multi_edge && g.cell_used(i / z, n)) {
                return false;
            }
        }
        (0..z).all(|r| {
            let mut nb = g.vn_neighbors(n * z + r);
            nb.extend(cand.map(|i| i - i % z + (i % z + r) % z));
            nb.iter().filter(|&&x| x % l == 0).count() <= s.omega_lb()
        })
    }

    // Strategy-3 admissibility on lifted neighbourhoods.
    fn direct_strategy_three(g: &TannerGraph, s: &ConstructionSpec, n: usize, cand: Option<usize>, k: usize) -> bool {
        let z = g.lift();
        let l = s.layers;
        if let Some(i) = cand {
            if g.contains(i, n) || (!s.allow_multi_edge && g.cell_used(i / z, n)) {
                return false;
            }
        }
        let nb = |r: usize| {
            let mut v = g.vn_neighbors(n * z + r % z);
            v.extend(cand.map(|i| i - i % z + (i % z + r) % z));
            v
        };
        (0..z).all(|r| {
            let base = nb(r);
            let disjoint = (1..k).all(|t| nb(r + t).iter().all(|x| !base.contains(x)));
            let mut union: Vec<usize> = (0..k).flat_map(|t| nb(r + t)).collect();
            union.sort_unstable();
            union.dedup();
            disjoint && union.iter().filter(|&&x| x % l == 0).count() <= 1
        })
    }

    fn random_graph(m: usize, n: usize, z: usize, picks: &[usize]) -> TannerGraph {
        let mut g = TannerGraph::new(m, n, z);
        for (idx, &p) in picks.iter().enumerate() {
            let col = idx % n;
            let i = p % (m * z);
            if !g.cell_used(i / z, col) {
                g.add_ces(i, col).unwrap();
            }
        }
        g
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn residue_rule_matches_all_shift_rule(picks in prop::collection::vec(0usize..1000, 0..6), li in 0usize..3, cand in 0usize..1000) {
            let (m, n, z) = (3, 2, 12);
            let l = [2usize, 3, 6][li];
            let g = random_graph(m, n, z, &picks);
            let s = spec(m, n, z, l, vec![3, 3], Strategy::OmegaBound, 0);
            prop_assume!(direct_strategy_two(&g, &s, 0, None));
            let i = cand % (m * z);
            prop_assert_eq!(admissible(&g, &s, 0, i), direct_strategy_two(&g, &s, 0, Some(i)));
        }

        #[test]
        fn distance_rule_matches_lifted_rule(picks in prop::collection::vec(0usize..1000, 0..4), k in 1usize..3, cand in 0usize..1000) {
            let (m, n, z, l) = (3, 2, 12, 12);
            let g = random_graph(m, n, z, &picks);
            let s = spec(m, n, z, l, vec![3, 3], Strategy::Distance(k), 0);
            prop_assume!(direct_strategy_three(&g, &s, 1, None, k));
            let i = cand % (m * z);
            prop_assert_eq!(admissible(&g, &s, 1, i), direct_strategy_three(&g, &s, 1, Some(i), k));
        }

        #[test]
        fn fast_cycle_values_are_exact(picks in prop::collection::vec(0usize..1000, 1..8), col in 0usize..3) {
            let (m, n, z) = (3, 3, 8);
            let g = random_graph(m, n, z, &picks);
            let s = spec(m, n, z, 1, vec![3; 3], Strategy::Girth, 0);
            let cands = admissible_checks(&g, &s, col);
            prop_assume!(!cands.is_empty());
            let (fast, best) = longest_cycle_survivors(&g, col, &cands, false);
            let (slow, best_slow) = longest_cycle_survivors(&g, col, &cands, true);
            prop_assert_eq!(best, best_slow);
            prop_assert_eq!(&fast, &slow);
            for &i in &fast {
                prop_assert_eq!(shortest_cycle_through(&g, i, col), best);
            }
        }
    }

    #[test]
    fn strategy_outputs_verify_small() {
        for seed in 0..4 {
            let s2 = spec(3, 8, 24, 6, vec![1, 2, 2, 3, 3, 3, 2, 3], Strategy::OmegaBound, seed);
            let b = construct(&s2).unwrap();
            assert!(verify_construction(&b, 6, VerifyTarget::OmegaBound).unwrap().canonical);
            let s3 = spec(3, 8, 24, 12, vec![1, 2, 2, 3, 3, 3, 2, 3], Strategy::Distance(2), seed);
            let b = construct(&s3).unwrap();
            let r = verify_construction(&b, 12, VerifyTarget::Distance(2)).unwrap();
            assert!(r.canonical, "{}", r.summary());
            let h = expand(&b);
            let canon = crate::partition::PartitionScheme::canonical(3, 24, 12).unwrap();
            assert!(crate::partition::layer_distance(&h, &canon).unwrap() >= 2);
        }
    }

    #[test]
    fn peg_girth_not_worse_than_random() {
        // random baseline: uniform pick among admissible checks
        let s = spec(3, 6, 8, 1, vec![2, 2, 2, 3, 3, 3], Strategy::Girth, 5);
        let peg = girth(&construct_graph(&s).unwrap());
        let mut worse = 0;
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut g = TannerGraph::new(3, 6, 8);
            for n in 0..6 {
                for _ in 0..s.degrees[n] {
                    let c = admissible_checks(&g, &s, n);
                    let i = c[rng.random_range(0..c.len())];
                    g.add_ces(i, n).unwrap();
                }
            }
            if girth(&g) > peg {
                worse += 1;
            }
        }
        assert_eq!(worse, 0);
    }

    #[test]
    fn b0_degrees_fit_strategies() {
        let degrees = codes::b0().column_degrees();
        let s = spec(5, 27, 384, 6, degrees.clone(), Strategy::OmegaBound, 0);
        assert_eq!(s.omega_lb(), 1);
        s.validate().unwrap();
        let s3 = spec(5, 27, 384, 12, degrees, Strategy::Distance(2), 0);
        assert_eq!(s3.d_ub(), 2);
        s3.validate().unwrap();
    }
}
