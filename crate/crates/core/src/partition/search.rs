use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::classes::{check_layering, factors, ls_members};
use crate::error::Result;
use crate::pcm::SparsePcm;

use super::eval::{
    layer_distance, min_layers_for_distance, omega_lower_bound, shifted_sum,
};
use super::scheme::PartitionScheme;

/// Search method for partition problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Enumerative,
    Greedy,
}

/// Limits on the enumerative search. Nodes are class additions; the node
/// cap applies to each `S` separately, the time limit to the whole call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Budget {
    pub time_limit: Option<Duration>,
    pub max_nodes_per_shift: Option<u64>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn seconds(secs: f64) -> Self {
        Self {
            time_limit: Some(Duration::from_secs_f64(secs)),
            max_nodes_per_shift: None,
        }
    }

    fn start(&self) -> Limits {
        Limits {
            deadline: self.time_limit.map(|t| Instant::now() + t),
            node_cap: self.max_nodes_per_shift,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Limits {
    deadline: Option<Instant>,
    node_cap: Option<u64>,
}

impl Limits {
    fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Result of a minimum-`omega` search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub scheme: PartitionScheme,
    pub omega: u32,
    /// True when `omega` reached the lower bound or every candidate was
    /// examined.
    pub proven_optimal: bool,
    pub budget_exhausted: bool,
    pub nodes: u64,
}

/// Per-class contributions to the restricted columns (`j mod Z < LS`,
/// column `nZ + r` stored at `n*LS + r`) for fixed `(L, S)`.
struct ClassTable {
    layers: usize,
    positions: usize,
    columns: usize,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<u32>,
}

impl ClassTable {
    fn build(h: &SparsePcm, layers: usize, shift: usize) -> Self {
        let z = h.lift();
        let width = layers * shift;
        let positions = h.block_rows() * shift;
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut buf: Vec<(u32, u32)> = Vec::new();
        for p in 0..positions {
            let (m, s) = (p / shift, p % shift);
            for l in 0..layers {
                buf.clear();
                for x in ls_members(m, s, l, layers, shift, z) {
                    for (c, v) in h.row(x) {
                        let r = c % z;
                        if r < width {
                            buf.push((((c / z) * width + r) as u32, v));
                        }
                    }
                }
                buf.sort_unstable_by_key(|e| e.0);
                for &(c, v) in &buf {
                    if cols.len() > *offsets.last().unwrap() && *cols.last().unwrap() == c {
                        *vals.last_mut().unwrap() += v;
                    } else {
                        cols.push(c);
                        vals.push(v);
                    }
                }
                offsets.push(cols.len());
            }
        }
        Self {
            layers,
            positions,
            columns: h.block_cols() * width,
            offsets,
            cols,
            vals,
        }
    }

    fn entries(&self, p: usize, l: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        let k = p * self.layers + l;
        let range = self.offsets[k]..self.offsets[k + 1];
        self.cols[range.clone()]
            .iter()
            .zip(&self.vals[range])
            .map(|(&c, &v)| (c as usize, v))
    }
}

/// Column counters over the restricted columns.
struct Counter<'a> {
    table: &'a ClassTable,
    counts: Vec<u32>,
}

impl<'a> Counter<'a> {
    fn new(table: &'a ClassTable) -> Self {
        Self {
            table,
            counts: vec![0; table.columns],
        }
    }

    /// `omega` after adding class `(p, l)` to a set whose `omega` is `cur`.
    fn peek(&self, p: usize, l: usize, cur: u32) -> u32 {
        self.table
            .entries(p, l)
            .map(|(c, v)| self.counts[c] + v)
            .fold(cur, u32::max)
    }

    fn add(&mut self, p: usize, l: usize) {
        for (c, v) in self.table.entries(p, l) {
            self.counts[c] += v;
        }
    }

    fn remove(&mut self, p: usize, l: usize) {
        for (c, v) in self.table.entries(p, l) {
            self.counts[c] -= v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    Complete,
    Target,
    NodeCap,
    Time,
}

struct ShiftSearch {
    found: Option<(Vec<usize>, u32)>,
    stop: Stop,
    nodes: u64,
}

const TIME_CHECK_MASK: u64 = 0x3ff;

fn over_budget(nodes: u64, limits: &Limits) -> Option<Stop> {
    if limits.node_cap.is_some_and(|cap| nodes > cap) {
        return Some(Stop::NodeCap);
    }
    if nodes & TIME_CHECK_MASK == 0 && limits.timed_out() {
        return Some(Stop::Time);
    }
    None
}

/// Depth-first search in odometer order for the first selector array with
/// `omega < bound`, then for strictly better ones, stopping once
/// `omega <= stop_at`.
fn branch_and_bound(table: &ClassTable, bound: u32, stop_at: u32, limits: &Limits) -> ShiftSearch {
    if bound <= 1 {
        return ShiftSearch {
            found: None,
            stop: Stop::Complete,
            nodes: 0,
        };
    }
    if bound == 2 {
        return clique_search(table, limits);
    }
    let (pn, ln) = (table.positions, table.layers);
    let mut counter = Counter::new(table);
    let mut bound = bound;
    let mut sel = vec![0usize; pn];
    let mut next = vec![0usize; pn + 1];
    let mut maxes = vec![0u32; pn + 1];
    let mut found = None;
    let mut nodes = 0u64;
    let mut level = 0usize;
    let mut switch = false;
    let stop = 'search: loop {
        if level == pn {
            bound = maxes[pn];
            found = Some((sel.clone(), bound));
            if bound <= stop_at {
                break Stop::Target;
            }
            if bound == 2 {
                // only omega <= 1 remains: switch to the pairwise search
                switch = true;
                break Stop::Complete;
            }
            level -= 1;
            counter.remove(level, sel[level]);
            continue;
        }
        let mut placed = false;
        while next[level] < ln {
            let l = next[level];
            next[level] += 1;
            let w = counter.peek(level, l, maxes[level]);
            if w >= bound {
                continue;
            }
            nodes += 1;
            if let Some(s) = over_budget(nodes, limits) {
                break 'search s;
            }
            counter.add(level, l);
            sel[level] = l;
            maxes[level + 1] = w;
            level += 1;
            next[level] = 0;
            placed = true;
            break;
        }
        if !placed {
            if level == 0 {
                break Stop::Complete;
            }
            level -= 1;
            counter.remove(level, sel[level]);
        }
    };
    if switch {
        let rest = clique_search(table, limits);
        let nodes = nodes + rest.nodes;
        return ShiftSearch {
            found: rest.found.or(found),
            stop: rest.stop,
            nodes,
        };
    }
    ShiftSearch { found, stop, nodes }
}

/// Search for `omega <= 1`: a clique with one class per position. Every
/// placement prunes the domains of later positions (forward checking),
/// which is exact because `omega <= 1` is a pairwise condition.
fn clique_search(table: &ClassTable, limits: &Limits) -> ShiftSearch {
    let (pn, ln) = (table.positions, table.layers);
    let mut counter = Counter::new(table);
    let mut alive = vec![true; pn * ln];
    let mut trail: Vec<usize> = Vec::new();
    for p in 0..pn {
        for l in 0..ln {
            alive[p * ln + l] = counter.peek(p, l, 0) <= 1;
        }
        if !alive[p * ln..(p + 1) * ln].iter().any(|&a| a) {
            return ShiftSearch {
                found: None,
                stop: Stop::Complete,
                nodes: 0,
            };
        }
    }
    let mut sel = vec![0usize; pn];
    let mut next = vec![0usize; pn + 1];
    let mut marks = vec![0usize; pn];
    let mut nodes = 0u64;
    let mut level = 0usize;
    let stop = 'search: loop {
        if level == pn {
            break Stop::Target;
        }
        let mut placed = false;
        while next[level] < ln {
            let l = next[level];
            next[level] += 1;
            if !alive[level * ln + l] {
                continue;
            }
            nodes += 1;
            if let Some(s) = over_budget(nodes, limits) {
                break 'search s;
            }
            counter.add(level, l);
            let mark = trail.len();
            let mut wiped = false;
            for q in level + 1..pn {
                let mut any = false;
                for lq in 0..ln {
                    let k = q * ln + lq;
                    if alive[k] {
                        if counter.peek(q, lq, 0) > 1 {
                            alive[k] = false;
                            trail.push(k);
                        } else {
                            any = true;
                        }
                    }
                }
                if !any {
                    wiped = true;
                    break;
                }
            }
            if wiped {
                for k in trail.drain(mark..) {
                    alive[k] = true;
                }
                counter.remove(level, l);
                continue;
            }
            sel[level] = l;
            marks[level] = mark;
            level += 1;
            next[level] = 0;
            placed = true;
            break;
        }
        if !placed {
            if level == 0 {
                break Stop::Complete;
            }
            level -= 1;
            for k in trail.drain(marks[level]..) {
                alive[k] = true;
            }
            counter.remove(level, sel[level]);
        }
    };
    let found = (stop == Stop::Target).then(|| {
        let omega = counter.counts.iter().copied().max().unwrap_or(0);
        (sel, omega)
    });
    ShiftSearch { found, stop, nodes }
}

/// One pass of the greedy scan: each position takes the smallest `l`
/// minimising the running `omega`.
fn greedy_shift(table: &ClassTable) -> (Vec<usize>, u32) {
    let mut counter = Counter::new(table);
    let mut cur = 0;
    let mut sel = Vec::with_capacity(table.positions);
    for p in 0..table.positions {
        let (mut best_l, mut best_w) = (0, u32::MAX);
        for l in 0..table.layers {
            let w = counter.peek(p, l, cur);
            if w < best_w {
                best_l = l;
                best_w = w;
            }
        }
        counter.add(p, best_l);
        sel.push(best_l);
        cur = best_w;
    }
    (sel, cur)
}

fn zero_selector_omega(table: &ClassTable) -> u32 {
    let mut counter = Counter::new(table);
    let mut cur = 0;
    for p in 0..table.positions {
        cur = counter.peek(p, 0, cur);
        counter.add(p, 0);
    }
    cur
}

/// Minimum-`omega` partition by exhaustive search over `S` (increasing)
/// and the selector arrays, pruned by the incumbent. Ties go to the
/// smaller `S`, then the lexicographically smaller selector array.
pub fn solve_enumerative(h: &SparsePcm, layers: usize, budget: Budget) -> Result<SearchOutcome> {
    check_layering(h.lift(), layers, 1)?;
    let limits = budget.start();
    let lb = omega_lower_bound(h.max_column_weight(), layers);

    let zero = zero_selector_omega(&ClassTable::build(h, layers, 1));
    let mut best = (vec![0; h.block_rows()], zero, 1usize);
    let mut nodes = 0;
    let mut exhausted = false;
    let mut reached = best.1 <= lb;
    for shift in factors(h.lift() / layers) {
        if reached {
            break;
        }
        let table = ClassTable::build(h, layers, shift);
        let run = branch_and_bound(&table, best.1, lb, &limits);
        nodes += run.nodes;
        if let Some((sel, omega)) = run.found {
            if omega < best.1 {
                best = (sel, omega, shift);
            }
        }
        match run.stop {
            Stop::Target => reached = true,
            Stop::Complete => {}
            Stop::NodeCap => exhausted = true,
            Stop::Time => {
                exhausted = true;
                break;
            }
        }
        log::debug!("enumerative L={layers} S={shift}: omega={} nodes={}", best.1, run.nodes);
    }
    let scheme = PartitionScheme::from_selectors(h.block_rows(), h.lift(), layers, best.2, best.0)?;
    Ok(SearchOutcome {
        scheme,
        omega: best.1,
        proven_optimal: reached || best.1 <= lb || !exhausted,
        budget_exhausted: exhausted,
        nodes,
    })
}

/// Greedy partition for every `S`, keeping the best (ties to smaller `S`).
pub fn solve_greedy(h: &SparsePcm, layers: usize) -> Result<SearchOutcome> {
    check_layering(h.lift(), layers, 1)?;
    let lb = omega_lower_bound(h.max_column_weight(), layers);
    let runs: Vec<(usize, Vec<usize>, u32)> = factors(h.lift() / layers)
        .into_par_iter()
        .map(|shift| {
            let table = ClassTable::build(h, layers, shift);
            let (sel, omega) = greedy_shift(&table);
            (shift, sel, omega)
        })
        .collect();
    let (shift, sel, omega) = runs
        .into_iter()
        .reduce(|a, b| if b.2 < a.2 { b } else { a })
        .expect("S = 1 is always a candidate");
    Ok(SearchOutcome {
        scheme: PartitionScheme::from_selectors(h.block_rows(), h.lift(), layers, shift, sel)?,
        omega,
        proven_optimal: omega <= lb,
        budget_exhausted: false,
        nodes: 0,
    })
}

/// Result of a search for a scheme with a prescribed layer distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceOutcome {
    /// A scheme with layer distance at least `k`, if one was found.
    pub scheme: Option<PartitionScheme>,
    /// Best scheme seen, judged by `omega` of the shifted sum.
    pub best: PartitionScheme,
    pub best_omega: u32,
    pub budget_exhausted: bool,
    pub nodes: u64,
}

fn distance_search(
    h: &SparsePcm,
    layers: usize,
    k: usize,
    method: Method,
    limits: &Limits,
) -> Result<DistanceOutcome> {
    check_layering(h.lift(), layers, 1)?;
    let k = k.max(1);
    let shifts = factors(h.lift() / layers);
    let attempt = |shift: usize| -> (usize, Vec<usize>, u32, Option<Stop>, u64) {
        let sum = shifted_sum(h, shift, k);
        let table = ClassTable::build(sum.matrix(), layers, shift);
        match method {
            Method::Greedy => {
                let (sel, omega) = greedy_shift(&table);
                (shift, sel, omega, None, 0)
            }
            Method::Enumerative => {
                let zero = zero_selector_omega(&table);
                if zero <= 1 {
                    return (shift, vec![0; table.positions], zero, None, 0);
                }
                let run = clique_search(&table, limits);
                match run.found {
                    Some((sel, omega)) => (shift, sel, omega, Some(run.stop), run.nodes),
                    None => (shift, vec![0; table.positions], zero, Some(run.stop), run.nodes),
                }
            }
        }
    };
    let runs: Vec<_> = match method {
        Method::Greedy => shifts.into_par_iter().map(attempt).collect(),
        Method::Enumerative => {
            let mut out = Vec::new();
            for shift in shifts {
                let run = attempt(shift);
                let done = run.2 <= 1 || run.3 == Some(Stop::Time);
                out.push(run);
                if done {
                    break;
                }
            }
            out
        }
    };
    let exhausted = runs
        .iter()
        .any(|r| matches!(r.3, Some(Stop::NodeCap | Stop::Time)));
    let nodes = runs.iter().map(|r| r.4).sum();
    let (shift, sel, omega, _, _) = runs
        .into_iter()
        .reduce(|a, b| if b.2 < a.2 { b } else { a })
        .expect("S = 1 is always a candidate");
    let best = PartitionScheme::from_selectors(h.block_rows(), h.lift(), layers, shift, sel)?;
    let scheme = (omega <= 1).then(|| best.clone());
    if let Some(s) = &scheme {
        debug_assert!(layer_distance(h, s).is_ok_and(|d| d >= k.min(layers - 1)));
    }
    Ok(DistanceOutcome {
        scheme,
        best,
        best_omega: omega,
        budget_exhausted: exhausted,
        nodes,
    })
}

/// Looks for a scheme with layer distance at least `k` by requiring
/// `omega(H^(S,k)_{T0}) <= 1`, trying `S` in increasing order.
pub fn solve_with_distance(
    h: &SparsePcm,
    layers: usize,
    k: usize,
    method: Method,
    budget: Budget,
) -> Result<DistanceOutcome> {
    distance_search(h, layers, k, method, &budget.start())
}

/// Result of [`find_min_layers`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinLayersOutcome {
    /// Smallest admissible layer count and its scheme.
    pub found: Option<(usize, PartitionScheme)>,
    /// `L_LB`, or `None` when no factor of `Z` is large enough.
    pub lower_bound: Option<usize>,
    /// `(L, best omega of the shifted sum)` for every layer count tried.
    pub tried: Vec<(usize, u32)>,
    pub budget_exhausted: bool,
}

/// Smallest factor `L >= L_LB` of `Z` admitting layer distance `k`. Each
/// layer count gets the full budget; a layer count whose search runs out
/// of budget is skipped.
pub fn find_min_layers(h: &SparsePcm, k: usize, method: Method, budget: Budget) -> Result<MinLayersOutcome> {
    let lower_bound = min_layers_for_distance(h.max_column_weight(), h.lift(), k.max(1));
    let mut out = MinLayersOutcome {
        found: None,
        lower_bound,
        tried: Vec::new(),
        budget_exhausted: false,
    };
    let Some(start) = lower_bound else {
        return Ok(out);
    };
    for layers in factors(h.lift()).into_iter().filter(|&f| f >= start) {
        let run = distance_search(h, layers, k, method, &budget.start())?;
        out.tried.push((layers, run.best_omega));
        out.budget_exhausted |= run.budget_exhausted;
        if let Some(s) = run.scheme {
            out.found = Some((layers, s));
            break;
        }
    }
    Ok(out)
}
