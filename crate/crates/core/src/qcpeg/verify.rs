//! Residue checks of a base matrix against the canonical layering.
//!
//! With `T0 = {i : i = 0 (mod L)}`, VN `v_{nZ+r}` meets layer `l` once per
//! check `x` of `v_{nZ}` with `x + r = l (mod L)`, so column weights depend
//! only on residues of the block-first neighbourhoods. A row shift `j_m` per
//! block row replaces the residue of `x` by `x - j_m`, which is the same as
//! shifting row block `m` of the code.

use std::fmt;

use crate::base::BaseMatrix;
use crate::error::{Error, Result};

use super::graph::TannerGraph;

/// Property to confirm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyTarget {
    /// `omega = ceil(omega(H) / L)`.
    OmegaBound,
    /// Layer distance at least `k` with `omega = 1` on every window.
    Distance(usize),
}

impl fmt::Display for VerifyTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyTarget::OmegaBound => write!(f, "omega-lb"),
            VerifyTarget::Distance(k) => write!(f, "distance {k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub layers: usize,
    pub target: VerifyTarget,
    pub omega_lb: usize,
    /// The canonical scheme passes as is.
    pub canonical: bool,
    /// First per-row shift vector that passes, when the canonical one fails.
    pub row_shifts: Option<Vec<usize>>,
    /// First block column failing the canonical check.
    pub failing_column: Option<usize>,
    /// Same-block spacing violated; no row shift can repair it.
    pub structural: bool,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.canonical || self.row_shifts.is_some()
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "L={} target {} omega_lb {}: ",
            self.layers, self.target, self.omega_lb
        );
        if self.canonical {
            s.push_str("pass (canonical)");
        } else if let Some(j) = &self.row_shifts {
            let j: Vec<String> = j.iter().map(|v| v.to_string()).collect();
            s.push_str(&format!("pass (row shifts {})", j.join(" ")));
        } else {
            s.push_str("fail");
            if let Some(n) = self.failing_column {
                s.push_str(&format!(" (column {n}"));
                if self.structural {
                    s.push_str(", same-block spacing");
                }
                s.push(')');
            }
        }
        s
    }
}

struct Checker {
    lift: usize,
    layers: usize,
    omega_lb: usize,
    window: usize,
    /// Per block column: `(block_row, shift)` in first-VN terms.
    columns: Vec<Vec<(usize, usize)>>,
}

impl Checker {
    fn column_ok(&self, n: usize, shifts: &[usize], upto: usize) -> bool {
        let l = self.layers;
        let mut count = vec![0usize; l];
        for &(m, x) in self.columns[n].iter().filter(|&&(m, _)| m < upto) {
            let r = (x + l - shifts[m] % l) % l;
            for t in 0..self.window {
                count[(r + t) % l] += 1;
            }
        }
        let cap = if self.window == 1 { self.omega_lb } else { 1 };
        count.iter().all(|&c| c <= cap)
    }

    fn same_block_ok(&self, n: usize) -> bool {
        let z = self.lift;
        let col = &self.columns[n];
        col.iter().enumerate().all(|(a, &(ma, xa))| {
            col[a + 1..].iter().all(|&(mb, xb)| {
                if ma != mb {
                    return true;
                }
                let e = (xa + z - xb) % z;
                !(1..self.window).contains(&e) && !(1..self.window).contains(&((z - e) % z))
            })
        })
    }

    fn all_ok(&self, shifts: &[usize], upto: usize) -> bool {
        (0..self.columns.len()).all(|n| self.column_ok(n, shifts, upto))
    }

    fn search(&self, shifts: &mut Vec<usize>, rows: usize) -> bool {
        let m = shifts.len();
        if m == rows {
            return shifts.iter().any(|&j| j != 0);
        }
        for j in 0..self.layers {
            shifts.push(j);
            if self.all_ok(shifts, m + 1) && self.search(shifts, rows) {
                return true;
            }
            shifts.pop();
        }
        false
    }
}

/// Checks `b` under the canonical `L`-layering, then searches row shifts in
/// lexicographic order.
pub fn verify_construction(b: &BaseMatrix, layers: usize, target: VerifyTarget) -> Result<VerifyReport> {
    let z = b.lift();
    if layers == 0 || !z.is_multiple_of(layers) {
        return Err(Error::Divisibility(format!("L = {layers} does not divide Z = {z}")));
    }
    let omega_h = b.column_degrees().into_iter().max().unwrap_or(0);
    let omega_lb = omega_h.div_ceil(layers).max(1);
    let window = match target {
        VerifyTarget::OmegaBound => 1,
        VerifyTarget::Distance(k) if k >= 1 => k,
        VerifyTarget::Distance(_) => {
            return Err(Error::InvalidSpec("layer distance must be positive".into()))
        }
    };
    let g = TannerGraph::from_base(b);
    let columns = (0..b.cols())
        .map(|n| g.first_neighbors(n).iter().map(|&x| (x / z, x)).collect())
        .collect();
    let ck = Checker {
        lift: z,
        layers,
        omega_lb,
        window,
        columns,
    };
    let rows = b.rows();
    let zero = vec![0; rows];
    let failing_column = (0..b.cols()).find(|&n| !ck.same_block_ok(n) || !ck.column_ok(n, &zero, rows));
    let structural = failing_column.is_some_and(|n| !ck.same_block_ok(n));
    let mut report = VerifyReport {
        layers,
        target,
        omega_lb,
        canonical: failing_column.is_none(),
        row_shifts: None,
        failing_column,
        structural,
    };
    if !report.canonical && !(0..b.cols()).any(|n| !ck.same_block_ok(n)) {
        let mut shifts = Vec::with_capacity(rows);
        if ck.search(&mut shifts, rows) {
            report.row_shifts = Some(shifts);
        }
    }
    Ok(report)
}
