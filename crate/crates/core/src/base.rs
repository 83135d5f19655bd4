//! Base matrices of quasi-cyclic codes and their text format.
//!
//! A base matrix has `M x N` cells. Each cell is either empty (the zero
//! circulant, written `-1`) or a set of distinct shifts in `[0, Z)`. A shift
//! `v` puts a one at column `v` of the first row of the `Z x Z` circulant.
//!
//! Text format, whitespace separated:
//!
//! ```text
//! # comment
//! M N Z
//! <N cells>   (M lines)
//! ```
//!
//! A cell is `-1` or a comma separated list of nonnegative shifts with no
//! spaces. Shifts `>= Z` are reduced modulo `Z` and reported as diagnostics.

use std::fmt;

use crate::error::{Error, Result};

/// `M x N` array of circulant descriptors with lifting size `Z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BaseMatrix {
    rows: usize,
    cols: usize,
    lift: usize,
    // row-major, each cell sorted ascending, empty vec = zero circulant
    cells: Vec<Vec<usize>>,
}

/// Non-fatal note produced while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub row: usize,
    pub col: usize,
    pub original: usize,
    pub reduced: usize,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}: shift {} in cell ({}, {}) reduced modulo Z to {}",
            self.line, self.original, self.row, self.col, self.reduced
        )
    }
}

impl BaseMatrix {
    /// Builds a base matrix from row-major cells. Shifts must already be in
    /// `[0, Z)` and distinct within a cell.
    pub fn new(rows: usize, cols: usize, lift: usize, cells: Vec<Vec<usize>>) -> Result<Self> {
        if rows == 0 || cols == 0 || lift == 0 {
            return Err(Error::Dimension(format!(
                "M, N and Z must be positive (got {rows} {cols} {lift})"
            )));
        }
        if cells.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} cells, got {}",
                rows * cols,
                cells.len()
            )));
        }
        let mut cells = cells;
        for (idx, cell) in cells.iter_mut().enumerate() {
            cell.sort_unstable();
            for w in cell.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::DuplicateShift {
                        line: 0,
                        row: idx / cols,
                        col: idx % cols,
                        shift: w[0],
                    });
                }
            }
            if let Some(&v) = cell.last() {
                if v >= lift {
                    return Err(Error::Dimension(format!(
                        "shift {v} in cell ({}, {}) is not below Z = {lift}",
                        idx / cols,
                        idx % cols
                    )));
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            lift,
            cells,
        })
    }

    /// Builds a single-shift base matrix from signed entries, `-1` meaning
    /// empty. Entries are reduced modulo `Z`.
    pub fn from_entries(rows: usize, cols: usize, lift: usize, entries: &[i64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let cells = entries
            .iter()
            .map(|&e| {
                if e < 0 {
                    Vec::new()
                } else {
                    vec![(e as usize) % lift.max(1)]
                }
            })
            .collect();
        Self::new(rows, cols, lift, cells)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn lift(&self) -> usize {
        self.lift
    }

    /// Shifts of cell `(m, n)`; empty for the zero circulant.
    pub fn cell(&self, m: usize, n: usize) -> &[usize] {
        &self.cells[m * self.cols + n]
    }

    /// Total number of shifts, i.e. ones per row of the first circulant rows.
    pub fn shift_count(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    /// Number of shifts in each block column (VN degree of that block).
    pub fn column_degrees(&self) -> Vec<usize> {
        (0..self.cols)
            .map(|n| (0..self.rows).map(|m| self.cell(m, n).len()).sum())
            .collect()
    }

    /// Number of shifts in each block row (CN degree of that block).
    pub fn row_degrees(&self) -> Vec<usize> {
        (0..self.rows)
            .map(|m| (0..self.cols).map(|n| self.cell(m, n).len()).sum())
            .collect()
    }

    /// Parses the text format, returning the matrix and any mod-`Z`
    /// reductions that were applied.
    pub fn parse(text: &str) -> Result<(Self, Vec<Diagnostic>)> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "missing `M N Z` header".into(),
        })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>().map_err(|_| Error::Parse {
                    line: hline,
                    msg: format!("bad header token `{t}`"),
                })
            })
            .collect::<Result<_>>()?;
        let [rows, cols, lift] = dims[..] else {
            return Err(Error::Parse {
                line: hline,
                msg: format!("header needs 3 integers, got {}", dims.len()),
            });
        };
        if rows == 0 || cols == 0 || lift == 0 {
            return Err(Error::Parse {
                line: hline,
                msg: "M, N and Z must be positive".into(),
            });
        }

        let mut cells = Vec::with_capacity(rows * cols);
        let mut diags = Vec::new();
        let mut row = 0;
        for (lno, line) in lines {
            if row == rows {
                return Err(Error::Parse {
                    line: lno,
                    msg: format!("more than {rows} matrix rows"),
                });
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != cols {
                return Err(Error::Parse {
                    line: lno,
                    msg: format!("expected {cols} cells, got {}", toks.len()),
                });
            }
            for (col, tok) in toks.iter().enumerate() {
                let cell = parse_cell(tok, lift, lno, row, col, &mut diags)?;
                cells.push(cell);
            }
            row += 1;
        }
        if row != rows {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {rows} matrix rows, got {row}"),
            });
        }
        for d in &diags {
            log::warn!("{d}");
        }
        let matrix = Self {
            rows,
            cols,
            lift,
            cells,
        };
        Ok((matrix, diags))
    }

    /// Serializes to the text format; `parse(to_text(b)) == b`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

fn parse_cell(
    tok: &str,
    lift: usize,
    line: usize,
    row: usize,
    col: usize,
    diags: &mut Vec<Diagnostic>,
) -> Result<Vec<usize>> {
    if tok == "-1" {
        return Ok(Vec::new());
    }
    let mut cell = Vec::new();
    for part in tok.split(',') {
        let original: usize = part.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad cell `{tok}` at column {col}"),
        })?;
        let reduced = original % lift;
        if reduced != original {
            diags.push(Diagnostic {
                line,
                row,
                col,
                original,
                reduced,
            });
        }
        if cell.contains(&reduced) {
            return Err(Error::DuplicateShift {
                line,
                row,
                col,
                shift: reduced,
            });
        }
        cell.push(reduced);
    }
    cell.sort_unstable();
    Ok(cell)
}

impl fmt::Display for BaseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.rows, self.cols, self.lift)?;
        for m in 0..self.rows {
            for n in 0..self.cols {
                if n > 0 {
                    f.write_str(" ")?;
                }
                let cell = self.cell(m, n);
                if cell.is_empty() {
                    f.write_str("-1")?;
                } else {
                    for (k, v) in cell.iter().enumerate() {
                        if k > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{v}")?;
                    }
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
