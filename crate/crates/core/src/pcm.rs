//! Expanded parity-check matrices and the cyclic shift algebra on them.

use std::collections::HashMap;

use crate::base::BaseMatrix;
use crate::error::{Error, Result};

/// Nonnegative `a mod m`.
#[inline]
pub fn modulo(a: i64, m: usize) -> usize {
    a.rem_euclid(m as i64) as usize
}

/// Row permutation `pi^s(i) = Z*floor(i/Z) + ((i + s) mod Z)`: shifts `i`
/// by `s` inside its own block of `Z` indices.
#[inline]
pub fn pi_shift(i: usize, s: i64, lift: usize) -> usize {
    let base = i - i % lift;
    base + modulo((i % lift) as i64 + s, lift)
}

/// Column image of the block `s`-cyclic shift: the same in-block rotation
/// as [`pi_shift`], applied to a column index.
#[inline]
pub fn shift_column(c: usize, s: i64, lift: usize) -> usize {
    pi_shift(c, s, lift)
}

/// Sorted, duplicate-free set of row indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RowIndexSet(Vec<usize>);

impl RowIndexSet {
    /// Checks that every index is below `bound` and sorts. Duplicates are
    /// rejected.
    pub fn new(mut indices: Vec<usize>, bound: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Dimension(format!("row index {} repeated", w[0])));
        }
        if let Some(&last) = indices.last() {
            if last >= bound {
                return Err(Error::Dimension(format!(
                    "row index {last} out of range (rows = {bound})"
                )));
            }
        }
        Ok(Self(indices))
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self(indices)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// `pi^s` applied elementwise.
    pub fn shifted(&self, s: i64, lift: usize) -> Self {
        let mut v: Vec<usize> = self.0.iter().map(|&i| pi_shift(i, s, lift)).collect();
        v.sort_unstable();
        Self(v)
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// Column weights of a row submatrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnWeights {
    pub weights: Vec<u32>,
    pub max: u32,
}

/// Expanded `MZ x NZ` matrix, stored row-wise. Entries are small
/// nonnegative integers; an ordinary parity-check matrix has all entries 1,
/// shifted sums may have larger ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePcm {
    block_rows: usize,
    block_cols: usize,
    lift: usize,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<u32>,
}

impl SparsePcm {
    /// Builds a matrix from per-row `(column, value)` lists. Entries with the
    /// same column are summed and zero values dropped.
    pub fn from_rows(
        block_rows: usize,
        block_cols: usize,
        lift: usize,
        rows: Vec<Vec<(usize, u32)>>,
    ) -> Result<Self> {
        if rows.len() != block_rows * lift {
            return Err(Error::Dimension(format!(
                "expected {} rows, got {}",
                block_rows * lift,
                rows.len()
            )));
        }
        let ncols = block_cols * lift;
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|e| e.0);
            let start = cols.len();
            for (c, v) in row {
                if c >= ncols {
                    return Err(Error::Dimension(format!(
                        "column {c} out of range (columns = {ncols})"
                    )));
                }
                if v == 0 {
                    continue;
                }
                if cols.len() > start && *cols.last().unwrap() == c as u32 {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c as u32);
                    vals.push(v);
                }
            }
            offsets.push(cols.len());
        }
        Ok(Self {
            block_rows,
            block_cols,
            lift,
            offsets,
            cols,
            vals,
        })
    }

    /// Block row count `M`.
    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    /// Block column count `N`.
    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn lift(&self) -> usize {
        self.lift
    }

    pub fn num_rows(&self) -> usize {
        self.block_rows * self.lift
    }

    pub fn num_cols(&self) -> usize {
        self.block_cols * self.lift
    }

    /// Column indices of row `i`, ascending.
    pub fn row_cols(&self, i: usize) -> &[u32] {
        &self.cols[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Entry values of row `i`, aligned with [`row_cols`](Self::row_cols).
    pub fn row_vals(&self, i: usize) -> &[u32] {
        &self.vals[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.row_cols(i)
            .iter()
            .zip(self.row_vals(i))
            .map(|(&c, &v)| (c as usize, v))
    }

    /// Offset of row `i` in the flat edge arrays; edges of row `i` are
    /// `row_offset(i)..row_offset(i + 1)`.
    pub fn row_offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    /// Number of stored nonzero entries.
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Sum of all entries.
    pub fn total_weight(&self) -> u64 {
        self.vals.iter().map(|&v| v as u64).sum()
    }

    pub fn is_binary(&self) -> bool {
        self.vals.iter().all(|&v| v == 1)
    }

    /// Dense 0/1 (or integer) row, handy for small tests and printing.
    pub fn dense_row(&self, i: usize) -> Vec<u32> {
        let mut out = vec![0; self.num_cols()];
        for (c, v) in self.row(i) {
            out[c] = v;
        }
        out
    }

    /// Rejects all-zero rows and pairs of identical rows; partitioning
    /// assumes neither occurs.
    pub fn validate(&self) -> Result<()> {
        let mut seen: HashMap<(&[u32], &[u32]), usize> = HashMap::new();
        for i in 0..self.num_rows() {
            let key = (self.row_cols(i), self.row_vals(i));
            if key.0.is_empty() {
                return Err(Error::ZeroRow(i));
            }
            if let Some(&j) = seen.get(&key) {
                return Err(Error::IdenticalRows(j, i));
            }
            seen.insert(key, i);
        }
        Ok(())
    }

    /// Row `i` after the block `s`-cyclic shift, as sorted `(column, value)`.
    pub fn shifted_row(&self, i: usize, s: i64) -> Vec<(usize, u32)> {
        let mut out: Vec<(usize, u32)> = self
            .row(i)
            .map(|(c, v)| (shift_column(c, s, self.lift), v))
            .collect();
        out.sort_unstable_by_key(|e| e.0);
        out
    }

    /// Block `s`-cyclic shift of every selected row.
    pub fn block_shift_rows(&self, rows: &RowIndexSet, s: i64) -> Vec<Vec<(usize, u32)>> {
        rows.as_slice()
            .iter()
            .map(|&i| self.shifted_row(i, s))
            .collect()
    }

    /// Per-column sums over the rows in `rows`.
    pub fn column_weights(&self, rows: &[usize]) -> Vec<u32> {
        let mut w = vec![0u32; self.num_cols()];
        for &i in rows {
            for (c, v) in self.row(i) {
                w[c] += v;
            }
        }
        w
    }

    /// Column weights of the row submatrix and their maximum, taken over
    /// `cols` when given and over every column otherwise. The empty row
    /// set has maximum 0.
    pub fn column_weight(&self, rows: &RowIndexSet, cols: Option<&[usize]>) -> ColumnWeights {
        let weights = self.column_weights(rows.as_slice());
        let max = match cols {
            Some(cs) => cs.iter().map(|&c| weights[c]).max().unwrap_or(0),
            None => weights.iter().copied().max().unwrap_or(0),
        };
        ColumnWeights { weights, max }
    }

    /// Maximum column weight of the whole matrix.
    pub fn max_column_weight(&self) -> u32 {
        let mut w = vec![0u32; self.num_cols()];
        for (&c, &v) in self.cols.iter().zip(&self.vals) {
            w[c as usize] += v;
        }
        w.into_iter().max().unwrap_or(0)
    }

    /// Row indices touching each column (the CN neighborhoods of each VN).
    pub fn column_neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_cols()];
        for i in 0..self.num_rows() {
            for &c in self.row_cols(i) {
                out[c as usize].push(i);
            }
        }
        out
    }
}

/// Expands a base matrix: shift `v` of cell `(m, n)` puts, for each
/// `i < Z`, a one at row `mZ + i`, column `nZ + ((v + i) mod Z)`.
pub fn expand(b: &BaseMatrix) -> SparsePcm {
    let z = b.lift();
    let mut rows = Vec::with_capacity(b.rows() * z);
    for m in 0..b.rows() {
        for i in 0..z {
            let mut row = Vec::new();
            for n in 0..b.cols() {
                for &v in b.cell(m, n) {
                    row.push((n * z + (v + i) % z, 1));
                }
            }
            rows.push(row);
        }
    }
    SparsePcm::from_rows(b.rows(), b.cols(), z, rows).expect("expansion is in range")
}

/// [`expand`] followed by [`SparsePcm::validate`].
pub fn expand_checked(b: &BaseMatrix) -> Result<SparsePcm> {
    let h = expand(b);
    h.validate()?;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes;

    // The 8x12 matrix printed for the 2x3 example with Z = 4.
    const EXAMPLE_H: [&str; 8] = [
        "0100 0001 0000",
        "0010 1000 0000",
        "0001 0100 0000",
        "1000 0010 0000",
        "1000 0010 1000",
        "0100 0001 0100",
        "0010 1000 0010",
        "0001 0100 0001",
    ];

    fn dense(row: &str) -> Vec<u32> {
        row.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c.to_digit(10).unwrap())
            .collect()
    }

    #[test]
    fn expands_printed_example() {
        let h = expand(&codes::example());
        assert_eq!((h.num_rows(), h.num_cols()), (8, 12));
        for (i, r) in EXAMPLE_H.iter().enumerate() {
            assert_eq!(h.dense_row(i), dense(r), "row {i}");
        }
        assert!(h.is_binary());
        h.validate().unwrap();
    }

    #[test]
    fn zero_and_identity_circulants() {
        let (zero, _) = BaseMatrix::parse("1 1 4\n-1\n").unwrap();
        let h = expand(&zero);
        assert_eq!((h.num_rows(), h.num_cols(), h.nnz()), (4, 4, 0));
        assert_eq!(h.validate(), Err(Error::ZeroRow(0)));

        let (id, _) = BaseMatrix::parse("1 1 4\n0\n").unwrap();
        let h = expand(&id);
        for i in 0..4 {
            assert_eq!(h.row_cols(i), &[i as u32]);
        }
    }

    #[test]
    fn identical_rows_rejected() {
        // shifts {0, 2} with Z = 4 give a period-2 row pattern
        let (b, _) = BaseMatrix::parse("1 1 4\n0,2\n").unwrap();
        assert_eq!(expand_checked(&b), Err(Error::IdenticalRows(0, 2)));
    }

    #[test]
    fn pi_shift_examples() {
        assert_eq!(pi_shift(3, 1, 4), 0);
        assert_eq!(pi_shift(4, 1, 4), 5);
        assert_eq!(pi_shift(4, -1, 4), 7);
        assert_eq!(pi_shift(5, 9, 4), 6);
    }

    #[test]
    fn block_shift_matches_row_permutation() {
        let h = expand(&codes::example());
        let shifted = h.shifted_row(5, 1);
        let target: Vec<(usize, u32)> = h.row(pi_shift(5, 1, 4)).collect();
        assert_eq!(shifted, target);
        assert_eq!(h.shifted_row(5, 0), h.row(5).collect::<Vec<_>>());
        assert_eq!(h.shifted_row(5, 4), h.row(5).collect::<Vec<_>>());
        let rows = RowIndexSet::new(vec![5], 8).unwrap();
        assert_eq!(h.block_shift_rows(&rows, 1), vec![target]);
    }

    #[test]
    fn column_weight_examples() {
        let h = expand(&codes::example());
        let t = RowIndexSet::new(vec![5, 7], 8).unwrap();
        let cw = h.column_weight(&t, None);
        assert_eq!(cw.weights[0], 0);
        assert_eq!(cw.max, 1);
        let empty = RowIndexSet::default();
        assert_eq!(h.column_weight(&empty, None).max, 0);
        let all = RowIndexSet::new((0..8).collect(), 8).unwrap();
        assert_eq!(h.column_weight(&all, None).max, 2);
        assert_eq!(h.max_column_weight(), 2);
        // restricted to block 2, every column has weight 1
        let cols: Vec<usize> = (8..12).collect();
        assert_eq!(h.column_weight(&all, Some(&cols)).max, 1);
    }

    #[test]
    fn row_index_set_checks() {
        assert!(RowIndexSet::new(vec![1, 1], 4).is_err());
        assert!(RowIndexSet::new(vec![4], 4).is_err());
        let s = RowIndexSet::new(vec![3, 0], 4).unwrap();
        assert_eq!(s.as_slice(), &[0, 3]);
    }
}
