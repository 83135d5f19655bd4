use crate::classes::factors;
use crate::error::Result;
use crate::pcm::{pi_shift, RowIndexSet, SparsePcm};

use super::scheme::PartitionScheme;

/// `H^(S,k) = H + phi^S(H) + ... + phi^{(k-1)S}(H)` as an integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftedSum {
    shift: usize,
    depth: usize,
    matrix: SparsePcm,
}

impl ShiftedSum {
    pub fn shift(&self) -> usize {
        self.shift
    }

    /// Number of summed shifts `k`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn matrix(&self) -> &SparsePcm {
        &self.matrix
    }

    pub fn into_matrix(self) -> SparsePcm {
        self.matrix
    }
}

/// Builds `H^(S,k)`. Row `i` of `phi^{tS}(H)` equals row `pi^{tS}(i)` of `H`,
/// so row `i` of the sum collects rows `pi^{tS}(i)` for `t < k`.
pub fn shifted_sum(h: &SparsePcm, shift: usize, depth: usize) -> ShiftedSum {
    let depth = depth.max(1);
    let z = h.lift();
    let rows = (0..h.num_rows())
        .map(|i| {
            (0..depth)
                .flat_map(|t| h.row(pi_shift(i, (t * shift) as i64, z)))
                .collect()
        })
        .collect();
    let matrix = SparsePcm::from_rows(h.block_rows(), h.block_cols(), z, rows)
        .expect("shifted rows stay in range");
    ShiftedSum {
        shift,
        depth,
        matrix,
    }
}

/// Column sums of `rows`, keeping only columns `j` with `j mod Z < LS`.
/// Column `nZ + r` is stored at `n * LS + r`.
fn restricted_counts(h: &SparsePcm, rows: &[usize], width: usize, counts: &mut [u32]) -> u32 {
    let z = h.lift();
    let mut max = 0;
    for &i in rows {
        for (c, v) in h.row(i) {
            let r = c % z;
            if r < width {
                let slot = &mut counts[(c / z) * width + r];
                *slot += v;
                max = max.max(*slot);
            }
        }
    }
    max
}

/// `omega(H_{T0})`, inspecting only the columns with `j mod Z < LS`.
pub fn evaluate_omega(h: &SparsePcm, scheme: &PartitionScheme) -> Result<u32> {
    scheme.check_matrix(h)?;
    let width = scheme.layers() * scheme.shift();
    let mut counts = vec![0u32; h.block_cols() * width];
    Ok(restricted_counts(h, scheme.t0().as_slice(), width, &mut counts))
}

/// `omega(H_{T0})` over every column.
pub fn omega_full(h: &SparsePcm, scheme: &PartitionScheme) -> Result<u32> {
    scheme.check_matrix(h)?;
    Ok(h.column_weight(scheme.t0(), None).max)
}

/// `ceil(omega(H) / L)`.
pub fn omega_lower_bound(omega_h: u32, layers: usize) -> u32 {
    (omega_h as usize).div_ceil(layers.max(1)) as u32
}

/// `floor(L / omega(H))`.
pub fn distance_upper_bound(omega_h: u32, layers: usize) -> usize {
    if omega_h == 0 {
        return layers;
    }
    layers / omega_h as usize
}

/// Smallest factor of `Z` that is at least `k * omega(H)`, if any.
pub fn min_layers_for_distance(omega_h: u32, lift: usize, k: usize) -> Option<usize> {
    let need = k * omega_h as usize;
    factors(lift).into_iter().find(|&f| f >= need)
}

/// Stacks layers `start, start+1, ...` and returns the largest count
/// `l < L` whose stack still has column weight at most 1.
fn stacked_distance(h: &SparsePcm, scheme: &PartitionScheme, start: usize) -> usize {
    let width = scheme.layers() * scheme.shift();
    let mut counts = vec![0u32; h.block_cols() * width];
    for l in 0..scheme.layers() - 1 {
        let layer = scheme.layer((start + l) % scheme.layers());
        if restricted_counts(h, layer.as_slice(), width, &mut counts) > 1 {
            return l;
        }
    }
    scheme.layers() - 1
}

/// Layer distance by direct stacking of `T_0, ..., T_{l-1}`.
pub fn layer_distance(h: &SparsePcm, scheme: &PartitionScheme) -> Result<usize> {
    scheme.check_matrix(h)?;
    Ok(stacked_distance(h, scheme, 0))
}

/// Layer distance as the largest `k < L` with `omega(H^(S,k)_{T0}) <= 1`.
pub fn layer_distance_shifted(h: &SparsePcm, scheme: &PartitionScheme) -> Result<usize> {
    scheme.check_matrix(h)?;
    let mut d = 0;
    for k in 1..scheme.layers() {
        let sum = shifted_sum(h, scheme.shift(), k);
        if evaluate_omega(sum.matrix(), scheme)? > 1 {
            break;
        }
        d = k;
    }
    Ok(d)
}

/// Minimum of the stacked distance over every starting layer.
pub fn generalized_layer_distance(h: &SparsePcm, scheme: &PartitionScheme) -> Result<usize> {
    scheme.check_matrix(h)?;
    Ok((0..scheme.layers())
        .map(|start| stacked_distance(h, scheme, start))
        .min()
        .unwrap_or(0))
}

/// Metrics of one scheme together with the bounds that apply to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeEvaluation {
    pub omega: u32,
    pub layer_distance: usize,
    pub omega_lb: u32,
    pub d_ub: usize,
}

pub fn evaluate(h: &SparsePcm, scheme: &PartitionScheme) -> Result<SchemeEvaluation> {
    let omega_h = h.max_column_weight();
    Ok(SchemeEvaluation {
        omega: evaluate_omega(h, scheme)?,
        layer_distance: layer_distance(h, scheme)?,
        omega_lb: omega_lower_bound(omega_h, scheme.layers()),
        d_ub: distance_upper_bound(omega_h, scheme.layers()),
    })
}

/// Union of layers `0..count`, for tests and reports.
#[allow(dead_code)]
pub(crate) fn stacked_rows(scheme: &PartitionScheme, count: usize) -> RowIndexSet {
    let mut v: Vec<usize> = (0..count)
        .flat_map(|l| scheme.layer(l).into_vec())
        .collect();
    v.sort_unstable();
    RowIndexSet::from_sorted(v)
}
