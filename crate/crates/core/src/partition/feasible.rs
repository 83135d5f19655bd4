use crate::classes::check_layering;
use crate::error::Result;
use crate::pcm::SparsePcm;

use super::scheme::PartitionScheme;

/// Every feasible scheme for fixed `(L, S)`, in odometer order over the
/// selector array (last selector fastest).
#[derive(Debug, Clone)]
pub struct FeasibleSchemes {
    block_rows: usize,
    lift: usize,
    layers: usize,
    shift: usize,
    next: Option<Vec<usize>>,
}

impl FeasibleSchemes {
    /// `L^{MS}`, saturating at `u128::MAX`.
    pub fn count(&self) -> u128 {
        (self.layers as u128)
            .checked_pow((self.block_rows * self.shift) as u32)
            .unwrap_or(u128::MAX)
    }
}

impl Iterator for FeasibleSchemes {
    type Item = PartitionScheme;

    fn next(&mut self) -> Option<PartitionScheme> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut advanced = false;
        for slot in succ.iter_mut().rev() {
            *slot += 1;
            if *slot < self.layers {
                advanced = true;
                break;
            }
            *slot = 0;
        }
        if advanced {
            self.next = Some(succ);
        }
        Some(
            PartitionScheme::from_selectors(
                self.block_rows,
                self.lift,
                self.layers,
                self.shift,
                current,
            )
            .expect("odometer selectors are in range"),
        )
    }
}

/// Streams the `L^{MS}` feasible schemes of `h`.
pub fn feasible_schemes(h: &SparsePcm, layers: usize, shift: usize) -> Result<FeasibleSchemes> {
    check_layering(h.lift(), layers, shift)?;
    h.validate()?;
    Ok(FeasibleSchemes {
        block_rows: h.block_rows(),
        lift: h.lift(),
        layers,
        shift,
        next: Some(vec![0; h.block_rows() * shift]),
    })
}
