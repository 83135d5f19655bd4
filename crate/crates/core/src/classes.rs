//! Shift classes: orbits of row indices under `pi^S` and `pi^{LS}`.
//!
//! For `S | Z` the block `[mZ, (m+1)Z)` splits into `S` classes
//! `C(m, s) = mZ + {s, s+S, s+2S, ...}`; for `LS | Z` each of those splits
//! further into `L` classes `C(m, s, l) = mZ + s + lS + {0, LS, 2LS, ...}`.

use crate::error::{Error, Result};

/// Positive divisors of `n` in increasing order.
pub fn factors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// An `S`-class (no selector) or `LS`-class (with selector `l`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftClass {
    pub block: usize,
    pub residue: usize,
    pub selector: Option<usize>,
    pub members: Vec<usize>,
}

/// Checks `L | Z` and `S | Z/L`.
pub fn check_layering(lift: usize, layers: usize, shift: usize) -> Result<()> {
    if layers == 0 || shift == 0 {
        return Err(Error::Divisibility("L and S must be positive".into()));
    }
    if !lift.is_multiple_of(layers) {
        return Err(Error::Divisibility(format!(
            "L = {layers} does not divide Z = {lift}"
        )));
    }
    if !(lift / layers).is_multiple_of(shift) {
        return Err(Error::Divisibility(format!(
            "S = {shift} does not divide Z/L = {}",
            lift / layers
        )));
    }
    Ok(())
}

/// `C(m, s) = mZ + {s}_S`.
pub fn s_class(block: usize, residue: usize, shift: usize, lift: usize) -> Result<ShiftClass> {
    if shift == 0 || !lift.is_multiple_of(shift) {
        return Err(Error::Divisibility(format!(
            "S = {shift} does not divide Z = {lift}"
        )));
    }
    if residue >= shift {
        return Err(Error::Dimension(format!(
            "residue {residue} not below S = {shift}"
        )));
    }
    let members = (0..lift / shift)
        .map(|r| block * lift + residue + r * shift)
        .collect();
    Ok(ShiftClass {
        block,
        residue,
        selector: None,
        members,
    })
}

/// `C(m, s, l) = mZ + s + {lS}_{LS}`.
pub fn ls_class(
    block: usize,
    residue: usize,
    selector: usize,
    layers: usize,
    shift: usize,
    lift: usize,
) -> Result<ShiftClass> {
    check_layering(lift, layers, shift)?;
    if residue >= shift || selector >= layers {
        return Err(Error::Dimension(format!(
            "class index (s = {residue}, l = {selector}) out of range for S = {shift}, L = {layers}"
        )));
    }
    Ok(ShiftClass {
        block,
        residue,
        selector: Some(selector),
        members: ls_members(block, residue, selector, layers, shift, lift).collect(),
    })
}

/// Members of `C(m, s, l)` without divisibility checks.
pub(crate) fn ls_members(
    block: usize,
    residue: usize,
    selector: usize,
    layers: usize,
    shift: usize,
    lift: usize,
) -> impl Iterator<Item = usize> {
    let step = layers * shift;
    let start = block * lift + residue + selector * shift;
    (0..lift / step).map(move |r| start + r * step)
}
