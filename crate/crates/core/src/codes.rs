//! Reference base matrices bundled with the crate.
//!
//! `b0` is five block rows of the 5G NR base graph 1 at `Z = 384`; `b1`,
//! `b2` and `b3` are QC-PEG constructions with the same dimensions and
//! degree multiset. `b2` contains the entry 723, which is read modulo `Z`.

use crate::base::BaseMatrix;

pub const EXAMPLE_TEXT: &str = include_str!("../data/example.txt");
pub const B0_TEXT: &str = include_str!("../data/b0.txt");
pub const B1_TEXT: &str = include_str!("../data/b1.txt");
pub const B2_TEXT: &str = include_str!("../data/b2.txt");
pub const B3_TEXT: &str = include_str!("../data/b3.txt");

fn load(text: &str) -> BaseMatrix {
    BaseMatrix::parse(text).expect("bundled matrix parses").0
}

/// 2x3 toy matrix with `Z = 4`.
pub fn example() -> BaseMatrix {
    load(EXAMPLE_TEXT)
}

pub fn b0() -> BaseMatrix {
    load(B0_TEXT)
}

pub fn b1() -> BaseMatrix {
    load(B1_TEXT)
}

pub fn b2() -> BaseMatrix {
    load(B2_TEXT)
}

pub fn b3() -> BaseMatrix {
    load(B3_TEXT)
}

/// Published parameters `(M, N, Z, omega)` of the five 5G PCMs. Only the
/// first is bundled as a matrix; the others must be supplied by the user.
pub const FIVE_G_PARAMS: [(usize, usize, usize, u32); 5] = [
    (5, 27, 384, 5),
    (46, 68, 384, 30),
    (7, 17, 112, 6),
    (17, 27, 112, 13),
    (42, 52, 112, 23),
];
