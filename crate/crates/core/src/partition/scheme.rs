use std::fmt;

use crate::classes::{check_layering, ls_members};
use crate::error::{Error, Result};
use crate::pcm::{RowIndexSet, SparsePcm};

use super::eval::{evaluate_omega, layer_distance};

/// A feasible partition `(S, T0)` for an `M`-block-row matrix with lifting
/// size `Z` into `L` layers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartitionScheme {
    block_rows: usize,
    lift: usize,
    layers: usize,
    shift: usize,
    selectors: Vec<usize>,
    t0: RowIndexSet,
}

impl PartitionScheme {
    /// Builds `T0 = U_{m,s} C(m, s, selectors[m*S + s])`.
    pub fn from_selectors(
        block_rows: usize,
        lift: usize,
        layers: usize,
        shift: usize,
        selectors: Vec<usize>,
    ) -> Result<Self> {
        check_layering(lift, layers, shift)?;
        if selectors.len() != block_rows * shift {
            return Err(Error::Dimension(format!(
                "expected {} selectors, got {}",
                block_rows * shift,
                selectors.len()
            )));
        }
        if let Some(&bad) = selectors.iter().find(|&&l| l >= layers) {
            return Err(Error::Dimension(format!("selector {bad} not below L = {layers}")));
        }
        let mut t0 = Vec::with_capacity(block_rows * lift / layers);
        for m in 0..block_rows {
            for s in 0..shift {
                t0.extend(ls_members(m, s, selectors[m * shift + s], layers, shift, lift));
            }
        }
        t0.sort_unstable();
        Ok(Self {
            block_rows,
            lift,
            layers,
            shift,
            selectors,
            t0: RowIndexSet::from_sorted(t0),
        })
    }

    /// Recovers the selectors of an explicit `T0`, failing when `T0` is not
    /// a union of one `LS`-class per `S`-class.
    pub fn from_t0(
        block_rows: usize,
        lift: usize,
        layers: usize,
        shift: usize,
        t0: &RowIndexSet,
    ) -> Result<Self> {
        check_layering(lift, layers, shift)?;
        let rows = block_rows * lift;
        if t0.as_slice().last().is_some_and(|&x| x >= rows) {
            return Err(Error::Dimension(format!("T0 index out of range (rows = {rows})")));
        }
        let per_class = lift / (layers * shift);
        let mut selectors = vec![usize::MAX; block_rows * shift];
        let mut counts = vec![0usize; block_rows * shift];
        for &x in t0.as_slice() {
            let (m, a) = (x / lift, x % lift);
            let s = a % shift;
            let l = (a / shift) % layers;
            let slot = m * shift + s;
            if selectors[slot] == usize::MAX {
                selectors[slot] = l;
            } else if selectors[slot] != l {
                return Err(Error::Infeasible(format!(
                    "rows of S-class ({m}, {s}) come from different LS-classes"
                )));
            }
            counts[slot] += 1;
        }
        if let Some(slot) = counts.iter().position(|&c| c != per_class) {
            return Err(Error::Infeasible(format!(
                "S-class ({}, {}) contributes {} rows, expected {per_class}",
                slot / shift,
                slot % shift,
                counts[slot]
            )));
        }
        Self::from_selectors(block_rows, lift, layers, shift, selectors)
    }

    /// `(1, U_m C(m, 0, 0))`, i.e. `T0 = {x : x = 0 mod L}`.
    pub fn canonical(block_rows: usize, lift: usize, layers: usize) -> Result<Self> {
        Self::from_selectors(block_rows, lift, layers, 1, vec![0; block_rows])
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn lift(&self) -> usize {
        self.lift
    }

    /// Layer count `L`.
    pub fn layers(&self) -> usize {
        self.layers
    }

    /// Cyclic shift step `S`.
    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn selectors(&self) -> &[usize] {
        &self.selectors
    }

    pub fn t0(&self) -> &RowIndexSet {
        &self.t0
    }

    /// Rows of layer `l`, `pi^{lS}(T0)`.
    pub fn layer(&self, l: usize) -> RowIndexSet {
        self.t0.shifted((l * self.shift) as i64, self.lift)
    }

    pub(crate) fn check_matrix(&self, h: &SparsePcm) -> Result<()> {
        if h.block_rows() != self.block_rows || h.lift() != self.lift {
            return Err(Error::Mismatch(format!(
                "scheme is for M = {}, Z = {}, matrix has M = {}, Z = {}",
                self.block_rows,
                self.lift,
                h.block_rows(),
                h.lift()
            )));
        }
        Ok(())
    }
}

/// Contents of a scheme file: the scheme plus the metrics recorded with it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeFile {
    pub scheme: PartitionScheme,
    pub omega: u32,
    pub distance: usize,
}

impl SchemeFile {
    /// Evaluates `scheme` on `h` and packages the result.
    pub fn new(h: &SparsePcm, scheme: PartitionScheme) -> Result<Self> {
        let omega = evaluate_omega(h, &scheme)?;
        let distance = layer_distance(h, &scheme)?;
        Ok(Self {
            scheme,
            omega,
            distance,
        })
    }

    /// Parses a scheme file and re-verifies it against `h`: the rows must
    /// form a feasible `T0` and the recorded metrics must match.
    pub fn parse(text: &str, h: &SparsePcm) -> Result<Self> {
        let mut shift = None;
        let mut layers = None;
        let mut t0 = None;
        let mut omega = None;
        let mut distance = None;
        for (idx, line) in text.lines().enumerate() {
            let lno = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut toks = line.split_whitespace();
            let key = toks.next().unwrap();
            let nums: Vec<usize> = toks
                .map(|t| {
                    t.parse().map_err(|_| Error::Parse {
                        line: lno,
                        msg: format!("bad integer `{t}`"),
                    })
                })
                .collect::<Result<_>>()?;
            let single = || -> Result<usize> {
                match nums[..] {
                    [v] => Ok(v),
                    _ => Err(Error::Parse {
                        line: lno,
                        msg: format!("`{key}` takes one integer"),
                    }),
                }
            };
            match key {
                "S" => shift = Some(single()?),
                "L" => layers = Some(single()?),
                "T0" => t0 = Some(nums),
                "omega" => omega = Some(single()? as u32),
                "distance" => distance = Some(single()?),
                other => {
                    return Err(Error::Parse {
                        line: lno,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        let missing = |k: &str| Error::Parse {
            line: 0,
            msg: format!("missing `{k}` line"),
        };
        let shift = shift.ok_or_else(|| missing("S"))?;
        let layers = layers.ok_or_else(|| missing("L"))?;
        let t0 = t0.ok_or_else(|| missing("T0"))?;
        let omega = omega.ok_or_else(|| missing("omega"))?;
        let distance = distance.ok_or_else(|| missing("distance"))?;

        let t0 = RowIndexSet::new(t0, h.num_rows())?;
        let scheme = PartitionScheme::from_t0(h.block_rows(), h.lift(), layers, shift, &t0)?;
        let checked = Self::new(h, scheme)?;
        if checked.omega != omega || checked.distance != distance {
            return Err(Error::Mismatch(format!(
                "file records omega = {omega}, distance = {distance}; recomputed omega = {}, distance = {}",
                checked.omega, checked.distance
            )));
        }
        Ok(checked)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SchemeFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "S {}", self.scheme.shift)?;
        writeln!(f, "L {}", self.scheme.layers)?;
        f.write_str("T0")?;
        for x in self.scheme.t0.as_slice() {
            write!(f, " {x}")?;
        }
        writeln!(f)?;
        writeln!(f, "omega {}", self.omega)?;
        writeln!(f, "distance {}", self.distance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes;
    use crate::pcm::expand;

    fn set(v: &[usize]) -> RowIndexSet {
        RowIndexSet::new(v.to_vec(), 8).unwrap()
    }

    #[test]
    fn selectors_build_printed_t0() {
        let s = PartitionScheme::from_selectors(2, 4, 2, 2, vec![0, 0, 0, 1]).unwrap();
        assert_eq!(s.t0().as_slice(), &[0, 1, 4, 7]);
        assert_eq!(s.layer(1).as_slice(), &[2, 3, 5, 6]);
    }

    #[test]
    fn recovers_selectors_from_t0() {
        let s = PartitionScheme::from_t0(2, 4, 4, 1, &set(&[0, 7])).unwrap();
        assert_eq!(s.selectors(), &[0, 3]);
        assert_eq!(s.layer(1).as_slice(), &[1, 4]);
        assert_eq!(s.layer(3).as_slice(), &[3, 6]);
    }

    #[test]
    fn rejects_non_class_unions() {
        assert!(matches!(
            PartitionScheme::from_t0(2, 4, 4, 1, &set(&[0, 1])),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            PartitionScheme::from_t0(2, 4, 2, 1, &set(&[0, 2, 4])),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            PartitionScheme::from_t0(2, 4, 3, 1, &set(&[0])),
            Err(Error::Divisibility(_))
        ));
    }

    #[test]
    fn canonical_scheme_rows() {
        let s = PartitionScheme::canonical(2, 12, 4).unwrap();
        assert!(s.t0().as_slice().iter().all(|x| x % 4 == 0));
        assert_eq!(s.t0().len(), 6);
    }

    #[test]
    fn file_round_trip_and_reverification() {
        let h = expand(&codes::example());
        let s = PartitionScheme::from_t0(2, 4, 4, 1, &set(&[0, 7])).unwrap();
        let file = SchemeFile::new(&h, s).unwrap();
        assert_eq!(file.to_text(), "S 1\nL 4\nT0 0 7\nomega 1\ndistance 2\n");
        assert_eq!(SchemeFile::parse(&file.to_text(), &h).unwrap(), file);

        let tampered = file.to_text().replace("distance 2", "distance 3");
        assert!(matches!(SchemeFile::parse(&tampered, &h), Err(Error::Mismatch(_))));
        let infeasible = "S 1\nL 4\nT0 0 1\nomega 1\ndistance 1\n";
        assert!(matches!(SchemeFile::parse(infeasible, &h), Err(Error::Infeasible(_))));
        assert!(matches!(
            SchemeFile::parse("S 1\nL 4\n", &h),
            Err(Error::Parse { .. })
        ));
    }
}
