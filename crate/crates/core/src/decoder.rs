//! Row layered sum-product decoding.

use crate::error::{Error, Result};
use crate::partition::PartitionScheme;
use crate::pcm::SparsePcm;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub max_iterations: usize,
    /// Magnitude bound on LLR messages fed to `tanh` and produced by `atanh`.
    pub clamp: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10,
            clamp: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Hard decision, 0 where the posterior LLR is `>= 0`.
    pub bits: Vec<u8>,
    pub iterations: usize,
    /// Syndrome of `bits` is zero.
    pub converged: bool,
    pub llrs: Vec<f64>,
}

/// Hard decision with ties going to 0.
pub fn hard_decision(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&x| u8::from(x < 0.0)).collect()
}

/// True when every parity check of `h` is satisfied by `bits`.
pub fn syndrome_ok(h: &SparsePcm, bits: &[u8]) -> bool {
    (0..h.num_rows()).all(|i| {
        h.row(i)
            .fold(0u32, |acc, (c, v)| acc ^ (v & u32::from(bits[c] & 1)))
            == 0
    })
}

/// Decoder bound to one matrix and layer schedule.
#[derive(Debug, Clone)]
pub struct LayeredDecoder<'a> {
    h: &'a SparsePcm,
    layers: Vec<Vec<usize>>,
    max_layer_weight: u32,
}

impl<'a> LayeredDecoder<'a> {
    pub fn new(h: &'a SparsePcm, scheme: &PartitionScheme) -> Result<Self> {
        scheme.check_matrix(h)?;
        if !h.is_binary() {
            return Err(Error::DecoderInput("matrix is not binary".into()));
        }
        let layers: Vec<Vec<usize>> = (0..scheme.layers())
            .map(|l| scheme.layer(l).into_vec())
            .collect();
        let max_layer_weight = layers
            .iter()
            .map(|rows| h.column_weights(rows).into_iter().max().unwrap_or(0))
            .max()
            .unwrap_or(0);
        Ok(Self {
            h,
            layers,
            max_layer_weight,
        })
    }

    /// Largest column weight of any single layer.
    pub fn max_layer_weight(&self) -> u32 {
        self.max_layer_weight
    }

    pub fn decode(&self, r: &[f64], cfg: &DecoderConfig) -> Result<DecodeResult> {
        let h = self.h;
        if r.len() != h.num_cols() {
            return Err(Error::DecoderInput(format!(
                "expected {} LLRs, got {}",
                h.num_cols(),
                r.len()
            )));
        }
        if let Some(p) = r.iter().position(|x| !x.is_finite()) {
            return Err(Error::DecoderInput(format!("LLR {p} is not finite")));
        }
        let clamp = cfg.clamp;
        let mut lam = r.to_vec();
        let mut delta = vec![0.0f64; h.nnz()];
        let mut update = vec![0.0f64; h.nnz()];
        let mut mag: Vec<f64> = Vec::new();
        let mut suffix: Vec<f64> = Vec::new();
        let mut touched = vec![false; if self.max_layer_weight == 1 { h.num_cols() } else { 0 }];
        let mut iterations = 0;
        let mut bits = hard_decision(&lam);
        let mut converged = false;
        while iterations < cfg.max_iterations {
            iterations += 1;
            for rows in &self.layers {
                // messages of the whole layer from the entry values of lam
                for &i in rows {
                    let off = h.row_offset(i);
                    let cols = h.row_cols(i);
                    mag.clear();
                    let mut neg = false;
                    for (e, &c) in cols.iter().enumerate() {
                        let mu = (lam[c as usize] - delta[off + e]).clamp(-clamp, clamp);
                        neg ^= mu < 0.0;
                        mag.push((mu.abs() / 2.0).tanh());
                    }
                    let d = mag.len();
                    suffix.clear();
                    suffix.resize(d + 1, 1.0);
                    for e in (0..d).rev() {
                        suffix[e] = suffix[e + 1] * mag[e];
                    }
                    let mut prefix = 1.0;
                    for (e, &c) in cols.iter().enumerate() {
                        let mu_neg = lam[c as usize] - delta[off + e] < 0.0;
                        let p = prefix * suffix[e + 1];
                        let m = (2.0 * p.atanh()).min(clamp);
                        update[off + e] = if neg ^ mu_neg { -m } else { m };
                        prefix *= mag[e];
                    }
                }
                for &i in rows {
                    let off = h.row_offset(i);
                    for (e, &c) in h.row_cols(i).iter().enumerate() {
                        let c = c as usize;
                        if !touched.is_empty() {
                            debug_assert!(!touched[c], "column {c} updated twice in one layer");
                            touched[c] = true;
                        }
                        lam[c] += update[off + e] - delta[off + e];
                        delta[off + e] = update[off + e];
                    }
                }
                if !touched.is_empty() {
                    touched.iter_mut().for_each(|t| *t = false);
                }
            }
            bits = hard_decision(&lam);
            if syndrome_ok(h, &bits) {
                converged = true;
                break;
            }
        }
        Ok(DecodeResult {
            bits,
            iterations,
            converged,
            llrs: lam,
        })
    }
}

/// One-shot layered decode with the default clamp.
pub fn decode(
    h: &SparsePcm,
    scheme: &PartitionScheme,
    r: &[f64],
    max_iterations: usize,
) -> Result<DecodeResult> {
    let cfg = DecoderConfig {
        max_iterations,
        ..DecoderConfig::default()
    };
    LayeredDecoder::new(h, scheme)?.decode(r, &cfg)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::base::BaseMatrix;
    use crate::codes;
    use crate::pcm::expand;
    use proptest::prelude::*;

    /// Flooding sum-product reference.
    pub(crate) fn flooding(h: &SparsePcm, r: &[f64], max_iter: usize) -> (Vec<u8>, usize, bool) {
        let rows: Vec<Vec<usize>> = (0..h.num_rows())
            .map(|i| h.row_cols(i).iter().map(|&c| c as usize).collect())
            .collect();
        let mut c2v: Vec<Vec<f64>> = rows.iter().map(|r| vec![0.0; r.len()]).collect();
        let mut bits = hard_decision(r);
        for it in 1..=max_iter {
            let mut lam = r.to_vec();
            for (i, row) in rows.iter().enumerate() {
                for (e, &c) in row.iter().enumerate() {
                    lam[c] += c2v[i][e];
                }
            }
            let mut next = c2v.clone();
            for (i, (row, out)) in rows.iter().zip(next.iter_mut()).enumerate() {
                for (e, slot) in out.iter_mut().enumerate() {
                    let mut p = 1.0;
                    for (f, &c) in row.iter().enumerate() {
                        if f != e {
                            let mu = (lam[c] - c2v[i][f]).clamp(-30.0, 30.0);
                            p *= (mu / 2.0).tanh();
                        }
                    }
                    *slot = (2.0 * p.atanh()).clamp(-30.0, 30.0);
                }
            }
            c2v = next;
            let mut post = r.to_vec();
            for (i, row) in rows.iter().enumerate() {
                for (e, &c) in row.iter().enumerate() {
                    post[c] += c2v[i][e];
                }
            }
            bits = hard_decision(&post);
            if syndrome_ok(h, &bits) {
                return (bits, it, true);
            }
        }
        (bits, max_iter, false)
    }

    fn example_setup() -> (SparsePcm, PartitionScheme) {
        let h = expand(&codes::example());
        let s = PartitionScheme::canonical(2, 4, 4).unwrap();
        (h, s)
    }

    /// All codewords of a small code by brute force.
    pub(crate) fn codewords(h: &SparsePcm) -> Vec<Vec<u8>> {
        let n = h.num_cols();
        assert!(n <= 20);
        (0u32..1 << n)
            .map(|w| (0..n).map(|j| ((w >> j) & 1) as u8).collect::<Vec<u8>>())
            .filter(|b| syndrome_ok(h, b))
            .collect()
    }

    #[test]
    fn noiseless_frame() {
        let (h, s) = example_setup();
        let r = decode(&h, &s, &[10.0; 12], 10).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert!(r.bits.iter().all(|&b| b == 0));
    }

    #[test]
    fn zero_llrs_are_a_fixed_point() {
        let (h, s) = example_setup();
        let r = decode(&h, &s, &[0.0; 12], 10).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert!(r.llrs.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn one_layer_schedule_is_flooding() {
        let h = expand(&codes::example());
        let s = PartitionScheme::canonical(2, 4, 1).unwrap();
        for p in 0..12 {
            let mut r = vec![10.0; 12];
            r[p] = -10.0;
            let layered = decode(&h, &s, &r, 10).unwrap();
            let (bits, iters, conv) = flooding(&h, &r, 10);
            assert_eq!((layered.bits, layered.iterations, layered.converged), (bits, iters, conv), "position {p}");
        }
    }

    #[test]
    fn single_flip_on_light_bits() {
        // bits 9..11 sit outside the 4-cycles of the toy code
        let (h, s) = example_setup();
        for p in 9..12 {
            let mut r = vec![10.0; 12];
            r[p] = -10.0;
            let layered = decode(&h, &s, &r, 10).unwrap();
            let (bits, _, conv) = flooding(&h, &r, 10);
            assert!(layered.converged && conv);
            assert_eq!(layered.bits, bits);
            assert!(bits.iter().all(|&b| b == 0));
        }
    }

    #[test]
    fn syndrome_checks() {
        let (h, _) = example_setup();
        assert!(syndrome_ok(&h, &[0; 12]));
        let mut one = vec![0u8; 12];
        one[0] = 1;
        assert!(!syndrome_ok(&h, &one));
        let words = codewords(&h);
        assert!(words.len() > 1);
        assert!(words.iter().skip(1).all(|w| w.contains(&1)));
    }

    #[test]
    fn input_errors() {
        let (h, s) = example_setup();
        assert!(matches!(decode(&h, &s, &[0.0; 11], 5), Err(Error::DecoderInput(_))));
        let mut r = vec![1.0; 12];
        r[3] = f64::NAN;
        assert!(matches!(decode(&h, &s, &r, 5), Err(Error::DecoderInput(_))));
        let other = PartitionScheme::canonical(3, 4, 4).unwrap();
        assert!(LayeredDecoder::new(&h, &other).is_err());
    }

    #[test]
    fn layer_weight_reported() {
        let (h, s) = example_setup();
        let d = LayeredDecoder::new(&h, &s).unwrap();
        assert_eq!(d.max_layer_weight(), 1);
        let single = PartitionScheme::canonical(2, 4, 1).unwrap();
        assert_eq!(LayeredDecoder::new(&h, &single).unwrap().max_layer_weight(), 2);
    }

    fn even_code() -> SparsePcm {
        // every row has weight 2 or 4, so the all-ones word is a codeword
        let (b, _) = BaseMatrix::parse("2 4 4\n0 1 2 3\n1 -1 3 -1\n").unwrap();
        expand(&b)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn converged_output_is_codeword(r in prop::collection::vec(-4.0f64..4.0, 12), layers in 0usize..3) {
            let h = expand(&codes::example());
            let s = PartitionScheme::canonical(2, 4, [1usize, 2, 4][layers]).unwrap();
            let out = decode(&h, &s, &r, 10).unwrap();
            prop_assert_eq!(out.converged, syndrome_ok(&h, &out.bits));
            prop_assert!(out.iterations >= 1 && out.iterations <= 10);
            prop_assert_eq!(decode(&h, &s, &r, 10).unwrap(), out);
        }

        #[test]
        fn negation_complements(r in prop::collection::vec(0.1f64..5.0, 16), signs in prop::collection::vec(any::<bool>(), 16)) {
            let h = even_code();
            let s = PartitionScheme::canonical(2, 4, 2).unwrap();
            let r: Vec<f64> = r.iter().zip(&signs).map(|(&x, &n)| if n { -x } else { x }).collect();
            let neg: Vec<f64> = r.iter().map(|x| -x).collect();
            let a = decode(&h, &s, &r, 10).unwrap();
            let b = decode(&h, &s, &neg, 10).unwrap();
            prop_assert_eq!(a.iterations, b.iterations);
            for (x, y) in a.llrs.iter().zip(&b.llrs) {
                prop_assert_eq!(*x, -*y);
            }
            if a.llrs.iter().all(|&x| x != 0.0) {
                prop_assert!(a.bits.iter().zip(&b.bits).all(|(x, y)| x ^ y == 1));
            }
        }
    }
}
