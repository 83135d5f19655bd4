//! BPSK over AWGN Monte-Carlo frame error rate estimation.
//!
//! The all-zero codeword is sent as `+1` symbols. Each frame draws its
//! noise from its own ChaCha stream, selected by the SNR index and frame
//! index, so results do not depend on how frames are spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::decoder::{DecoderConfig, LayeredDecoder};
use crate::error::{Error, Result};
use crate::partition::PartitionScheme;
use crate::pcm::SparsePcm;

/// Frames decoded per parallel batch. Fixed so the stopping point does not
/// depend on the worker count.
const BATCH: u64 = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    /// Eb/N0 points in dB.
    pub snr_db: Vec<f64>,
    pub rate: f64,
    pub decoder: DecoderConfig,
    pub min_frame_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
    /// Skip the noise and feed saturated LLRs.
    pub noiseless: bool,
}

impl ChannelConfig {
    /// Defaults: 100 frame errors or `10^6` frames, rate `(N - M) / N`.
    pub fn new(h: &SparsePcm, snr_db: Vec<f64>, seed: u64) -> Self {
        Self {
            snr_db,
            rate: base_rate(h),
            decoder: DecoderConfig::default(),
            min_frame_errors: 100,
            max_frames: 1_000_000,
            seed,
            noiseless: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::InvalidSpec("no SNR points".into()));
        }
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(Error::InvalidSpec(format!("rate {} outside (0, 1]", self.rate)));
        }
        if self.min_frame_errors == 0 || self.max_frames == 0 {
            return Err(Error::InvalidSpec(
                "frame error target and frame cap must be positive".into(),
            ));
        }
        if self.decoder.max_iterations == 0 {
            return Err(Error::InvalidSpec("at least one iteration is needed".into()));
        }
        Ok(())
    }
}

/// `(N - M) / N` from the block dimensions.
pub fn base_rate(h: &SparsePcm) -> f64 {
    let (m, n) = (h.block_rows() as f64, h.block_cols() as f64);
    (n - m) / n
}

/// Noise variance per real dimension at `snr_db` (Eb/N0).
pub fn noise_variance(snr_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(snr_db / 10.0))
}

/// Generator for frame `frame` at SNR index `point` under `seed`.
pub fn frame_rng(seed: u64, point: usize, frame: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | (frame & 0xffff_ffff));
    rng
}

/// Channel LLRs `2y / sigma^2` with `y = 1 + sigma * n`.
pub fn gen_frame_llrs(snr_db: f64, rate: f64, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let var = noise_variance(snr_db, rate);
    let sigma = var.sqrt();
    (0..len)
        .map(|_| {
            let n: f64 = StandardNormal.sample(rng);
            2.0 * (1.0 + sigma * n) / var
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub total_iterations: u64,
}

impl SnrPoint {
    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.frames as f64
    }

    pub fn avg_iterations(&self) -> f64 {
        self.total_iterations as f64 / self.frames as f64
    }

    /// Wilson score interval for the FER at normal quantile `z`.
    pub fn wilson(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.frame_errors, self.frames, z)
    }
}

pub fn wilson_interval(errors: u64, frames: u64, z: f64) -> (f64, f64) {
    if frames == 0 {
        return (0.0, 1.0);
    }
    let n = frames as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub seed: u64,
    pub points: Vec<SnrPoint>,
}

impl SimResult {
    pub const CSV_HEADER: &'static str = "snr_db,frames,frame_errors,fer,avg_iterations,seed";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{:.3},{},{},{:.8},{:.4},{}\n",
                p.snr_db,
                p.frames,
                p.frame_errors,
                p.fer(),
                p.avg_iterations(),
                self.seed
            ));
        }
        out
    }
}

/// Simulates every SNR point until `min_frame_errors` errors or
/// `max_frames` frames, whichever comes first.
pub fn run_monte_carlo(h: &SparsePcm, scheme: &PartitionScheme, cfg: &ChannelConfig) -> Result<SimResult> {
    cfg.validate()?;
    let dec = LayeredDecoder::new(h, scheme)?;
    let n = h.num_cols();
    let mut points = Vec::with_capacity(cfg.snr_db.len());
    for (idx, &snr) in cfg.snr_db.iter().enumerate() {
        let mut p = SnrPoint {
            snr_db: snr,
            frames: 0,
            frame_errors: 0,
            total_iterations: 0,
        };
        'batches: while p.frames < cfg.max_frames {
            let start = p.frames;
            let end = (start + BATCH).min(cfg.max_frames);
            let outcomes: Vec<(bool, usize)> = (start..end)
                .into_par_iter()
                .map(|f| {
                    let r = if cfg.noiseless {
                        vec![cfg.decoder.clamp; n]
                    } else {
                        gen_frame_llrs(snr, cfg.rate, n, &mut frame_rng(cfg.seed, idx, f))
                    };
                    let out = dec.decode(&r, &cfg.decoder).expect("LLRs are finite");
                    (out.bits.iter().any(|&b| b != 0), out.iterations)
                })
                .collect();
            for (err, iters) in outcomes {
                p.frames += 1;
                p.frame_errors += err as u64;
                p.total_iterations += iters as u64;
                if p.frame_errors >= cfg.min_frame_errors {
                    break 'batches;
                }
            }
        }
        log::info!(
            "snr {snr:.3} dB: {} frames, {} errors, {:.3} iterations",
            p.frames,
            p.frame_errors,
            p.avg_iterations()
        );
        points.push(p);
    }
    Ok(SimResult {
        seed: cfg.seed,
        points,
    })
}
