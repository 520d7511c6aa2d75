//! Dithered oversampling and accumulate-and-shift decimation.
//!
//! Each output takes `4^w` conversions of the input plus uniform dither,
//! sums them and shifts the sum right by `w` bits, giving a code on an
//! `adc_bits + w` scale.
//!
//! The quantizer floors, so its transfer curve sits half an LSB low. The
//! dither is uniform over `dither_amp_lsb` LSB centred on +1/2 LSB, which is
//! zero-mean about the quantizer's mid-step and makes `E[code] = v / LSB`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OversampleConfig {
    pub base_rate_hz: f64,
    pub extra_bits_w: u32,
    pub adc_bits: u32,
    pub full_scale_volts: f64,
    /// Peak-to-peak dither in base LSB; 0 disables dither.
    pub dither_amp_lsb: f64,
    pub seed: u64,
}

impl Default for OversampleConfig {
    fn default() -> Self {
        Self {
            base_rate_hz: 1000.0,
            extra_bits_w: 2,
            adc_bits: 12,
            full_scale_volts: 3.3,
            dither_amp_lsb: 1.0,
            seed: 0,
        }
    }
}

impl OversampleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.base_rate_hz > 0.0) || !self.base_rate_hz.is_finite() {
            return bad("base_rate_hz must be positive");
        }
        if self.adc_bits < 1 || self.adc_bits + self.extra_bits_w > 32 {
            return bad("adc_bits must be at least 1 and adc_bits + w at most 32");
        }
        if self.extra_bits_w > 12 {
            return bad("extra_bits_w above 12 needs more than 16M conversions per output");
        }
        if !(self.full_scale_volts > 0.0) {
            return bad("full_scale_volts must be positive");
        }
        if !(self.dither_amp_lsb >= 0.0) || !self.dither_amp_lsb.is_finite() {
            return bad("dither_amp_lsb must be non-negative");
        }
        if self.extra_bits_w > 0 && self.dither_amp_lsb != 0.0 && self.dither_amp_lsb < 1.0 {
            return bad("dither_amp_lsb must be at least 1 LSB when oversampling");
        }
        Ok(())
    }

    pub fn lsb_volts(&self) -> f64 {
        self.full_scale_volts / (1u64 << self.adc_bits) as f64
    }

    pub fn enhanced_lsb_volts(&self) -> f64 {
        self.full_scale_volts / (1u64 << (self.adc_bits + self.extra_bits_w)) as f64
    }

    /// Conversions per output sample, `4^w`.
    pub fn samples_per_output(&self) -> u64 {
        1u64 << (2 * self.extra_bits_w)
    }
}

/// `f_os = 4^w * f_s`.
pub fn required_sampling_rate(cfg: &OversampleConfig) -> f64 {
    cfg.samples_per_output() as f64 * cfg.base_rate_hz
}

/// `clamp(floor(v / full_scale * 2^bits), 0, 2^bits - 1)`.
pub fn quantize(v: f64, adc_bits: u32, full_scale_volts: f64) -> u32 {
    let levels = (1u64 << adc_bits) as f64;
    let code = (v / full_scale_volts * levels).floor();
    if code.is_nan() || code < 0.0 {
        0
    } else {
        code.min(levels - 1.0) as u32
    }
}

/// One enhanced sample drawing dither from `rng`.
pub fn oversample_decimate_with<R: Rng + ?Sized>(
    true_volts: f64,
    cfg: &OversampleConfig,
    rng: &mut R,
) -> u64 {
    let lsb = cfg.lsb_volts();
    let mut sum: u64 = 0;
    for _ in 0..cfg.samples_per_output() {
        let dither = if cfg.dither_amp_lsb > 0.0 {
            (0.5 + cfg.dither_amp_lsb * (rng.random::<f64>() - 0.5)) * lsb
        } else {
            0.0
        };
        sum += u64::from(quantize(true_volts + dither, cfg.adc_bits, cfg.full_scale_volts));
    }
    sum >> cfg.extra_bits_w
}

/// Enhanced code for a DC input, deterministic in `cfg.seed`.
pub fn oversample_decimate(true_volts: f64, cfg: &OversampleConfig) -> Result<u64> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(oversample_decimate_with(true_volts, cfg, &mut rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub true_volts: f64,
    pub base_code: u32,
    pub enhanced_code: u64,
    /// `base_code * LSB - true_volts`.
    pub base_error_volts: f64,
    /// `enhanced_code * LSB_enhanced - true_volts`.
    pub enhanced_error_volts: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    pub base_rms_volts: f64,
    pub enhanced_rms_volts: f64,
}

/// DC sweep of `points` evenly spaced inputs over `[start_volts,
/// start_volts + span_volts)`, one shared dither stream seeded from
/// `cfg.seed`. The base column is the plain undithered conversion.
pub fn dc_sweep(
    cfg: &OversampleConfig,
    start_volts: f64,
    span_volts: f64,
    points: usize,
) -> Result<SweepSummary> {
    cfg.validate()?;
    if points == 0 {
        return Err(Error::InvalidConfig("sweep needs at least one point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lsb = cfg.lsb_volts();
    let lsb_enh = cfg.enhanced_lsb_volts();
    let rows: Vec<SweepRow> = (0..points)
        .map(|i| {
            let v = start_volts + span_volts * i as f64 / points as f64;
            let base_code = quantize(v, cfg.adc_bits, cfg.full_scale_volts);
            let enhanced_code = oversample_decimate_with(v, cfg, &mut rng);
            SweepRow {
                true_volts: v,
                base_code,
                enhanced_code,
                base_error_volts: base_code as f64 * lsb - v,
                enhanced_error_volts: enhanced_code as f64 * lsb_enh - v,
            }
        })
        .collect();
    let rms = |f: fn(&SweepRow) -> f64| {
        (rows.iter().map(|r| f(r).powi(2)).sum::<f64>() / rows.len() as f64).sqrt()
    };
    let base_rms_volts = rms(|r| r.base_error_volts);
    let enhanced_rms_volts = rms(|r| r.enhanced_error_volts);
    Ok(SweepSummary {
        rows,
        base_rms_volts,
        enhanced_rms_volts,
    })
}
