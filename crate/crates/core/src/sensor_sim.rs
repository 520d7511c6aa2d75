//! Synthetic 1-D CMOS line-sensor frames for a critical-angle refractometer.
//!
//! The optical chain is deliberately simple: sucrose concentration maps to a
//! refractive index through a fixed linear model, the index maps to the
//! critical angle of the prism/sample interface, and the angle maps affinely
//! onto the pixel array. The frame itself is a logistic dark-to-bright
//! transition centred on that pixel, scaled by LED level and integration time,
//! with white noise and single-pixel burrs layered on top.
//!
//! Randomness comes from one ChaCha8 stream per call, seeded with
//! `seed_from_u64(scenario.seed)`. Draw order is fixed: one normal draw per
//! pixel (skipped when `noise_sd_volts == 0`), then the Poisson burr count,
//! then a (position, amplitude) pair per burr.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_PIXEL_COUNT: usize = 2496;
pub const DEFAULT_FULL_SCALE_VOLTS: f64 = 3.3;

/// Refractive index of pure water at 20 °C on the linear sucrose model.
pub const WATER_INDEX: f64 = 1.3330;
/// Index increment per % Brix.
pub const INDEX_PER_BRIX: f64 = 1.427e-3;
pub const MAX_BRIX: f64 = 85.0;

/// Dark-side floor of a Normal frame.
const DARK_FLOOR_VOLTS: f64 = 0.1;
/// Stray light that rolls on over the leading pixels of a Normal frame.
const LEAD_IN_VOLTS: f64 = 0.2;
const LEAD_IN_PX: f64 = 100.0;
/// Bright-minus-dark swing at full LED drive and 1600 us integration.
const NOMINAL_SWING_VOLTS: f64 = 2.95;
const NOMINAL_EXPOSURE: f64 = 1600.0;
/// Without liquid the whole array sees totally reflected light.
const EMPTY_GAIN: f64 = 1.25;
/// A thin liquid film leaks light that decays over the leading pixels.
const VERY_LOW_PEAK_FRACTION: f64 = 0.8;
const VERY_LOW_DECAY_PX: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LiquidLevel {
    Normal,
    VeryLow,
    Empty,
}

impl LiquidLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            LiquidLevel::Normal => "NORMAL",
            LiquidLevel::VeryLow => "VERY_LOW",
            LiquidLevel::Empty => "EMPTY",
        }
    }
}

impl fmt::Display for LiquidLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LiquidLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "normal" => Ok(LiquidLevel::Normal),
            "very-low" => Ok(LiquidLevel::VeryLow),
            "empty" => Ok(LiquidLevel::Empty),
            _ => Err(Error::Domain(format!("unknown liquid level `{s}`"))),
        }
    }
}

/// Optics of the prism and placement of the sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimGeometry {
    pub n_prism: f64,
    /// Pixels per radian of critical-angle change.
    pub angle_to_pixel_slope: f64,
    /// Critical angle (radians) that lands on `pixel_ref`.
    pub theta_ref: f64,
    pub pixel_ref: f64,
    pub pixel_count: usize,
    pub full_scale_volts: f64,
}

impl Default for SimGeometry {
    fn default() -> Self {
        let n_prism = 1.90;
        Self {
            n_prism,
            angle_to_pixel_slope: 24_000.0,
            theta_ref: (WATER_INDEX / n_prism).asin(),
            pixel_ref: 180.0,
            pixel_count: DEFAULT_PIXEL_COUNT,
            full_scale_volts: DEFAULT_FULL_SCALE_VOLTS,
        }
    }
}

impl SimGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_prism > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "n_prism must exceed 1, got {}",
                self.n_prism
            )));
        }
        if self.pixel_count < 2 {
            return Err(Error::InvalidConfig("pixel_count must be at least 2".into()));
        }
        if !(self.full_scale_volts > 0.0) {
            return Err(Error::InvalidConfig("full_scale_volts must be positive".into()));
        }
        if !self.angle_to_pixel_slope.is_finite()
            || !self.theta_ref.is_finite()
            || !self.pixel_ref.is_finite()
        {
            return Err(Error::InvalidConfig("geometry values must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub brix: f64,
    pub level: LiquidLevel,
    pub led_level: f64,
    pub integration_time_us: f64,
    pub transition_width_px: f64,
    pub noise_sd_volts: f64,
    /// Expected burrs per frame.
    pub burr_rate: f64,
    pub burr_amp_volts: f64,
    pub temperature_c: f64,
    pub seed: u64,
}

impl Default for SimScenario {
    fn default() -> Self {
        Self {
            brix: 7.2,
            level: LiquidLevel::Normal,
            led_level: 1.0,
            integration_time_us: 1600.0,
            transition_width_px: 20.0,
            noise_sd_volts: 0.01,
            burr_rate: 5.0,
            burr_amp_volts: 1.0,
            temperature_c: 20.0,
            seed: 0,
        }
    }
}

impl SimScenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(0.0..=MAX_BRIX).contains(&self.brix) {
            return bad("brix must lie in [0, 85]");
        }
        if !(0.0..=1.0).contains(&self.led_level) {
            return bad("led_level must lie in [0, 1]");
        }
        if !(self.integration_time_us >= 0.0) || !self.integration_time_us.is_finite() {
            return bad("integration_time_us must be non-negative");
        }
        if !(self.transition_width_px > 0.0) || !self.transition_width_px.is_finite() {
            return bad("transition_width_px must be positive");
        }
        if !(self.noise_sd_volts >= 0.0) || !self.noise_sd_volts.is_finite() {
            return bad("noise_sd_volts must be non-negative");
        }
        if !(self.burr_rate >= 0.0) || !self.burr_rate.is_finite() {
            return bad("burr_rate must be non-negative");
        }
        if !(self.burr_amp_volts >= 0.0) || !self.burr_amp_volts.is_finite() {
            return bad("burr_amp_volts must be non-negative");
        }
        if !self.temperature_c.is_finite() {
            return bad("temperature_c must be finite");
        }
        Ok(())
    }

    /// Same scenario with noise and burrs switched off.
    pub fn noiseless(mut self) -> Self {
        self.noise_sd_volts = 0.0;
        self.burr_rate = 0.0;
        self
    }

    /// Bright-minus-dark swing before clamping.
    pub fn swing_volts(&self) -> f64 {
        NOMINAL_SWING_VOLTS * self.led_level * self.integration_time_us / NOMINAL_EXPOSURE
    }
}

/// One capture of the line sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelFrame {
    pub voltages: Vec<f64>,
    pub integration_time_us: f64,
    pub led_level: f64,
    pub temperature_c: f64,
}

impl PixelFrame {
    pub fn len(&self) -> usize {
        self.voltages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voltages.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Burr {
    pub pixel: usize,
    pub amplitude_volts: f64,
}

/// Ground truth behind a synthesized frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthTruth {
    /// Clamped noiseless curve.
    pub base: Vec<f64>,
    /// Injected boundary centre; `None` for Empty and VeryLow levels.
    pub boundary_px: Option<f64>,
    pub burrs: Vec<Burr>,
}

pub fn brix_to_refractive_index(brix: f64) -> Result<f64> {
    if !(0.0..=MAX_BRIX).contains(&brix) {
        return Err(Error::Domain(format!("brix {brix} outside [0, {MAX_BRIX}]")));
    }
    Ok(WATER_INDEX + INDEX_PER_BRIX * brix)
}

/// `arcsin(n_sample / n_prism)`.
pub fn critical_angle(n_sample: f64, n_prism: f64) -> Result<f64> {
    if !(n_sample > 0.0) || !(n_prism > 0.0) {
        return Err(Error::Domain(format!(
            "refractive indices must be positive (sample {n_sample}, prism {n_prism})"
        )));
    }
    if n_sample > n_prism {
        return Err(Error::NoTotalReflection { n_sample, n_prism });
    }
    Ok((n_sample / n_prism).asin())
}

pub fn boundary_pixel(theta_c: f64, geom: &SimGeometry) -> Result<f64> {
    if !(theta_c > 0.0 && theta_c <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("critical angle {theta_c} outside (0, pi/2]")));
    }
    let position = geom.pixel_ref + geom.angle_to_pixel_slope * (theta_c - geom.theta_ref);
    let last = (geom.pixel_count - 1) as f64;
    if !(0.0..=last).contains(&position) {
        return Err(Error::PixelOutOfRange {
            position,
            pixel_count: geom.pixel_count,
        });
    }
    Ok(position)
}

/// Boundary pixel for a Brix value through the full optical chain.
pub fn brix_to_pixel(brix: f64, geom: &SimGeometry) -> Result<f64> {
    let n = brix_to_refractive_index(brix)?;
    let theta = critical_angle(n, geom.n_prism)?;
    boundary_pixel(theta, geom)
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

/// Noiseless curve before clamping, plus the injected boundary position.
fn base_curve(scn: &SimScenario, geom: &SimGeometry) -> Result<(Vec<f64>, Option<f64>)> {
    scn.validate()?;
    geom.validate()?;
    let swing = scn.swing_volts();
    let n = geom.pixel_count;
    match scn.level {
        LiquidLevel::Normal => {
            let p = brix_to_pixel(scn.brix, geom)?;
            let w = scn.transition_width_px;
            let curve = (0..n)
                .map(|i| {
                    let x = i as f64;
                    let lead = LEAD_IN_VOLTS * (x / LEAD_IN_PX).min(1.0);
                    DARK_FLOOR_VOLTS + lead + swing * logistic((x - p) / w)
                })
                .collect();
            Ok((curve, Some(p)))
        }
        LiquidLevel::Empty => {
            let plateau = DARK_FLOOR_VOLTS + EMPTY_GAIN * swing;
            Ok((vec![plateau; n], None))
        }
        LiquidLevel::VeryLow => {
            let peak = VERY_LOW_PEAK_FRACTION * swing;
            let curve = (0..n)
                .map(|i| DARK_FLOOR_VOLTS + peak * (-(i as f64) / VERY_LOW_DECAY_PX).exp())
                .collect();
            Ok((curve, None))
        }
    }
}

/// The noiseless curve before clamping to `[0, full_scale_volts]`.
pub fn noiseless_curve(scn: &SimScenario, geom: &SimGeometry) -> Result<Vec<f64>> {
    base_curve(scn, geom).map(|(curve, _)| curve)
}

pub fn synth_frame(scn: &SimScenario, geom: &SimGeometry) -> Result<PixelFrame> {
    synth_frame_detailed(scn, geom).map(|(frame, _)| frame)
}

/// Like [`synth_frame`] but also returns the clean curve and the burr list.
pub fn synth_frame_detailed(
    scn: &SimScenario,
    geom: &SimGeometry,
) -> Result<(PixelFrame, SynthTruth)> {
    let (mut base, boundary_px) = base_curve(scn, geom)?;
    let fs = geom.full_scale_volts;
    for v in base.iter_mut() {
        *v = v.clamp(0.0, fs);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(scn.seed);
    let mut voltages = base.clone();
    if scn.noise_sd_volts > 0.0 {
        let normal = Normal::new(0.0, scn.noise_sd_volts)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        for v in voltages.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }

    let mut burrs = Vec::new();
    if scn.burr_rate > 0.0 && scn.burr_amp_volts > 0.0 {
        let poisson =
            Poisson::new(scn.burr_rate).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let count = poisson.sample(&mut rng) as usize;
        for _ in 0..count {
            let pixel = rng.random_range(0..geom.pixel_count);
            // (0, amp]
            let amplitude_volts = scn.burr_amp_volts * (1.0 - rng.random::<f64>());
            voltages[pixel] += amplitude_volts;
            burrs.push(Burr {
                pixel,
                amplitude_volts,
            });
        }
    }

    for v in voltages.iter_mut() {
        *v = v.clamp(0.0, fs);
    }

    let frame = PixelFrame {
        voltages,
        integration_time_us: scn.integration_time_us,
        led_level: scn.led_level,
        temperature_c: scn.temperature_c,
    };
    Ok((
        frame,
        SynthTruth {
            base,
            boundary_px,
            burrs,
        },
    ))
}

pub const PRESET_NAMES: [&str; 7] = [
    "normal", "empty", "very-low", "weak-led", "t160", "t800", "t1600",
];

/// Named scenarios mirroring typical sensor traces.
///
/// | name       | level   | led  | integration |
/// |------------|---------|------|-------------|
/// | `normal`   | Normal  | 1.0  | 1600 us     |
/// | `empty`    | Empty   | 1.0  | 1600 us     |
/// | `very-low` | VeryLow | 1.0  | 1600 us     |
/// | `weak-led` | Normal  | 0.4  | 1600 us     |
/// | `t160`     | Normal  | 1.0  | 160 us      |
/// | `t800`     | Normal  | 1.0  | 800 us      |
/// | `t1600`    | Normal  | 1.0  | 1600 us     |
///
/// All presets use brix 7.2, 20 px transition width, 0.01 V noise, 5 burrs
/// per frame of up to 1 V, 20 °C and seed 0.
pub fn preset_scenario(name: &str) -> Result<SimScenario> {
    let base = SimScenario::default();
    let scn = match name {
        "normal" | "t1600" => base,
        "empty" => SimScenario {
            level: LiquidLevel::Empty,
            ..base
        },
        "very-low" => SimScenario {
            level: LiquidLevel::VeryLow,
            ..base
        },
        "weak-led" => SimScenario {
            led_level: 0.4,
            ..base
        },
        "t160" => SimScenario {
            integration_time_us: 160.0,
            ..base
        },
        "t800" => SimScenario {
            integration_time_us: 800.0,
            ..base
        },
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok(scn)
}
