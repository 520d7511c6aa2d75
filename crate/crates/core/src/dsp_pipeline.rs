//! Boundary detection on a raw line-sensor frame.
//!
//! The chain is Hampel de-burring, a left-anchored moving average
//! `y[n] = mean(x[n+1..=n+M])`, a forward difference `z[n] = y[n+dx] - y[n]`,
//! and an argmax of the positive part of `z` inside the scan window. `index1`
//! is reported as the left anchor `n` of that difference window; the constant
//! offset to the physical boundary centre (about `dx/2 + (M+1)/2` pixels) is
//! left for the calibration to absorb.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensor_sim::{LiquidLevel, PixelFrame, DEFAULT_FULL_SCALE_VOLTS};

/// Normal-consistency constant relating the MAD to a standard deviation.
const MAD_SCALE: f64 = 1.4826;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub window_m: usize,
    pub step_dx: usize,
    pub scan_start: usize,
    pub scan_end: usize,
    /// Minimum accepted maximum difference, in volts.
    pub diff_threshold: f64,
    /// Hampel half-window.
    pub outlier_window: usize,
    pub outlier_k: f64,
    /// Used by the liquid-level classifier.
    pub full_scale_volts: f64,
    /// Least-squares slope (V/pixel) needed over the leading pixels to call a
    /// frame rising or falling.
    pub level_slope_min: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            window_m: 20,
            step_dx: 80,
            scan_start: 100,
            scan_end: 1800,
            diff_threshold: 2.0,
            outlier_window: 3,
            outlier_k: 3.0,
            full_scale_volts: DEFAULT_FULL_SCALE_VOLTS,
            level_slope_min: 1e-3,
        }
    }
}

impl PipelineConfig {
    /// Checks the configuration against a frame length.
    pub fn validate(&self, pixel_count: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.window_m < 1 {
            return bad("window_m must be at least 1".into());
        }
        if self.step_dx < 1 {
            return bad("step_dx must be at least 1".into());
        }
        if self.scan_start >= self.scan_end {
            return bad(format!(
                "scan_start {} must be below scan_end {}",
                self.scan_start, self.scan_end
            ));
        }
        // z has pixel_count - M - dx entries; scan_end must index one of them.
        if self.scan_end + self.step_dx + self.window_m >= pixel_count {
            return bad(format!(
                "scan_end + step_dx + window_m = {} must stay below pixel count {pixel_count}",
                self.scan_end + self.step_dx + self.window_m
            ));
        }
        if !(self.diff_threshold >= 0.0) {
            return bad("diff_threshold must be non-negative".into());
        }
        if !(self.outlier_k > 0.0) {
            return bad("outlier_k must be positive".into());
        }
        if !(self.full_scale_volts > 0.0) {
            return bad("full_scale_volts must be positive".into());
        }
        if !(self.level_slope_min > 0.0) {
            return bad("level_slope_min must be positive".into());
        }
        Ok(())
    }

    /// Where `index1` lands for a noiseless symmetric edge centred at
    /// `boundary_px`.
    pub fn expected_index1(&self, boundary_px: f64) -> f64 {
        boundary_px - self.step_dx as f64 / 2.0 - (self.window_m as f64 + 1.0) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDetection {
    /// `None` when the level check short-circuited detection.
    pub index1: Option<usize>,
    pub max_diff_volts: Option<f64>,
    pub level: LiquidLevel,
    pub accepted: bool,
}

/// Intermediate signals of [`process_frame`], for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineTrace {
    pub deburred: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub difference: Vec<f64>,
    pub detection: BoundaryDetection,
}

fn median_in_place(buf: &mut [f64]) -> f64 {
    buf.sort_unstable_by(f64::total_cmp);
    let n = buf.len();
    if n % 2 == 1 {
        buf[n / 2]
    } else {
        0.5 * (buf[n / 2 - 1] + buf[n / 2])
    }
}

/// Hampel filter: replaces samples further than `k * 1.4826 * MAD` from the
/// median of their `2h+1` neighbourhood (truncated at the ends) with that
/// median.
pub fn remove_outliers(voltages: &[f64], cfg: &PipelineConfig) -> Result<Vec<f64>> {
    let h = cfg.outlier_window;
    let needed = 2 * h + 1;
    if voltages.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: voltages.len(),
        });
    }
    let n = voltages.len();
    let mut out = voltages.to_vec();
    let mut window = Vec::with_capacity(needed);
    let mut deviations = Vec::with_capacity(needed);
    for i in 0..n {
        let lo = i.saturating_sub(h);
        let hi = (i + h + 1).min(n);
        window.clear();
        window.extend_from_slice(&voltages[lo..hi]);
        let med = median_in_place(&mut window);
        deviations.clear();
        deviations.extend(voltages[lo..hi].iter().map(|v| (v - med).abs()));
        let mad = median_in_place(&mut deviations);
        if (voltages[i] - med).abs() > cfg.outlier_k * MAD_SCALE * mad {
            out[i] = med;
        }
    }
    Ok(out)
}

/// `y[n] = (1/M) * sum(x[n+1..=n+M])` for `n` in `0..N-M`.
pub fn moving_average(voltages: &[f64], window_m: usize) -> Result<Vec<f64>> {
    if window_m == 0 {
        return Err(Error::InvalidConfig("window_m must be at least 1".into()));
    }
    if voltages.len() < window_m + 1 {
        return Err(Error::TooShort {
            needed: window_m + 1,
            got: voltages.len(),
        });
    }
    let m = window_m as f64;
    Ok(voltages[1..]
        .windows(window_m)
        .map(|w| w.iter().sum::<f64>() / m)
        .collect())
}

/// `z[n] = y[n+dx] - y[n]`.
pub fn first_difference(y: &[f64], step_dx: usize) -> Result<Vec<f64>> {
    if step_dx == 0 {
        return Err(Error::InvalidConfig("step_dx must be at least 1".into()));
    }
    if y.len() < step_dx + 1 {
        return Err(Error::TooShort {
            needed: step_dx + 1,
            got: y.len(),
        });
    }
    Ok(y[step_dx..].iter().zip(y).map(|(ahead, here)| ahead - here).collect())
}

/// Argmax of the rising part of `z` over `[scan_start, scan_end]`, smallest
/// index on ties. Returns `(index1, max_diff, accepted)`.
pub fn detect_boundary(z: &[f64], cfg: &PipelineConfig) -> Result<(usize, f64, bool)> {
    if cfg.scan_start > cfg.scan_end || cfg.scan_end >= z.len() {
        return Err(Error::InvalidConfig(format!(
            "scan window [{}, {}] does not fit a difference sequence of length {}",
            cfg.scan_start,
            cfg.scan_end,
            z.len()
        )));
    }
    let mut best: Option<(usize, f64)> = None;
    for (n, &v) in z.iter().enumerate().take(cfg.scan_end + 1).skip(cfg.scan_start) {
        if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
            best = Some((n, v));
        }
    }
    let (index1, max_diff) = best.ok_or(Error::NoRisingEdge)?;
    Ok((index1, max_diff, max_diff > cfg.diff_threshold))
}

fn ls_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = ys.iter().sum::<f64>() / n;
    let (sxy, sxx) = ys.iter().enumerate().fold((0.0, 0.0), |(sxy, sxx), (i, y)| {
        let dx = i as f64 - x_mean;
        (sxy + dx * (y - y_mean), sxx + dx * dx)
    });
    sxy / sxx
}

/// Liquid-level verdict from the pixels ahead of the scan window.
pub fn classify_level(frame: &PixelFrame, cfg: &PipelineConfig) -> Result<LiquidLevel> {
    let lead_len = cfg.scan_start;
    if lead_len < 2 || frame.len() < lead_len {
        return Err(Error::TooShort {
            needed: lead_len.max(2),
            got: frame.len(),
        });
    }
    let lead = &frame.voltages[..lead_len];
    let fs = cfg.full_scale_volts;
    let mean = lead.iter().sum::<f64>() / lead_len as f64;
    let (min, max) = lead
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if mean >= 0.8 * fs && max - min <= 0.05 * fs {
        return Ok(LiquidLevel::Empty);
    }
    let slope = ls_slope(lead);
    if slope <= -cfg.level_slope_min {
        Ok(LiquidLevel::VeryLow)
    } else if slope >= cfg.level_slope_min {
        Ok(LiquidLevel::Normal)
    } else {
        Err(Error::AmbiguousLevel { slope })
    }
}

pub fn process_frame(frame: &PixelFrame, cfg: &PipelineConfig) -> Result<BoundaryDetection> {
    process_frame_traced(frame, cfg).map(|t| t.detection)
}

/// [`process_frame`] keeping every intermediate signal. Non-Normal frames
/// carry empty signal vectors.
pub fn process_frame_traced(frame: &PixelFrame, cfg: &PipelineConfig) -> Result<PipelineTrace> {
    cfg.validate(frame.len())?;
    let level = classify_level(frame, cfg)?;
    if level != LiquidLevel::Normal {
        return Ok(PipelineTrace {
            deburred: Vec::new(),
            smoothed: Vec::new(),
            difference: Vec::new(),
            detection: BoundaryDetection {
                index1: None,
                max_diff_volts: None,
                level,
                accepted: false,
            },
        });
    }
    let deburred = remove_outliers(&frame.voltages, cfg)?;
    let smoothed = moving_average(&deburred, cfg.window_m)?;
    let difference = first_difference(&smoothed, cfg.step_dx)?;
    let (index1, max_diff, accepted) = detect_boundary(&difference, cfg)?;
    Ok(PipelineTrace {
        deburred,
        smoothed,
        difference,
        detection: BoundaryDetection {
            index1: Some(index1),
            max_diff_volts: Some(max_diff),
            level,
            accepted,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PipelineConfig {
        PipelineConfig::default()
    }

    #[test]
    fn moving_average_small_case() {
        assert_eq!(moving_average(&[1.0, 2.0, 3.0, 4.0], 2).unwrap(), vec![2.5, 3.5]);
        assert!(moving_average(&[1.0, 2.0], 2).is_err());
        let c = vec![0.7; 50];
        for m in [1, 5, 20, 49] {
            assert!(moving_average(&c, m).unwrap().iter().all(|&v| (v - 0.7).abs() < 1e-15));
        }
    }

    #[test]
    fn first_difference_cases() {
        assert!(first_difference(&[2.0; 10], 3).unwrap().iter().all(|&v| v == 0.0));
        let ramp: Vec<f64> = (0..200).map(|n| 0.25 * n as f64).collect();
        let z = first_difference(&ramp, 80).unwrap();
        assert_eq!(z.len(), 120);
        assert!(z.iter().all(|&v| (v - 20.0).abs() < 1e-12));
        assert!(matches!(
            first_difference(&[1.0; 5], 5),
            Err(Error::TooShort { needed: 6, got: 5 })
        ));
    }

    #[test]
    fn detect_single_peak() {
        let mut z = vec![0.0; 2000];
        z[700] = 3.0;
        assert_eq!(detect_boundary(&z, &cfg()).unwrap(), (700, 3.0, true));
        let strict = PipelineConfig {
            diff_threshold: 5.0,
            ..cfg()
        };
        assert_eq!(detect_boundary(&z, &strict).unwrap(), (700, 3.0, false));
    }

    #[test]
    fn detect_ties_and_rising_only() {
        let mut z = vec![-1.0; 2000];
        assert!(matches!(detect_boundary(&z, &cfg()), Err(Error::NoRisingEdge)));
        z[50] = 9.0; // outside the scan window
        z[400] = 2.5;
        z[900] = 2.5;
        assert_eq!(detect_boundary(&z, &cfg()).unwrap(), (400, 2.5, true));
        assert!(detect_boundary(&z[..1500], &cfg()).is_err());
    }

    #[test]
    fn hampel_constant_and_short() {
        let c = vec![1.25; 30];
        assert_eq!(remove_outliers(&c, &cfg()).unwrap(), c);
        assert!(matches!(
            remove_outliers(&[0.0; 6], &cfg()),
            Err(Error::TooShort { needed: 7, got: 6 })
        ));
    }

    #[test]
    fn hampel_spike_on_ramp() {
        let ramp: Vec<f64> = (0..100).map(|i| 0.01 * i as f64).collect();
        let mut x = ramp.clone();
        x[40] += 1.0;
        let out = remove_outliers(&x, &cfg()).unwrap();
        // local median of the 7-neighbourhood containing the spike
        assert_eq!(out[40], ramp[41]);
        for i in (0..100).filter(|&i| i != 40) {
            assert_eq!(out[i], ramp[i], "pixel {i}");
        }
    }

    #[test]
    fn classify_requires_leading_pixels() {
        let frame = PixelFrame {
            voltages: vec![1.0; 50],
            integration_time_us: 1600.0,
            led_level: 1.0,
            temperature_c: 20.0,
        };
        assert!(classify_level(&frame, &cfg()).is_err());
    }

    #[test]
    fn classify_flat_mid_level_is_ambiguous() {
        let frame = PixelFrame {
            voltages: vec![1.0; 2496],
            integration_time_us: 1600.0,
            led_level: 1.0,
            temperature_c: 20.0,
        };
        assert!(matches!(
            classify_level(&frame, &cfg()),
            Err(Error::AmbiguousLevel { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate(2496).is_ok());
        assert!(cfg().validate(1900).is_err());
        assert!(PipelineConfig { window_m: 0, ..cfg() }.validate(2496).is_err());
        assert!(PipelineConfig { scan_start: 1800, ..cfg() }.validate(2496).is_err());
        assert!(PipelineConfig { diff_threshold: -1.0, ..cfg() }.validate(2496).is_err());
    }
}
