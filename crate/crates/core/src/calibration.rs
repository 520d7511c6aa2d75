//! Position-to-concentration mapping.
//!
//! A [`CalibrationModel`] is a list of contiguous least-squares line segments
//! over detector position, a Brix-domain zero offset `c0` taken from pure
//! water, a display scale `k2`, and an optional linear temperature term:
//!
//! ```text
//! C_m = f(P) - c0
//! C_f = k2 * (C_m + temp_coeff * (T - temp_ref_c))
//! ```

use serde::{Deserialize, Serialize};

use crate::dsp_pipeline::{process_frame, PipelineConfig};
use crate::error::{Error, Result};
use crate::sensor_sim::{LiquidLevel, PixelFrame};

pub const MODEL_VERSION: u32 = 1;
pub const DEFAULT_BREAKPOINT_BRIX: f64 = 17.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSegment {
    pub lo: f64,
    pub hi: f64,
    /// Brix per pixel.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl LinearSegment {
    pub fn eval(&self, position: f64) -> f64 {
        self.slope * position + self.intercept
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationModel {
    pub version: u32,
    pub segments: Vec<LinearSegment>,
    pub c0: f64,
    pub k2: f64,
    pub temp_coeff: f64,
    pub temp_ref_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    /// `None` for level alerts.
    pub brix_final: Option<f64>,
    pub brix_raw: Option<f64>,
    pub position: Option<usize>,
    pub temperature_c: f64,
    pub level: LiquidLevel,
}

/// Ordinary least squares over `(position, brix)` pairs.
pub fn fit_linear_segment(points: &[(f64, f64)]) -> Result<LinearSegment> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit);
    }
    let n = points.len() as f64;
    let x_mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let dx = x - x_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let sse: f64 = points
            .iter()
            .map(|&(x, y)| {
                let r = y - (slope * x + intercept);
                r * r
            })
            .sum();
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    Ok(LinearSegment {
        lo,
        hi,
        slope,
        intercept,
        r_squared,
    })
}

/// Fits one segment per Brix band delimited by `breakpoints` (bands are
/// `(-inf, b0]`, `(b0, b1]`, ..., so a point exactly on a breakpoint belongs
/// to the lower band), then joins neighbouring
/// segments at the midpoint between the facing extreme positions.
pub fn build_model(points: &[(f64, f64)], breakpoints: &[f64]) -> Result<CalibrationModel> {
    let mut bps = breakpoints.to_vec();
    if bps.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidConfig("breakpoints must be finite".into()));
    }
    bps.sort_by(f64::total_cmp);
    bps.dedup();

    let mut groups: Vec<Vec<(f64, f64)>> = vec![Vec::new(); bps.len() + 1];
    for &(pos, brix) in points {
        if !pos.is_finite() || !brix.is_finite() {
            return Err(Error::CalibrationInput(format!(
                "non-finite calibration point ({pos}, {brix})"
            )));
        }
        let band = bps.partition_point(|&b| b < brix);
        groups[band].push((pos, brix));
    }
    for (group, pts) in groups.iter().enumerate() {
        if pts.len() < 2 {
            return Err(Error::InsufficientCalibrationData {
                group,
                count: pts.len(),
            });
        }
    }

    let mut segments = groups
        .iter()
        .map(|g| fit_linear_segment(g))
        .collect::<Result<Vec<_>>>()?;
    segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));

    for i in 1..segments.len() {
        let seam = 0.5 * (segments[i - 1].hi + segments[i].lo);
        if !(seam > segments[i - 1].lo && seam < segments[i].hi) {
            return Err(Error::CalibrationInput(format!(
                "calibration bands {} and {} overlap in position",
                i - 1,
                i
            )));
        }
        segments[i - 1].hi = seam;
        segments[i].lo = seam;
    }

    Ok(CalibrationModel {
        version: MODEL_VERSION,
        segments,
        c0: 0.0,
        k2: 1.0,
        temp_coeff: 0.0,
        temp_ref_c: 20.0,
    })
}

/// `reference_slope / prototype_slope`.
pub fn compute_k2(reference_slope: f64, prototype_slope: f64) -> Result<f64> {
    if prototype_slope == 0.0 {
        return Err(Error::ZeroSlope);
    }
    Ok(reference_slope / prototype_slope)
}

impl CalibrationModel {
    pub fn validate(&self) -> Result<()> {
        if self.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                self.version
            )));
        }
        if self.segments.is_empty() {
            return Err(Error::Model("model has no segments".into()));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.lo < s.hi) {
                return Err(Error::Model(format!("segment {i} has lo >= hi")));
            }
            if !(0.0..=1.0).contains(&s.r_squared) {
                return Err(Error::Model(format!("segment {i} r_squared outside [0, 1]")));
            }
            if !s.slope.is_finite() || !s.intercept.is_finite() {
                return Err(Error::Model(format!("segment {i} has non-finite coefficients")));
            }
        }
        for (i, pair) in self.segments.windows(2).enumerate() {
            if pair[0].hi != pair[1].lo {
                return Err(Error::Model(format!(
                    "segments {i} and {} are not contiguous",
                    i + 1
                )));
            }
        }
        if !(self.k2 > 0.0) || !self.k2.is_finite() {
            return Err(Error::Model("k2 must be positive".into()));
        }
        if !self.c0.is_finite() || !self.temp_coeff.is_finite() || !self.temp_ref_c.is_finite() {
            return Err(Error::Model("non-finite model parameter".into()));
        }
        Ok(())
    }

    pub fn lo(&self) -> f64 {
        self.segments.first().map_or(f64::NAN, |s| s.lo)
    }

    pub fn hi(&self) -> f64 {
        self.segments.last().map_or(f64::NAN, |s| s.hi)
    }

    /// Segment for `position`: half-open `[lo, hi)`, the last one closed.
    pub fn segment_for(&self, position: f64) -> Result<&LinearSegment> {
        let last = self.segments.len().saturating_sub(1);
        self.segments
            .iter()
            .enumerate()
            .find(|(i, s)| position >= s.lo && (position < s.hi || (*i == last && position <= s.hi)))
            .map(|(_, s)| s)
            .ok_or(Error::OutOfCalibratedRange {
                position,
                lo: self.lo(),
                hi: self.hi(),
            })
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        self.c0 = c0;
        self
    }

    pub fn with_k2(mut self, k2: f64) -> Self {
        self.k2 = k2;
        self
    }

    pub fn with_temperature_compensation(mut self, temp_coeff: f64, temp_ref_c: f64) -> Self {
        self.temp_coeff = temp_coeff;
        self.temp_ref_c = temp_ref_c;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Model(e.to_string()))
    }

    /// Parses and validates a model document.
    pub fn from_json(text: &str) -> Result<Self> {
        let model: CalibrationModel =
            serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }
}

/// `C_m = f(P) - c0`.
pub fn position_to_concentration(model: &CalibrationModel, position: f64) -> Result<f64> {
    Ok(model.segment_for(position)?.eval(position) - model.c0)
}

/// `C_f = k2 * (C_m + temp_coeff * (T - T_ref))`.
pub fn finalize(c_m: f64, model: &CalibrationModel, temperature_c: f64) -> f64 {
    model.k2 * (c_m + model.temp_coeff * (temperature_c - model.temp_ref_c))
}

fn accepted_position(frame: &PixelFrame, cfg: &PipelineConfig) -> Result<Option<usize>> {
    let det = process_frame(frame, cfg)?;
    if det.level != LiquidLevel::Normal {
        return Ok(None);
    }
    match (det.index1, det.max_diff_volts) {
        (Some(index1), Some(_)) if det.accepted => Ok(Some(index1)),
        (_, max_diff) => Err(Error::WeakSignal {
            max_diff: max_diff.unwrap_or(0.0),
            threshold: cfg.diff_threshold,
        }),
    }
}

/// Zero offset from pure-water frames: the mean of `f(P)` with `c0 = 0`.
/// Returns the model carrying that offset.
pub fn calibrate_zero(
    water_frames: &[PixelFrame],
    model: &CalibrationModel,
    cfg: &PipelineConfig,
) -> Result<CalibrationModel> {
    if water_frames.is_empty() {
        return Err(Error::CalibrationInput("no water frames supplied".into()));
    }
    let mut sum = 0.0;
    for (i, frame) in water_frames.iter().enumerate() {
        let position = match accepted_position(frame, cfg) {
            Ok(Some(p)) => p,
            Ok(None) => {
                return Err(Error::CalibrationInput(format!(
                    "water frame {i} is not at Normal level"
                )))
            }
            Err(e) => return Err(Error::CalibrationInput(format!("water frame {i}: {e}"))),
        };
        sum += model.segment_for(position as f64)?.eval(position as f64);
    }
    Ok(model.clone().with_c0(sum / water_frames.len() as f64))
}

pub fn measure(
    frame: &PixelFrame,
    model: &CalibrationModel,
    cfg: &PipelineConfig,
) -> Result<Measurement> {
    if model.segments.is_empty() {
        return Err(Error::Model("model has no segments".into()));
    }
    let det = process_frame(frame, cfg)?;
    if det.level != LiquidLevel::Normal {
        return Ok(Measurement {
            brix_final: None,
            brix_raw: None,
            position: None,
            temperature_c: frame.temperature_c,
            level: det.level,
        });
    }
    let position = match det.index1 {
        Some(p) if det.accepted => p,
        _ => {
            return Err(Error::WeakSignal {
                max_diff: det.max_diff_volts.unwrap_or(0.0),
                threshold: cfg.diff_threshold,
            })
        }
    };
    let c_m = position_to_concentration(model, position as f64)?;
    Ok(Measurement {
        brix_final: Some(finalize(c_m, model, frame.temperature_c)),
        brix_raw: Some(c_m),
        position: Some(position),
        temperature_c: frame.temperature_c,
        level: LiquidLevel::Normal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_segment(slope: f64, intercept: f64) -> CalibrationModel {
        CalibrationModel {
            version: MODEL_VERSION,
            segments: vec![LinearSegment {
                lo: 0.0,
                hi: 2000.0,
                slope,
                intercept,
                r_squared: 1.0,
            }],
            c0: 0.0,
            k2: 1.0,
            temp_coeff: 0.0,
            temp_ref_c: 20.0,
        }
    }

    #[test]
    fn exact_line_fit() {
        let s = fit_linear_segment(&[(0.0, 0.0), (100.0, 1.0), (200.0, 2.0)]).unwrap();
        assert!((s.slope - 0.01).abs() < 1e-15);
        assert!(s.intercept.abs() < 1e-12);
        assert_eq!(s.r_squared, 1.0);
        assert_eq!((s.lo, s.hi), (0.0, 200.0));
    }

    #[test]
    fn degenerate_fits() {
        assert!(matches!(
            fit_linear_segment(&[(5.0, 1.0), (5.0, 2.0)]),
            Err(Error::DegenerateFit)
        ));
        assert!(matches!(fit_linear_segment(&[(5.0, 1.0)]), Err(Error::DegenerateFit)));
    }

    #[test]
    fn flat_data_has_unit_r_squared() {
        let s = fit_linear_segment(&[(1.0, 3.0), (2.0, 3.0), (4.0, 3.0)]).unwrap();
        assert_eq!(s.r_squared, 1.0);
        assert_eq!(s.slope, 0.0);
    }

    #[test]
    fn single_point_group_rejected() {
        let pts = [(100.0, 5.0), (200.0, 10.0), (900.0, 30.0)];
        assert!(matches!(
            build_model(&pts, &[17.0]),
            Err(Error::InsufficientCalibrationData { group: 1, count: 1 })
        ));
        assert!(matches!(
            build_model(&[], &[]),
            Err(Error::InsufficientCalibrationData { group: 0, count: 0 })
        ));
    }

    #[test]
    fn concentration_and_offset() {
        let m = one_segment(0.01, 0.0);
        assert!((position_to_concentration(&m, 500.0).unwrap() - 5.0).abs() < 1e-12);
        let m = m.with_c0(0.2);
        assert!((position_to_concentration(&m, 500.0).unwrap() - 4.8).abs() < 1e-12);
        assert!(matches!(
            position_to_concentration(&m, 2500.0),
            Err(Error::OutOfCalibratedRange { .. })
        ));
        // last segment is closed
        assert!(position_to_concentration(&m, 2000.0).is_ok());
    }

    #[test]
    fn seam_belongs_to_upper_segment() {
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| (100.0 * i as f64, i as f64))
            .chain((10..20).map(|i| (100.0 * i as f64, 2.0 * i as f64)))
            .collect();
        let m = build_model(&pts, &[10.0]).unwrap();
        assert_eq!(m.segments.len(), 2);
        let seam = m.segments[0].hi;
        assert_eq!(seam, 950.0);
        assert_eq!(m.segment_for(seam).unwrap(), &m.segments[1]);
        assert_eq!(m.segment_for(seam - 1e-9).unwrap(), &m.segments[0]);
    }

    #[test]
    fn breakpoint_value_joins_lower_band() {
        let pts = [(0.0, 0.0), (100.0, 17.0), (200.0, 18.0), (300.0, 30.0)];
        let m = build_model(&pts, &[17.0]).unwrap();
        assert_eq!(m.segments[0].hi, 150.0);
        assert!((m.segments[0].slope - 0.17).abs() < 1e-12);
    }

    #[test]
    fn finalize_cases() {
        let m = one_segment(0.01, 0.0);
        assert_eq!(finalize(5.0, &m, 20.0), 5.0);
        assert!((finalize(5.0, &m.clone().with_k2(1.02), 20.0) - 5.1).abs() < 1e-12);
        let tc = m.with_temperature_compensation(0.06, 20.0);
        assert!((finalize(5.0, &tc, 25.0) - 5.3).abs() < 1e-12);
    }

    #[test]
    fn k2_cases() {
        assert_eq!(compute_k2(0.01, 0.01).unwrap(), 1.0);
        assert!((compute_k2(0.0102, 0.0100).unwrap() - 1.02).abs() < 1e-12);
        assert!(matches!(compute_k2(0.01, 0.0), Err(Error::ZeroSlope)));
    }

    #[test]
    fn calibrate_zero_needs_frames() {
        let m = one_segment(0.01, 0.0);
        assert!(matches!(
            calibrate_zero(&[], &m, &PipelineConfig::default()),
            Err(Error::CalibrationInput(_))
        ));
    }

    #[test]
    fn json_rejects_unknown_fields_and_versions() {
        let m = one_segment(0.01, 0.5);
        let text = m.to_json().unwrap();
        assert_eq!(CalibrationModel::from_json(&text).unwrap(), m);

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(CalibrationModel::from_json(&v.to_string()).is_err());

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["version"] = serde_json::json!(2);
        assert!(matches!(
            CalibrationModel::from_json(&v.to_string()),
            Err(Error::Model(msg)) if msg.contains("version")
        ));

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["segments"][0]["colour"] = serde_json::json!("red");
        assert!(CalibrationModel::from_json(&v.to_string()).is_err());
    }
}
