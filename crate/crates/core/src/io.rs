//! Capture files, model files and run configuration.
//!
//! A capture is plain text:
//!
//! ```text
//! # refracto-capture v1
//! integration_time_us=1600
//! led_level=1
//! temperature_c=20
//! pixels=2496
//! 0.1
//! 0.10213...
//! ```
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! write/read/write cycle is byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::calibration::CalibrationModel;
use crate::dsp_pipeline::PipelineConfig;
use crate::error::{CaptureErrorKind, Error, Result};
use crate::oversampling::OversampleConfig;
use crate::sensor_sim::{PixelFrame, SimGeometry};

pub const CAPTURE_HEADER_PREFIX: &str = "# refracto-capture ";
pub const CAPTURE_VERSION: &str = "v1";

const META_KEYS: [&str; 4] = ["integration_time_us", "led_level", "temperature_c", "pixels"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn format_capture(frame: &PixelFrame) -> String {
    let mut out = String::with_capacity(frame.len() * 20 + 128);
    out.push_str(CAPTURE_HEADER_PREFIX);
    out.push_str(CAPTURE_VERSION);
    out.push('\n');
    let _ = writeln!(out, "integration_time_us={}", frame.integration_time_us);
    let _ = writeln!(out, "led_level={}", frame.led_level);
    let _ = writeln!(out, "temperature_c={}", frame.temperature_c);
    let _ = writeln!(out, "pixels={}", frame.len());
    for v in &frame.voltages {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn write_capture(frame: &PixelFrame, path: &Path) -> Result<()> {
    fs::write(path, format_capture(frame)).map_err(io_err(path))
}

/// Parses capture text; `origin` names the source in error messages.
pub fn parse_capture(text: &str, origin: &str) -> Result<PixelFrame> {
    let fail = |line: usize, kind: CaptureErrorKind| Error::Capture {
        path: origin.to_string(),
        line,
        kind,
    };

    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, l)) if l.starts_with(CAPTURE_HEADER_PREFIX) => {
            let version = l[CAPTURE_HEADER_PREFIX.len()..].trim();
            if version != CAPTURE_VERSION {
                return Err(fail(1, CaptureErrorKind::Version(version.to_string())));
            }
        }
        _ => return Err(fail(1, CaptureErrorKind::MissingHeader)),
    }

    let mut meta: [Option<f64>; 4] = [None; 4];
    let mut samples = Vec::new();
    let mut last_line = 1;
    for (lineno, line) in lines {
        last_line = lineno;
        if let Some((key, value)) = line.split_once('=') {
            if !samples.is_empty() {
                return Err(fail(lineno, CaptureErrorKind::MisplacedMetadata));
            }
            let key = key.trim();
            let slot = META_KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| fail(lineno, CaptureErrorKind::UnknownKey(key.to_string())))?;
            if meta[slot].is_some() {
                return Err(fail(lineno, CaptureErrorKind::DuplicateKey(key.to_string())));
            }
            let parsed = value
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .filter(|v| key != "pixels" || (v.fract() == 0.0 && *v >= 1.0))
                .ok_or_else(|| {
                    fail(
                        lineno,
                        CaptureErrorKind::BadValue {
                            key: key.to_string(),
                            value: value.trim().to_string(),
                        },
                    )
                })?;
            meta[slot] = Some(parsed);
        } else {
            if samples.is_empty() {
                if let Some(missing) = META_KEYS.iter().zip(&meta).find(|(_, v)| v.is_none()) {
                    return Err(fail(lineno, CaptureErrorKind::MissingKey(missing.0)));
                }
            }
            let v = line
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    fail(lineno, CaptureErrorKind::NonNumericSample(line.trim().to_string()))
                })?;
            samples.push(v);
        }
    }

    if let Some(missing) = META_KEYS.iter().zip(&meta).find(|(_, v)| v.is_none()) {
        return Err(fail(last_line, CaptureErrorKind::MissingKey(missing.0)));
    }
    let declared = meta[3].unwrap_or_default() as usize;
    if samples.len() != declared {
        return Err(fail(
            last_line,
            CaptureErrorKind::CountMismatch {
                declared,
                found: samples.len(),
            },
        ));
    }
    Ok(PixelFrame {
        voltages: samples,
        integration_time_us: meta[0].unwrap_or_default(),
        led_level: meta[1].unwrap_or_default(),
        temperature_c: meta[2].unwrap_or_default(),
    })
}

pub fn read_capture(path: &Path) -> Result<PixelFrame> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_capture(&text, &path.display().to_string())
}

pub fn save_model(model: &CalibrationModel, path: &Path) -> Result<()> {
    model.validate()?;
    let mut text = model.to_json()?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn load_model(path: &Path) -> Result<CalibrationModel> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    CalibrationModel::from_json(&text)
        .map_err(|e| Error::Model(format!("{}: {}", path.display(), e)))
}

/// Simulator overrides applied on top of a preset scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimOverrides {
    pub transition_width_px: Option<f64>,
    pub noise_sd_volts: Option<f64>,
    pub burr_rate: Option<f64>,
    pub burr_amp_volts: Option<f64>,
}

impl SimOverrides {
    pub fn apply(&self, scn: &mut crate::sensor_sim::SimScenario) {
        if let Some(v) = self.transition_width_px {
            scn.transition_width_px = v;
        }
        if let Some(v) = self.noise_sd_volts {
            scn.noise_sd_volts = v;
        }
        if let Some(v) = self.burr_rate {
            scn.burr_rate = v;
        }
        if let Some(v) = self.burr_amp_volts {
            scn.burr_amp_volts = v;
        }
    }
}

/// Flat `key=value` run configuration. Unknown or duplicate keys are errors
/// and every value is checked against its module's invariants at load.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub geometry: SimGeometry,
    pub sim: SimOverrides,
    pub oversample: OversampleConfig,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        let fail = |line: usize, message: String| Error::ConfigParse {
            path: origin.to_string(),
            line,
            message,
        };
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| fail(lineno, format!("expected key=value, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(fail(lineno, format!("duplicate key `{key}`")));
            }
            let float = || {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| fail(lineno, format!("`{key}` expects a number, got `{value}`")))
            };
            let uint = || {
                value
                    .parse::<u64>()
                    .map_err(|_| fail(lineno, format!("`{key}` expects an integer, got `{value}`")))
            };
            let p = &mut cfg.pipeline;
            let g = &mut cfg.geometry;
            let o = &mut cfg.oversample;
            match key {
                "window_m" => p.window_m = uint()? as usize,
                "step_dx" => p.step_dx = uint()? as usize,
                "scan_start" => p.scan_start = uint()? as usize,
                "scan_end" => p.scan_end = uint()? as usize,
                "diff_threshold" => p.diff_threshold = float()?,
                "outlier_window" => p.outlier_window = uint()? as usize,
                "outlier_k" => p.outlier_k = float()?,
                "level_slope_min" => p.level_slope_min = float()?,
                "full_scale_volts" => {
                    let v = float()?;
                    p.full_scale_volts = v;
                    g.full_scale_volts = v;
                    o.full_scale_volts = v;
                }
                "n_prism" => g.n_prism = float()?,
                "angle_to_pixel_slope" => g.angle_to_pixel_slope = float()?,
                "theta_ref" => g.theta_ref = float()?,
                "pixel_ref" => g.pixel_ref = float()?,
                "pixel_count" => g.pixel_count = uint()? as usize,
                "transition_width_px" => cfg.sim.transition_width_px = Some(float()?),
                "noise_sd_volts" => cfg.sim.noise_sd_volts = Some(float()?),
                "burr_rate" => cfg.sim.burr_rate = Some(float()?),
                "burr_amp_volts" => cfg.sim.burr_amp_volts = Some(float()?),
                "base_rate_hz" => o.base_rate_hz = float()?,
                "extra_bits_w" => o.extra_bits_w = uint()? as u32,
                "adc_bits" => o.adc_bits = uint()? as u32,
                "dither_amp_lsb" => o.dither_amp_lsb = float()?,
                "output_dir" => cfg.output_dir = Some(PathBuf::from(value)),
                other => return Err(fail(lineno, format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()
            .map_err(|e| Error::InvalidConfig(format!("{origin}: {e}")))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.pipeline.validate(self.geometry.pixel_count)?;
        self.oversample.validate()?;
        let probe = {
            let mut s = crate::sensor_sim::SimScenario::default();
            self.sim.apply(&mut s);
            s
        };
        probe.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_frame() -> PixelFrame {
        PixelFrame {
            voltages: vec![0.1, 0.25, 3.3, 1.0 / 3.0],
            integration_time_us: 1600.0,
            led_level: 0.75,
            temperature_c: 21.5,
        }
    }

    fn kind(err: Error) -> (usize, CaptureErrorKind) {
        match err {
            Error::Capture { line, kind, .. } => (line, kind),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn header_first_line() {
        let text = format_capture(&small_frame());
        assert_eq!(text.lines().next(), Some("# refracto-capture v1"));
        assert_eq!(parse_capture(&text, "mem").unwrap(), small_frame());
    }

    #[test]
    fn parse_errors_name_lines() {
        let good = format_capture(&small_frame());

        let v2 = good.replacen("v1", "v2", 1);
        assert_eq!(
            kind(parse_capture(&v2, "m").unwrap_err()),
            (1, CaptureErrorKind::Version("v2".into()))
        );

        assert_eq!(
            kind(parse_capture("0.1\n", "m").unwrap_err()),
            (1, CaptureErrorKind::MissingHeader)
        );

        let short: String = good.lines().take(8).map(|l| format!("{l}\n")).collect();
        assert_eq!(
            kind(parse_capture(&short, "m").unwrap_err()),
            (8, CaptureErrorKind::CountMismatch { declared: 4, found: 3 })
        );

        let dup = good.replacen("led_level=0.75\n", "led_level=0.75\nled_level=0.5\n", 1);
        assert_eq!(
            kind(parse_capture(&dup, "m").unwrap_err()),
            (4, CaptureErrorKind::DuplicateKey("led_level".into()))
        );

        let missing = good.replacen("temperature_c=21.5\n", "", 1);
        assert_eq!(
            kind(parse_capture(&missing, "m").unwrap_err()),
            (5, CaptureErrorKind::MissingKey("temperature_c"))
        );

        let nan = good.replacen("\n0.25\n", "\nabc\n", 1);
        assert_eq!(
            kind(parse_capture(&nan, "m").unwrap_err()),
            (7, CaptureErrorKind::NonNumericSample("abc".into()))
        );

        let unknown = good.replacen("pixels=4", "pixels=4\ngain=2", 1);
        assert_eq!(
            kind(parse_capture(&unknown, "m").unwrap_err()),
            (6, CaptureErrorKind::UnknownKey("gain".into()))
        );

        let frac = good.replacen("pixels=4", "pixels=4.5", 1);
        assert!(matches!(
            kind(parse_capture(&frac, "m").unwrap_err()),
            (5, CaptureErrorKind::BadValue { .. })
        ));

        let late = format!("{good}led_level=1\n");
        assert_eq!(
            kind(parse_capture(&late, "m").unwrap_err()),
            (10, CaptureErrorKind::MisplacedMetadata)
        );
    }

    #[test]
    fn run_config_keys() {
        let cfg = RunConfig::parse(
            "# comment\nwindow_m=10\nstep_dx = 40\ndiff_threshold=1.5\nnoise_sd_volts=0\nadc_bits=16\n",
            "c.cfg",
        )
        .unwrap();
        assert_eq!(cfg.pipeline.window_m, 10);
        assert_eq!(cfg.pipeline.step_dx, 40);
        assert_eq!(cfg.pipeline.diff_threshold, 1.5);
        assert_eq!(cfg.sim.noise_sd_volts, Some(0.0));
        assert_eq!(cfg.oversample.adc_bits, 16);

        let err = RunConfig::parse("window_m=10\nwindw_m=3\n", "c.cfg").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 2, .. }));
        let err = RunConfig::parse("window_m=10\nwindow_m=3\n", "c.cfg").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 2, .. }));
        let err = RunConfig::parse("window_m=ten\n", "c.cfg").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 1, .. }));
        // rejected at load, not at use
        assert!(RunConfig::parse("scan_end=2400\n", "c.cfg").is_err());
        assert!(RunConfig::parse("n_prism=0.9\n", "c.cfg").is_err());
        assert!(RunConfig::parse("burr_rate=-2\n", "c.cfg").is_err());
        assert!(RunConfig::parse("dither_amp_lsb=0.5\n", "c.cfg").is_err());
    }
}
