//! Python bindings for `refracto_core`.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use refracto_core::{calibration as cal, dsp_pipeline as dsp, io, oversampling as os, sensor_sim as sim, stats};
use refracto_core::{Error, LiquidLevel};

create_exception!(refracto, RefractoError, PyValueError);

fn err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => RefractoError::new_err(other.to_string()),
    }
}

fn level_from(name: &str) -> PyResult<LiquidLevel> {
    let canon = name.trim().to_ascii_uppercase().replace('-', "_");
    canon
        .parse()
        .map_err(|_| PyValueError::new_err(format!("unknown level `{name}`")))
}

#[pyclass(name = "Geometry", get_all, set_all, skip_from_py_object)]
struct Geometry {
    n_prism: f64,
    angle_to_pixel_slope: f64,
    theta_ref: f64,
    pixel_ref: f64,
    pixel_count: usize,
    full_scale_volts: f64,
}

impl Geometry {
    fn core(&self) -> sim::SimGeometry {
        sim::SimGeometry {
            n_prism: self.n_prism,
            angle_to_pixel_slope: self.angle_to_pixel_slope,
            theta_ref: self.theta_ref,
            pixel_ref: self.pixel_ref,
            pixel_count: self.pixel_count,
            full_scale_volts: self.full_scale_volts,
        }
    }
}

impl From<sim::SimGeometry> for Geometry {
    fn from(g: sim::SimGeometry) -> Self {
        Self {
            n_prism: g.n_prism,
            angle_to_pixel_slope: g.angle_to_pixel_slope,
            theta_ref: g.theta_ref,
            pixel_ref: g.pixel_ref,
            pixel_count: g.pixel_count,
            full_scale_volts: g.full_scale_volts,
        }
    }
}

#[pymethods]
impl Geometry {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut g = Geometry::from(sim::SimGeometry::default());
        if let Some(kw) = kwargs {
            let py = kw.py();
            let obj = Bound::new(py, g)?;
            for (k, v) in kw.iter() {
                obj.as_any().setattr(k.extract::<String>()?.as_str(), v)?;
            }
            g = Geometry::from(obj.borrow().core());
        }
        g.core().validate().map_err(err)?;
        Ok(g)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.core())
    }
}

#[pyclass(name = "Scenario", get_all, set_all, skip_from_py_object)]
struct Scenario {
    brix: f64,
    level: String,
    led_level: f64,
    integration_time_us: f64,
    transition_width_px: f64,
    noise_sd_volts: f64,
    burr_rate: f64,
    burr_amp_volts: f64,
    temperature_c: f64,
    seed: u64,
}

impl Scenario {
    fn core(&self) -> PyResult<sim::SimScenario> {
        Ok(sim::SimScenario {
            brix: self.brix,
            level: level_from(&self.level)?,
            led_level: self.led_level,
            integration_time_us: self.integration_time_us,
            transition_width_px: self.transition_width_px,
            noise_sd_volts: self.noise_sd_volts,
            burr_rate: self.burr_rate,
            burr_amp_volts: self.burr_amp_volts,
            temperature_c: self.temperature_c,
            seed: self.seed,
        })
    }
}

impl From<sim::SimScenario> for Scenario {
    fn from(s: sim::SimScenario) -> Self {
        Self {
            brix: s.brix,
            level: s.level.as_str().to_string(),
            led_level: s.led_level,
            integration_time_us: s.integration_time_us,
            transition_width_px: s.transition_width_px,
            noise_sd_volts: s.noise_sd_volts,
            burr_rate: s.burr_rate,
            burr_amp_volts: s.burr_amp_volts,
            temperature_c: s.temperature_c,
            seed: s.seed,
        }
    }
}

#[pymethods]
impl Scenario {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(py: Python<'_>, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let obj = Bound::new(py, Scenario::from(sim::SimScenario::default()))?;
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                obj.as_any().setattr(k.extract::<String>()?.as_str(), v)?;
            }
        }
        let core = obj.borrow().core()?;
        core.validate().map_err(err)?;
        Ok(Scenario::from(core))
    }

    /// One of the named presets (normal, empty, very-low, weak-led, t160, t800, t1600).
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        sim::preset_scenario(name).map(Scenario::from).map_err(err)
    }

    fn noiseless(&self) -> PyResult<Self> {
        Ok(Scenario::from(self.core()?.noiseless()))
    }

    fn __repr__(&self) -> PyResult<String> {
        Ok(format!("{:?}", self.core()?))
    }
}

#[pyclass(name = "PipelineConfig", get_all, set_all, skip_from_py_object)]
struct PipelineConfig {
    window_m: usize,
    step_dx: usize,
    scan_start: usize,
    scan_end: usize,
    diff_threshold: f64,
    outlier_window: usize,
    outlier_k: f64,
    full_scale_volts: f64,
    level_slope_min: f64,
}

impl PipelineConfig {
    fn core(&self) -> dsp::PipelineConfig {
        dsp::PipelineConfig {
            window_m: self.window_m,
            step_dx: self.step_dx,
            scan_start: self.scan_start,
            scan_end: self.scan_end,
            diff_threshold: self.diff_threshold,
            outlier_window: self.outlier_window,
            outlier_k: self.outlier_k,
            full_scale_volts: self.full_scale_volts,
            level_slope_min: self.level_slope_min,
        }
    }
}

impl From<dsp::PipelineConfig> for PipelineConfig {
    fn from(c: dsp::PipelineConfig) -> Self {
        Self {
            window_m: c.window_m,
            step_dx: c.step_dx,
            scan_start: c.scan_start,
            scan_end: c.scan_end,
            diff_threshold: c.diff_threshold,
            outlier_window: c.outlier_window,
            outlier_k: c.outlier_k,
            full_scale_volts: c.full_scale_volts,
            level_slope_min: c.level_slope_min,
        }
    }
}

#[pymethods]
impl PipelineConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(py: Python<'_>, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let obj = Bound::new(py, PipelineConfig::from(dsp::PipelineConfig::default()))?;
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                obj.as_any().setattr(k.extract::<String>()?.as_str(), v)?;
            }
        }
        let core = obj.borrow().core();
        Ok(PipelineConfig::from(core))
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.core())
    }
}

fn pipeline(cfg: Option<PyRef<'_, PipelineConfig>>) -> dsp::PipelineConfig {
    cfg.map_or_else(dsp::PipelineConfig::default, |c| c.core())
}

fn geometry(geom: Option<PyRef<'_, Geometry>>) -> sim::SimGeometry {
    geom.map_or_else(sim::SimGeometry::default, |g| g.core())
}

#[pyclass(name = "Frame", get_all, set_all, skip_from_py_object)]
struct Frame {
    voltages: Vec<f64>,
    integration_time_us: f64,
    led_level: f64,
    temperature_c: f64,
}

impl Frame {
    fn core(&self) -> refracto_core::PixelFrame {
        refracto_core::PixelFrame {
            voltages: self.voltages.clone(),
            integration_time_us: self.integration_time_us,
            led_level: self.led_level,
            temperature_c: self.temperature_c,
        }
    }
}

impl From<refracto_core::PixelFrame> for Frame {
    fn from(f: refracto_core::PixelFrame) -> Self {
        Self {
            voltages: f.voltages,
            integration_time_us: f.integration_time_us,
            led_level: f.led_level,
            temperature_c: f.temperature_c,
        }
    }
}

#[pymethods]
impl Frame {
    #[new]
    #[pyo3(signature = (voltages, integration_time_us=1600.0, led_level=1.0, temperature_c=20.0))]
    fn new(voltages: Vec<f64>, integration_time_us: f64, led_level: f64, temperature_c: f64) -> Self {
        Self {
            voltages,
            integration_time_us,
            led_level,
            temperature_c,
        }
    }

    fn __len__(&self) -> usize {
        self.voltages.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Frame(pixels={}, integration_time_us={}, led_level={}, temperature_c={})",
            self.voltages.len(),
            self.integration_time_us,
            self.led_level,
            self.temperature_c
        )
    }
}

#[pyclass(name = "Detection", get_all, skip_from_py_object)]
struct Detection {
    index1: Option<usize>,
    max_diff_volts: Option<f64>,
    level: String,
    accepted: bool,
}

#[pymethods]
impl Detection {
    fn __repr__(&self) -> String {
        format!(
            "Detection(index1={:?}, max_diff_volts={:?}, level={}, accepted={})",
            self.index1, self.max_diff_volts, self.level, self.accepted
        )
    }
}

impl From<dsp::BoundaryDetection> for Detection {
    fn from(d: dsp::BoundaryDetection) -> Self {
        Self {
            index1: d.index1,
            max_diff_volts: d.max_diff_volts,
            level: d.level.as_str().to_string(),
            accepted: d.accepted,
        }
    }
}

#[pyclass(name = "CalibrationModel", skip_from_py_object)]
struct Model {
    inner: cal::CalibrationModel,
}

#[pymethods]
impl Model {
    /// Piecewise-linear model from `(position, brix)` pairs.
    #[staticmethod]
    #[pyo3(signature = (points, breakpoints=vec![cal::DEFAULT_BREAKPOINT_BRIX]))]
    fn build(points: Vec<(f64, f64)>, breakpoints: Vec<f64>) -> PyResult<Self> {
        let inner = cal::build_model(&points, &breakpoints).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = cal::CalibrationModel::from_json(text).map_err(err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = io::load_model(&path).map_err(err)?;
        Ok(Self { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_model(&self.inner, &path).map_err(err)
    }

    fn with_c0(&self, c0: f64) -> Self {
        Self {
            inner: self.inner.clone().with_c0(c0),
        }
    }

    fn with_k2(&self, k2: f64) -> Self {
        Self {
            inner: self.inner.clone().with_k2(k2),
        }
    }

    #[pyo3(signature = (temp_coeff, temp_ref_c=20.0))]
    fn with_temperature_compensation(&self, temp_coeff: f64, temp_ref_c: f64) -> Self {
        Self {
            inner: self.inner.clone().with_temperature_compensation(temp_coeff, temp_ref_c),
        }
    }

    #[getter]
    fn c0(&self) -> f64 {
        self.inner.c0
    }

    #[getter]
    fn k2(&self) -> f64 {
        self.inner.k2
    }

    /// `[(lo, hi, slope, intercept, r_squared), ...]`
    #[getter]
    fn segments(&self) -> Vec<(f64, f64, f64, f64, f64)> {
        self.inner
            .segments
            .iter()
            .map(|s| (s.lo, s.hi, s.slope, s.intercept, s.r_squared))
            .collect()
    }

    fn position_to_concentration(&self, position: f64) -> PyResult<f64> {
        cal::position_to_concentration(&self.inner, position).map_err(err)
    }

    fn finalize(&self, c_m: f64, temperature_c: f64) -> f64 {
        cal::finalize(c_m, &self.inner, temperature_c)
    }

    fn __eq__(&self, other: PyRef<'_, Model>) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "CalibrationModel(segments={}, c0={}, k2={})",
            self.inner.segments.len(),
            self.inner.c0,
            self.inner.k2
        )
    }
}

#[pyfunction]
fn brix_to_refractive_index(brix: f64) -> PyResult<f64> {
    sim::brix_to_refractive_index(brix).map_err(err)
}

#[pyfunction]
fn critical_angle(n_sample: f64, n_prism: f64) -> PyResult<f64> {
    sim::critical_angle(n_sample, n_prism).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (brix, geometry=None))]
fn brix_to_pixel(brix: f64, geometry: Option<PyRef<'_, Geometry>>) -> PyResult<f64> {
    sim::brix_to_pixel(brix, &self::geometry(geometry)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (scenario, geometry=None))]
fn synth_frame(scenario: PyRef<'_, Scenario>, geometry: Option<PyRef<'_, Geometry>>) -> PyResult<Frame> {
    let scn = scenario.core()?;
    sim::synth_frame(&scn, &self::geometry(geometry))
        .map(Frame::from)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (voltages, config=None))]
fn remove_outliers(voltages: Vec<f64>, config: Option<PyRef<'_, PipelineConfig>>) -> PyResult<Vec<f64>> {
    dsp::remove_outliers(&voltages, &pipeline(config)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (voltages, window_m=20))]
fn moving_average(voltages: Vec<f64>, window_m: usize) -> PyResult<Vec<f64>> {
    dsp::moving_average(&voltages, window_m).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (smoothed, step_dx=80))]
fn first_difference(smoothed: Vec<f64>, step_dx: usize) -> PyResult<Vec<f64>> {
    dsp::first_difference(&smoothed, step_dx).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (frame, config=None))]
fn classify_level(frame: PyRef<'_, Frame>, config: Option<PyRef<'_, PipelineConfig>>) -> PyResult<String> {
    dsp::classify_level(&frame.core(), &pipeline(config))
        .map(|l| l.as_str().to_string())
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (frame, config=None))]
fn process_frame(frame: PyRef<'_, Frame>, config: Option<PyRef<'_, PipelineConfig>>) -> PyResult<Detection> {
    dsp::process_frame(&frame.core(), &pipeline(config))
        .map(Detection::from)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (frames, model, config=None))]
fn calibrate_zero(
    frames: Vec<PyRef<'_, Frame>>,
    model: PyRef<'_, Model>,
    config: Option<PyRef<'_, PipelineConfig>>,
) -> PyResult<Model> {
    let frames: Vec<_> = frames.iter().map(|f| f.core()).collect();
    let inner = cal::calibrate_zero(&frames, &model.inner, &pipeline(config)).map_err(err)?;
    Ok(Model { inner })
}

#[pyfunction]
fn compute_k2(reference_slope: f64, prototype_slope: f64) -> PyResult<f64> {
    cal::compute_k2(reference_slope, prototype_slope).map_err(err)
}

/// Full chain; returns a dict with brix_final, brix_raw, position,
/// temperature_c and level (Brix fields are None on a level alert).
#[pyfunction]
#[pyo3(signature = (frame, model, config=None))]
fn measure<'py>(
    py: Python<'py>,
    frame: PyRef<'_, Frame>,
    model: PyRef<'_, Model>,
    config: Option<PyRef<'_, PipelineConfig>>,
) -> PyResult<Bound<'py, PyDict>> {
    let m = cal::measure(&frame.core(), &model.inner, &pipeline(config)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("brix_final", m.brix_final)?;
    d.set_item("brix_raw", m.brix_raw)?;
    d.set_item("position", m.position)?;
    d.set_item("temperature_c", m.temperature_c)?;
    d.set_item("level", m.level.as_str())?;
    Ok(d)
}

#[pyfunction]
fn mean_sd(xs: Vec<f64>) -> PyResult<(f64, f64)> {
    stats::mean_sd(&xs).map_err(err)
}

#[pyfunction]
fn rsd_percent(xs: Vec<f64>) -> PyResult<f64> {
    stats::rsd_percent(&xs).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (xs, level=0.95))]
fn confidence_interval(xs: Vec<f64>, level: f64) -> PyResult<(f64, f64)> {
    stats::confidence_interval(&xs, level).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (mean, sd, n, level=0.95))]
fn confidence_interval_from_summary(mean: f64, sd: f64, n: usize, level: f64) -> PyResult<(f64, f64)> {
    stats::confidence_interval_from_summary(mean, sd, n, level).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (a, b, level=0.95))]
fn paired_t_test<'py>(py: Python<'py>, a: Vec<f64>, b: Vec<f64>, level: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = stats::paired_t_test(&a, &b, level).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("mean_a", r.mean_a)?;
    d.set_item("mean_b", r.mean_b)?;
    d.set_item("sd_a", r.sd_a)?;
    d.set_item("sd_b", r.sd_b)?;
    d.set_item("mean_diff", r.mean_diff)?;
    d.set_item("sd_diff", r.sd_diff)?;
    d.set_item("t", r.t_value)?;
    d.set_item("df", r.df)?;
    d.set_item("p", r.p_two_sided)?;
    d.set_item("cohens_d", r.cohens_d)?;
    d.set_item("level", r.level)?;
    d.set_item("ci_low", r.ci_low)?;
    d.set_item("ci_high", r.ci_high)?;
    Ok(d)
}

#[pyfunction]
fn pearson_r(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    stats::pearson_r(&a, &b).map_err(err)
}

#[pyfunction]
fn student_t_cdf(t: f64, df: f64) -> PyResult<f64> {
    stats::student_t_cdf(t, df).map_err(err)
}

#[pyfunction]
fn student_t_quantile(p: f64, df: f64) -> PyResult<f64> {
    stats::student_t_quantile(p, df).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (v, adc_bits=12, full_scale_volts=3.3))]
fn quantize(v: f64, adc_bits: u32, full_scale_volts: f64) -> u32 {
    os::quantize(v, adc_bits, full_scale_volts)
}

fn oversample_cfg(
    w: u32,
    adc_bits: u32,
    full_scale_volts: f64,
    dither_amp_lsb: f64,
    seed: u64,
    base_rate_hz: f64,
) -> PyResult<os::OversampleConfig> {
    let cfg = os::OversampleConfig {
        base_rate_hz,
        extra_bits_w: w,
        adc_bits,
        full_scale_volts,
        dither_amp_lsb,
        seed,
    };
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

#[pyfunction]
#[pyo3(signature = (w=2, base_rate_hz=1000.0))]
fn required_sampling_rate(w: u32, base_rate_hz: f64) -> PyResult<f64> {
    let cfg = oversample_cfg(w, 12, 3.3, 1.0, 0, base_rate_hz)?;
    Ok(os::required_sampling_rate(&cfg))
}

#[pyfunction]
#[pyo3(signature = (true_volts, w=2, adc_bits=12, full_scale_volts=3.3, dither_amp_lsb=1.0, seed=0))]
fn oversample_decimate(
    true_volts: f64,
    w: u32,
    adc_bits: u32,
    full_scale_volts: f64,
    dither_amp_lsb: f64,
    seed: u64,
) -> PyResult<u64> {
    let cfg = oversample_cfg(w, adc_bits, full_scale_volts, dither_amp_lsb, seed, 1000.0)?;
    os::oversample_decimate(true_volts, &cfg).map_err(err)
}

/// DC sweep; returns a dict of column lists plus both RMS errors in volts.
#[pyfunction]
#[pyo3(signature = (start_volts, span_volts, points=1000, w=2, adc_bits=12, full_scale_volts=3.3, dither_amp_lsb=1.0, seed=0))]
#[allow(clippy::too_many_arguments)]
fn dc_sweep<'py>(
    py: Python<'py>,
    start_volts: f64,
    span_volts: f64,
    points: usize,
    w: u32,
    adc_bits: u32,
    full_scale_volts: f64,
    dither_amp_lsb: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = oversample_cfg(w, adc_bits, full_scale_volts, dither_amp_lsb, seed, 1000.0)?;
    let s = os::dc_sweep(&cfg, start_volts, span_volts, points).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("true_volts", s.rows.iter().map(|r| r.true_volts).collect::<Vec<_>>())?;
    d.set_item("base_code", s.rows.iter().map(|r| r.base_code).collect::<Vec<_>>())?;
    d.set_item("enhanced_code", s.rows.iter().map(|r| r.enhanced_code).collect::<Vec<_>>())?;
    d.set_item("base_rms_volts", s.base_rms_volts)?;
    d.set_item("enhanced_rms_volts", s.enhanced_rms_volts)?;
    Ok(d)
}

#[pyfunction]
fn read_capture(path: PathBuf) -> PyResult<Frame> {
    io::read_capture(&path).map(Frame::from).map_err(err)
}

#[pyfunction]
fn write_capture(frame: PyRef<'_, Frame>, path: PathBuf) -> PyResult<()> {
    io::write_capture(&frame.core(), &path).map_err(err)
}

#[pyfunction]
fn format_capture(frame: PyRef<'_, Frame>) -> String {
    io::format_capture(&frame.core())
}

#[pymodule]
fn refracto(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RefractoError", m.py().get_type::<RefractoError>())?;
    m.add("PRESET_NAMES", sim::PRESET_NAMES.to_vec())?;
    m.add_class::<Geometry>()?;
    m.add_class::<Scenario>()?;
    m.add_class::<PipelineConfig>()?;
    m.add_class::<Frame>()?;
    m.add_class::<Detection>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(brix_to_refractive_index, m)?)?;
    m.add_function(wrap_pyfunction!(critical_angle, m)?)?;
    m.add_function(wrap_pyfunction!(brix_to_pixel, m)?)?;
    m.add_function(wrap_pyfunction!(synth_frame, m)?)?;
    m.add_function(wrap_pyfunction!(remove_outliers, m)?)?;
    m.add_function(wrap_pyfunction!(moving_average, m)?)?;
    m.add_function(wrap_pyfunction!(first_difference, m)?)?;
    m.add_function(wrap_pyfunction!(classify_level, m)?)?;
    m.add_function(wrap_pyfunction!(process_frame, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_zero, m)?)?;
    m.add_function(wrap_pyfunction!(compute_k2, m)?)?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(mean_sd, m)?)?;
    m.add_function(wrap_pyfunction!(rsd_percent, m)?)?;
    m.add_function(wrap_pyfunction!(confidence_interval, m)?)?;
    m.add_function(wrap_pyfunction!(confidence_interval_from_summary, m)?)?;
    m.add_function(wrap_pyfunction!(paired_t_test, m)?)?;
    m.add_function(wrap_pyfunction!(pearson_r, m)?)?;
    m.add_function(wrap_pyfunction!(student_t_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(student_t_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(quantize, m)?)?;
    m.add_function(wrap_pyfunction!(required_sampling_rate, m)?)?;
    m.add_function(wrap_pyfunction!(oversample_decimate, m)?)?;
    m.add_function(wrap_pyfunction!(dc_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(read_capture, m)?)?;
    m.add_function(wrap_pyfunction!(write_capture, m)?)?;
    m.add_function(wrap_pyfunction!(format_capture, m)?)?;
    Ok(())
}
