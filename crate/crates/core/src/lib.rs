//! Signal chain of a CMOS critical-angle refractometer.
//!
//! - [`sensor_sim`]: synthetic line-sensor frames from a Brix value
//! - [`dsp_pipeline`]: de-burring, smoothing, differencing, boundary search
//!   and liquid-level classification
//! - [`calibration`]: piecewise-linear position to Brix model with zero
//!   offset, display scale and temperature term
//! - [`oversampling`]: dithered oversampling with sum-and-shift decimation
//! - [`stats`]: paired t-test, intervals, RSD, correlation
//! - [`io`]: capture/model files and run configuration

pub mod calibration;
pub mod dsp_pipeline;
pub mod error;
pub mod io;
pub mod oversampling;
pub mod sensor_sim;
pub mod stats;

pub use calibration::{CalibrationModel, LinearSegment, Measurement};
pub use dsp_pipeline::{BoundaryDetection, PipelineConfig};
pub use error::{CaptureErrorKind, Error, Result};
pub use oversampling::OversampleConfig;
pub use sensor_sim::{LiquidLevel, PixelFrame, SimGeometry, SimScenario};
pub use stats::PairedTestResult;
