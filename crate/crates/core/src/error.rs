use std::path::PathBuf;

use thiserror::Error;

/// Reasons a capture file can fail to parse. Always reported together with
/// the 1-based line number it was found on.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaptureErrorKind {
    #[error("missing `# refracto-capture v1` header")]
    MissingHeader,
    #[error("unsupported capture version `{0}`")]
    Version(String),
    #[error("missing metadata key `{0}`")]
    MissingKey(&'static str),
    #[error("duplicate metadata key `{0}`")]
    DuplicateKey(String),
    #[error("unknown metadata key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("non-numeric sample `{0}`")]
    NonNumericSample(String),
    #[error("metadata line after samples")]
    MisplacedMetadata,
    #[error("declared {declared} pixels but found {found} samples")]
    CountMismatch { declared: usize, found: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no total internal reflection: sample index {n_sample} exceeds prism index {n_prism}")]
    NoTotalReflection { n_sample: f64, n_prism: f64 },

    #[error("boundary at pixel {position:.2} falls outside the {pixel_count}-pixel array")]
    PixelOutOfRange { position: f64, pixel_count: usize },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("sequence too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("no rising edge in the scan window")]
    NoRisingEdge,

    #[error("ambiguous liquid level (leading slope {slope:.3e} V/pixel)")]
    AmbiguousLevel { slope: f64 },

    #[error("degenerate fit: fewer than two distinct positions")]
    DegenerateFit,

    #[error("insufficient calibration data in group {group}: {count} point(s)")]
    InsufficientCalibrationData { group: usize, count: usize },

    #[error("position {position} lies outside the calibrated range [{lo}, {hi}]")]
    OutOfCalibratedRange { position: f64, lo: f64, hi: f64 },

    #[error("calibration input error: {0}")]
    CalibrationInput(String),

    #[error("prototype slope is zero")]
    ZeroSlope,

    #[error("weak signal: max difference {max_diff:.4} V does not exceed threshold {threshold} V")]
    WeakSignal { max_diff: f64, threshold: f64 },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("relative standard deviation undefined for zero mean")]
    UndefinedRsd,

    #[error("correlation undefined: zero variance")]
    UndefinedCorrelation,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {kind}")]
    Capture {
        path: String,
        line: usize,
        kind: CaptureErrorKind,
    },

    #[error("{path}:{line}: {message}")]
    ConfigParse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("model file: {0}")]
    Model(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
