use std::path::PathBuf;

use nalgebra::Vector3;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("point ({:.6e}, {:.6e}, {:.6e}) m lies inside the magnet{}", .point.x, .point.y, .point.z,
        .index.map(|i| format!(" (grid index {i})")).unwrap_or_default())]
    InsideMagnet {
        point: Vector3<f64>,
        index: Option<usize>,
    },

    #[error("invalid magnet: {0}")]
    InvalidMagnet(String),

    #[error("field magnitude {0:.3} T outside the supported range")]
    FieldOutOfRange(f64),

    #[error("temperature must be positive, got {0} K")]
    NonPositiveTemperature(f64),

    #[error("invalid rate parameters: {0}")]
    InvalidRates(String),

    #[error("rate matrix steady state is not unique (singular value ratio {0:.3e})")]
    SingularRateMatrix(f64),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("duty cycle must lie in (0, 1), got {0}")]
    DutyOutOfRange(f64),

    #[error("invalid oscillator parameters: {0}")]
    InvalidOscillator(String),

    #[error("unstable integration step: {0}")]
    UnstableStep(String),

    #[error("series too short: {0}")]
    TooShort(String),

    #[error("band {lo:.4}..{hi:.4} Hz outside the PSD range 0..{max:.4} Hz")]
    BandOutOfRange { lo: f64, hi: f64, max: f64 },

    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("non-uniform sampling at row {row}: dt = {dt:.6e} s, expected {expected:.6e} s")]
    NonuniformSampling { row: usize, dt: f64, expected: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
