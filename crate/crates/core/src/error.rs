use thiserror::Error;

/// Errors raised across the phase-space toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid physical constants: {0}")]
    InvalidConfig(String),

    #[error("invalid wave packet: {0}")]
    InvalidPacket(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("momentum window exceeds the sampling limit: |p| <= {max_p:.6} is representable, requested {requested:.6}")]
    NyquistExceeded { max_p: f64, requested: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("Fock truncation too small: tail weight {tail:.3e} exceeds 1e-12, try n_max >= {suggested}")]
    Truncation { tail: f64, suggested: usize },

    #[error("position grid under-resolves the state: dx = {dx:.6} but dx < {required:.6} is needed")]
    UnderResolved { dx: f64, required: f64 },

    #[error("node in reconstruction interval: samples masked on [{start:.6}, {end:.6}]")]
    NodeInInterval { start: f64, end: f64 },

    #[error("open polyline has no enclosed area")]
    OpenPolyline,

    #[error("degenerate polyline: {0}")]
    DegeneratePolyline(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
