use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite sample at node {0}")]
    NonFinite(usize),

    #[error("{op}: boundary contamination {defect:.3e} exceeds {threshold:.1e}")]
    BoundaryContamination {
        op: &'static str,
        defect: f64,
        threshold: f64,
    },

    #[error("cumulative integral: left-boundary value {value:.3e} exceeds {threshold:.1e}")]
    Truncation { value: f64, threshold: f64 },

    #[error("rescaling by L={scale}: clipped tail {clipped:.3e} exceeds {threshold:.1e}")]
    Resolution { scale: f64, clipped: f64, threshold: f64 },

    #[error("{what}: tail {tail:.3e} at the domain edge exceeds {threshold:.1e}")]
    Clipped {
        what: &'static str,
        tail: f64,
        threshold: f64,
    },

    #[error("Cole-Hopf domain: {0}")]
    Domain(String),

    #[error("input is not mean-zero: mean {mean:.3e}, allowed {allowed:.3e}")]
    NotMeanZero { mean: f64, allowed: f64 },

    #[error("integration unstable at t={time}: norm {norm:.3e}")]
    Unstable { time: f64, norm: f64 },

    #[error("Newton iteration failed: {0}")]
    Newton(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
