use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the spectral, model and analysis layers.
#[derive(Debug, Error)]
pub enum NspError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite input sample at flat index {index}")]
    NonFiniteInput { index: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("multiplier is not finite at wavevector ({:.6e}, {:.6e}, {:.6e})", .k[0], .k[1], .k[2])]
    NonFiniteMultiplier { k: [f64; 3] },

    #[error("negative-order norm undefined: zero mode is {magnitude:.3e} but retained")]
    ZeroModeRetained { magnitude: f64 },

    #[error("neutrality violated: mean perturbation {mean:.3e}")]
    Neutrality { mean: f64 },

    #[error("vacuum: 1 + rho reaches {min_density:.6} (guard {guard})")]
    Vacuum { min_density: f64, guard: f64 },

    #[error("density {max_density:.6} exceeds the admissible range (max {limit})")]
    DensityRange { max_density: f64, limit: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("insufficient samples: {found} in window, need {needed}")]
    InsufficientSamples { found: usize, needed: usize },

    #[error("non-finite state detected at t = {time}")]
    NonFiniteState { time: f64 },

    #[error("integration aborted at t = {time}: {reason}")]
    Aborted {
        time: f64,
        reason: Box<NspError>,
        checkpoint: Option<PathBuf>,
    },

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NspError>;
