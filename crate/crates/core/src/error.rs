use thiserror::Error;

/// Errors raised by the model, solvers and scaling analysis.
#[derive(Debug, Error)]
pub enum RabiError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("state has {state} points but grid has {grid}")]
    GridMismatch { state: usize, grid: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular at the critical point (epsilon = 0)")]
    CriticalPoint,

    #[error("lambda = 0 belongs to a different universality class and is not supported here")]
    LambdaZero,

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("not converged after {iterations} iterations (last change {last_change:.3e})")]
    NotConverged { iterations: usize, last_change: f64 },

    #[error("Fock cutoff not converged: shift {shift:.3e} between n_max = {n_max} and n_max + 20")]
    CutoffNotConverged { n_max: usize, shift: f64 },

    #[error("norm drifted to {norm:.12} at t = {t:.6}")]
    Stability { t: f64, norm: f64 },

    #[error("wavefunction reached the grid boundary at t = {t:.6} (edge mass {edge_mass:.3e})")]
    GridOverflow { t: f64, edge_mass: f64 },

    #[error("order parameter never crossed n_fix = {n_fix} after the critical point")]
    NoCrossing { n_fix: f64 },

    #[error("order parameter already above n_fix = {n_fix} at the critical point")]
    CrossingBeforeCritical { n_fix: f64 },

    #[error("only {samples} samples between t_c and the crossing; reduce observer_stride")]
    Undersampled { samples: usize },

    #[error("fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("log-log fit requires positive data, got ({x}, {y})")]
    NonPositive { x: f64, y: f64 },

    #[error("non-physical scaling: {0}")]
    NonPhysical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, RabiError>;
