use thiserror::Error;

/// Errors raised by the model, grid, solvers and simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("density {0} outside [0, 1]")]
    Domain(f64),

    #[error("z-value {z} outside [-{bound}, {bound}]")]
    Range { z: f64, bound: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("gamma {gamma} is not aligned with level {level} (gamma * 2^n must be an integer)")]
    Alignment { gamma: f64, level: u32 },

    #[error("level below minimal: requested {requested}, minimal {minimal}")]
    LevelBelowMinimal { requested: u32, minimal: u32 },

    #[error("grid pruning failed in region {region}: gap {gap:e} outside [{lo:e}, {hi:e})")]
    PruningFailure {
        region: usize,
        gap: f64,
        lo: f64,
        hi: f64,
    },

    #[error("grid closure violated: no grid point at flux level {level} in region {region}")]
    GridClosure { region: usize, level: f64 },

    #[error("evaluation point {0} outside [0, 1]")]
    OutOfRange(f64),

    #[error("invalid network: {0}")]
    Network(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("event cascade at t = {t}, x = {x}: {count} events without progress")]
    Cascade { t: f64, x: f64, count: usize },

    #[error("front count {count} exceeds cap {cap} at t = {t}")]
    FrontExplosion { count: usize, cap: usize, t: f64 },

    #[error("window error: {0}")]
    Window(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
