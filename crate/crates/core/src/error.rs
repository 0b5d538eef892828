use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate detuning: |{a} - {b}| GHz is below {eps:e} GHz")]
    DegenerateDetuning { a: f64, b: f64, eps: f64 },

    #[error("pole in closed form: {0}")]
    Pole(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("singular linear system of size {0}")]
    Singular(usize),

    #[error("time {t} ns outside pulse window [0, {total}] ns")]
    OutOfRange { t: f64, total: f64 },

    #[error("time grids do not match: {0}")]
    GridMismatch(String),

    #[error("numerical abort at t = {t} ns: {reason}")]
    NumericalAbort { t: f64, reason: String },

    #[error("Hilbert space dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("failed to parse config: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("failed to write config: {0}")]
    TomlSer(#[from] toml::ser::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by user input rather than by numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::TomlDe(_)
                | Error::DimensionCap { .. }
                | Error::DegenerateDetuning { .. }
                | Error::OutOfRange { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
