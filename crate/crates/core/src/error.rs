use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate pulse: envelope vanishes on the grid")]
    DegeneratePulse,

    #[error("window too small: |envelope| at the window edge is {ratio:.3e} of its peak (limit {limit:.0e})")]
    WindowTooSmall { ratio: f64, limit: f64 },

    #[error("grid mismatch between envelope series")]
    GridMismatch,

    #[error("time {0} is not a node of the grid")]
    OffGrid(f64),

    #[error("grid under-resolved or pulse unnormalized: state norm {norm:.6}")]
    NormOutOfBand { norm: f64 },

    #[error("{channels} channels of {n}^3 amplitudes need {bytes} bytes, over the budget of {budget}")]
    MemoryBudget {
        n: usize,
        channels: usize,
        bytes: usize,
        budget: usize,
    },

    #[error("spectrum leaks at the frequency-grid edge: {ratio:.3e} of the peak")]
    SpectrumLeakage { ratio: f64 },

    #[error("oracle precondition failed: {0}")]
    Oracle(String),
}

impl Error {
    /// True for failures that indicate an inadequate numerical setup
    /// rather than invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NormOutOfBand { .. }
                | Error::WindowTooSmall { .. }
                | Error::SpectrumLeakage { .. }
                | Error::MemoryBudget { .. }
        )
    }
}
