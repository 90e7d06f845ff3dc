use thiserror::Error;

pub type Result<T, E = BbmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BbmError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("operation requires a {expected} field, got a {found} field")]
    DomainMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solution blew up (non-finite state) at t = {t}")]
    Instability { t: f64 },

    #[error("fixed-point window shrank to {window:e} at t = {t} without contracting")]
    WindowCollapsed { t: f64, window: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl BbmError {
    /// Time at which an integration failed, if this error carries one.
    pub fn failure_time(&self) -> Option<f64> {
        match self {
            BbmError::Instability { t } | BbmError::WindowCollapsed { t, .. } => Some(*t),
            _ => None,
        }
    }
}
