use thiserror::Error;

/// Errors produced by the simulation library.
///
/// `Guard` marks a runtime stability guard tripping (retry with different
/// numerical settings); everything else is an input problem.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),

    #[error("domain: {0}")]
    Domain(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("stability guard: {message}{}", suggestion(.suggested_dt))]
    Guard {
        message: String,
        suggested_dt: Option<f64>,
    },

    #[error("no ferromagnetic phase: no minimum with m*s > 0 at T = {temperature}")]
    NoFerromagneticPhase { temperature: f64 },

    #[error("no barrier regime: T = {temperature} >= 3J/4 = {limit}; the paramagnetic barrier does not exist")]
    NoBarrierRegime { temperature: f64, limit: f64 },

    #[error("size limit: {0}")]
    SizeLimit(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn suggestion(dt: &Option<f64>) -> String {
    match dt {
        Some(dt) => format!(" (suggested dt <= {dt:e})"),
        None => String::new(),
    }
}

impl Error {
    /// True for errors caused by a violated runtime guard rather than bad input.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
