use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum SimError {
    /// A configuration value is out of range or unsupported. `key` names the
    /// offending setting.
    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },

    /// An operation was called with arguments that violate its contract.
    #[error("usage error: {0}")]
    Usage(String),

    /// The rate oracle failed while the scheduler evaluated a beam.
    #[error("rate oracle failed for beam {beam}: {source}")]
    Oracle {
        beam: usize,
        #[source]
        source: Box<SimError>,
    },

    /// A Monte Carlo drop failed.
    #[error("drop {index}: {source}")]
    Drop {
        index: u64,
        #[source]
        source: Box<SimError>,
    },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SimError {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        SimError::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
