use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A documented precondition of an operation was not met.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A weight's ramp left the usable periodic window.
    #[error("support violation: ramp [{ramp_lo}, {ramp_hi}] outside window [{lo}, {hi}]")]
    Support {
        ramp_lo: f64,
        ramp_hi: f64,
        lo: f64,
        hi: f64,
    },

    /// Non-finite values appeared during time stepping.
    #[error("numerical blow-up after t = {last_good_t} (step {step})")]
    BlowUp { last_good_t: f64, step: usize },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("unknown data builder `{0}`")]
    UnknownData(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
