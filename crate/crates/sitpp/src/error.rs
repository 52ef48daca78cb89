use thiserror::Error;

/// Error type for the whole crate.
///
/// `Config` covers parameter validation and file parsing (CLI exit code 2);
/// `Numerics` covers runtime integration failures such as a fully diverged
/// ensemble (CLI exit code 3).
#[derive(Debug, Error)]
pub enum SitError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerics(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    TomlParse(#[from] toml::de::Error),

    #[error("manifest parse error: {0}")]
    JsonParse(#[from] serde_json::Error),
}

impl SitError {
    pub fn config(msg: impl Into<String>) -> Self {
        SitError::Config(msg.into())
    }

    pub fn numerics(msg: impl Into<String>) -> Self {
        SitError::Numerics(msg.into())
    }

    /// Process exit code for the CLI contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            SitError::Config(_) | SitError::TomlParse(_) => 2,
            SitError::Numerics(_) => 3,
            SitError::Io(_) | SitError::JsonParse(_) => 1,
        }
    }

    /// Machine-readable error record printed by the CLI on failure.
    pub fn to_json(&self) -> String {
        let kind = match self {
            SitError::Config(_) | SitError::TomlParse(_) => "config",
            SitError::Numerics(_) => "numerics",
            _ => "io",
        };
        serde_json::json!({
            "error": kind,
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}

pub type Result<T> = std::result::Result<T, SitError>;
