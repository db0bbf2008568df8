use serde::Serialize;
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Unsupported(String),
    Core(jtwpa::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Io(_) => "IoError",
            CliError::Unsupported(_) => "UnsupportedError",
            CliError::Core(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Unsupported(_) => 2,
            CliError::Io(_) => 3,
            CliError::Core(jtwpa::Error::Io(_) | jtwpa::Error::Parse(_)) => 3,
            CliError::Core(_) => 4,
        }
    }

    /// `{"error": {"kind": ..., "message": ...}}`
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: String,
        }
        #[derive(Serialize)]
        struct Wrap<'a> {
            error: Body<'a>,
        }
        serde_json::to_string(&Wrap { error: Body { kind: self.kind(), message: self.to_string() } }).expect("plain strings serialise")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Unsupported(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<jtwpa::Error> for CliError {
    fn from(e: jtwpa::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
