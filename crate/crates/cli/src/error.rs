use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const NETWORK: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// Bad or missing input data; `details` are extra diagnostic records.
    #[error("{message}")]
    Data { message: String, details: Vec<Value> },
    #[error("{0}")]
    Network(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn data(message: impl Into<String>) -> Self {
        CliError::Data {
            message: message.into(),
            details: Vec::new(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Data { .. } | CliError::Io(_) => exit::DATA,
            CliError::Network(_) => exit::NETWORK,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data { .. } => "data",
            CliError::Network(_) => "network",
            CliError::Io(_) => "io",
        }
    }

    /// Writes the error as JSON lines: its details first, then a summary.
    pub fn report(&self, err: &mut impl Write) {
        if let CliError::Data { details, .. } = self {
            for d in details {
                let _ = writeln!(err, "{d}");
            }
        }
        emit(err, "error", self.kind(), &self.to_string(), None::<()>);
    }
}

macro_rules! data_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::data(e.to_string())
            }
        }
    )*};
}

data_from!(
    semrich::ProfileError,
    semrich::RichnessError,
    semrich::TypicalityError,
    semrich::synth::SynthError,
    serde_json::Error,
    csv::Error
);

impl From<semrich_acquire::AcquireError> for CliError {
    fn from(e: semrich_acquire::AcquireError) -> Self {
        match e {
            semrich_acquire::AcquireError::Config(m) => CliError::Usage(m),
            other => CliError::data(other.to_string()),
        }
    }
}

/// One JSON diagnostic line.
pub fn emit(err: &mut impl Write, level: &str, kind: &str, message: &str, extra: Option<impl Serialize>) {
    let mut record = json!({ "level": level, "kind": kind, "message": message });
    if let Some(Value::Object(fields)) = extra.map(|e| serde_json::to_value(e).unwrap_or(Value::Null)) {
        record.as_object_mut().expect("object").extend(fields);
    }
    let _ = writeln!(err, "{record}");
}
