use std::fmt;
use std::path::Path;

use serde::Serialize;

/// What went wrong, as reported on stderr and mapped to an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    /// Unreadable, unparsable or inconsistent input.
    Input,
    /// The model cannot explain the data.
    Infeasible,
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Input => 1,
            ErrorKind::Infeasible => 2,
            ErrorKind::Internal => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
pub struct AppError {
    pub kind: ErrorKind,
    /// File and record (e.g. `forecasts.jsonl:12`) the error refers to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    pub message: String,
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(loc) => write!(f, "{loc}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl AppError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        AppError {
            kind,
            location: None,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Input, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Internal, message)
    }

    /// Attaches a location unless one is already set.
    pub fn at(mut self, location: impl Into<String>) -> Self {
        if self.location.is_none() {
            self.location = Some(location.into());
        }
        self
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::input(err.to_string()).at(path.display().to_string())
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    /// One-line JSON report.
    pub fn report(&self) -> String {
        serde_json::to_string(&serde_json::json!({ "error": self }))
            .unwrap_or_else(|_| format!("{{\"error\":{{\"message\":{:?}}}}}", self.message))
    }
}

impl From<eventdur_core::Error> for AppError {
    fn from(e: eventdur_core::Error) -> Self {
        use eventdur_core::Error as E;
        let kind = match e {
            E::EmptyPosterior { .. } | E::NoCandidate { .. } | E::RankDeficient { .. } | E::EmptyOverlap => {
                ErrorKind::Infeasible
            }
            E::InvalidArgument(_)
            | E::InvalidDistribution(_)
            | E::DegenerateDistribution
            | E::MalformedSeries { .. }
            | E::InsufficientData { .. } => ErrorKind::Input,
        };
        AppError::new(kind, e.to_string())
    }
}

/// A csv error in `path`, located at its line when known.
pub fn csv_error(path: &Path, e: csv::Error) -> AppError {
    let location = match e.position() {
        Some(p) => format!("{}:{}", path.display(), p.line()),
        None => path.display().to_string(),
    };
    AppError::input(e.to_string()).at(location)
}

pub type AppResult<T> = Result<T, AppError>;
