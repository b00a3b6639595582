use std::fmt;
use std::path::Path;

use psyprofile::analysis::AnalysisError;
use psyprofile::corpus::CorpusError;
use psyprofile::emotion::EmotionError;
use psyprofile::pipeline::PipelineError;
use psyprofile::synth::SynthError;
use psyprofile::textprep::TextError;

/// Failure category; each maps to its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Config,
    MissingInput,
    Data,
    Layout,
    Other,
}

impl Class {
    pub fn exit_code(self) -> i32 {
        match self {
            Class::Other => 1,
            Class::Config => 2,
            Class::MissingInput => 3,
            Class::Data => 4,
            Class::Layout => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Class::Config => "config",
            Class::MissingInput => "missing-input",
            Class::Data => "data",
            Class::Layout => "layout",
            Class::Other => "other",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub class: Class,
    pub message: String,
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn new(class: Class, message: impl Into<String>) -> Self {
        CliError { class, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Class::Config, message)
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self::new(Class::Data, message)
    }

    pub fn missing(path: &Path) -> Self {
        Self::new(Class::MissingInput, format!("{} does not exist", path.display()))
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            Self::missing(path)
        } else {
            Self::new(Class::Other, format!("{}: {e}", path.display()))
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // one line, so that callers can parse it
        write!(f, "error[{}]: {}", self.class.as_str(), self.message.split_whitespace().collect::<Vec<_>>().join(" "))
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let class = match e {
            PipelineError::Layout(_) => Class::Layout,
            _ => Class::Data,
        };
        CliError::new(class, e.to_string())
    }
}

macro_rules! data_error {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::data(e.to_string())
            }
        })*
    };
}

data_error!(AnalysisError, CorpusError, EmotionError, SynthError, TextError, csv::Error, serde_json::Error);
