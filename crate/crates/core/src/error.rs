use std::fmt;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(String),

    #[error("missing feature {feature:?} on item {item:?}")]
    MissingFeature { item: String, feature: String },

    #[error("unknown feature {0:?}")]
    UnknownFeature(String),

    #[error("unknown value {value:?} for feature {feature:?}")]
    UnknownValue { feature: String, value: String },

    #[error("unknown item {0:?}")]
    UnknownItem(String),

    #[error("unknown user {0:?}")]
    UnknownUser(String),

    #[error("duplicate item {0:?}")]
    DuplicateItem(String),

    #[error("duplicate (user, item) pair ({user:?}, {item:?})")]
    DuplicatePair { user: String, item: String },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("user {0:?} has an empty training profile")]
    EmptyProfile(String),

    #[error("sensitive feature {feature:?} is multi-valued on item {item:?}")]
    MultiValuedSensitive { feature: String, item: String },

    #[error("missing column {0:?}")]
    MissingColumn(String),

    #[error("column {0:?} has a single distinct value and cannot be bucketed")]
    ConstantColumn(String),

    #[error("no candidate cluster count yields at least 2 clusters")]
    NoClustering,

    #[error("k-core filtering emptied the dataset ({users} users, {items} items left)")]
    KCoreEmpty { users: usize, items: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {}", ConfigIssues(.0))]
    Config(Vec<ConfigIssue>),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable category used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) | Error::Parse { .. } => "parse",
            Error::InvalidParameter { .. } => "parameter",
            _ => "data",
        }
    }
}

/// One configuration problem, tagged with the dotted path of the offending field.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

struct ConfigIssues<'a>(&'a [ConfigIssue]);

impl fmt::Display for ConfigIssues<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
