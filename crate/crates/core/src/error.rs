use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),

    #[error("undeclared clock `{0}`")]
    UndeclaredClock(String),

    #[error("undeclared location `{0}`")]
    UndeclaredLocation(String),

    #[error("undeclared channel `{0}`")]
    UndeclaredChannel(String),

    #[error("value {value} assigned to `{var}` is outside its domain")]
    DomainOverflow { var: String, value: i64 },

    #[error("index {index} out of range for array `{array}`")]
    IndexOutOfRange { array: String, index: i64 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("arithmetic overflow")]
    ArithmeticOverflow,

    #[error("negative delay")]
    NegativeDelay,

    #[error("initial condition of `{0}` is unsatisfiable")]
    NoInitialEvaluation(String),

    #[error("initial condition of `{0}` admits more than one evaluation")]
    AmbiguousInitial(String),

    #[error("channel `{0}` has several emitters and several receivers")]
    ChannelArityViolation(String),

    #[error("state budget of {0} states exceeded")]
    StateBudgetExceeded(usize),

    #[error("synchronous product has {0} locations, above the eager limit")]
    ProductTooLarge(u128),

    #[error("no local domain for location `{0}`")]
    MissingDomain(String),

    #[error("diagonal clock constraint `{0}` is not supported here")]
    DiagonalConstraint(String),

    #[error("property mentions removed variable `{0}`")]
    RemovedVariableInProperty(String),

    #[error("invalid abstraction: {0}")]
    InvalidAbstraction(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unsupported construct at {location}: {message}")]
    UnsupportedConstruct { location: String, message: String },

    #[error("agent index {0} out of range")]
    AgentIndexOutOfRange(usize),

    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("ill-formed model: {0}")]
    IllFormed(String),

    #[error("{0}")]
    Json(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
