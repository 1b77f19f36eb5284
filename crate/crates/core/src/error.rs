use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid `{field}`: {message}")]
    Invalid { field: &'static str, message: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("need at least {needed} rows, found {found}")]
    TooFewRows { needed: usize, found: usize },

    #[error("row count mismatch in {what}: expected {expected}, found {found}")]
    RowMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {what} at row {row}, column {col}")]
    NonFinite { what: String, row: usize, col: usize },

    #[error("operation requires recurrent activations")]
    NotRecurrent,

    #[error("time window [{start}, {end}] is outside [0, {max}]")]
    Window { start: usize, end: usize, max: usize },

    #[error("label error: {0}")]
    Label(String),

    #[error("flow graph carries no flow")]
    EmptyFlow,
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            message: message.into(),
        }
    }
}
