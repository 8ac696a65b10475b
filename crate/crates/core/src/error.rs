use std::fmt;

/// Errors produced by the karyotyping pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate histogram: every threshold yields zero between-class variance")]
    DegenerateHistogram,

    #[error("intersection region {label} is not adjacent to any chromosome region")]
    DanglingIntersection { label: u32 },

    #[error("gap region has no adjacent object pixels to interpolate from")]
    UnfillableGap,

    #[error("no score row for crop `{0}`")]
    MissingScore(String),

    #[error("layout failure: {0}")]
    LayoutFailure(String),

    #[error("image decode failed: {0}")]
    Decode(String),

    #[error("image encode failed: {0}")]
    Encode(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl fmt::Display) -> Self {
        Error::InvalidArgument(msg.to_string())
    }

    /// Stable machine-readable error code, used in structured error payloads.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::DegenerateHistogram => "degenerate-histogram",
            Error::DanglingIntersection { .. } => "dangling-intersection",
            Error::UnfillableGap => "unfillable-gap",
            Error::MissingScore(_) => "missing-score",
            Error::LayoutFailure(_) => "layout-failure",
            Error::Decode(_) => "decode-error",
            Error::Encode(_) => "encode-error",
            Error::Io(_) => "io-error",
            Error::Json(_) => "invalid-argument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
