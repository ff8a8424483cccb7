use std::fmt;

/// Artifact section that failed to decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Header,
    PredictorBitmap,
    Coefficients,
    FrequencyTable,
    Codes,
    Literals,
    SignBitmap,
    ZeroBitmap,
}

impl Section {
    pub fn name(self) -> &'static str {
        match self {
            Section::Header => "header",
            Section::PredictorBitmap => "predictor-bitmap",
            Section::Coefficients => "coefficients",
            Section::FrequencyTable => "frequency-table",
            Section::Codes => "codes",
            Section::Literals => "literals",
            Section::SignBitmap => "sign-bitmap",
            Section::ZeroBitmap => "zero-bitmap",
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input file or metadata (size mismatch, bad sidecar, ...).
    #[error("format error: {0}")]
    Format(String),
    /// Well-formed input whose values violate a contract (NaN, constant field, ...).
    #[error("data error: {0}")]
    Data(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimsMismatch(String),
    #[error("decode error in {section} section: {reason}")]
    Decode { section: Section, reason: String },
    /// A guarantee the library itself is supposed to uphold was broken.
    #[error("invariant breach: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn decode(section: Section, reason: impl Into<String>) -> Self {
        Error::Decode {
            section,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
