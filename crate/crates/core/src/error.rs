use thiserror::Error;

/// Errors raised by the numerical core. Coordinates and values are reported
/// in `f64` regardless of the scalar type the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid attribute space: {0}")]
    InvalidSpace(String),

    #[error("point outside attribute space: {point:?}")]
    OutsideSpace { point: Vec<f64> },

    #[error("nonpositive mean density {value} at {point:?}")]
    NonpositiveDensity { point: Vec<f64>, value: f64 },

    #[error("empty bin mean: bin {bin} has mean {value}")]
    EmptyBinMean { bin: usize, value: f64 },

    #[error("scheme does not partition space: {0}")]
    NotPartition(String),

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero perturbation")]
    ZeroPerturbation,

    #[error("negative detectability {0}")]
    NegativeDetectability(f64),

    #[error("covariance not symmetric PSD: {0}")]
    CovarianceNotPsd(String),

    #[error("envelope exceeded: density {density} above envelope {envelope} at {point:?}; refine the envelope grid (more nodes per axis)")]
    EnvelopeExceeded {
        point: Vec<f64>,
        density: f64,
        envelope: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors that come from the numerical domain of the problem
    /// (densities, bin means, envelopes) rather than from malformed input.
    pub fn is_numerical_domain(&self) -> bool {
        matches!(
            self,
            Error::NonpositiveDensity { .. }
                | Error::EmptyBinMean { .. }
                | Error::EnvelopeExceeded { .. }
                | Error::NegativeDetectability(_)
                | Error::CovarianceNotPsd(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what,
            expected,
            found,
        })
    }
}
