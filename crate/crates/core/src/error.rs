use thiserror::Error;

/// Errors raised anywhere in the modelling and identification pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element length {0} does not divide the unit edge into an integer number of elements")]
    NonDivisibleLength(f64),
    #[error("internal point ({0}, {1}) is not strictly inside the plate")]
    PointOutside(f64, f64),
    #[error("no mesh node within tolerance of ({0}, {1})")]
    NoNode(f64, f64),
    #[error("element {0} has zero length")]
    DegenerateElement(usize),
    #[error("dual reciprocity interpolation matrix is singular (condition estimate {0:e})")]
    SingularF(f64),
    #[error("traction elimination block is singular")]
    SingularBlock,
    #[error("mass matrix cannot be factorized")]
    SingularMass,
    #[error("state matrix is singular")]
    SingularA,
    #[error("matrix exponential produced non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("sensor at node {0} is not an unknown degree of freedom of the reduced system")]
    UnknownSensor(usize),
    #[error("filter gain matrix is singular at stage {0}")]
    SingularGain(usize),
    #[error("dense oracle system with {0} unknowns exceeds the size cap of {1}")]
    TooLarge(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable upper-case identifier for diagnostics and scripting.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonDivisibleLength(_) => "NON_DIVISIBLE_LENGTH",
            Error::PointOutside(..) => "POINT_OUTSIDE",
            Error::NoNode(..) => "NO_NODE",
            Error::DegenerateElement(_) => "DEGENERATE_ELEMENT",
            Error::SingularF(_) => "SINGULAR_F",
            Error::SingularBlock => "SINGULAR_BLOCK",
            Error::SingularMass => "SINGULAR_MASS",
            Error::SingularA => "SINGULAR_A",
            Error::NonFinite => "NON_FINITE",
            Error::DimensionMismatch(_) => "DIMENSION_MISMATCH",
            Error::UnknownSensor(_) => "UNKNOWN_SENSOR",
            Error::SingularGain(_) => "SINGULAR_GAIN",
            Error::TooLarge(..) => "TOO_LARGE",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
