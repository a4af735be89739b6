use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input has (numerically) zero norm")]
    ZeroInput,
    #[error("expected numerical rank {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("two of the input lines coincide")]
    LinesIdentical,
    #[error("world points do not form a projective frame or image targets are degenerate")]
    DegenerateFrame,
    #[error("constraint system has nullity {nullity}, expected 1")]
    NoUniqueSolution { nullity: usize },
    #[error("camera centers of views {0} and {1} coincide")]
    CentersCoincide(usize, usize),
    #[error("F^{0}{1} is not rank 2")]
    NotRankTwo(usize, usize),
    #[error("missing fundamental matrix for pair ({0}, {1})")]
    MissingPair(usize, usize),
    #[error("epipolar number uses the auxiliary point but none was supplied")]
    MissingAuxiliary,
    #[error("point is the epipole, the epipolar line is undefined")]
    DegenerateLine,
    #[error("transform H_{0} is singular")]
    SingularTransform(usize),
    #[error("classification is ambiguous")]
    AmbiguousClassification,
    #[error("input is classified as {found}, expected {expected}")]
    WrongCase { expected: String, found: String },
    #[error("reconstruction is degenerate: {0}")]
    DegenerateReconstruction(String),
    #[error("could not draw auxiliary points independent of the epipoles")]
    AuxiliaryDegenerate,
    #[error("input set is not compatible")]
    NotCompatible,
    #[error("failed to sample a projective frame")]
    FrameSamplingFailed,
    #[error("no anchor pair for view {0}")]
    NoAnchorPair(usize),
    #[error("generator exhausted its retries")]
    GeneratorExhausted,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroInput => "ZeroInput",
            Error::RankMismatch { .. } => "RankMismatch",
            Error::LinesIdentical => "LinesIdentical",
            Error::DegenerateFrame => "DegenerateFrame",
            Error::NoUniqueSolution { .. } => "NoUniqueSolution",
            Error::CentersCoincide(..) => "CentersCoincide",
            Error::NotRankTwo(..) => "NotRankTwo",
            Error::MissingPair(..) => "MissingPair",
            Error::MissingAuxiliary => "MissingAuxiliary",
            Error::DegenerateLine => "DegenerateLine",
            Error::SingularTransform(_) => "SingularTransform",
            Error::AmbiguousClassification => "AmbiguousClassification",
            Error::WrongCase { .. } => "WrongCase",
            Error::DegenerateReconstruction(_) => "DegenerateReconstruction",
            Error::AuxiliaryDegenerate => "AuxiliaryDegenerate",
            Error::NotCompatible => "NotCompatible",
            Error::FrameSamplingFailed => "FrameSamplingFailed",
            Error::NoAnchorPair(_) => "NoAnchorPair",
            Error::GeneratorExhausted => "GeneratorExhausted",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
