use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not in the span of the algebra basis")]
    NotInSpan,
    #[error("basis matrices are linearly dependent")]
    DependentBasis,
    #[error("bracket of basis elements {0} and {1} leaves the span")]
    NotClosed(usize, usize),
    #[error("Killing form is degenerate (rank {rank} < {dim})")]
    NotSemisimple { rank: usize, dim: usize },
    #[error("ad_U is not nilpotent")]
    NotNilpotent,
    #[error("element is zero")]
    ZeroElement,
    #[error("chain basis is not aligned with ad_X eigenvectors: {0}")]
    EigenAlignmentFailed(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("cannot parse scalar {0:?}")]
    ParseScalar(String),
    #[error("invalid algebra specification: {0}")]
    InvalidSpec(String),
    #[error("group element is outside the chart domain: {0}")]
    OutOfChartDomain(String),
    #[error("element has a nonzero V or X coefficient")]
    NonzeroSl2Part,
    #[error("interval is degenerate")]
    DegenerateInterval,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("no crossing of the escape threshold on the admissible interval")]
    NoCrossing,
    #[error("matching domain exceeded: {0}")]
    DomainExceeded(String),
    #[error("matrix is not hyperbolic (|Tr| = {0} <= 2)")]
    NotHyperbolic(f64),
    #[error("sample budget exceeded: {0}")]
    SampleBudgetExceeded(String),
    #[error("perturbation too large: {0}")]
    PerturbationTooLarge(String),
    #[error("points are not in a common chart: {0}")]
    NotInChart(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("distance growth saturated before a usable horizon: {0}")]
    WrapDetected(String),
    #[error("numerical iteration did not converge: {0}")]
    NonConvergence(String),
}

impl Error {
    /// Numerical failures are reported with a separate exit status by the CLI.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::OutOfChartDomain(_) | Error::NonConvergence(_) | Error::NoCrossing | Error::WrapDetected(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
