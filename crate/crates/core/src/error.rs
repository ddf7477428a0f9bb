use thiserror::Error;

/// Errors raised by the urn library.
///
/// Variants fall in two groups: input validation (bad models, bad
/// configurations) and numerical guards (pruning budgets, support caps,
/// degenerate covariance). [`UrnError::is_numerical_guard`] tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum UrnError {
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("second-moment matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    SigmaNotPositiveDefinite { min_eigenvalue: f64 },

    #[error("support is not lattice valued: {0}")]
    NotLatticeValued(String),

    #[error("support is a single point; span is undefined")]
    DegenerateSupport,

    #[error("difference set has rank {rank} < dimension {dim}")]
    RankDeficient { rank: usize, dim: usize },

    #[error("gamma function pole at {0}")]
    GammaPole(f64),

    #[error("gamma argument {0} outside supported range (0, 50]")]
    DomainError(f64),

    #[error("pruned mass {pruned:e} would exceed budget {budget:e}")]
    BudgetExceeded { pruned: f64, budget: f64 },

    #[error("support of {cells} cells exceeds cap {cap}")]
    SupportTooLarge { cells: usize, cap: usize },

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("tail window of width {needed} exceeds grid {grid}")]
    WindowTooSmall { needed: usize, grid: usize },

    #[error("covariance is singular; Gaussian normalization undefined")]
    DegenerateSigma,

    #[error("{off_mass:e} of law mass lies off the declared lattice")]
    LatticeMismatch { off_mass: f64 },

    #[error("time index must satisfy n >= {min}, got {n}")]
    TimeTooSmall { n: u64, min: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl UrnError {
    /// True for guards that fire on numerically valid but infeasible
    /// requests, as opposed to malformed input.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            UrnError::SigmaNotPositiveDefinite { .. }
                | UrnError::GammaPole(_)
                | UrnError::BudgetExceeded { .. }
                | UrnError::SupportTooLarge { .. }
                | UrnError::TooLarge(_)
                | UrnError::WindowTooSmall { .. }
                | UrnError::DegenerateSigma
                | UrnError::LatticeMismatch { .. }
                | UrnError::RankDeficient { .. }
                | UrnError::NotLatticeValued(_)
                | UrnError::DegenerateSupport
        )
    }
}

pub type Result<T> = std::result::Result<T, UrnError>;
