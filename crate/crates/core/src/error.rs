use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BdgError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("total particle number must be positive")]
    NoParticles,

    #[error("grid needs at least 2 points and a positive extent (got {points} points, r_max = {r_max})")]
    InvalidGrid { points: usize, r_max: f64 },

    #[error("basis for l = {l} lost orthonormality (max deviation {deviation:.3e}); enlarge or refine the grid")]
    BasisNotOrthonormal { l: usize, deviation: f64 },

    #[error("field length {found} does not match grid length {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver failed to converge for l = {l}")]
    EigenNotConverged { l: usize },

    #[error("cutoff too small: k_c <= k_F at r = {r:.4} (E_c = {cutoff}, mu = {mu})")]
    CutoffBelowFermiLevel { r: f64, cutoff: f64, mu: f64 },

    #[error("LDA tail quadrature did not converge at r = {r:.4} (estimated error {error:.3e})")]
    QuadratureNotConverged { r: f64, error: f64 },

    #[error("could not bracket the chemical potential in [{lo}, {hi}] (residual {residual:.3e})")]
    BracketFailure { lo: f64, hi: f64, residual: f64 },

    #[error("particle number target not attained: residual {residual:.3e} exceeds {tolerance:.3e}")]
    NumberNotAttained { residual: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, BdgError>;
