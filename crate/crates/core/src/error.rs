use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameters must be finite")]
    NonFinite,
    #[error("omega must be positive, got {0}")]
    NonPositiveOmega(f64),
    #[error("gamma0 must be non-negative, got {0}")]
    NegativeGamma0(f64),
    #[error("eta must be non-negative, got {0}")]
    NegativeEta(f64),
    #[error("phi must lie in [0, 2pi), got {0}")]
    PhiOutOfRange(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs x_max > 0 and at least 3 points (x_max = {x_max}, n_points = {n_points})")]
    Degenerate { x_max: f64, n_points: usize },
    #[error("grid too coarse: h = {h:.3e} exceeds {max_h:.3e} (20 points per coupling period)")]
    GridTooCoarse { h: f64, max_h: f64 },
    #[error("domain too small: x_max = {x_max} cannot contain energy {energy:.4} with a 5 omega margin")]
    DomainTooSmall { x_max: f64, energy: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("requested {k} eigenpairs from a matrix of dimension {dim}")]
    TooManyRequested { k: usize, dim: usize },
    #[error("eigensolver did not converge for eigenvalue index {index}")]
    ConvergenceFailure { index: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuasiError {
    #[error("no classically allowed region at energy {energy} (minimum of the potential is {minimum})")]
    NoClassicalRegion { energy: f64, minimum: f64 },
    #[error("eta = {eta} is below the threshold eta_{n} = {threshold}")]
    BelowThreshold { n: usize, eta: f64, threshold: f64 },
    #[error("thresholds need gamma0 > 0")]
    ZeroCoupling,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("symmetric mode does not decouple: max deviation {max_deviation:.3e}")]
    DecouplingViolation { max_deviation: f64 },
    #[error("two-mode check needs 2 <= n_max <= 30, got {0}")]
    TwoModeTooLarge(usize),
    #[error("truncation n_max must be at least 2, got {0}")]
    Truncation(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("PT analysis needs a full-mode spectrum")]
    NotFullMode,
    #[error("PT analysis needs phi = pi/2, got {0}")]
    NotQuarterWave(f64),
    #[error("eigenvalue {index} has shifted imaginary part {im:.3e} but no conjugate partner")]
    UnpairedComplexEigenvalue { index: usize, im: f64 },
    #[error("modes {a} and {b} are not mirror images (max modulus deviation {deviation:.3e})")]
    MirrorMismatch { a: usize, b: usize, deviation: f64 },
    #[error("track has {points} points, at least 5 are needed")]
    InsufficientTrack { points: usize },
}
