use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the estimation chain.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scenario violated one of its structural invariants.
    InvalidScenario(String),
    /// Separation metrics need at least two angles.
    UndefinedSeparation,
    /// `g_coeff` was queried outside `|k| <= 2n`.
    KernelSupport { k: i64, n: u32 },
    /// Kernel parameters incompatible with the implied array sizes.
    InvalidKernelParams(String),
    /// The interpolation matrix is numerically singular.
    SingularSupport { rcond: f64 },
    /// Matrix or tensor dimensions do not line up.
    DimensionMismatch(String),
    /// A full-rank Toeplitz matrix admits no unique Vandermonde decomposition.
    DecompositionNotUnique { rank: usize, size: usize },
    /// Input that must be positive semidefinite is not.
    NotPsd { min_eig: f64 },
    /// Non-finite entries where finite values are required.
    NonFinite(&'static str),
    /// DOA/DOD candidate lists have different lengths.
    PairingCountMismatch { n_rx: usize, n_tx: usize },
    /// A decomposition does not reproduce the data it claims to represent.
    DecompositionMismatch { relative_error: f64 },
    /// Instance too large for a brute-force oracle.
    OracleTooLarge(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidScenario(msg) => write!(f, "invalid scenario: {msg}"),
            Error::UndefinedSeparation => write!(f, "undefined separation: need at least two angles"),
            Error::KernelSupport { k, n } => {
                write!(f, "coefficient out of kernel support: |k|={} > 2n={}", k.abs(), 2 * n)
            }
            Error::InvalidKernelParams(msg) => write!(f, "invalid kernel parameters: {msg}"),
            Error::SingularSupport { rcond } => {
                write!(f, "support violates invertibility: reciprocal condition estimate {rcond:.3e}")
            }
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::DecompositionNotUnique { rank, size } => {
                write!(f, "decomposition not unique: numerical rank {rank} of a {size}x{size} Toeplitz matrix")
            }
            Error::NotPsd { min_eig } => {
                write!(f, "matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}")
            }
            Error::NonFinite(what) => write!(f, "non-finite entries in {what}"),
            Error::PairingCountMismatch { n_rx, n_tx } => {
                write!(f, "angle count mismatch: {n_rx} DOA candidates vs {n_tx} DOD candidates")
            }
            Error::DecompositionMismatch { relative_error } => {
                write!(f, "decomposition does not reproduce the data: relative error {relative_error:.3e}")
            }
            Error::OracleTooLarge(msg) => write!(f, "oracle instance too large: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
