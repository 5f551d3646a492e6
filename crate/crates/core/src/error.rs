use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("term {term}: particle total {found} differs from {expected}")]
    MixedParticleNumber { term: usize, expected: u32, found: u32 },

    #[error("term {term}: fermionic mode {mode} occupied {count} times")]
    PauliViolation { term: usize, mode: usize, count: u32 },

    #[error("term {term}: occupation vector has {found} modes, expected {expected}")]
    ModeCountMismatch { term: usize, expected: usize, found: usize },

    #[error("state has zero norm")]
    ZeroState,

    #[error("incompatible operands: {0}")]
    IncompatibleStates(String),

    #[error("mode index {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("tensor is not (anti)symmetric: violation {violation:.3e}")]
    NotSymmetric { violation: f64 },

    #[error("matrix is not antisymmetric: violation {violation:.3e}")]
    NotAntisymmetric { violation: f64 },

    #[error("dense tensor would need {entries} entries (limit {limit})")]
    CapacityExceeded { entries: u128, limit: usize },

    #[error("matrix is not unitary: max |U^dag U - I| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    #[error("reduction order {n} invalid for {particles} particles")]
    BadOrder { n: usize, particles: u32 },

    #[error("bad partition: {0}")]
    BadPartition(String),

    #[error("operator table is not Hermitian: violation {violation:.3e}")]
    NotHermitian { violation: f64 },

    #[error("density matrix has eigenvalue {eigenvalue:.3e} below clamping tolerance")]
    NotPSD { eigenvalue: f64 },

    #[error("expected a two-particle state, found {particles} particles")]
    NotTwoParticle { particles: u32 },

    #[error("bad orbit grouping: {0}")]
    BadGrouping(String),

    #[error("state is not half filled for the given orbit grouping")]
    NotHalfFilled,

    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),
}

impl Error {
    /// Failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotPSD { .. } | Error::DecompositionFailed(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
