use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state norm deviates from 1 by {deviation:e}")]
    NotNormalized { deviation: f64 },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("duplicate qubit {0} in Pauli word")]
    DuplicateQubit(usize),

    #[error("invalid excitation: {0}")]
    InvalidExcitation(String),

    #[error("invalid electron count {n_electrons} for {n_qubits} qubits")]
    InvalidElectronCount { n_qubits: usize, n_electrons: usize },

    #[error("generator is self-inverse (G^2 = I); not an excitation generator")]
    SelfInverseGenerator,

    #[error("generator is not self-inverse (G^2 != I); rotosolve requires rotation generators")]
    NotSelfInverse,

    #[error("{0} qubits is too large for a dense construction (limit {1})")]
    TooLargeForDense(usize, usize),

    #[error("sample points {0} and {1} coincide modulo 2*pi")]
    CoincidentSamples(usize, usize),

    #[error("singular fit system (condition estimate {0:e})")]
    SingularSystem(f64),

    #[error("invalid sample set: {0}")]
    InvalidSamples(String),

    #[error("series is identically zero")]
    IdenticallyZero,

    #[error("{0} dimensions exceeds the multi-parameter limit of {1}")]
    TooManyDimensions(usize, usize),

    #[error("no descent seed converged (best gradient norm {0:e})")]
    NoConvergence(f64),

    #[error("Lanczos did not converge within {iterations} iterations (best residual {residual:e})")]
    LanczosNotConverged { iterations: usize, residual: f64 },

    #[error("parameter {0} is shared between operators; the rule requires a single occurrence")]
    SharedParameter(usize),

    #[error("parameter index {index} out of range ({n_parameters} parameters)")]
    ParameterOutOfRange { index: usize, n_parameters: usize },

    #[error("expected {expected} parameters, got {found}")]
    ParameterCount { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing header field `{0}`")]
    MissingHeader(&'static str),

    #[error("no terms")]
    NoTerms,

    #[error("fixture `{0}` has no recorded reference energy")]
    MissingReference(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
