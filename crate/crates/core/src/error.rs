use thiserror::Error;

/// Errors produced by the solvers, operators and file readers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(String),

    #[error("block {index} is not symmetric (max asymmetry {asymmetry:e})")]
    Asymmetric { index: usize, asymmetry: f64 },

    #[error("coupling entry ({row},{col}) = {value} violates the sign constraint")]
    CouplingSign { row: usize, col: usize, value: f64 },

    #[error("coupling row {row} sums to {sum:e}, expected 0 for a rate matrix")]
    CouplingRowSum { row: usize, sum: f64 },

    #[error("QR iteration did not converge for eigenvalue {index} after {sweeps} sweeps")]
    SchurNoConvergence { index: usize, sweeps: usize },

    #[error(
        "singular Lyapunov operator: eigenvalues ({}{:+}i) and ({}{:+}i) sum to ~0",
        .pair.0 .0, .pair.0 .1, .pair.1 .0, .pair.1 .1
    )]
    SingularLyapunov { pair: ((f64, f64), (f64, f64)) },

    #[error("mode {mode}: {source}")]
    Mode { mode: usize, source: Box<Error> },

    #[error("singular linear system")]
    SingularSystem,

    #[error("Kronecker size {size} exceeds guard {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("Krylov breakdown after {iterations} iterations")]
    Breakdown { iterations: f64 },

    #[error("line search failed: {0}")]
    LineSearch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("problem is not mean-square stable (rho = {rho:e}, max abscissa = {abscissa:e})")]
    Unstable { rho: f64, abscissa: f64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn in_mode(self, mode: usize) -> Error {
        Error::Mode { mode, source: Box::new(self) }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
