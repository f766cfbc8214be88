use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported range (2^31)")]
    ModulusTooLarge(u64),
    #[error("no inverse: {0} is zero mod {1}")]
    NoInverse(u64, u64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no primes in AIKPS window ({lo:.4}, {hi:.4})")]
    EmptyAikpsWindow { lo: f64, hi: f64 },
    #[error("properness impossible: 3^{m} > {p}")]
    PropernessImpossible { p: u64, m: usize },
    #[error("parameters do not form a proper GAP")]
    NotProperGap,
    #[error("search exhausted after {0} candidates")]
    SearchExhausted(u64),
    #[error("search space too large: {size:.3e} candidates exceeds cap {cap}")]
    SpaceTooLarge { size: f64, cap: u64 },
    #[error("circuit uses {0} qubits, simulator budget is {1}")]
    QubitBudget(usize, usize),
    #[error("decompose first: multi-controlled gate in noisy simulation")]
    DecomposeFirst,
    #[error("unsupported gate for this operation: {0}")]
    UnsupportedGate(String),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by inputs that violate an operation's preconditions.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::NotPrime(_)
                | Error::ModulusTooLarge(_)
                | Error::NoInverse(..)
                | Error::Precondition(_)
                | Error::EmptyAikpsWindow { .. }
                | Error::PropernessImpossible { .. }
                | Error::NotProperGap
                | Error::SpaceTooLarge { .. }
                | Error::QubitBudget(..)
                | Error::DecomposeFirst
                | Error::UnsupportedGate(_)
                | Error::InvalidLayout(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
