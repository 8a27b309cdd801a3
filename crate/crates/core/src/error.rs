use thiserror::Error;

/// Errors produced by the metric laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected: vertices {0} and {1} are not joined by a path")]
    DisconnectedGraph(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("generation gave up after {attempts} attempts")]
    GenerationTimeout { attempts: u64 },

    #[error("map is not injective: points {0} and {1} share an image")]
    NonInjective(usize, usize),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("not an ultrametric: d({x},{y}) > max(d({x},{z}), d({y},{z}))")]
    NotUltrametric { x: usize, y: usize, z: usize },

    #[error("unknown point {0}")]
    UnknownPoint(usize),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("the induced distance graph on the subset has no edges")]
    EmptyInducedGraph,

    #[error("degenerate chain: the one-step energy vanishes")]
    DegenerateChain,

    #[error("invalid Markov chain: {0}")]
    InvalidChain(String),

    #[error("dimension {n} exceeds the supported maximum {max}")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("index {index} out of range (valid: {range})")]
    IndexOutOfRange { index: usize, range: String },

    #[error("heat semigroup time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("graph is not regular")]
    NotRegular,

    #[error("integer overflow in exact arithmetic")]
    Overflow,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
