use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("dataset is empty")]
    Empty,
    #[error("line {line}, column {col}: {cell:?} is not a finite number")]
    NotNumeric { line: usize, col: usize, cell: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("point {row}, feature {col} is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("expected {expected} labels, found {found}")]
    LabelLength { expected: usize, found: usize },
    #[error("label column: {0}")]
    LabelColumn(String),
    #[error("invalid generator parameters: {0}")]
    InvalidGenerator(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("cluster id {id} at point {point} is out of range for k = {k}")]
    OutOfRange { point: usize, id: usize, k: usize },
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("every cluster is empty")]
    AllEmpty,
}

/// Invalid clustering or optimizer parameters.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("k must be >= 1")]
    ZeroClusters,
    #[error("k = {k} exceeds the number of points n = {n}")]
    TooManyClusters { k: usize, n: usize },
    #[error("swarm size {got} is below the minimum of {min}")]
    SwarmTooSmall { got: usize, min: usize },
    #[error("neighborhood size {size} must lie in 2..={swarm}")]
    NeighborhoodSize { size: usize, swarm: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("config: {0}")]
    Parse(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
