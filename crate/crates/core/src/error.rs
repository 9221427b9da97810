use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distance matrix has {rows} rows but {labels} labels")]
    DimensionMismatch { rows: usize, labels: usize },
    #[error("distance matrix row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("space must have at least one point")]
    EmptySpace,
    #[error("distance matrix is asymmetric at ({i},{j})")]
    Asymmetric { i: usize, j: usize },
    #[error("negative distance at ({i},{j})")]
    NegativeEntry { i: usize, j: usize },
    #[error("nonzero diagonal entry at ({i},{i})")]
    NonzeroDiagonal { i: usize },
    #[error("zero distance between distinct points at ({i},{j})")]
    ZeroOffDiagonal { i: usize, j: usize },
    #[error("duplicate label {label:?} at indices {first} and {second}")]
    DuplicateLabel { label: String, first: usize, second: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph is disconnected; components: {components:?}")]
    Disconnected { components: Vec<Vec<String>> },
    #[error("graph is not a tree: {0}")]
    NotATree(String),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("point index {index} out of range for a space of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("negative weight {0}")]
    NegativeWeight(String),
    #[error("team totals differ: a-team {a}, b-team {b}")]
    Unbalanced { a: String, b: String },
    #[error("simplex is degenerate (weight zero)")]
    Degenerate,
    #[error("simplex is not normalized (weight {0})")]
    NotNormalized(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid glue plan: {0}")]
    Plan(String),
    #[error("gap #{index} is {value}; composition needs every gap > 0")]
    NonPositiveGap { index: usize, value: String },
    #[error("component #{component} has minimum distance {min}; the combined bound needs 1")]
    MinDistanceNotOne { component: usize, min: String },
    #[error("bound inapplicable: {0}")]
    BoundInapplicable(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
