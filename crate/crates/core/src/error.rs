use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("point {point:?} lies outside the domain of chart `{chart}`")]
    Domain { chart: String, point: Vec<f64> },

    #[error("metric of chart `{chart}` is not positive definite at {point:?}")]
    DegenerateMetric { chart: String, point: Vec<f64> },

    #[error("rank mismatch: {0}")]
    RankMismatch(String),

    #[error("form degree out of range: {0}")]
    DegreeOutOfRange(String),

    #[error("tensor is not symmetric (defect {defect:e})")]
    NotSymmetric { defect: f64 },

    #[error("jet order {requested} unavailable, at most {available}")]
    OrderUnavailable { requested: usize, available: usize },

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("invalid bundle specification: {0}")]
    InvalidSpec(String),

    #[error("{equation} violated: defect {defect:e} at {point:?}")]
    EquationViolated {
        equation: String,
        defect: f64,
        point: Vec<f64>,
    },

    #[error("closed form `{name}` disagrees with direct computation: closed {closed:e}, direct {direct:e}")]
    FormulaMismatch {
        name: String,
        closed: f64,
        direct: f64,
    },

    #[error("inconsistent classification: {0}")]
    InconsistentLabels(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
