use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument fell outside its admissible interval.
    #[error("{name} = {value} is outside the admissible interval [{lo}, {hi}]")]
    Domain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// The classification budget is below `H_b(q_s1)`, the residual task
    /// entropy that even a lossless reconstruction leaves behind.
    #[error("classification budget {c} is below the feasibility threshold H_b(q_s1) = {threshold:.6}")]
    InfeasibleClassification { c: f64, threshold: f64 },

    /// The rate budget cannot pay for the information the classification
    /// budget demands.
    #[error("rate {rate} is below the minimum rate {required:.9} needed to meet the classification budget")]
    RateInsufficient { rate: f64, required: f64 },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    /// A representation channel failed validation.
    #[error("invalid channel: field `{field}`: {reason}")]
    InvalidChannel { field: String, reason: String },

    /// The decoder LP has an empty feasible set. `violation` is the smallest
    /// achievable excess of the classification row, attained by `profile`.
    #[error("decoder LP is infeasible: minimal classification-row violation {violation:.3e}")]
    InfeasibleLp { violation: f64, profile: Vec<f64> },

    /// A solver exhausted its iteration budget before certifying optimality.
    #[error("solver did not converge: objective {objective}, duality gap {gap:.3e}")]
    Convergence {
        objective: f64,
        gap: f64,
        best: Vec<f64>,
    },

    #[error("solver disagreement: {0}")]
    SolverDisagreement(String),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// An error raised while computing one sample of a sweep.
    #[error("sample {index} (x = {x}): {source}")]
    AtSample {
        index: usize,
        x: f64,
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors meaning "no admissible solution exists" rather than
    /// "the input is malformed".
    pub fn is_infeasible(&self) -> bool {
        match self {
            Error::InfeasibleClassification { .. }
            | Error::RateInsufficient { .. }
            | Error::InfeasibleLp { .. }
            | Error::Infeasible(_) => true,
            Error::AtSample { source, .. } => source.is_infeasible(),
            _ => false,
        }
    }
}
