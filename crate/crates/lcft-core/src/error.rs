use thiserror::Error;

/// A single failed admissibility check, reported with its margin.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Violation {
    /// Vertex index, or `None` for global conditions.
    pub vertex: Option<usize>,
    pub rule: String,
    /// Signed margin; negative or zero means violated.
    pub margin: f64,
}

#[derive(Debug, Error)]
pub enum LcftError {
    #[error("pole of Gamma at z = {re} + {im}i")]
    Pole { re: f64, im: f64 },
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("shift budget exceeded: {needed} steps needed, budget {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("DOZZ argument {arg} lies within {distance:e} of an Upsilon zero")]
    NearPole { arg: String, distance: f64 },
    #[error("degenerate weight: condition estimate {cond:e} exceeds guard {guard:e}")]
    DegenerateWeight { cond: f64, guard: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid graph: {0}")]
    GraphInvalid(String),
    #[error("admissibility violated: {0:?}")]
    Validation(Vec<Violation>),
    #[error("cost guard: {nodes} quadrature nodes requested, budget {budget}")]
    CostGuard { nodes: usize, budget: usize },
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("numerical guard: {0}")]
    Guard(String),
}

impl LcftError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            LcftError::Domain(_)
            | LcftError::DimensionMismatch(_)
            | LcftError::GraphInvalid(_)
            | LcftError::Validation(_)
            | LcftError::SingularPoint(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, LcftError>;
