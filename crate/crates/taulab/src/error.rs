use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point too close to the {axis} boundary: need {needed} nodes of margin, have {have}")]
    BoundaryProximity {
        axis: &'static str,
        needed: usize,
        have: usize,
    },
    #[error("axis {0} is discrete; continuous derivative requested")]
    DiscreteAxis(&'static str),
    #[error("index {0:?} out of range for grid of shape {1:?}")]
    OutOfRange([i64; 3], [usize; 3]),
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error("matrix is singular to working precision (pivot {pivot:e} at step {step})")]
    Singular { pivot: f64, step: usize },
    #[error("near-singular solve: condition estimate {cond:e} above guard {guard:e}")]
    IllConditioned { cond: f64, guard: f64 },
    #[error("truncation failure: certified tail {tail:e} above tolerance {tol:e}")]
    Truncation { tail: f64, tol: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("quadrature did not converge: refinement disagreement {0:e}")]
    NotConverged(f64),
    #[error("NaN produced at index {0:?}")]
    NanAt([usize; 3]),
    #[error("point outside the model's validity region: {0}")]
    OutsideValidity(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
