//! Error type shared by all modules of the crate.

/// Errors produced by geometry, energy, solver and flow routines.
#[derive(Debug, thiserror::Error)]
pub enum CurveError {
    #[error("edge {edge} has zero length")]
    DegenerateEdge { edge: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("kernel evaluated on nearly coincident points (distance {dist:e} below threshold {threshold:e})")]
    MidpointCollision { dist: f64, threshold: f64 },

    #[error("edge indices must be pairwise distinct, got ({0}, {1}, {2})")]
    NonDistinctEdges(usize, usize, usize),

    #[error("edges {e1} and {e2} share a parameter midpoint")]
    MidpointCoincidence { e1: usize, e2: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("saddle system is singular (pivot ratio {pivot_ratio:e})")]
    SingularSystem { pivot_ratio: f64 },

    #[error("saddle system has not been factorized")]
    NotFactorized,

    #[error("polylines live on different partitions")]
    PartitionMismatch,

    #[error(
        "feasibility restoration did not converge in {iters} iterations (violation {violation:e})"
    )]
    RestorationDiverged { iters: usize, violation: f64 },

    #[error("step size underflow: tau {tau:e} fell below minimum {tau_min:e}")]
    StepsizeUnderflow { tau: f64, tau_min: f64 },

    #[error("projected gradient vanishes; no descent direction at this configuration")]
    NoDescent,

    #[error("initial curve is not embedded: segments {0} and {1} touch")]
    InvalidInitialCurve(usize, usize),
}

pub type Result<T> = std::result::Result<T, CurveError>;
