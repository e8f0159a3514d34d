use thiserror::Error;

/// Errors raised by the simulation and diagnostics library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e} (largest {max_eigenvalue:e})")]
    NonPsd {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("matrix is not symmetric: |a_ij - a_ji| = {deviation:e} at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize, deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension error: {0}")]
    DimensionError(String),

    #[error("value outside its domain: {0}")]
    DomainError(String),

    #[error("target density vanishes at the current state (grid index {index})")]
    ZeroDensity { index: usize },

    #[error("step size {h} outside H = [{h_min}, {h_max}]")]
    StepSizeOutOfRange { h: f64, h_min: f64, h_max: f64 },

    #[error("variant mismatch: {0}")]
    VariantMismatch(String),

    #[error("transport problem of size {rows}x{cols} exceeds the cap of {cap} cost entries")]
    SizeCap { rows: usize, cols: usize, cap: usize },

    #[error("transport problem infeasible: residual artificial flow {residual:e}")]
    Infeasible { residual: f64 },

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("hypothesis failed for tuning {gamma}: {reason}")]
    HypothesisFailed { gamma: usize, reason: String },

    #[error("contraction violated for tuning {gamma} at pair ({x}, {y}): {lhs} > {rhs}")]
    ContractionViolated {
        gamma: usize,
        x: usize,
        y: usize,
        lhs: f64,
        rhs: f64,
    },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),
}

pub type Result<T> = std::result::Result<T, Error>;
