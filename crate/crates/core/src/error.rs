//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building charts, evaluating fields or
/// running solvers.
#[derive(Debug, Error)]
pub enum WkitError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("metric is not symmetric positive definite")]
    NonSpdMetric,
    #[error("cross product needs ambient dimension 3 and grade-1 factors")]
    CrossUnavailable,
    #[error("grid too small: axis {axis} has {len} nodes, stencil needs {need}")]
    GridTooSmall {
        axis: usize,
        len: usize,
        need: usize,
    },
    #[error("unsupported stencil order {0} (use 2, 4, 6, 8, 10 or 12)")]
    StencilOrder(usize),
    #[error("degenerate metric at node {node}: det g = {det:e}")]
    DegenerateMetric { node: usize, det: f64 },
    #[error("invalid shape parameters: {0}")]
    InvalidShape(String),
    #[error("inversion center too close to the surface (distance {0:e})")]
    OriginTooClose(f64),
    #[error("mollifier radius {eps} too large for the chart margin {margin}")]
    EpsilonTooLarge { eps: f64, margin: f64 },
    #[error("radii must be strictly decreasing")]
    RadiiNotDecreasing,
    #[error("open patch: pass patch_ok to integrate over a non-closed chart")]
    OpenPatch,
    #[error("chart is not conformal (off-diagonal ratio {0:e})")]
    NonConformalChart(f64),
    #[error("chart is not simply connected (periodic axis present)")]
    NotSimplyConnected,
    #[error("conjugate gradient did not converge: relative residual {residual:e} after {iterations} iterations")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("Gram-Schmidt frame degenerates at node {0}")]
    DegenerateFrame(usize),
    #[error("graph folds over (n.e3 = {0})")]
    GraphFold(f64),
    #[error("step size collapsed below {tau_min:e} at t = {t:e}")]
    StepCollapse { t: f64, tau_min: f64 },
    #[error("curvature blow-up at t = {t:e}: sup |II| = {sup_ii:e}")]
    BlowUp { t: f64, sup_ii: f64 },
    #[error("coordinate map folds (det = {0:e})")]
    Fold(f64),
    #[error("grade mismatch: {0}")]
    GradeMismatch(String),
    #[error("invalid chart file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, WkitError>;
