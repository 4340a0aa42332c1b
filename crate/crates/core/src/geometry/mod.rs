//! Closed convex sets in `R^d` with exact or iterative projection, support
//! functions, membership, Hausdorff distance, and the normal-cone violation
//! residual. All operations are pure functions of immutable inputs.

mod hausdorff;
mod project;
pub mod set;
mod support;
mod vector;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hausdorff::{hausdorff, hausdorff_seeded, HausdorffEstimate};
pub use project::{contains, distance, project, project_point};
pub use set::{ConvexSet, Halfspace};
pub use support::{farthest_distance, normal_cone_violation, support};
pub use vector::Vector;


#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid {field}: {message}")]
    InvalidSpec { field: String, message: String },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("projection did not converge within {iterations} iterations (residual {residual:.3e})")]
    IterationLimit { iterations: usize, residual: f64 },
    #[error("supremum is unbounded in the requested direction")]
    Unbounded,
    #[error("hausdorff distance unsupported for this pair of sets")]
    UnsupportedPair,
}

impl GeometryError {
    pub(crate) fn invalid(field: &str, message: &str) -> Self {
        GeometryError::InvalidSpec {
            field: field.to_string(),
            message: message.to_string(),
        }
    }
}

/// Tolerances and iteration budget for projections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionConfig {
    /// Dykstra stopping threshold on the per-sweep displacement.
    pub tol_proj: f64,
    /// Maximum Dykstra sweeps before `IterationLimit`.
    pub max_iter: usize,
    /// Feasibility tolerance for membership checks made by solvers.
    pub tol_feas: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            tol_proj: 1e-10,
            max_iter: 10_000,
            tol_feas: 1e-8,
        }
    }
}

/// Result of a projection query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub point: Vector,
    /// Dykstra sweeps used; 0 for closed-form branches.
    pub iterations: usize,
    /// Iterate displacement at the last sweep; 0 for closed-form branches.
    pub residual: f64,
}
