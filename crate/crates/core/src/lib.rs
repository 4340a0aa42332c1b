//! Solvers for sweeping processes driven by bounded-variation moving convex
//! sets in `R^d`, including prescribed behaviour at jump points of the
//! driving set and the play operator of elastoplasticity.
//!
//! The crate is organised around the pipeline
//!
//! * [`geometry`] — closed convex sets with exact or iterative projection,
//!   support functions and Hausdorff distances;
//! * [`bvpath`] — bounded-variation curves with one-sided limits and the
//!   normalized arc-length reparametrization;
//! * [`movingset`] — the driving set `t ↦ C(t)` with jump records and
//!   variation in the Hausdorff metric;
//! * [`solver`] — catching-up discretization, prescribed-jump solves,
//!   jump-set truncation and the general (non-right-continuous) BV solver;
//! * [`play`] — the play operator `P`, its rate-independent extension and
//!   the segment-play jump map;
//! * [`verify`] — machine-checkable invariant reports used by the
//!   acceptance suite and the CLI.

pub mod bvpath;
pub mod geometry;
pub mod movingset;
pub mod play;
pub mod solver;
pub mod verify;

pub use geometry::{ConvexSet, GeometryError, ProjectionConfig, ProjectionReport, Vector};
