use serde::{Deserialize, Serialize};

use super::project::feasible_point;
use super::{GeometryError, ProjectionConfig, Vector};

/// Closed half-space `{x : <normal, x> <= offset}` with a unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// Exact membership predicate, no tolerance.
    pub(crate) fn satisfies(&self, x: &Vector) -> bool {
        self.normal.dot(x) <= self.offset
    }
}

/// Symbolic description of a nonempty closed convex subset of `R^d`.
///
/// `Translate { base, shift }` denotes the set `shift - base`, i.e.
/// `{shift - z : z in base}`; a moving set with constant shape `u(t) - Z`
/// is a time-indexed family of such translates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConvexSet {
    Ball {
        center: Vector,
        radius: f64,
    },
    Box {
        lo: Vector,
        hi: Vector,
    },
    Halfspace {
        normal: Vector,
        offset: f64,
    },
    Hpolytope {
        halfspaces: Vec<Halfspace>,
    },
    Translate {
        base: Box<ConvexSet>,
        shift: Vector,
    },
}

/// Tolerance for the unit-normal invariant of half-spaces.
pub const NORMAL_UNIT_TOL: f64 = 1e-12;

/// Infeasibility threshold for rejecting an empty H-polytope.
pub const POLYTOPE_FEASIBILITY_TOL: f64 = 1e-6;

impl ConvexSet {
    pub fn ball(center: impl Into<Vector>, radius: f64) -> Self {
        ConvexSet::Ball {
            center: center.into(),
            radius,
        }
    }

    pub fn cuboid(lo: impl Into<Vector>, hi: impl Into<Vector>) -> Self {
        ConvexSet::Box {
            lo: lo.into(),
            hi: hi.into(),
        }
    }

    /// Closed interval of `R^1`.
    pub fn interval(lo: f64, hi: f64) -> Self {
        ConvexSet::Box {
            lo: Vector::new(vec![lo]),
            hi: Vector::new(vec![hi]),
        }
    }

    pub fn halfspace(normal: impl Into<Vector>, offset: f64) -> Self {
        ConvexSet::Halfspace {
            normal: normal.into(),
            offset,
        }
    }

    pub fn hpolytope(halfspaces: Vec<Halfspace>) -> Self {
        ConvexSet::Hpolytope { halfspaces }
    }

    pub fn translate(base: ConvexSet, shift: impl Into<Vector>) -> Self {
        ConvexSet::Translate {
            base: Box::new(base),
            shift: shift.into(),
        }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Ball { center, .. } => center.dim(),
            ConvexSet::Box { lo, .. } => lo.dim(),
            ConvexSet::Halfspace { normal, .. } => normal.dim(),
            ConvexSet::Hpolytope { halfspaces } => {
                halfspaces.first().map_or(0, |h| h.normal.dim())
            }
            ConvexSet::Translate { shift, .. } => shift.dim(),
        }
    }

    /// Validate the construction invariants: positive radii, ordered box
    /// bounds, unit normals, nonempty polytopes (checked by searching for a
    /// feasible point), consistent dimensions. Degenerate flat sets
    /// (`radius = 0`, `lo = hi` on some axis) are allowed.
    pub fn validate(&self, cfg: &ProjectionConfig) -> Result<(), GeometryError> {
        match self {
            ConvexSet::Ball { center, radius } => {
                if !center.is_finite() {
                    return Err(GeometryError::invalid("center", "must be finite"));
                }
                if !radius.is_finite() || *radius < 0.0 {
                    return Err(GeometryError::invalid(
                        "radius",
                        "must be finite and nonnegative",
                    ));
                }
            }
            ConvexSet::Box { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(GeometryError::invalid("lo/hi", "must be finite"));
                }
                if lo.dim() != hi.dim() {
                    return Err(GeometryError::DimensionMismatch {
                        expected: lo.dim(),
                        actual: hi.dim(),
                    });
                }
                if lo
                    .as_slice()
                    .iter()
                    .zip(hi.as_slice())
                    .any(|(l, h)| l > h)
                {
                    return Err(GeometryError::invalid(
                        "lo",
                        "must be componentwise <= hi",
                    ));
                }
            }
            ConvexSet::Halfspace { normal, offset } => {
                validate_halfspace(normal, *offset)?;
            }
            ConvexSet::Hpolytope { halfspaces } => {
                if halfspaces.is_empty() {
                    return Err(GeometryError::invalid(
                        "halfspaces",
                        "hpolytope needs at least one halfspace",
                    ));
                }
                let d = halfspaces[0].normal.dim();
                for h in halfspaces {
                    if h.normal.dim() != d {
                        return Err(GeometryError::DimensionMismatch {
                            expected: d,
                            actual: h.normal.dim(),
                        });
                    }
                    validate_halfspace(&h.normal, h.offset)?;
                }
                let (point, violation) = feasible_point(halfspaces, cfg);
                if violation > POLYTOPE_FEASIBILITY_TOL {
                    let _ = point;
                    return Err(GeometryError::invalid(
                        "halfspaces",
                        "hpolytope appears empty (no feasible point found)",
                    ));
                }
            }
            ConvexSet::Translate { base, shift } => {
                if !shift.is_finite() {
                    return Err(GeometryError::invalid("shift", "must be finite"));
                }
                base.validate(cfg)?;
                if base.dim() != shift.dim() {
                    return Err(GeometryError::DimensionMismatch {
                        expected: base.dim(),
                        actual: shift.dim(),
                    });
                }
            }
        }
        Ok(())
    }
}

fn validate_halfspace(normal: &Vector, offset: f64) -> Result<(), GeometryError> {
    if !normal.is_finite() || !offset.is_finite() {
        return Err(GeometryError::invalid("normal/offset", "must be finite"));
    }
    if (normal.norm() - 1.0).abs() > NORMAL_UNIT_TOL {
        return Err(GeometryError::invalid(
            "normal",
            "must have Euclidean norm 1 within 1e-12",
        ));
    }
    Ok(())
}
