//! The catching-up sweep over one fixed partition. Each node applies the
//! continuous-evolution projection onto the left-limit set (when it differs
//! from the previous node's set), then the node map onto `C(t)` — default
//! projection or a prescription — and, for general-BV solves, a second map
//! onto `C(t+)`.
//!
//! Exactness rules the implementation leans on:
//! * projections return their input bit for bit when it already satisfies
//!   the set's membership predicate;
//! * a step whose target set equals the previous node's set is skipped
//!   outright (projection of a just-projected point is the identity), so
//!   repeated nodes and stationary stretches preserve values bitwise.
//!
//! Translate-mode sets are handled through their shift vectors alone, with
//! the same arithmetic as projecting onto the materialized translate set.

use std::collections::BTreeMap;

use crate::bvpath::Side;
use crate::geometry::{project_point, ConvexSet, GeometryError, ProjectionConfig, Vector};
use crate::movingset::MovingSet;
use crate::solver::SolverError;

/// Map applied at a node, from `y(t-)` into `C(t)` (or from `y(t)` into
/// `C(t+)` when used as the right map of a general-BV jump).
#[derive(Clone, Debug)]
pub(crate) enum MapKind {
    Project,
    Fixed(Vector),
    SegmentPlay { substeps: usize },
}

#[derive(Clone, Debug)]
pub(crate) struct NodeAction {
    pub at_map: MapKind,
    /// `Some` only for general-BV solves.
    pub right_map: Option<MapKind>,
}

pub(crate) struct SweepOutput {
    pub values: Vec<Vector>,
    pub lefts: BTreeMap<usize, Vector>,
    pub rights: BTreeMap<usize, Vector>,
}

/// One-sided snapshot of `C(t)`: either a shift of the fixed base (translate
/// mode) or a whole set (family mode).
#[derive(Clone, Debug, PartialEq)]
enum SetRef<'a> {
    Shifted { base: &'a ConvexSet, shift: Vector },
    Whole(ConvexSet),
}

impl SetRef<'_> {
    fn project(&self, x: &Vector, cfg: &ProjectionConfig) -> Result<Vector, GeometryError> {
        match self {
            SetRef::Shifted { base, shift } => project_shifted(base, shift, x, cfg),
            SetRef::Whole(set) => project_point(set, x, cfg),
        }
    }
}

/// Projection onto `shift - base`, identical in arithmetic to projecting
/// onto the materialized translate set.
pub(crate) fn project_shifted(
    base: &ConvexSet,
    shift: &Vector,
    x: &Vector,
    cfg: &ProjectionConfig,
) -> Result<Vector, GeometryError> {
    let pulled = shift - x;
    let q = project_point(base, &pulled, cfg)?;
    if q == pulled {
        Ok(x.clone())
    } else {
        Ok(shift - &q)
    }
}

fn set_ref<'a>(ms: &'a MovingSet, t: f64, side: Side) -> Result<SetRef<'a>, SolverError> {
    match ms {
        MovingSet::Translate { base, path } => Ok(SetRef::Shifted {
            base,
            shift: path.eval(t, side)?,
        }),
        MovingSet::Family { .. } => Ok(SetRef::Whole(ms.set_at(t, side)?)),
    }
}

/// Run one sweep. `general` switches the running value to the
/// right-continuous regularization (the point carried forward lives in
/// `C(t+)`) and enables right maps. `y_start` must already satisfy the
/// node-0 convention of the caller: feasible in `C(a)` for right-continuous
/// solves; arbitrary for general solves, whose node 0 carries an action.
pub(crate) fn sweep(
    ms: &MovingSet,
    times: &[f64],
    actions: &BTreeMap<usize, NodeAction>,
    y_start: &Vector,
    cfg: &ProjectionConfig,
    general: bool,
) -> Result<SweepOutput, SolverError> {
    let mut values: Vec<Vector> = Vec::with_capacity(times.len());
    let mut lefts = BTreeMap::new();
    let mut rights = BTreeMap::new();

    let mut y = y_start.clone();
    // Set the running point was last projected onto.
    let mut prev_set: Option<SetRef> = None;

    for (k, &t) in times.iter().enumerate() {
        let action = actions.get(&k);
        let set_at = set_ref(ms, t, Side::Value)?;

        if k == 0 {
            match action {
                Some(act) => {
                    y = apply_map(&act.at_map, ms, t, &set_at, &y, cfg, false)?;
                    values.push(y.clone());
                    if general {
                        let set_right = set_ref(ms, t, Side::Right)?;
                        let right_map = act.right_map.as_ref().unwrap_or(&MapKind::Project);
                        let y_right = if set_right == set_at
                            && matches!(right_map, MapKind::Project)
                        {
                            y.clone()
                        } else {
                            apply_map(right_map, ms, t, &set_right, &y, cfg, true)?
                        };
                        if y_right != y {
                            rights.insert(0, y_right.clone());
                        }
                        y = y_right;
                        prev_set = Some(set_right);
                    } else {
                        prev_set = Some(set_at);
                    }
                }
                None => {
                    values.push(y.clone());
                    prev_set = Some(set_at);
                }
            }
            continue;
        }

        let set_left = set_ref(ms, t, Side::Left)?;
        let set_right = if general {
            Some(set_ref(ms, t, Side::Right)?)
        } else {
            None
        };
        let is_jump = action.is_some()
            || set_left != set_at
            || set_right.as_ref().is_some_and(|sr| *sr != set_at);

        if is_jump {
            // Continuous evolution up to t-: one projection onto C(t-).
            let y_left = if prev_set.as_ref() == Some(&set_left) {
                y.clone()
            } else {
                set_left.project(&y, cfg)?
            };
            lefts.insert(k, y_left.clone());
            let at_map = action.map_or(&MapKind::Project, |a| &a.at_map);
            let need_at = !(matches!(at_map, MapKind::Project) && set_at == set_left);
            y = if need_at {
                apply_map(at_map, ms, t, &set_at, &y_left, cfg, false)?
            } else {
                y_left
            };
            values.push(y.clone());
            if general {
                let set_right = set_right.expect("general sweeps carry the right set");
                let right_map = action
                    .and_then(|a| a.right_map.as_ref())
                    .unwrap_or(&MapKind::Project);
                let y_right = if set_right == set_at && matches!(right_map, MapKind::Project) {
                    y.clone()
                } else {
                    apply_map(right_map, ms, t, &set_right, &y, cfg, true)?
                };
                if y_right != y {
                    rights.insert(k, y_right.clone());
                }
                y = y_right;
                prev_set = Some(set_right);
            } else {
                prev_set = Some(set_at);
            }
        } else {
            if prev_set.as_ref() != Some(&set_at) {
                y = set_at.project(&y, cfg)?;
            }
            values.push(y.clone());
            prev_set = Some(set_at);
        }
    }

    Ok(SweepOutput {
        values,
        lefts,
        rights,
    })
}

/// Apply a node map into `target`. `right_leg` selects the segment
/// endpoints for segment-play maps: `u(t-) -> u(t)` for the at-map,
/// `u(t) -> u(t+)` for the right map of a general jump.
fn apply_map(
    map: &MapKind,
    ms: &MovingSet,
    t: f64,
    target: &SetRef,
    y_from: &Vector,
    cfg: &ProjectionConfig,
    right_leg: bool,
) -> Result<Vector, SolverError> {
    match map {
        MapKind::Project => Ok(target.project(y_from, cfg)?),
        MapKind::Fixed(point) => Ok(point.clone()),
        MapKind::SegmentPlay { substeps } => {
            let (base, path) = match ms {
                MovingSet::Translate { base, path } => (base, path),
                MovingSet::Family { .. } => {
                    return Err(SolverError::UnsupportedPrescription {
                        t,
                        message: "segment_play requires a translate-mode moving set".into(),
                    })
                }
            };
            let (u0, u1) = if right_leg {
                (path.eval(t, Side::Value)?, path.eval(t, Side::Right)?)
            } else {
                (path.eval(t, Side::Left)?, path.eval(t, Side::Value)?)
            };
            segment_play(base, &u0, &u1, y_from, *substeps, cfg)
        }
    }
}

/// Catching-up along the straight segment from `u0` to `u1`: the driving
/// set is `u(s) - base` with `s` uniform on [0, 1] over `substeps` steps.
/// This is the jump map realizing segment traversal of a jump; it is
/// nonexpansive in `y` as a composition of projections.
pub(crate) fn segment_play(
    base: &ConvexSet,
    u0: &Vector,
    u1: &Vector,
    y: &Vector,
    substeps: usize,
    cfg: &ProjectionConfig,
) -> Result<Vector, SolverError> {
    let substeps = substeps.max(1);
    let mut y = y.clone();
    let mut prev_u: Option<Vector> = None;
    for j in 1..=substeps {
        let w = j as f64 / substeps as f64;
        let u = u0.lerp(u1, w);
        if prev_u.as_ref() == Some(&u) {
            continue;
        }
        y = project_shifted(base, &u, &y, cfg)?;
        prev_u = Some(u);
    }
    Ok(y)
}
