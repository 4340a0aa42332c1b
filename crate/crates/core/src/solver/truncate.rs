//! Truncation of a prescription set: jump maps whose deviation from the
//! identity is small are replaced by the default projection, and the sum of
//! dropped deviation scores plus the Hausdorff jump sizes bounds the
//! sup-norm distance between the full and truncated solutions (the Cauchy
//! telescope of the countable-jump construction).

use crate::bvpath::Side;
use crate::geometry::{farthest_distance, hausdorff};
use crate::movingset::MovingSet;
use crate::solver::{JumpKind, JumpPrescription, SolverError};

/// Deviation score `sup_{x in C(t-)} |g_t(x) - x|` of one prescription:
/// exact for `FixedTarget` on a bounded `C(t-)`, bounded above by the
/// Hausdorff jump sizes for the projection-like kinds.
pub(crate) fn deviation_score(
    p: &JumpPrescription,
    ms: &MovingSet,
) -> Result<f64, SolverError> {
    let left = ms.set_at(p.t, Side::Left)?;
    let at = ms.set_at(p.t, Side::Value)?;
    match &p.kind {
        JumpKind::FixedTarget { point } => Ok(farthest_distance(&left, point)?),
        JumpKind::Project | JumpKind::SegmentPlay { .. } => {
            Ok(hausdorff(&left, &at)?.value)
        }
        JumpKind::DoubleProject => {
            let right = ms.set_at(p.t, Side::Right)?;
            Ok(hausdorff(&left, &at)?.value + hausdorff(&at, &right)?.value)
        }
    }
}

/// Drop prescriptions whose deviation score falls below `eps` (they revert
/// to the default projection) and return the kept list together with a
/// sup-norm error bound on the solution: the sum over dropped prescriptions
/// of `score + d_H(C(t-), C(t))`.
pub fn truncate_jump_set(
    prescriptions: &[JumpPrescription],
    ms: &MovingSet,
    eps: f64,
) -> Result<(Vec<JumpPrescription>, f64), SolverError> {
    if eps < 0.0 {
        return Err(SolverError::InvalidConfig(
            "truncation eps must be >= 0".into(),
        ));
    }
    let mut kept = Vec::with_capacity(prescriptions.len());
    let mut bound = 0.0f64;
    for p in prescriptions {
        let score = deviation_score(p, ms)?;
        if score < eps {
            let left = ms.set_at(p.t, Side::Left)?;
            let at = ms.set_at(p.t, Side::Value)?;
            bound += score + hausdorff(&left, &at)?.value;
        } else {
            kept.push(p.clone());
        }
    }
    Ok((kept, bound))
}
