use super::set::Halfspace;
use super::{ConvexSet, GeometryError, ProjectionConfig, ProjectionReport, Vector};

/// Projection onto a closed convex set.
///
/// Closed-form branches (ball, box, halfspace, translates of these) are
/// exact; H-polytopes use Dykstra's alternating projections over the
/// halfspace list, stopping when successive sweeps move the iterate less
/// than `cfg.tol_proj` or failing with `IterationLimit` after
/// `cfg.max_iter` sweeps.
///
/// The returned point always satisfies the exact membership predicate of
/// the closed-form variants, and membership within `cfg.tol_feas` for
/// polytopes; a point already satisfying the predicate is returned
/// unchanged, bit for bit.
pub fn project(
    set: &ConvexSet,
    x: &Vector,
    cfg: &ProjectionConfig,
) -> Result<ProjectionReport, GeometryError> {
    let mut iterations = 0usize;
    let mut residual = 0.0f64;
    let point = project_inner(set, x, cfg, &mut iterations, &mut residual)?;
    Ok(ProjectionReport {
        point,
        iterations,
        residual,
    })
}

/// `project` without the report wrapper, for solver inner loops.
pub fn project_point(
    set: &ConvexSet,
    x: &Vector,
    cfg: &ProjectionConfig,
) -> Result<Vector, GeometryError> {
    let mut iterations = 0usize;
    let mut residual = 0.0f64;
    project_inner(set, x, cfg, &mut iterations, &mut residual)
}

/// Euclidean distance from `x` to the set, computed via `project`.
pub fn distance(
    set: &ConvexSet,
    x: &Vector,
    cfg: &ProjectionConfig,
) -> Result<f64, GeometryError> {
    Ok(project_point(set, x, cfg)?.dist(x))
}

/// Membership within tolerance `tol`, computed via `project`.
pub fn contains(
    set: &ConvexSet,
    x: &Vector,
    tol: f64,
    cfg: &ProjectionConfig,
) -> Result<bool, GeometryError> {
    Ok(distance(set, x, cfg)? <= tol)
}

fn project_inner(
    set: &ConvexSet,
    x: &Vector,
    cfg: &ProjectionConfig,
    iterations: &mut usize,
    residual: &mut f64,
) -> Result<Vector, GeometryError> {
    match set {
        ConvexSet::Ball { center, radius } => Ok(project_ball(center, *radius, x)),
        ConvexSet::Box { lo, hi } => Ok(project_box(lo, hi, x)),
        ConvexSet::Halfspace { normal, offset } => Ok(project_halfspace(normal, *offset, x)),
        ConvexSet::Hpolytope { halfspaces } => {
            project_polytope(halfspaces, x, cfg, iterations, residual)
        }
        ConvexSet::Translate { base, shift } => {
            // shift - base: x in it iff shift - x in base.
            let pulled = shift - x;
            let q = project_inner(base, &pulled, cfg, iterations, residual)?;
            if q == pulled {
                Ok(x.clone())
            } else {
                Ok(shift - &q)
            }
        }
    }
}

fn project_ball(center: &Vector, radius: f64, x: &Vector) -> Vector {
    let diff = x - center;
    let n_sq = diff.norm_sq();
    if n_sq <= radius * radius {
        return x.clone();
    }
    let mut scale = radius / n_sq.sqrt();
    // The scaled point must satisfy the membership predicate exactly, so
    // that re-projection is the identity; shrink by one ulp-scale factor
    // until rounding lands inside.
    loop {
        let y = center + &diff.scale(scale);
        if (&y - center).norm_sq() <= radius * radius {
            return y;
        }
        scale *= 1.0 - 2.0 * f64::EPSILON;
    }
}

fn project_box(lo: &Vector, hi: &Vector, x: &Vector) -> Vector {
    let clamped: Vec<f64> = x
        .as_slice()
        .iter()
        .zip(lo.as_slice().iter().zip(hi.as_slice()))
        .map(|(&v, (&l, &h))| v.max(l).min(h))
        .collect();
    let clamped = Vector::new(clamped);
    if clamped == *x {
        x.clone()
    } else {
        clamped
    }
}

fn project_halfspace(normal: &Vector, offset: f64, x: &Vector) -> Vector {
    if normal.dot(x) <= offset {
        return x.clone();
    }
    let mut y = x - &normal.scale(normal.dot(x) - offset);
    // Same exact-membership postcondition as the ball branch.
    let mut boost = 1.0;
    while normal.dot(&y) > offset {
        let g = normal.dot(&y) - offset;
        y = &y - &normal.scale(g * boost);
        boost *= 2.0;
    }
    y
}

/// Dykstra's algorithm for the intersection of halfspaces. Each sweep
/// applies the exact halfspace projection with the usual correction
/// vectors; plain cyclic projection would converge to a feasible point but
/// not to the projection.
fn project_polytope(
    halfspaces: &[Halfspace],
    x: &Vector,
    cfg: &ProjectionConfig,
    iterations: &mut usize,
    residual: &mut f64,
) -> Result<Vector, GeometryError> {
    if halfspaces.iter().all(|h| h.satisfies(x)) {
        return Ok(x.clone());
    }
    if halfspaces.len() == 1 {
        let h = &halfspaces[0];
        return Ok(project_halfspace(&h.normal, h.offset, x));
    }
    let mut y = x.clone();
    let mut corrections = vec![Vector::zeros(x.dim()); halfspaces.len()];
    let mut moved = f64::INFINITY;
    for sweep in 0..cfg.max_iter {
        let start = y.clone();
        for (h, p) in halfspaces.iter().zip(corrections.iter_mut()) {
            let z = &y + p;
            let projected = project_halfspace(&h.normal, h.offset, &z);
            *p = &z - &projected;
            y = projected;
        }
        moved = y.dist(&start);
        *iterations = sweep + 1;
        if moved < cfg.tol_proj {
            *residual = moved;
            return Ok(settle_in_polytope(halfspaces, y));
        }
    }
    Err(GeometryError::IterationLimit {
        iterations: cfg.max_iter,
        residual: moved,
    })
}

/// Final cyclic passes of pure halfspace projections so the returned point
/// satisfies every halfspace predicate exactly, making re-projection the
/// identity. Moves the point by at most the residual infeasibility of the
/// Dykstra iterate.
fn settle_in_polytope(halfspaces: &[Halfspace], mut y: Vector) -> Vector {
    for _ in 0..64 {
        let mut all_ok = true;
        for h in halfspaces {
            if !h.satisfies(&y) {
                y = project_halfspace(&h.normal, h.offset, &y);
                all_ok = false;
            }
        }
        if all_ok {
            break;
        }
    }
    y
}

/// Search for a feasible point of a halfspace intersection by running
/// Dykstra from the origin; returns the point found and its worst
/// constraint violation. Used to reject empty polytopes at construction.
pub(crate) fn feasible_point(halfspaces: &[Halfspace], cfg: &ProjectionConfig) -> (Vector, f64) {
    let dim = halfspaces[0].normal.dim();
    let origin = Vector::zeros(dim);
    let mut y = origin.clone();
    let mut corrections = vec![Vector::zeros(dim); halfspaces.len()];
    for _ in 0..cfg.max_iter.min(2_000) {
        let start = y.clone();
        for (h, p) in halfspaces.iter().zip(corrections.iter_mut()) {
            let z = &y + p;
            let projected = project_halfspace(&h.normal, h.offset, &z);
            *p = &z - &projected;
            y = projected;
        }
        if y.dist(&start) < cfg.tol_proj {
            break;
        }
    }
    let y = settle_in_polytope(halfspaces, y);
    let violation = halfspaces
        .iter()
        .map(|h| (h.normal.dot(&y) - h.offset).max(0.0))
        .fold(0.0f64, f64::max);
    (y, violation)
}
