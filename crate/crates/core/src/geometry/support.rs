use super::set::Halfspace;
use super::vector::solve_dense;
use super::{ConvexSet, GeometryError, Vector};

/// Relative tolerance for the dual feasibility checks in the polytope
/// support computation.
const DUAL_TOL: f64 = 1e-9;

/// Support function `sup { <dir, z> : z in set }`.
///
/// Exact for balls and boxes; half-spaces and H-polytopes go through the
/// dual program `min { <b, lambda> : A^T lambda = dir, lambda >= 0 }`,
/// enumerating basic solutions. Returns `Unbounded` when the supremum is
/// infinite (the dual is infeasible).
pub fn support(set: &ConvexSet, dir: &Vector) -> Result<f64, GeometryError> {
    if dir.norm_sq() == 0.0 {
        return Err(GeometryError::invalid("dir", "must be nonzero"));
    }
    support_inner(set, dir)
}

fn support_inner(set: &ConvexSet, dir: &Vector) -> Result<f64, GeometryError> {
    match set {
        ConvexSet::Ball { center, radius } => Ok(dir.dot(center) + radius * dir.norm()),
        ConvexSet::Box { lo, hi } => Ok(dir
            .as_slice()
            .iter()
            .zip(lo.as_slice().iter().zip(hi.as_slice()))
            .map(|(&d, (&l, &h))| (d * l).max(d * h))
            .sum()),
        ConvexSet::Halfspace { normal, offset } => {
            let lambda = dir.dot(normal);
            let residual = dir - &normal.scale(lambda);
            if lambda >= 0.0 && residual.norm() <= DUAL_TOL * dir.norm() {
                Ok(lambda * offset)
            } else {
                Err(GeometryError::Unbounded)
            }
        }
        ConvexSet::Hpolytope { halfspaces } => support_polytope(halfspaces, dir),
        ConvexSet::Translate { base, shift } => {
            // sup over shift - base = <dir, shift> + sup_{z in base} <-dir, z>.
            Ok(dir.dot(shift) + support_inner(base, &-dir)?)
        }
    }
}

/// Dual basic-solution enumeration. Any finite supremum is attained with a
/// dual multiplier supported on at most `d` linearly independent normals;
/// if no supported basic solution reproduces `dir`, the supremum is
/// infinite because the polytope is nonempty by construction.
fn support_polytope(halfspaces: &[Halfspace], dir: &Vector) -> Result<f64, GeometryError> {
    let d = dir.dim();
    let m = halfspaces.len();
    let scale = dir.norm();
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = Vec::with_capacity(d);
    enumerate_subsets(m, d.min(m), &mut subset, &mut |s: &[usize]| {
        if let Some(value) = dual_basic_value(halfspaces, dir, s, scale) {
            best = Some(best.map_or(value, |b: f64| b.min(value)));
        }
    });
    best.ok_or(GeometryError::Unbounded)
}

/// Solve `sum_{i in s} lambda_i a_i = dir` by normal equations, check
/// `lambda >= 0` and residual feasibility, return the dual objective.
fn dual_basic_value(
    halfspaces: &[Halfspace],
    dir: &Vector,
    s: &[usize],
    scale: f64,
) -> Option<f64> {
    let cols: Vec<&Vector> = s.iter().map(|&i| &halfspaces[i].normal).collect();
    let gram: Vec<Vec<f64>> = cols
        .iter()
        .map(|a| cols.iter().map(|b| a.dot(b)).collect())
        .collect();
    let rhs: Vec<f64> = cols.iter().map(|a| a.dot(dir)).collect();
    let lambda = solve_dense(gram, rhs)?;
    if lambda.iter().any(|&l| l < -DUAL_TOL * scale) {
        return None;
    }
    let mut reconstructed = Vector::zeros(dir.dim());
    for (l, a) in lambda.iter().zip(&cols) {
        reconstructed = &reconstructed + &a.scale(*l);
    }
    if reconstructed.dist(dir) > DUAL_TOL * scale.max(1.0) {
        return None;
    }
    Some(
        lambda
            .iter()
            .zip(s)
            .map(|(l, &i)| l * halfspaces[i].offset)
            .sum(),
    )
}

fn enumerate_subsets(m: usize, max_k: usize, prefix: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    fn rec(
        m: usize,
        max_k: usize,
        start: usize,
        prefix: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if !prefix.is_empty() {
            f(prefix);
        }
        if prefix.len() == max_k {
            return;
        }
        for i in start..m {
            prefix.push(i);
            rec(m, max_k, i + 1, prefix, f);
            prefix.pop();
        }
    }
    rec(m, max_k, 0, prefix, f);
}

/// Violation of the normal-cone condition `-v in N_set(y)`:
/// `max(0, sup_{z in set} <-v, z - y>)`. Zero (within tolerance) exactly
/// when `-v` is an outward normal at `y`. Requires `y` in the set.
pub fn normal_cone_violation(
    set: &ConvexSet,
    y: &Vector,
    v: &Vector,
) -> Result<f64, GeometryError> {
    if v.norm_sq() == 0.0 {
        return Ok(0.0);
    }
    let neg_v = -v;
    Ok((support(set, &neg_v)? - neg_v.dot(y)).max(0.0))
}

/// `sup { |p - z| : z in set }`, the deviation radius of a bounded set seen
/// from `p`. Exact for balls (center distance plus radius), boxes (farthest
/// corner), and bounded H-polytopes (farthest vertex). `Unbounded` when the
/// supremum is infinite.
pub fn farthest_distance(set: &ConvexSet, p: &Vector) -> Result<f64, GeometryError> {
    match set {
        ConvexSet::Ball { center, radius } => Ok(p.dist(center) + radius),
        ConvexSet::Box { lo, hi } => Ok(p
            .as_slice()
            .iter()
            .zip(lo.as_slice().iter().zip(hi.as_slice()))
            .map(|(&x, (&l, &h))| {
                let e = (x - l).abs().max((x - h).abs());
                e * e
            })
            .sum::<f64>()
            .sqrt()),
        ConvexSet::Halfspace { .. } => Err(GeometryError::Unbounded),
        ConvexSet::Hpolytope { halfspaces } => {
            // Bounded iff the support is finite along all +/- axes.
            let d = set.dim();
            for i in 0..d {
                for sign in [1.0, -1.0] {
                    let mut axis = vec![0.0; d];
                    axis[i] = sign;
                    support(set, &Vector::new(axis))?;
                }
            }
            let verts = polytope_vertices(halfspaces, d);
            if verts.is_empty() {
                return Err(GeometryError::Unbounded);
            }
            Ok(verts
                .iter()
                .map(|v| p.dist(v))
                .fold(0.0f64, f64::max))
        }
        ConvexSet::Translate { base, shift } => {
            // |p - (shift - z)| = |(shift - p) - z|.
            farthest_distance(base, &(shift - p))
        }
    }
}

/// Vertices of an H-polytope by basis enumeration: each subset of `d`
/// halfspaces whose boundary hyperplanes intersect in a single feasible
/// point contributes one vertex.
pub(crate) fn polytope_vertices(halfspaces: &[Halfspace], d: usize) -> Vec<Vector> {
    let m = halfspaces.len();
    let mut verts: Vec<Vector> = Vec::new();
    let mut subset = vec![0usize; d];
    enumerate_exact_subsets(m, d, 0, &mut subset, 0, &mut |s: &[usize]| {
        let a: Vec<Vec<f64>> = s
            .iter()
            .map(|&i| halfspaces[i].normal.as_slice().to_vec())
            .collect();
        let b: Vec<f64> = s.iter().map(|&i| halfspaces[i].offset).collect();
        if let Some(x) = solve_dense(a, b) {
            let x = Vector::new(x);
            let feasible = halfspaces
                .iter()
                .map(|h| h.normal.dot(&x) - h.offset)
                .all(|g| g <= 1e-9);
            if feasible && !verts.iter().any(|v| v.dist(&x) <= 1e-9) {
                verts.push(x);
            }
        }
    });
    verts
}

fn enumerate_exact_subsets(
    m: usize,
    k: usize,
    start: usize,
    buf: &mut Vec<usize>,
    depth: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if depth == k {
        f(buf);
        return;
    }
    for i in start..m {
        buf[depth] = i;
        enumerate_exact_subsets(m, k, i + 1, buf, depth + 1, f);
    }
}
