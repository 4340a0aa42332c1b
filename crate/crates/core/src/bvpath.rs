//! Bounded-variation curves in `R^d`: breakpoints carrying one-sided
//! values, affine interpolation between them, pointwise variation, and the
//! normalized arc-length reparametrization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vector;

#[derive(Debug, Error)]
pub enum PathError {
    #[error("time {t} outside the domain [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },
    #[error("invalid path: {0}")]
    InvalidSpec(String),
}

/// Evaluation side for one-sided limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Value,
    Right,
}

/// One breakpoint of a [`BVPath`]: the left and right limits at time `t`.
/// The path value at `t` is `right` on right-continuous paths and `left`
/// otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub t: f64,
    pub left: Vector,
    pub right: Vector,
}

/// A curve of bounded variation on `[a, b]` with finitely many breakpoints
/// and affine interpolation between `right(t_i)` and `left(t_{i+1})`.
///
/// Endpoint conventions follow one-sided limits of BV functions:
/// `f(a-) := f(a)` and `f(b+) := f(b)`; consequently `left` at the first
/// breakpoint (respectively `right` at the last, for non-right-continuous
/// paths) must agree with the stored value there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BVPath {
    pub domain: [f64; 2],
    pub breakpoints: Vec<Breakpoint>,
    pub right_continuous: bool,
}

impl BVPath {
    pub fn new(
        domain: [f64; 2],
        breakpoints: Vec<Breakpoint>,
        right_continuous: bool,
    ) -> Result<Self, PathError> {
        let path = Self {
            domain,
            breakpoints,
            right_continuous,
        };
        path.validate()?;
        Ok(path)
    }

    /// Continuous piecewise-linear path through `(t_i, v_i)` samples.
    pub fn polyline(samples: Vec<(f64, Vector)>) -> Result<Self, PathError> {
        if samples.len() < 2 {
            return Err(PathError::InvalidSpec(
                "polyline needs at least two samples".into(),
            ));
        }
        let domain = [samples[0].0, samples[samples.len() - 1].0];
        let breakpoints = samples
            .into_iter()
            .map(|(t, v)| Breakpoint {
                t,
                left: v.clone(),
                right: v,
            })
            .collect();
        Self::new(domain, breakpoints, true)
    }

    /// Scalar ramp `t -> t` on `[a, b]`.
    pub fn ramp(a: f64, b: f64) -> Self {
        Self::polyline(vec![(a, Vector::new(vec![a])), (b, Vector::new(vec![b]))])
            .expect("ramp is valid")
    }

    pub fn constant(domain: [f64; 2], value: Vector) -> Self {
        Self::polyline(vec![(domain[0], value.clone()), (domain[1], value)])
            .expect("constant path is valid")
    }

    pub fn validate(&self) -> Result<(), PathError> {
        let [a, b] = self.domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(PathError::InvalidSpec("domain must satisfy a < b".into()));
        }
        if self.breakpoints.len() < 2 {
            return Err(PathError::InvalidSpec(
                "need breakpoints at both domain endpoints".into(),
            ));
        }
        let last = self.breakpoints.len() - 1;
        if self.breakpoints[0].t != a || self.breakpoints[last].t != b {
            return Err(PathError::InvalidSpec(
                "first/last breakpoints must sit at the domain endpoints".into(),
            ));
        }
        let dim = self.breakpoints[0].left.dim();
        let mut prev = f64::NEG_INFINITY;
        for bp in &self.breakpoints {
            if bp.t <= prev {
                return Err(PathError::InvalidSpec(
                    "breakpoint times must be strictly increasing".into(),
                ));
            }
            prev = bp.t;
            if bp.left.dim() != dim || bp.right.dim() != dim {
                return Err(PathError::InvalidSpec("inconsistent dimensions".into()));
            }
            if !bp.left.is_finite() || !bp.right.is_finite() {
                return Err(PathError::InvalidSpec("values must be finite".into()));
            }
        }
        if self.right_continuous {
            if self.breakpoints[0].left != self.breakpoints[0].right {
                return Err(PathError::InvalidSpec(
                    "right-continuous path must satisfy left(a) = value(a)".into(),
                ));
            }
        } else if self.breakpoints[last].left != self.breakpoints[last].right {
            return Err(PathError::InvalidSpec(
                "path must satisfy right(b) = value(b)".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.breakpoints[0].left.dim()
    }

    /// Equality tolerance for time comparisons on this domain.
    pub fn time_tol(&self) -> f64 {
        1e-12 * (self.domain[1] - self.domain[0])
    }

    pub fn breakpoint_times(&self) -> Vec<f64> {
        self.breakpoints.iter().map(|bp| bp.t).collect()
    }

    /// Stored value at a breakpoint according to the continuity convention.
    pub fn at_value<'a>(&'a self, bp: &'a Breakpoint) -> &'a Vector {
        if self.right_continuous {
            &bp.right
        } else {
            &bp.left
        }
    }

    fn locate(&self, t: f64) -> Result<Location, PathError> {
        let [a, b] = self.domain;
        let tol = self.time_tol();
        if t < a - tol || t > b + tol {
            return Err(PathError::OutOfDomain { t, a, b });
        }
        let t = t.clamp(a, b);
        match self
            .breakpoints
            .binary_search_by(|bp| bp.t.partial_cmp(&t).unwrap())
        {
            Ok(i) => Ok(Location::Breakpoint(i)),
            Err(ins) => {
                if (t - self.breakpoints[ins - 1].t).abs() <= tol {
                    Ok(Location::Breakpoint(ins - 1))
                } else if ins < self.breakpoints.len()
                    && (self.breakpoints[ins].t - t).abs() <= tol
                {
                    Ok(Location::Breakpoint(ins))
                } else {
                    Ok(Location::Interior { after: ins - 1, t })
                }
            }
        }
    }

    /// One-sided limit or stored value at `t`.
    pub fn eval(&self, t: f64, side: Side) -> Result<Vector, PathError> {
        match self.locate(t)? {
            Location::Interior { after, t } => {
                let lo = &self.breakpoints[after];
                let hi = &self.breakpoints[after + 1];
                let w = (t - lo.t) / (hi.t - lo.t);
                Ok(lo.right.lerp(&hi.left, w))
            }
            Location::Breakpoint(i) => {
                let bp = &self.breakpoints[i];
                let value = match side {
                    Side::Left if i > 0 => &bp.left,
                    Side::Right if i + 1 < self.breakpoints.len() => &bp.right,
                    _ => self.at_value(bp),
                };
                Ok(value.clone())
            }
        }
    }

    /// Pointwise variation over `[s, t]`: the sum of interpolation segment
    /// lengths plus the jumps `|f(r) - f(r-)|` for `r` in `(s, t]` and
    /// `|f(r+) - f(r)|` for `r` in `[s, t)`. Exact (the supremum over
    /// partitions is attained on the breakpoint structure).
    pub fn variation(&self, s: f64, t: f64) -> Result<f64, PathError> {
        let tol = self.time_tol();
        if t < s - tol {
            return Err(PathError::InvalidSpec(format!(
                "variation requires s <= t, got [{s}, {t}]"
            )));
        }
        let loc_s = self.locate(s)?;
        let loc_t = self.locate(t)?;
        if t - s <= tol {
            return Ok(0.0);
        }
        let mut total = 0.0f64;
        let mut cursor = match loc_s {
            Location::Breakpoint(i) => {
                let bp = &self.breakpoints[i];
                // The right jump at s belongs to [s, t).
                total += self.at_value(bp).dist(&bp.right);
                bp.right.clone()
            }
            Location::Interior { .. } => self.eval(s, Side::Value)?,
        };
        for (i, bp) in self.breakpoints.iter().enumerate() {
            if bp.t <= s + tol || bp.t >= t - tol {
                continue;
            }
            total += cursor.dist(&bp.left);
            let at = self.at_value(bp);
            total += bp.left.dist(at);
            if i + 1 < self.breakpoints.len() {
                total += at.dist(&bp.right);
            }
            cursor = bp.right.clone();
        }
        let t_left = self.eval(t, Side::Left)?;
        total += cursor.dist(&t_left);
        if let Location::Breakpoint(i) = loc_t {
            if i > 0 {
                total += t_left.dist(self.at_value(&self.breakpoints[i]));
            }
        }
        Ok(total)
    }

    /// Breakpoints where the left limit, stored value, and right limit are
    /// not all equal.
    pub fn jump_times(&self) -> Vec<f64> {
        let last = self.breakpoints.len() - 1;
        self.breakpoints
            .iter()
            .enumerate()
            .filter(|(i, bp)| {
                let at = self.at_value(bp);
                (*i > 0 && bp.left != *at) || (*i < last && *at != bp.right)
            })
            .map(|(_, bp)| bp.t)
            .collect()
    }
}

enum Location {
    Breakpoint(usize),
    Interior { after: usize, t: f64 },
}

/// The normalized arc-length parametrization of a path `f`: a nondecreasing
/// scalar `ell` on `[a, b]` with `ell(a) = a`, jumping exactly where `f`
/// jumps, and a Lipschitz jump-free `filled` with `f = filled o ell` and
/// `Lip(filled) <= pV(f, [a, b]) / (b - a)`.
#[derive(Clone, Debug)]
pub struct ArcLengthParam {
    pub ell: BVPath,
    pub filled: BVPath,
    pub lip_bound: f64,
}

/// Compute the arc-length pair: `ell(t) = a + (b-a) pV(f,[a,t]) / pV(f,[a,b])`,
/// with jumps of `f` filled by affine segments over the gaps of `ell`.
/// Zero-variation paths take the degenerate branch `ell == a`.
pub fn arc_length(path: &BVPath) -> Result<ArcLengthParam, PathError> {
    let [a, b] = path.domain;
    let total = path.variation(a, b)?;
    if total == 0.0 {
        let value = path.eval(a, Side::Value)?;
        return Ok(ArcLengthParam {
            ell: BVPath::constant([a, b], Vector::new(vec![a])),
            filled: BVPath::constant([a, b], value),
            lip_bound: 0.0,
        });
    }
    let scale = (b - a) / total;
    let sig_tol = 1e-12 * (b - a);
    let last = path.breakpoints.len() - 1;

    let mut ell_breaks: Vec<Breakpoint> = Vec::with_capacity(path.breakpoints.len());
    let mut samples: Vec<(f64, Vector)> = Vec::new();
    let push_sample = |samples: &mut Vec<(f64, Vector)>, sigma: f64, v: &Vector| {
        match samples.last() {
            Some((s, _)) if sigma - *s <= sig_tol => {}
            _ => samples.push((sigma, v.clone())),
        }
    };

    // Accumulates variation in the same term order as `variation(a, b)`, so
    // sigma hits b exactly at the end after the final snap.
    let mut acc = 0.0f64;
    let mut cursor: Option<Vector> = None;
    for (i, bp) in path.breakpoints.iter().enumerate() {
        if let Some(prev) = &cursor {
            acc += prev.dist(&bp.left);
        }
        let mut sigma_left = (a + scale * acc).min(b);
        let at = path.at_value(bp);
        if i > 0 {
            acc += bp.left.dist(at);
        }
        let mut sigma_at = (a + scale * acc).min(b);
        if i < last {
            acc += at.dist(&bp.right);
        }
        let mut sigma_right = (a + scale * acc).min(b);
        if i == last {
            // ell(b) = b exactly; a jump at b keeps its left limit below b.
            sigma_at = b;
            sigma_right = b;
            if path.at_value(bp) == &bp.left {
                sigma_left = b;
            }
        }
        // ell's stored value must be sigma_at under the continuity flag.
        let pair = if path.right_continuous {
            debug_assert!(sigma_at <= sigma_right + sig_tol);
            Breakpoint {
                t: bp.t,
                left: Vector::new(vec![sigma_left]),
                right: Vector::new(vec![sigma_right.max(sigma_at)]),
            }
        } else {
            debug_assert!((sigma_at - sigma_left).abs() <= sig_tol);
            Breakpoint {
                t: bp.t,
                left: Vector::new(vec![sigma_at]),
                right: Vector::new(vec![sigma_right]),
            }
        };
        ell_breaks.push(pair);
        push_sample(&mut samples, sigma_left, &bp.left);
        push_sample(&mut samples, sigma_at, at);
        push_sample(&mut samples, sigma_right, &bp.right);
        cursor = Some(bp.right.clone());
    }
    // Anchor the filled path on the whole of [a, b].
    if samples[0].0 > a {
        let v = samples[0].1.clone();
        samples.insert(0, (a, v));
    }
    let tail = samples.last().unwrap().clone();
    if tail.0 >= b - sig_tol {
        samples.last_mut().unwrap().0 = b;
    } else {
        samples.push((b, tail.1));
    }

    let ell = BVPath::new([a, b], ell_breaks, path.right_continuous)?;
    let filled = BVPath::polyline(samples)?;
    Ok(ArcLengthParam {
        ell,
        filled,
        lip_bound: total / (b - a),
    })
}

/// Composition `t -> outer(ell(t))` for a nondecreasing scalar `ell` whose
/// range lies in the domain of `outer`. Breakpoints are placed at the
/// breakpoints of `ell` plus preimages of `outer`'s breakpoints inside
/// strictly increasing pieces, so the result is exact for piecewise-affine
/// inputs. One-sided limits follow the monotone substitution rule: an
/// increasing approach reads the matching one-sided limit of `outer`, a
/// flat approach reads the value.
pub fn compose(outer: &BVPath, ell: &BVPath) -> Result<BVPath, PathError> {
    if ell.dim() != 1 {
        return Err(PathError::InvalidSpec("ell must be scalar".into()));
    }
    let [a, b] = ell.domain;
    let [oa, ob] = outer.domain;
    let otol = outer.time_tol();
    let tol = ell.time_tol();

    struct Node {
        t: f64,
        sigma_left: f64,
        sigma_at: f64,
        sigma_right: f64,
        incr_left: bool,
        incr_right: bool,
    }

    let mut nodes: Vec<Node> = Vec::new();
    let n = ell.breakpoints.len();
    for (i, bp) in ell.breakpoints.iter().enumerate() {
        let at = ell.at_value(bp)[0];
        nodes.push(Node {
            t: bp.t,
            sigma_left: if i > 0 { bp.left[0] } else { at },
            sigma_at: at,
            sigma_right: if i + 1 < n { bp.right[0] } else { at },
            incr_left: i > 0 && bp.left[0] > ell.breakpoints[i - 1].right[0] + otol,
            incr_right: i + 1 < n && ell.breakpoints[i + 1].left[0] > bp.right[0] + otol,
        });
        // Preimages of outer breakpoints strictly inside the next piece.
        if i + 1 < n {
            let (t0, s0) = (bp.t, bp.right[0]);
            let (t1, s1) = (ell.breakpoints[i + 1].t, ell.breakpoints[i + 1].left[0]);
            if s1 > s0 + otol {
                for obp in &outer.breakpoints {
                    let sigma = obp.t;
                    if sigma > s0 + otol && sigma < s1 - otol {
                        let t = t0 + (t1 - t0) * (sigma - s0) / (s1 - s0);
                        if t > t0 + tol && t < t1 - tol {
                            nodes.push(Node {
                                t,
                                sigma_left: sigma,
                                sigma_at: sigma,
                                sigma_right: sigma,
                                incr_left: true,
                                incr_right: true,
                            });
                        }
                    }
                }
            }
        }
    }
    nodes.sort_by(|x, y| x.t.partial_cmp(&y.t).unwrap());
    nodes.dedup_by(|x, y| (x.t - y.t).abs() <= tol);

    let clamp_sigma = |sigma: f64| -> Result<f64, PathError> {
        if sigma < oa - otol || sigma > ob + otol {
            return Err(PathError::OutOfDomain {
                t: sigma,
                a: oa,
                b: ob,
            });
        }
        Ok(sigma.clamp(oa, ob))
    };

    let last = nodes.len() - 1;
    let mut breakpoints = Vec::with_capacity(nodes.len());
    for (k, node) in nodes.iter().enumerate() {
        let at = outer.eval(clamp_sigma(node.sigma_at)?, Side::Value)?;
        let left = if k == 0 {
            at.clone()
        } else {
            let side = if node.incr_left || node.sigma_left < node.sigma_at - otol {
                Side::Left
            } else {
                Side::Value
            };
            outer.eval(clamp_sigma(node.sigma_left)?, side)?
        };
        let right = if k == last {
            at.clone()
        } else {
            let side = if node.incr_right || node.sigma_right > node.sigma_at + otol {
                Side::Right
            } else {
                Side::Value
            };
            outer.eval(clamp_sigma(node.sigma_right)?, side)?
        };
        // The pair representation stores the value on the side given by the
        // continuity flag; it must coincide with outer(ell(t)).
        let (left, right) = if ell.right_continuous {
            if k < last && right != at {
                return Err(PathError::InvalidSpec(
                    "composition is not right continuous: outer jumps at the landing point"
                        .into(),
                ));
            }
            (left, at)
        } else {
            if k > 0 && left != at {
                return Err(PathError::InvalidSpec(
                    "composition value conflicts with its left limit".into(),
                ));
            }
            (at, right)
        };
        breakpoints.push(Breakpoint {
            t: node.t,
            left,
            right,
        });
    }
    BVPath::new([a, b], breakpoints, ell.right_continuous)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec())
    }

    /// Right-continuous unit step at 0.5 on [0, 1]: 0 before, 1 from 0.5 on.
    fn step_path() -> BVPath {
        BVPath::new(
            [0.0, 1.0],
            vec![
                Breakpoint {
                    t: 0.0,
                    left: v(&[0.0]),
                    right: v(&[0.0]),
                },
                Breakpoint {
                    t: 0.5,
                    left: v(&[0.0]),
                    right: v(&[1.0]),
                },
                Breakpoint {
                    t: 1.0,
                    left: v(&[1.0]),
                    right: v(&[1.0]),
                },
            ],
            true,
        )
        .unwrap()
    }

    #[test]
    fn eval_sides_on_ramp_and_step() {
        let ramp = BVPath::ramp(0.0, 1.0);
        assert_eq!(ramp.eval(0.5, Side::Left).unwrap(), v(&[0.5]));

        let step = step_path();
        assert_eq!(step.eval(0.5, Side::Left).unwrap(), v(&[0.0]));
        assert_eq!(step.eval(0.5, Side::Value).unwrap(), v(&[1.0]));
        assert_eq!(step.eval(0.5, Side::Right).unwrap(), v(&[1.0]));

        // f(a-) := f(a).
        assert_eq!(
            step.eval(0.0, Side::Left).unwrap(),
            step.eval(0.0, Side::Value).unwrap()
        );
        assert!(step.eval(1.5, Side::Value).is_err());
    }

    #[test]
    fn variation_ramp_step_zigzag() {
        let ramp = BVPath::ramp(0.0, 1.0);
        assert_eq!(ramp.variation(0.0, 1.0).unwrap(), 1.0);

        // Pure jump of size 2 at t = 0.5.
        let jump = BVPath::new(
            [0.0, 1.0],
            vec![
                Breakpoint {
                    t: 0.0,
                    left: v(&[0.0]),
                    right: v(&[0.0]),
                },
                Breakpoint {
                    t: 0.5,
                    left: v(&[0.0]),
                    right: v(&[2.0]),
                },
                Breakpoint {
                    t: 1.0,
                    left: v(&[2.0]),
                    right: v(&[2.0]),
                },
            ],
            true,
        )
        .unwrap();
        assert_eq!(jump.variation(0.0, 1.0).unwrap(), 2.0);

        let zigzag = BVPath::polyline(vec![
            (0.0, v(&[0.0])),
            (0.5, v(&[1.0])),
            (1.0, v(&[0.0])),
        ])
        .unwrap();
        assert_eq!(zigzag.variation(0.0, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn variation_additive_and_jump_window_rules() {
        let step = step_path();
        // The jump counts on (s, t]: a window ending at 0.5 picks it up, a
        // window starting there only sees the flat tail.
        assert_eq!(step.variation(0.0, 0.5).unwrap(), 1.0);
        assert_eq!(step.variation(0.5, 1.0).unwrap(), 0.0);
        assert_eq!(step.variation(0.0, 0.4).unwrap(), 0.0);
        let whole = step.variation(0.0, 1.0).unwrap();
        let split = step.variation(0.0, 0.7).unwrap() + step.variation(0.7, 1.0).unwrap();
        assert!((whole - split).abs() <= 1e-12);
    }

    #[test]
    fn arc_length_constant_ramp_step() {
        let constant = BVPath::constant([0.0, 1.0], v(&[3.0, 4.0]));
        let arc = arc_length(&constant).unwrap();
        assert_eq!(arc.ell.eval(0.7, Side::Value).unwrap(), v(&[0.0]));
        assert_eq!(arc.filled.eval(0.9, Side::Value).unwrap(), v(&[3.0, 4.0]));

        let ramp = BVPath::ramp(0.0, 1.0);
        let arc = arc_length(&ramp).unwrap();
        for t in [0.0, 0.25, 0.6, 1.0] {
            assert!((arc.ell.eval(t, Side::Value).unwrap()[0] - t).abs() < 1e-12);
            assert!((arc.filled.eval(t, Side::Value).unwrap()[0] - t).abs() < 1e-12);
        }

        // Step: ell = 0 on [0, 0.5), 1 on [0.5, 1]; filled(s) = s.
        let arc = arc_length(&step_path()).unwrap();
        assert_eq!(arc.ell.eval(0.25, Side::Value).unwrap()[0], 0.0);
        assert_eq!(arc.ell.eval(0.5, Side::Left).unwrap()[0], 0.0);
        assert_eq!(arc.ell.eval(0.5, Side::Value).unwrap()[0], 1.0);
        assert_eq!(arc.ell.eval(0.75, Side::Value).unwrap()[0], 1.0);
        for s in [0.0, 0.3, 0.8, 1.0] {
            assert!((arc.filled.eval(s, Side::Value).unwrap()[0] - s).abs() < 1e-12);
        }
        assert!(arc.filled.jump_times().is_empty());
    }

    #[test]
    fn compose_round_trips_the_step() {
        let step = step_path();
        let arc = arc_length(&step).unwrap();
        let back = compose(&arc.filled, &arc.ell).unwrap();
        for t in [0.0, 0.2, 0.5, 0.7, 1.0] {
            for side in [Side::Left, Side::Value, Side::Right] {
                assert_eq!(
                    back.eval(t, side).unwrap(),
                    step.eval(t, side).unwrap(),
                    "mismatch at {t} {side:?}"
                );
            }
        }
    }

    #[test]
    fn compose_with_identity_reparam() {
        let ell = BVPath::ramp(0.0, 1.0);
        let zigzag = BVPath::polyline(vec![
            (0.0, v(&[0.0])),
            (0.25, v(&[2.0])),
            (1.0, v(&[1.0])),
        ])
        .unwrap();
        let out = compose(&zigzag, &ell).unwrap();
        for t in [0.0, 0.1, 0.25, 0.5, 0.99] {
            assert!(
                out.eval(t, Side::Value)
                    .unwrap()
                    .dist(&zigzag.eval(t, Side::Value).unwrap())
                    < 1e-12
            );
        }
        // The interior kink of the outer path survives exactly.
        assert!(out
            .breakpoint_times()
            .iter()
            .any(|&t| (t - 0.25).abs() < 1e-12));
    }

    #[test]
    fn compose_range_violation_errors() {
        let outer = BVPath::ramp(0.0, 0.5);
        let ell = BVPath::ramp(0.0, 1.0);
        assert!(compose(&outer, &ell).is_err());
    }
}
