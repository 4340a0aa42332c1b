//! Sweeping-process solvers: classical catching-up over a fixed partition,
//! the prescribed-jump solver with partition refinement, truncation of
//! large jump sets with an a-priori error bound, and the general solver for
//! driving sets that are not right continuous (double-projection law).

mod engine;
mod partition;
mod truncate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvpath::{BVPath, Breakpoint, PathError, Side};
use crate::geometry::{distance, project_point, GeometryError, ProjectionConfig, Vector};
use crate::movingset::{MovingSet, MovingSetError};

pub(crate) use engine::{segment_play, MapKind, NodeAction};
use partition::Partition;
pub(crate) use truncate::deviation_score as prescription_deviation_score;
pub use truncate::truncate_jump_set;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("initial point is {distance:.3e} away from C(a), beyond tol_feas")]
    InfeasibleStart { distance: f64 },
    #[error("prescription at t = {t} is infeasible: target lies {distance:.3e} outside its set")]
    PrescriptionInfeasible { t: f64, distance: f64 },
    #[error("prescription at t = {t} unsupported: {message}")]
    UnsupportedPrescription { t: f64, message: String },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    MovingSet(#[from] MovingSetError),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Default substep count for segment-play jump maps.
pub const DEFAULT_SEGMENT_SUBSTEPS: usize = 256;

fn default_substeps() -> usize {
    DEFAULT_SEGMENT_SUBSTEPS
}

/// Behaviour prescribed at one jump time: how `y(t)` arises from `y(t-)`.
/// All kinds realize maps with Lipschitz constant at most 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpKind {
    /// `y(t) = Proj_{C(t)}(y(t-))`, the classical behaviour.
    Project,
    /// `y(t) = Proj_{C(t)}(y(t-))` then `y(t+) = Proj_{C(t+)}(y(t))`; only
    /// meaningful through [`solve_general_bv`].
    DoubleProject,
    /// Traverse the segment from `u(t-)` to `u(t)` by sub-stepped
    /// catching-up (translate-mode sets only).
    SegmentPlay {
        #[serde(default = "default_substeps")]
        substeps: usize,
    },
    /// `y(t)` is a fixed feasible point of `C(t)` (a constant map).
    FixedTarget {
        #[serde(rename = "target")]
        point: Vector,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpPrescription {
    pub t: f64,
    #[serde(flatten)]
    pub kind: JumpKind,
}

impl JumpPrescription {
    pub fn project(t: f64) -> Self {
        Self {
            t,
            kind: JumpKind::Project,
        }
    }

    pub fn fixed(t: f64, point: Vector) -> Self {
        Self {
            t,
            kind: JumpKind::FixedTarget { point },
        }
    }

    pub fn segment_play(t: f64, substeps: usize) -> Self {
        Self {
            t,
            kind: JumpKind::SegmentPlay { substeps },
        }
    }
}

/// Jump maps for the general solver: `left` sends `y(t-)` into `C(t)`,
/// `right` sends `y(t)` into `C(t+)`. `DoubleProject` is not accepted here
/// (it already denotes the composition of the two default projections).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralPrescription {
    pub t: f64,
    pub left: JumpKind,
    pub right: JumpKind,
}

impl GeneralPrescription {
    pub fn double_project(t: f64) -> Self {
        Self {
            t,
            left: JumpKind::Project,
            right: JumpKind::Project,
        }
    }
}

/// Solver tolerances and refinement budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Uniform subdivision target for the initial partition.
    pub base_steps: usize,
    /// Number of partition-doubling levels allowed.
    pub max_refine: u32,
    /// Sup-norm Cauchy threshold between successive refinement levels.
    pub tol_traj: f64,
    pub projection: ProjectionConfig,
    /// When positive, prescriptions with deviation score below this are
    /// dropped up front (see [`truncate_jump_set`]).
    pub jump_truncation_eps: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            base_steps: 64,
            max_refine: 6,
            tol_traj: 1e-6,
            projection: ProjectionConfig::default(),
            jump_truncation_eps: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.base_steps == 0 {
            return Err(SolverError::InvalidConfig("base_steps must be >= 1".into()));
        }
        if !(self.tol_traj > 0.0) {
            return Err(SolverError::InvalidConfig("tol_traj must be > 0".into()));
        }
        if self.jump_truncation_eps < 0.0 {
            return Err(SolverError::InvalidConfig(
                "jump_truncation_eps must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// How the partition refinement ended.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub levels_used: u32,
    /// Sup-norm gap between the last two refinement levels (0 when no
    /// comparison happened).
    pub final_gap: f64,
    /// False when the budget ran out before the Cauchy criterion was met.
    pub converged: bool,
    /// Gap after each doubling, for diagnostics.
    pub gaps: Vec<f64>,
}

impl RefinementReport {
    pub(crate) fn single_level() -> Self {
        Self {
            levels_used: 0,
            final_gap: 0.0,
            converged: true,
            gaps: Vec::new(),
        }
    }
}

/// Discrete solution of a sweeping process. `values[k]` is `y(t_k)`;
/// jump nodes also store the left limit, and general-BV solves store the
/// right limit where it differs.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<Vector>,
    pub left_values: BTreeMap<usize, Vector>,
    pub right_values: BTreeMap<usize, Vector>,
    /// Net per-step displacements `values[k+1] - values[k]`.
    pub displacements: Vec<Vector>,
    /// Exact pointwise variation of the induced path, including the split
    /// of jumps into left and right parts.
    pub variation_total: f64,
    pub refinement: RefinementReport,
}

impl Trajectory {
    fn from_sweep(times: Vec<f64>, out: engine::SweepOutput, refinement: RefinementReport) -> Self {
        let engine::SweepOutput {
            values,
            lefts,
            rights,
        } = out;
        let mut variation_total = 0.0f64;
        for k in 0..values.len() {
            if k > 0 {
                let prev_out = rights.get(&(k - 1)).unwrap_or(&values[k - 1]);
                let into = lefts.get(&k).unwrap_or(&values[k]);
                variation_total += prev_out.dist(into);
                if let Some(left) = lefts.get(&k) {
                    variation_total += left.dist(&values[k]);
                }
            }
            if let Some(right) = rights.get(&k) {
                variation_total += values[k].dist(right);
            }
        }
        let displacements = values
            .windows(2)
            .map(|w| &w[1] - &w[0])
            .collect();
        Self {
            times,
            values,
            left_values: lefts,
            right_values: rights,
            displacements,
            variation_total,
            refinement,
        }
    }

    pub(crate) fn assemble(
        times: Vec<f64>,
        values: Vec<Vector>,
        lefts: BTreeMap<usize, Vector>,
        rights: BTreeMap<usize, Vector>,
        refinement: RefinementReport,
    ) -> Self {
        Self::from_sweep(
            times,
            engine::SweepOutput {
                values,
                lefts,
                rights,
            },
            refinement,
        )
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, Vector::dim)
    }

    pub fn domain(&self) -> [f64; 2] {
        [self.times[0], self.times[self.times.len() - 1]]
    }

    pub fn time_tol(&self) -> f64 {
        let [a, b] = self.domain();
        1e-12 * (b - a)
    }

    /// Index of the node at time `t`, within tolerance.
    pub fn node_at(&self, t: f64) -> Option<usize> {
        let tol = self.time_tol();
        match self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap())
        {
            Ok(i) => Some(i),
            Err(ins) => {
                if ins > 0 && (t - self.times[ins - 1]).abs() <= tol {
                    Some(ins - 1)
                } else if ins < self.times.len() && (self.times[ins] - t).abs() <= tol {
                    Some(ins)
                } else {
                    None
                }
            }
        }
    }

    /// The solution as a right-continuous path (breakpoints at every node).
    /// Fails for general-BV trajectories whose stored value differs from
    /// both one-sided limits; those are not representable by (left, right)
    /// pairs.
    pub fn induced_path(&self) -> Result<BVPath, PathError> {
        if !self.right_values.is_empty() {
            return Err(PathError::InvalidSpec(
                "general-BV trajectories carry value/right triples; no pair representation"
                    .into(),
            ));
        }
        let breakpoints = self
            .times
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(k, (&t, v))| Breakpoint {
                t,
                left: self.left_values.get(&k).unwrap_or(v).clone(),
                right: v.clone(),
            })
            .collect();
        BVPath::new(self.domain(), breakpoints, true)
    }
}

/// Moreau's catching-up scheme on an explicitly given partition:
/// `y_{k+1} = Proj_{C(t_{k+1})}(y_k)`, with the left-limit projection
/// inserted at jump nodes. The partition must contain every breakpoint of
/// the moving set.
pub fn catching_up(
    ms: &MovingSet,
    y0: &Vector,
    times: &[f64],
) -> Result<Trajectory, SolverError> {
    catching_up_with(ms, y0, times, &ProjectionConfig::default())
}

pub fn catching_up_with(
    ms: &MovingSet,
    y0: &Vector,
    times: &[f64],
    cfg: &ProjectionConfig,
) -> Result<Trajectory, SolverError> {
    let tol = ms.time_tol();
    validate_partition(ms, times, tol)?;
    let y_start = snap_start(ms, y0, cfg)?;
    let out = engine::sweep(ms, times, &BTreeMap::new(), &y_start, cfg, false)?;
    Ok(Trajectory::from_sweep(
        times.to_vec(),
        out,
        RefinementReport::single_level(),
    ))
}

fn validate_partition(ms: &MovingSet, times: &[f64], tol: f64) -> Result<(), SolverError> {
    let [a, b] = ms.domain();
    if times.len() < 2 {
        return Err(SolverError::InvalidPartition(
            "need at least the two endpoints".into(),
        ));
    }
    if (times[0] - a).abs() > tol || (times[times.len() - 1] - b).abs() > tol {
        return Err(SolverError::InvalidPartition(
            "partition must span the full domain".into(),
        ));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolverError::InvalidPartition(
            "times must be strictly increasing".into(),
        ));
    }
    for anchor in ms.anchor_times() {
        if !times.iter().any(|&t| (t - anchor).abs() <= tol) {
            return Err(SolverError::InvalidPartition(format!(
                "partition misses the breakpoint at t = {anchor}"
            )));
        }
    }
    Ok(())
}

fn snap_start(
    ms: &MovingSet,
    y0: &Vector,
    cfg: &ProjectionConfig,
) -> Result<Vector, SolverError> {
    let [a, _] = ms.domain();
    if y0.dim() != ms.dim() {
        return Err(SolverError::Geometry(GeometryError::DimensionMismatch {
            expected: ms.dim(),
            actual: y0.dim(),
        }));
    }
    let set_a = ms.set_at(a, Side::Value)?;
    let d = distance(&set_a, y0, cfg)?;
    if d > cfg.tol_feas {
        return Err(SolverError::InfeasibleStart { distance: d });
    }
    Ok(project_point(&set_a, y0, cfg)?)
}

/// Solve the sweeping process with prescribed jump behaviour on a
/// right-continuous driving set. The partition splits at every prescription
/// time and breakpoint of the set; between refinement levels the interior
/// steps double until the sup-norm gap at shared nodes is below
/// `cfg.tol_traj` (non-convergence is recorded, not fatal). Jumps of the
/// set without a prescription default to `Project`.
pub fn solve_prescribed(
    ms: &MovingSet,
    prescriptions: &[JumpPrescription],
    y0: &Vector,
    cfg: &SolverConfig,
) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    ms.validate(&cfg.projection)?;
    let [a, b] = ms.domain();
    let tol = ms.time_tol();

    let kept: Vec<JumpPrescription> = if cfg.jump_truncation_eps > 0.0 {
        truncate_jump_set(prescriptions, ms, cfg.jump_truncation_eps)?.0
    } else {
        prescriptions.to_vec()
    };

    for (i, p) in kept.iter().enumerate() {
        if p.t <= a + tol || p.t > b + tol {
            return Err(SolverError::InvalidPartition(format!(
                "prescription time {} not in (a, b]",
                p.t
            )));
        }
        if kept[..i].iter().any(|q| (q.t - p.t).abs() <= tol) {
            return Err(SolverError::InvalidPartition(format!(
                "duplicate prescription at t = {}",
                p.t
            )));
        }
        validate_kind(&p.kind, ms, p.t, Side::Value, &cfg.projection)?;
        if matches!(p.kind, JumpKind::DoubleProject) {
            return Err(SolverError::UnsupportedPrescription {
                t: p.t,
                message: "double_project prescriptions go through solve_general_bv".into(),
            });
        }
    }

    let y_start = snap_start(ms, y0, &cfg.projection)?;
    let times: Vec<f64> = kept.iter().map(|p| p.t).collect();
    let partition = Partition::build([a, b], &ms.anchor_times(), &times, cfg.base_steps, tol)?;

    let build_actions = |anchor_index: &[usize]| -> BTreeMap<usize, NodeAction> {
        kept.iter()
            .enumerate()
            .map(|(idx, p)| {
                (
                    partition.prescription_node(idx, anchor_index),
                    NodeAction {
                        at_map: to_map_kind(&p.kind),
                        right_map: None,
                    },
                )
            })
            .collect()
    };

    refine(ms, &partition, build_actions, &y_start, cfg, false)
}

/// Solve with an arbitrary BV driving set, not necessarily right
/// continuous: the right-continuous regularization runs with the composite
/// maps `g_t = g_t^r o g_t^l`, and the at-`t` values `y(t) = g_t^l(y(t-))`
/// are stored alongside. Defaults are the double projections
/// `y(t) = Proj_{C(t)}(y(t-))`, `y(t+) = Proj_{C(t+)}(y(t))`, including at
/// `t = a` where `y(a) = Proj_{C(a)}(y0)` for arbitrary `y0`.
pub fn solve_general_bv(
    ms: &MovingSet,
    prescriptions: &[GeneralPrescription],
    y0: &Vector,
    cfg: &SolverConfig,
) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    ms.validate(&cfg.projection)?;
    let [a, b] = ms.domain();
    let tol = ms.time_tol();
    if y0.dim() != ms.dim() {
        return Err(SolverError::Geometry(GeometryError::DimensionMismatch {
            expected: ms.dim(),
            actual: y0.dim(),
        }));
    }

    for (i, p) in prescriptions.iter().enumerate() {
        if p.t < a - tol || p.t > b + tol {
            return Err(SolverError::InvalidPartition(format!(
                "prescription time {} not in [a, b]",
                p.t
            )));
        }
        if prescriptions[..i].iter().any(|q| (q.t - p.t).abs() <= tol) {
            return Err(SolverError::InvalidPartition(format!(
                "duplicate prescription at t = {}",
                p.t
            )));
        }
        for (kind, side) in [(&p.left, Side::Value), (&p.right, Side::Right)] {
            if matches!(kind, JumpKind::DoubleProject) {
                return Err(SolverError::UnsupportedPrescription {
                    t: p.t,
                    message: "left/right maps must be project, segment_play or fixed_target"
                        .into(),
                });
            }
            validate_kind(kind, ms, p.t, side, &cfg.projection)?;
        }
    }

    let mut times: Vec<f64> = prescriptions.iter().map(|p| p.t).collect();
    let has_a = times.iter().any(|&t| (t - a).abs() <= tol);
    if !has_a {
        times.push(a);
    }
    let partition = Partition::build([a, b], &ms.anchor_times(), &times, cfg.base_steps, tol)?;

    let build_actions = |anchor_index: &[usize]| -> BTreeMap<usize, NodeAction> {
        let mut actions: BTreeMap<usize, NodeAction> = prescriptions
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                (
                    partition.prescription_node(idx, anchor_index),
                    NodeAction {
                        at_map: to_map_kind(&p.left),
                        right_map: Some(to_map_kind(&p.right)),
                    },
                )
            })
            .collect();
        actions.entry(0).or_insert(NodeAction {
            at_map: MapKind::Project,
            right_map: Some(MapKind::Project),
        });
        actions
    };

    refine(ms, &partition, build_actions, y0, cfg, true)
}

fn validate_kind(
    kind: &JumpKind,
    ms: &MovingSet,
    t: f64,
    side: Side,
    cfg: &ProjectionConfig,
) -> Result<(), SolverError> {
    match kind {
        JumpKind::SegmentPlay { substeps } => {
            if *substeps == 0 {
                return Err(SolverError::UnsupportedPrescription {
                    t,
                    message: "segment_play substeps must be >= 1".into(),
                });
            }
            if !matches!(ms, MovingSet::Translate { .. }) {
                return Err(SolverError::UnsupportedPrescription {
                    t,
                    message: "segment_play requires a translate-mode moving set".into(),
                });
            }
        }
        JumpKind::FixedTarget { point } => {
            let set = ms.set_at(t, side)?;
            let d = distance(&set, point, cfg)?;
            if d > cfg.tol_feas {
                return Err(SolverError::PrescriptionInfeasible { t, distance: d });
            }
        }
        JumpKind::Project | JumpKind::DoubleProject => {}
    }
    Ok(())
}

fn to_map_kind(kind: &JumpKind) -> MapKind {
    match kind {
        JumpKind::Project | JumpKind::DoubleProject => MapKind::Project,
        JumpKind::SegmentPlay { substeps } => MapKind::SegmentPlay {
            substeps: *substeps,
        },
        JumpKind::FixedTarget { point } => MapKind::Fixed(point.clone()),
    }
}

fn refine(
    ms: &MovingSet,
    partition: &Partition,
    build_actions: impl Fn(&[usize]) -> BTreeMap<usize, NodeAction>,
    y_start: &Vector,
    cfg: &SolverConfig,
    general: bool,
) -> Result<Trajectory, SolverError> {
    let mut gaps: Vec<f64> = Vec::new();
    let mut prev: Option<engine::SweepOutput> = None;
    let mut level = 0u32;
    loop {
        let (times, anchor_index) = partition.nodes(level);
        let actions = build_actions(&anchor_index);
        let out = engine::sweep(ms, &times, &actions, y_start, &cfg.projection, general)?;
        if let Some(prev_out) = &prev {
            let mut gap = 0.0f64;
            for (coarse, fine) in partition.shared_node_map(level - 1) {
                gap = gap.max(prev_out.values[coarse].dist(&out.values[fine]));
                if let (Some(pl), Some(fl)) =
                    (prev_out.lefts.get(&coarse), out.lefts.get(&fine))
                {
                    gap = gap.max(pl.dist(fl));
                }
            }
            gaps.push(gap);
            if gap <= cfg.tol_traj || level == cfg.max_refine {
                let converged = gap <= cfg.tol_traj;
                let report = RefinementReport {
                    levels_used: level,
                    final_gap: gap,
                    converged,
                    gaps,
                };
                return Ok(Trajectory::from_sweep(times, out, report));
            }
        } else if cfg.max_refine == 0 {
            return Ok(Trajectory::from_sweep(
                times,
                out,
                RefinementReport::single_level(),
            ));
        }
        prev = Some(out);
        level += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvpath::Breakpoint;
    use crate::geometry::ConvexSet;
    use crate::movingset::{AtRecord, FamilySegment};

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec())
    }

    fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
        let h = (b - a) / n as f64;
        (0..=n)
            .map(|k| if k == n { b } else { a + k as f64 * h })
            .collect()
    }

    /// C(t) = [t, oo): translate of (-oo, 0] along the ramp.
    fn dragging_halfspace() -> MovingSet {
        MovingSet::Translate {
            base: ConvexSet::halfspace(vec![1.0], 0.0),
            path: BVPath::ramp(0.0, 1.0),
        }
    }

    fn interval_jump_ms() -> MovingSet {
        // C = u - [-1, 1]: [0, 1] before t = 0.5 (u = 1), [2, 3] after (u = 3).
        MovingSet::Translate {
            base: ConvexSet::interval(-1.0, 1.0),
            path: BVPath::new(
                [0.0, 1.0],
                vec![
                    Breakpoint {
                        t: 0.0,
                        left: v(&[1.0]),
                        right: v(&[1.0]),
                    },
                    Breakpoint {
                        t: 0.5,
                        left: v(&[1.0]),
                        right: v(&[3.0]),
                    },
                    Breakpoint {
                        t: 1.0,
                        left: v(&[3.0]),
                        right: v(&[3.0]),
                    },
                ],
                true,
            )
            .unwrap(),
        }
    }

    #[test]
    fn catching_up_boundary_drag() {
        // The boundary pushes the point at unit speed: y_k = t_k exactly.
        let ms = dragging_halfspace();
        let times = uniform(0.0, 1.0, 64);
        let traj = catching_up(&ms, &v(&[0.0]), &times).unwrap();
        for (t, y) in traj.times.iter().zip(&traj.values) {
            assert_eq!(y[0], *t, "drag should be exact at t = {t}");
        }
    }

    #[test]
    fn catching_up_stationary_set_keeps_point_bitwise() {
        let ms = MovingSet::Translate {
            base: ConvexSet::ball(vec![0.0, 0.0], 1.0),
            path: BVPath::constant([0.0, 1.0], v(&[0.0, 0.0])),
        };
        let y0 = v(&[0.3, 0.1]);
        let traj = catching_up(&ms, &y0, &uniform(0.0, 1.0, 32)).unwrap();
        for y in &traj.values {
            assert_eq!(*y, y0);
        }
        assert_eq!(traj.variation_total, 0.0);
    }

    #[test]
    fn catching_up_rolling_ball() {
        // Unit ball centered at (t, 0), y0 = (-1, 0) on the boundary:
        // y(t) = (t - 1, 0).
        let path = BVPath::polyline(vec![
            (0.0, v(&[0.0, 0.0])),
            (1.0, v(&[1.0, 0.0])),
        ])
        .unwrap();
        let ms = MovingSet::Translate {
            base: ConvexSet::ball(vec![0.0, 0.0], 1.0),
            path,
        };
        let traj = catching_up(&ms, &v(&[-1.0, 0.0]), &uniform(0.0, 1.0, 128)).unwrap();
        for (t, y) in traj.times.iter().zip(&traj.values) {
            assert!((y[0] - (t - 1.0)).abs() < 1e-12, "t = {t}, y = {:?}", y);
            assert!(y[1].abs() < 1e-15);
        }
    }

    #[test]
    fn catching_up_rejects_infeasible_start_and_bad_partition() {
        let ms = dragging_halfspace();
        let err = catching_up(&ms, &v(&[-1.0]), &uniform(0.0, 1.0, 8)).unwrap_err();
        assert!(matches!(err, SolverError::InfeasibleStart { .. }));

        let ms = interval_jump_ms();
        // Partition missing the breakpoint at 0.5.
        let err = catching_up(&ms, &v(&[0.5]), &[0.0, 0.4, 1.0]).unwrap_err();
        assert!(matches!(err, SolverError::InvalidPartition(_)));
    }

    #[test]
    fn prescribed_empty_equals_catching_up() {
        let ms = dragging_halfspace();
        let mut cfg = SolverConfig::default();
        cfg.max_refine = 0;
        cfg.base_steps = 32;
        let a = solve_prescribed(&ms, &[], &v(&[0.0]), &cfg).unwrap();
        let b = catching_up(&ms, &v(&[0.0]), &a.times).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn prescribed_jump_defaults_to_projection() {
        let ms = interval_jump_ms();
        let cfg = SolverConfig::default();
        let traj = solve_prescribed(&ms, &[], &v(&[0.0]), &cfg).unwrap();
        let k = traj.node_at(0.5).unwrap();
        assert_eq!(traj.values[k], v(&[2.0]));
        assert_eq!(traj.left_values[&k], v(&[0.0]));
        // Afterwards the set is stationary.
        assert_eq!(traj.values[traj.values.len() - 1], v(&[2.0]));
    }

    #[test]
    fn prescribed_fixed_target_overrides_projection() {
        let ms = interval_jump_ms();
        let cfg = SolverConfig::default();
        let ps = vec![JumpPrescription::fixed(0.5, v(&[3.0]))];
        let traj = solve_prescribed(&ms, &ps, &v(&[0.0]), &cfg).unwrap();
        let k = traj.node_at(0.5).unwrap();
        assert_eq!(traj.values[k], v(&[3.0]));
        assert_eq!(traj.values[traj.values.len() - 1], v(&[3.0]));

        // Infeasible target rejected up front.
        let ps = vec![JumpPrescription::fixed(0.5, v(&[5.0]))];
        let err = solve_prescribed(&ms, &ps, &v(&[0.0]), &cfg).unwrap_err();
        assert!(matches!(err, SolverError::PrescriptionInfeasible { .. }));
    }

    #[test]
    fn prescribed_rejects_double_project_directly() {
        let ms = interval_jump_ms();
        let cfg = SolverConfig::default();
        let ps = vec![JumpPrescription {
            t: 0.5,
            kind: JumpKind::DoubleProject,
        }];
        let err = solve_prescribed(&ms, &ps, &v(&[0.0]), &cfg).unwrap_err();
        assert!(matches!(err, SolverError::UnsupportedPrescription { .. }));
    }

    #[test]
    fn general_bv_reduces_to_prescribed_on_rc_input() {
        let ms = interval_jump_ms();
        let cfg = SolverConfig::default();
        let a = solve_prescribed(&ms, &[], &v(&[0.0]), &cfg).unwrap();
        let b = solve_general_bv(&ms, &[], &v(&[0.0]), &cfg).unwrap();
        assert_eq!(a.times, b.times);
        assert_eq!(a.values, b.values);
        assert_eq!(a.left_values, b.left_values);
        assert!(b.right_values.is_empty());
    }

    #[test]
    fn general_bv_double_projection_triple() {
        // C(0.5-) = [0, 1], C(0.5) = {5}, C(0.5+) = [2, 3].
        let ms = MovingSet::Family {
            segments: vec![
                FamilySegment {
                    span: [0.0, 0.5],
                    start: ConvexSet::interval(0.0, 1.0),
                    end: ConvexSet::interval(0.0, 1.0),
                },
                FamilySegment {
                    span: [0.5, 1.0],
                    start: ConvexSet::interval(2.0, 3.0),
                    end: ConvexSet::interval(2.0, 3.0),
                },
            ],
            at: vec![AtRecord {
                t: 0.5,
                set: ConvexSet::interval(5.0, 5.0),
            }],
        };
        let cfg = SolverConfig::default();
        let traj = solve_general_bv(&ms, &[], &v(&[1.0]), &cfg).unwrap();
        let k = traj.node_at(0.5).unwrap();
        assert_eq!(traj.left_values[&k], v(&[1.0]));
        assert_eq!(traj.values[k], v(&[5.0]));
        assert_eq!(traj.right_values[&k], v(&[3.0]));

        // Same jump expressed with explicit maps.
        let ps = vec![GeneralPrescription {
            t: 0.5,
            left: JumpKind::FixedTarget { point: v(&[5.0]) },
            right: JumpKind::Project,
        }];
        let traj2 = solve_general_bv(&ms, &ps, &v(&[1.0]), &cfg).unwrap();
        assert_eq!(traj2.values[k], v(&[5.0]));
        assert_eq!(traj2.right_values[&k], v(&[3.0]));
        assert_eq!(traj.values, traj2.values);

        // Variation decomposes across the triple: |1-5| + |5-3| = 6.
        assert_eq!(traj.variation_total, 6.0);
    }

    #[test]
    fn general_bv_projects_arbitrary_start() {
        let ms = interval_jump_ms();
        let cfg = SolverConfig::default();
        // y0 = -7 far outside C(0) = [0, 1]: y(a) snaps to 0.
        let traj = solve_general_bv(&ms, &[], &v(&[-7.0]), &cfg).unwrap();
        assert_eq!(traj.values[0], v(&[0.0]));
    }

    #[test]
    fn trajectory_values_feasible_and_variation_matches_induced_path() {
        let ms = interval_jump_ms();
        let cfg = SolverConfig::default();
        let traj = solve_prescribed(&ms, &[], &v(&[0.25]), &cfg).unwrap();
        for (k, (&t, y)) in traj.times.iter().zip(&traj.values).enumerate() {
            let set = ms.set_at(t, Side::Value).unwrap();
            assert!(
                crate::geometry::contains(&set, y, cfg.projection.tol_feas, &cfg.projection)
                    .unwrap(),
                "infeasible value at node {k}"
            );
        }
        let path = traj.induced_path().unwrap();
        let [a, b] = path.domain;
        assert_eq!(path.variation(a, b).unwrap(), traj.variation_total);
    }

    #[test]
    fn refinement_reports_converge_on_smooth_scenario() {
        let ms = MovingSet::Translate {
            base: ConvexSet::ball(vec![0.0, 0.0], 1.0),
            path: BVPath::polyline(vec![
                (0.0, v(&[0.0, 0.0])),
                (0.5, v(&[1.3, -0.4])),
                (1.0, v(&[0.2, 0.9])),
            ])
            .unwrap(),
        };
        let mut cfg = SolverConfig::default();
        cfg.base_steps = 16;
        cfg.tol_traj = 1e-4;
        cfg.max_refine = 10;
        let traj = solve_prescribed(&ms, &[], &v(&[0.0, 0.0]), &cfg).unwrap();
        assert!(traj.refinement.converged);
        assert!(traj.refinement.final_gap <= 1e-4);
        assert!(traj.refinement.levels_used >= 1);
    }

    #[test]
    fn segment_play_prescription_lands_in_target_set() {
        let ms = interval_jump_ms();
        let cfg = SolverConfig::default();
        let ps = vec![JumpPrescription::segment_play(0.5, 64)];
        let traj = solve_prescribed(&ms, &ps, &v(&[0.0]), &cfg).unwrap();
        let k = traj.node_at(0.5).unwrap();
        // Monotone scalar segment traversal saturates like the projection.
        assert!((traj.values[k][0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn truncation_error_bound_dominates_observed_difference() {
        // Ten segment-play jumps of geometrically decaying size on a 2-D
        // disk; truncation replaces the small ones by plain projection.
        let mut breaks = vec![Breakpoint {
            t: 0.0,
            left: v(&[0.0, 0.0]),
            right: v(&[0.0, 0.0]),
        }];
        let mut u = v(&[0.0, 0.0]);
        for k in 1..=10i32 {
            let t = k as f64 / 11.0;
            let angle = 2.4 * k as f64;
            let size = 0.5f64.powi(k) * 2.0;
            let next = &u + &v(&[size * angle.cos(), size * angle.sin()]);
            breaks.push(Breakpoint {
                t,
                left: u.clone(),
                right: next.clone(),
            });
            u = next;
        }
        breaks.push(Breakpoint {
            t: 1.0,
            left: u.clone(),
            right: u.clone(),
        });
        let ms = MovingSet::Translate {
            base: ConvexSet::ball(vec![0.0, 0.0], 1.0),
            path: BVPath::new([0.0, 1.0], breaks, true).unwrap(),
        };
        let ps: Vec<JumpPrescription> = (1..=10)
            .map(|k| JumpPrescription::segment_play(k as f64 / 11.0, 128))
            .collect();
        let cfg = SolverConfig::default();
        let full = solve_prescribed(&ms, &ps, &v(&[0.0, -1.0]), &cfg).unwrap();
        for eps in [1e-1, 1e-2] {
            let (kept, bound) = truncate_jump_set(&ps, &ms, eps).unwrap();
            assert!(kept.len() < ps.len(), "eps = {eps} dropped nothing");
            let truncated = solve_prescribed(&ms, &kept, &v(&[0.0, -1.0]), &cfg).unwrap();
            let mut sup = 0.0f64;
            for (k, t) in full.times.iter().enumerate() {
                if let Some(j) = truncated.node_at(*t) {
                    sup = sup.max(full.values[k].dist(&truncated.values[j]));
                }
            }
            assert!(
                sup <= bound + 1e-12,
                "eps = {eps}: observed {sup} > bound {bound}"
            );
            assert!(bound > 0.0);
        }
    }
}
