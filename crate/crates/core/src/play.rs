//! The play operator: the solution operator of the sweeping process driven
//! by `C(t) = u(t) - Z` for a set `Z` of constant shape. Includes the
//! rate-independent extension obtained by solving along the arc-length
//! reparametrization of the input (jumps traversed as segments), the
//! segment-play jump map, and the rate-independence checker.

use crate::bvpath::{arc_length, compose, BVPath, Breakpoint, Side};
use crate::geometry::{contains, distance, ConvexSet, Vector};
use crate::movingset::MovingSet;
use crate::solver::{
    catching_up_with, segment_play, solve_prescribed, RefinementReport, SolverConfig,
    SolverError, Trajectory,
};
use crate::verify::CheckReport;

/// Input of the play operator: a right-continuous driving curve `u`, the
/// characteristic set `Z`, and the initial offset `z0 = u(a) - y(a)` with
/// `z0` in `Z`.
#[derive(Clone, Debug)]
pub struct PlayInput {
    pub u: BVPath,
    pub set: ConvexSet,
    pub z0: Vector,
}

impl PlayInput {
    pub fn new(u: BVPath, set: ConvexSet, z0: Vector) -> Self {
        Self { u, set, z0 }
    }

    pub fn validate(&self, cfg: &SolverConfig) -> Result<(), SolverError> {
        self.u.validate()?;
        if !self.u.right_continuous {
            return Err(SolverError::InvalidConfig(
                "play input must be right continuous".into(),
            ));
        }
        self.set.validate(&cfg.projection)?;
        if !contains(&self.set, &self.z0, cfg.projection.tol_feas, &cfg.projection)? {
            return Err(SolverError::InfeasibleStart {
                distance: distance(&self.set, &self.z0, &cfg.projection)?,
            });
        }
        Ok(())
    }

    /// The moving set `u(t) - Z` and the matching initial point.
    pub fn as_sweep(&self) -> (MovingSet, Vector) {
        let y0 = &self.u.breakpoints[0].right - &self.z0;
        (
            MovingSet::Translate {
                base: self.set.clone(),
                path: self.u.clone(),
            },
            y0,
        )
    }
}

/// The play operator `y = P(u, z0)`: catching-up on `u(t) - Z` from
/// `y(a) = u(a) - z0`, jumps of `u` defaulting to projection. The step
/// recursion is `y_{k+1} = u_{k+1} - Proj_Z(u_{k+1} - y_k)`.
pub fn play(input: &PlayInput, cfg: &SolverConfig) -> Result<Trajectory, SolverError> {
    input.validate(cfg)?;
    let (ms, y0) = input.as_sweep();
    solve_prescribed(&ms, &[], &y0, cfg)
}

/// The rate-independent extension: solve the play along the Lipschitz
/// arc-length filling of `u` and compose with the arc-length clock, so
/// jumps are traversed as affine segments instead of projected across.
/// Output samples sit at the original time grid of `u` (anchors plus the
/// uniform base subdivision); the intra-jump arc stays internal.
pub fn play_bar(input: &PlayInput, cfg: &SolverConfig) -> Result<Trajectory, SolverError> {
    input.validate(cfg)?;
    let arc = arc_length(&input.u)?;
    let [a, b] = input.u.domain;
    let outer_times = level_zero_times([a, b], &input.u.breakpoint_times(), cfg.base_steps);

    if arc.lip_bound == 0.0 {
        // Constant input: constant output.
        let (_, y0) = input.as_sweep();
        let n = outer_times.len();
        return Ok(Trajectory::assemble(
            outer_times,
            vec![y0; n],
            Default::default(),
            Default::default(),
            RefinementReport::single_level(),
        ));
    }

    let inner_input = PlayInput {
        u: arc.filled.clone(),
        set: input.set.clone(),
        z0: input.z0.clone(),
    };
    let inner = play(&inner_input, cfg)?;
    let refinement = inner.refinement.clone();
    let w = inner.induced_path()?;
    let solution = compose(&w, &arc.ell)?;

    let jump_times = input.u.jump_times();
    let tol = input.u.time_tol();
    let mut values = Vec::with_capacity(outer_times.len());
    let mut lefts = std::collections::BTreeMap::new();
    for (k, &t) in outer_times.iter().enumerate() {
        values.push(solution.eval(t, Side::Value)?);
        if jump_times.iter().any(|&j| (j - t).abs() <= tol) {
            lefts.insert(k, solution.eval(t, Side::Left)?);
        }
    }
    Ok(Trajectory::assemble(
        outer_times,
        values,
        lefts,
        Default::default(),
        refinement,
    ))
}

/// Level-0 node times: anchors plus a uniform subdivision proportional to
/// each gap. Matches the solver's own partition construction.
pub(crate) fn level_zero_times(domain: [f64; 2], anchors: &[f64], base_steps: usize) -> Vec<f64> {
    let [a, b] = domain;
    let tol = 1e-12 * (b - a);
    let mut all = vec![a, b];
    all.extend(anchors.iter().copied());
    all.sort_by(|x, y| x.partial_cmp(y).unwrap());
    all.dedup_by(|x, y| (*x - *y).abs() <= tol);
    let mut times = vec![all[0]];
    for w in all.windows(2) {
        let n = (((base_steps as f64) * (w[1] - w[0]) / (b - a)).ceil() as usize).max(1);
        let h = (w[1] - w[0]) / n as f64;
        for j in 1..n {
            times.push(w[0] + j as f64 * h);
        }
        times.push(w[1]);
    }
    times
}

/// The jump map of segment traversal: run the play along the segment
/// `s -> (1 - s) u_minus + s u_plus` on [0, 1] with `substeps` uniform
/// steps, starting from `y_minus` (so `z0 = u_minus - y_minus` must lie in
/// `Z`), and return the terminal value. Nonexpansive in `y_minus` as a
/// composition of projections; the terminal value lies in `u_plus - Z`.
pub fn segment_play_jump(
    set: &ConvexSet,
    u_minus: &Vector,
    u_plus: &Vector,
    y_minus: &Vector,
    substeps: usize,
    cfg: &SolverConfig,
) -> Result<Vector, SolverError> {
    let z0 = u_minus - y_minus;
    if !contains(set, &z0, cfg.projection.tol_feas, &cfg.projection)? {
        return Err(SolverError::InfeasibleStart {
            distance: distance(set, &z0, &cfg.projection)?,
        });
    }
    segment_play(set, u_minus, u_plus, y_minus, substeps, &cfg.projection)
}

/// Double `substeps` until the terminal value of the segment play moves
/// less than `tol` (capped at 2^16 substeps). Returns the converged value
/// and the substep count that produced it.
pub fn converged_segment_play(
    set: &ConvexSet,
    u_minus: &Vector,
    u_plus: &Vector,
    y_minus: &Vector,
    start_substeps: usize,
    tol: f64,
    cfg: &SolverConfig,
) -> Result<(Vector, usize), SolverError> {
    let mut substeps = start_substeps.max(1);
    let mut value = segment_play_jump(set, u_minus, u_plus, y_minus, substeps, cfg)?;
    while substeps < (1 << 16) {
        let next = segment_play_jump(set, u_minus, u_plus, y_minus, substeps * 2, cfg)?;
        let moved = next.dist(&value);
        substeps *= 2;
        value = next;
        if moved < tol {
            break;
        }
    }
    Ok((value, substeps))
}

/// Rate independence: solving the play for `u` on a partition `P` and for
/// `u o psi` on the psi-preimage of `P` produces identical projection
/// sequences, so the discrepancy at matched nodes must be exactly zero.
///
/// `psi` is a continuous nondecreasing piecewise-linear surjection of
/// `[a, b]` onto itself, given as a scalar path. The matched partitions are
/// built from `psi`'s breakpoints: the partition for `u` is the list of
/// `psi` values (with plateau duplicates collapsed), the partition for
/// `u o psi` is the list of `psi` breakpoint times. `psi` is refined so its
/// values cover the breakpoints of `u` and roughly `base_steps` nodes.
pub fn check_rate_independence(
    input: &PlayInput,
    psi: &BVPath,
    cfg: &SolverConfig,
) -> Result<CheckReport, SolverError> {
    input.validate(cfg)?;
    validate_reparam(psi, input.u.domain)?;
    let psi = refine_reparam(psi, &input.u, cfg.base_steps)?;

    // Partition for u: psi's values with consecutive duplicates merged.
    // node_map[k] = index in the deduped list of psi's k-th breakpoint.
    let mut u_nodes: Vec<f64> = Vec::new();
    let mut node_map: Vec<usize> = Vec::with_capacity(psi.breakpoints.len());
    let tol = input.u.time_tol();
    for bp in &psi.breakpoints {
        let v = bp.right[0];
        match u_nodes.last() {
            Some(last) if (v - last).abs() <= tol => {}
            _ => u_nodes.push(v),
        }
        node_map.push(u_nodes.len() - 1);
    }

    let composed = compose(&input.u, &psi)?;
    let (ms_u, y0) = input.as_sweep();
    let ms_comp = MovingSet::Translate {
        base: input.set.clone(),
        path: composed,
    };

    let traj_u = catching_up_with(&ms_u, &y0, &u_nodes, &cfg.projection)?;
    let traj_c = catching_up_with(
        &ms_comp,
        &y0,
        &psi.breakpoint_times(),
        &cfg.projection,
    )?;

    let mut worst = 0.0f64;
    let mut location = input.u.domain[0];
    for (k, &ui) in node_map.iter().enumerate() {
        let d = traj_c.values[k].dist(&traj_u.values[ui]);
        if d > worst {
            worst = d;
            location = psi.breakpoints[k].t;
        }
    }
    Ok(CheckReport {
        name: "rate_independence".into(),
        passed: worst == 0.0,
        worst_violation: worst,
        location,
        tolerance_used: 0.0,
        notes: format!("matched partitions with {} nodes", psi.breakpoints.len()),
    })
}

fn validate_reparam(psi: &BVPath, domain: [f64; 2]) -> Result<(), SolverError> {
    let invalid = |m: &str| SolverError::InvalidConfig(format!("invalid reparametrization: {m}"));
    if psi.dim() != 1 {
        return Err(invalid("must be scalar"));
    }
    if psi.domain != domain {
        return Err(invalid("must share the play input's domain"));
    }
    if !psi.jump_times().is_empty() {
        return Err(invalid("must be continuous"));
    }
    let mut prev = f64::NEG_INFINITY;
    for bp in &psi.breakpoints {
        if bp.right[0] < prev {
            return Err(invalid("must be nondecreasing"));
        }
        prev = bp.right[0];
    }
    let first = &psi.breakpoints[0];
    let last = &psi.breakpoints[psi.breakpoints.len() - 1];
    if first.right[0] != domain[0] || last.right[0] != domain[1] {
        return Err(invalid("must map a to a and b to b"));
    }
    Ok(())
}

/// Insert breakpoints into `psi` so that (i) every breakpoint of `u` occurs
/// among its values and (ii) each strictly increasing piece carries about
/// `base_steps` nodes. Values at inserted nodes are stored once and reused
/// by both matched recursions, which keeps the correspondence exact.
fn refine_reparam(
    psi: &BVPath,
    u: &BVPath,
    base_steps: usize,
) -> Result<BVPath, SolverError> {
    let [a, b] = psi.domain;
    let tol = 1e-12 * (b - a);
    let mut samples: Vec<(f64, f64)> = psi
        .breakpoints
        .iter()
        .map(|bp| (bp.t, bp.right[0]))
        .collect();

    let insert = |samples: &mut Vec<(f64, f64)>, t: f64, v: f64| {
        let pos = samples.partition_point(|&(st, _)| st < t - tol);
        if pos < samples.len() && (samples[pos].0 - t).abs() <= tol {
            return;
        }
        samples.insert(pos, (t, v));
    };

    // (i) cover u's breakpoints.
    for &v in &u.breakpoint_times() {
        let covered = samples.iter().any(|&(_, sv)| (sv - v).abs() <= tol);
        if covered {
            continue;
        }
        let piece = samples
            .windows(2)
            .position(|w| w[0].1 < v && v < w[1].1)
            .ok_or_else(|| {
                SolverError::InvalidConfig("reparametrization does not cover the domain".into())
            })?;
        let (t0, v0) = samples[piece];
        let (t1, v1) = samples[piece + 1];
        let t = t0 + (t1 - t0) * (v - v0) / (v1 - v0);
        insert(&mut samples, t, v);
    }

    // (ii) subdivide increasing pieces.
    let mut refined: Vec<(f64, f64)> = Vec::with_capacity(samples.len() * 2);
    for w in samples.windows(2) {
        let (t0, v0) = w[0];
        let (t1, v1) = w[1];
        refined.push((t0, v0));
        if v1 > v0 + tol {
            let n = (((base_steps as f64) * (v1 - v0) / (b - a)).ceil() as usize).max(1);
            for j in 1..n {
                let frac = j as f64 / n as f64;
                refined.push((t0 + frac * (t1 - t0), v0 + frac * (v1 - v0)));
            }
        }
    }
    refined.push(*samples.last().unwrap());

    let breakpoints = refined
        .into_iter()
        .map(|(t, v)| {
            let value = Vector::new(vec![v]);
            Breakpoint {
                t,
                left: value.clone(),
                right: value,
            }
        })
        .collect();
    Ok(BVPath::new([a, b], breakpoints, true)?)
}
