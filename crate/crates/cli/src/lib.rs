//! Batch runner: ingest scenario files, run the solvers and requested
//! checkers, and emit `trajectory.csv`, `reports.jsonl` and `summary.json`.
//! Exit codes: 0 success, 1 check failure, 2 malformed scenario, 3 solver
//! or I/O error. Outputs are byte-identical across reruns of the same
//! inputs.

pub mod output;
pub mod scenario;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, Context, Result};

use moreau::bvpath::Side;
use moreau::geometry::{project_point, Vector};
use moreau::movingset::MovingSet;
use moreau::play::{play, play_bar};
use moreau::solver::{
    solve_general_bv, solve_prescribed, GeneralPrescription, JumpKind, JumpPrescription,
    Trajectory,
};
use moreau::verify::{
    check_contraction, check_play_properties, check_variation_bound, pipeline_equivalence,
    vi_residual, CheckReport,
};

use scenario::{parse, PlayMode, PlayScenario, Scenario, SweepScenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Seed for sampled-direction Hausdorff estimates.
    pub seed: u64,
    /// Test hook: corrupt one interior trajectory value before checking.
    pub corrupt: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            corrupt: false,
        }
    }
}

/// Run one scenario file, writing outputs under `out_dir`. Returns the
/// process exit code; failures are logged to stderr.
pub fn run(scenario_path: &Path, out_dir: &Path, opts: &RunOptions) -> i32 {
    match run_inner(scenario_path, out_dir, opts) {
        Ok(code) => code,
        Err(stage) => {
            eprintln!("moreau: {}: {:#}", scenario_path.display(), stage.error);
            stage.exit
        }
    }
}

struct StageError {
    exit: i32,
    error: anyhow::Error,
}

fn malformed(error: anyhow::Error) -> StageError {
    StageError {
        exit: EXIT_MALFORMED,
        error,
    }
}

fn solver_failure(error: anyhow::Error) -> StageError {
    StageError {
        exit: EXIT_SOLVER,
        error,
    }
}

fn run_inner(
    scenario_path: &Path,
    out_dir: &Path,
    opts: &RunOptions,
) -> Result<i32, StageError> {
    let text = std::fs::read_to_string(scenario_path)
        .with_context(|| format!("cannot read {}", scenario_path.display()))
        .map_err(malformed)?;
    let scenario = parse(&text).map_err(malformed)?;

    let solved = match &scenario {
        Scenario::Sweep(s) => solve_sweep(s).map_err(solver_failure)?,
        Scenario::Play(s) => solve_play(s).map_err(solver_failure)?,
    };
    let Solved {
        mut traj,
        ms,
        variation_c,
    } = solved;

    if opts.corrupt {
        traj = corrupt_trajectory(&traj);
    }

    let reports = match &scenario {
        Scenario::Sweep(s) => {
            run_sweep_checks(s, &traj, &ms, opts.seed).map_err(solver_failure)?
        }
        Scenario::Play(s) => run_play_checks(s, &traj).map_err(solver_failure)?,
    };

    let stem = scenario_path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "scenario".into());
    let write = || -> Result<()> {
        output::write_atomic(&out_dir.join("trajectory.csv"), &output::trajectory_csv(&traj))?;
        output::write_atomic(
            &out_dir.join("reports.jsonl"),
            &output::reports_jsonl(&reports)?,
        )?;
        output::write_atomic(
            &out_dir.join("summary.json"),
            &output::summary_json(&stem, &traj, variation_c, &reports)?,
        )?;
        Ok(())
    };
    write().map_err(solver_failure)?;

    if reports.iter().all(|r| r.passed) {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_CHECK_FAILED)
    }
}

struct Solved {
    traj: Trajectory,
    ms: MovingSet,
    variation_c: f64,
}

/// Route a sweep scenario: right-continuous sets with ordinary
/// prescriptions go through the prescribed solver; double-projection
/// prescriptions or non-right-continuous jump records go through the
/// general solver.
fn solve_sweep(s: &SweepScenario) -> Result<Solved> {
    let ms = s.moving_set.clone();
    let traj = solve_sweep_from(s, &s.y0)?;
    let [a, b] = ms.domain();
    let variation_c = ms.moving_variation_seeded(a, b, 0)?.value;
    Ok(Solved {
        traj,
        ms,
        variation_c,
    })
}

fn needs_general(s: &SweepScenario) -> Result<bool> {
    if s.prescriptions
        .iter()
        .any(|p| matches!(p.kind, JumpKind::DoubleProject))
    {
        return Ok(true);
    }
    let records = s.moving_set.jump_times()?;
    Ok(records.iter().any(|r| r.at_set != r.right_set))
}

fn solve_sweep_from(s: &SweepScenario, y0: &Vector) -> Result<Trajectory> {
    if needs_general(s)? {
        let general: Vec<GeneralPrescription> = s
            .prescriptions
            .iter()
            .map(|p| match &p.kind {
                JumpKind::DoubleProject | JumpKind::Project => {
                    GeneralPrescription::double_project(p.t)
                }
                other => GeneralPrescription {
                    t: p.t,
                    left: other.clone(),
                    right: JumpKind::Project,
                },
            })
            .collect();
        Ok(solve_general_bv(&s.moving_set, &general, y0, &s.config)?)
    } else {
        Ok(solve_prescribed(&s.moving_set, &s.prescriptions, y0, &s.config)?)
    }
}

fn solve_play(s: &PlayScenario) -> Result<Solved> {
    let input = s.play.input();
    let (ms, _) = input.as_sweep();
    let traj = match s.mode {
        PlayMode::P => play(&input, &s.config)?,
        PlayMode::Pbar => play_bar(&input, &s.config)?,
        PlayMode::SegmentJumpEquiv => {
            let prescriptions: Vec<JumpPrescription> = input
                .u
                .jump_times()
                .into_iter()
                .map(|t| {
                    JumpPrescription::segment_play(t, moreau::solver::DEFAULT_SEGMENT_SUBSTEPS)
                })
                .collect();
            let (ms, y0) = input.as_sweep();
            solve_prescribed(&ms, &prescriptions, &y0, &s.config)?
        }
    };
    let [a, b] = ms.domain();
    let variation_c = ms.moving_variation_seeded(a, b, 0)?.value;
    Ok(Solved {
        traj,
        ms,
        variation_c,
    })
}

fn run_sweep_checks(
    s: &SweepScenario,
    traj: &Trajectory,
    ms: &MovingSet,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let mut reports = Vec::new();
    for name in &s.checks {
        match name.as_str() {
            "vi_residual" => {
                // Jumps handled by non-projection maps fall outside the
                // inequality; projection defaults stay in.
                let exclude: Vec<f64> = s
                    .prescriptions
                    .iter()
                    .filter(|p| {
                        matches!(
                            p.kind,
                            JumpKind::FixedTarget { .. } | JumpKind::SegmentPlay { .. }
                        )
                    })
                    .map(|p| p.t)
                    .collect();
                reports.push(vi_residual(traj, ms, &exclude, &s.config.projection)?);
            }
            "contraction" => {
                let alt = match &s.y0_alt {
                    Some(alt) => alt.clone(),
                    None => derived_alt_start(s, ms)?,
                };
                let other = solve_sweep_from(s, &alt)?;
                reports.push(check_contraction(traj, &other)?);
            }
            "variation_bound" => {
                reports.push(check_variation_bound(traj, ms, &s.prescriptions, seed)?);
            }
            other => return Err(anyhow!("unknown check {other}")),
        }
    }
    Ok(reports)
}

/// Deterministic second start for the contraction check: offset the first
/// start and project back into C(a).
fn derived_alt_start(s: &SweepScenario, ms: &MovingSet) -> Result<Vector> {
    let d = ms.dim();
    let offset = Vector::new(vec![0.37 / (d as f64).sqrt(); d]);
    let shifted = &s.y0 + &offset;
    let [a, _] = ms.domain();
    let set = ms.set_at(a, Side::Value)?;
    Ok(project_point(&set, &shifted, &s.config.projection)?)
}

fn run_play_checks(s: &PlayScenario, _traj: &Trajectory) -> Result<Vec<CheckReport>> {
    let input = s.play.input();
    let mut reports = Vec::new();
    if s.mode == PlayMode::SegmentJumpEquiv && !s.checks.iter().any(|c| c == "pipeline_equivalence")
    {
        reports.push(pipeline_equivalence(&input, &s.config)?);
    }
    for name in &s.checks {
        match name.as_str() {
            "play_properties" => reports.extend(check_play_properties(&input, &s.config)?),
            "pipeline_equivalence" => reports.push(pipeline_equivalence(&input, &s.config)?),
            other => return Err(anyhow!("unknown check {other}")),
        }
    }
    Ok(reports)
}

/// Test hook behind `--corrupt`: push one interior value outward by 0.1 in
/// every coordinate, rebuilding the derived fields consistently.
fn corrupt_trajectory(traj: &Trajectory) -> Trajectory {
    let mut values = traj.values.clone();
    let mid = values.len() / 2;
    values[mid] = &values[mid] + &Vector::new(vec![0.1; traj.dim()]);

    let mut variation_total = 0.0f64;
    for k in 0..values.len() {
        if k > 0 {
            let prev_out = traj.right_values.get(&(k - 1)).unwrap_or(&values[k - 1]);
            let into = traj.left_values.get(&k).unwrap_or(&values[k]);
            variation_total += prev_out.dist(into);
            if let Some(left) = traj.left_values.get(&k) {
                variation_total += left.dist(&values[k]);
            }
        }
        if let Some(right) = traj.right_values.get(&k) {
            variation_total += values[k].dist(right);
        }
    }
    let displacements = values.windows(2).map(|w| &w[1] - &w[0]).collect();
    Trajectory {
        times: traj.times.clone(),
        values,
        left_values: traj.left_values.clone(),
        right_values: traj.right_values.clone(),
        displacements,
        variation_total,
        refinement: traj.refinement.clone(),
    }
}

/// Run every `*.json` scenario in `batch_dir` (each into its own
/// subdirectory of `out_dir`), merge the summaries into `index.json`, and
/// return the maximum child exit code. Scenarios share nothing and run on
/// `parallelism` worker threads.
pub fn sweep(batch_dir: &Path, out_dir: &Path, parallelism: usize, opts: &RunOptions) -> i32 {
    let mut entries: Vec<PathBuf> = match std::fs::read_dir(batch_dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => {
            eprintln!("moreau: cannot read {}: {e}", batch_dir.display());
            return EXIT_SOLVER;
        }
    };
    entries.sort();

    let parallelism = parallelism.max(1);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(String, i32)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..parallelism.min(entries.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= entries.len() {
                    break;
                }
                let path = &entries[i];
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().to_string())
                    .unwrap_or_else(|| format!("scenario_{i}"));
                let code = run(path, &out_dir.join(&stem), opts);
                results.lock().unwrap().push((stem, code));
            });
        }
    });

    let mut results = results.into_inner().unwrap();
    results.sort();
    let mut index_rows = Vec::new();
    let mut worst = EXIT_OK;
    for (stem, code) in &results {
        worst = worst.max(*code);
        let summary_path = out_dir.join(stem).join("summary.json");
        let summary = std::fs::read_to_string(&summary_path)
            .ok()
            .and_then(|s| serde_json::from_str::<serde_json::Value>(&s).ok());
        index_rows.push(serde_json::json!({
            "scenario": stem,
            "exit": code,
            "summary": summary,
        }));
    }
    let index = serde_json::json!({ "scenarios": index_rows });
    let body = format!(
        "{}\n",
        serde_json::to_string_pretty(&index).expect("index serializes")
    );
    if let Err(e) = output::write_atomic(&out_dir.join("index.json"), &body) {
        eprintln!("moreau: cannot write index.json: {e:#}");
        return EXIT_SOLVER.max(worst);
    }
    worst
}
