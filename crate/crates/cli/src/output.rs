//! Output serialization: trajectory CSV, report JSONL, summary JSON. Files
//! are written atomically (temp file + rename) and byte-identically across
//! reruns of the same inputs.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::json;

use moreau::solver::Trajectory;
use moreau::verify::CheckReport;

/// CSV with columns `t, y_0..y_{d-1}, step_displacement_norm, side`. Jump
/// times emit one row per stored stage (left, value, and right for
/// general-BV jumps), flagged in the side column.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let d = traj.dim();
    let mut out = String::from("t");
    for i in 0..d {
        out.push_str(&format!(",y_{i}"));
    }
    out.push_str(",step_displacement_norm,side\n");

    let mut push_row = |t: f64, y: &moreau::geometry::Vector, norm: f64, side: &str| {
        out.push_str(&format!("{t}"));
        for c in y.as_slice() {
            out.push_str(&format!(",{c}"));
        }
        out.push_str(&format!(",{norm},{side}\n"));
    };

    for (k, (&t, y)) in traj.times.iter().zip(&traj.values).enumerate() {
        let prev_out = if k > 0 {
            Some(
                traj.right_values
                    .get(&(k - 1))
                    .unwrap_or(&traj.values[k - 1]),
            )
        } else {
            None
        };
        match traj.left_values.get(&k) {
            Some(left) => {
                let into = prev_out.map_or(0.0, |p| p.dist(left));
                push_row(t, left, into, "left");
                push_row(t, y, left.dist(y), "value");
            }
            None => {
                let into = prev_out.map_or(0.0, |p| p.dist(y));
                push_row(t, y, into, "value");
            }
        }
        if let Some(right) = traj.right_values.get(&k) {
            push_row(t, right, y.dist(right), "right");
        }
    }
    out
}

pub fn reports_jsonl(reports: &[CheckReport]) -> Result<String> {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn summary_json(
    scenario: &str,
    traj: &Trajectory,
    variation_c: f64,
    reports: &[CheckReport],
) -> Result<String> {
    let checks: Vec<serde_json::Value> = reports
        .iter()
        .map(|r| {
            json!({
                "name": r.name,
                "passed": r.passed,
                "worst_violation": r.worst_violation,
            })
        })
        .collect();
    let summary = json!({
        "scenario": scenario,
        "d": traj.dim(),
        "steps_final": traj.times.len() - 1,
        "refine_levels": traj.refinement.levels_used,
        "variation_y": traj.variation_total,
        "variation_C": variation_c,
        "checks": checks,
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&summary)?))
}

/// Write via a temp file in the same directory, then rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .context("output path has no parent directory")?;
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile_path(dir, path);
    let mut n = 0;
    while tmp.exists() {
        n += 1;
        tmp = dir.join(format!(
            ".{}.tmp{}",
            path.file_name().unwrap().to_string_lossy(),
            n
        ));
    }
    {
        let mut f = fs::File::create(&tmp)
            .with_context(|| format!("cannot create {}", tmp.display()))?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
        .with_context(|| format!("cannot move output into {}", path.display()))?;
    Ok(())
}

fn tempfile_path(dir: &Path, path: &Path) -> std::path::PathBuf {
    dir.join(format!(
        ".{}.tmp",
        path.file_name().unwrap().to_string_lossy()
    ))
}
