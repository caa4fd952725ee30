//! CSV output of a benchmark run.
//!
//! Files written into the output directory, each replaced atomically:
//!
//! * `stats.csv`: `step,phase,seconds,elements,vertices,min_q,mean_q`, one
//!   row per step and phase in [`PHASES`]; mesh columns describe the mesh at
//!   the end of the step.
//! * `efficiency.csv`: `phase,threads,mean_seconds[,baseline_seconds,speedup,efficiency]`;
//!   the last three columns only when a 1-thread baseline is available.
//! * `quality_hist.csv`: `bin_lo,bin_hi,count` of the final mesh.
//! * `trace.csv`: `step,t,elements,vertices,iterations,converged,in_band,steals,worklist_overflows,edits_committed,ownership_violations,violations`.
//! * `summary.csv`: `key,value` pairs describing the run.
//! * `baseline.csv` (1-thread runs only): `phase,mean_seconds`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use super::{BenchReport, StepRecord};
use crate::error::{AdaptError, Result};
use crate::mesh::io::write_atomic;
use crate::quality::QualityStats;

pub(crate) const NO_BASELINE: &str = "no 1-thread baseline found; efficiency columns omitted";

pub const PHASES: [&str; 6] = ["metric", "coarsen", "swap", "refine", "smooth", "adapt"];

pub(crate) fn phase_time(s: &StepRecord, phase: &str) -> Duration {
    match phase {
        "metric" => s.metric_time,
        "coarsen" => s.adapt.coarsen.time + s.adapt.compact,
        "swap" => s.adapt.swap.time,
        "refine" => s.adapt.refine.time,
        "smooth" => s.adapt.smooth.time,
        "adapt" => s.adapt.total,
        _ => panic!("unknown phase {phase}"),
    }
}

/// Per-phase mean seconds of a 1-thread run.
#[derive(Debug, Clone, PartialEq)]
pub struct Baseline {
    pub phases: Vec<(String, f64)>,
}

impl Baseline {
    pub fn of(report: &BenchReport) -> Self {
        Baseline {
            phases: PHASES.iter().map(|p| (p.to_string(), report.mean_phase_seconds(p))).collect(),
        }
    }

    pub fn get(&self, phase: &str) -> Option<f64> {
        self.phases.iter().find(|(p, _)| p == phase).map(|x| x.1)
    }

    fn to_csv(&self) -> String {
        let mut s = String::from("phase,mean_seconds\n");
        for (p, v) in &self.phases {
            let _ = writeln!(s, "{p},{v:e}");
        }
        s
    }
}

pub fn read_baseline(path: &Path) -> Result<Baseline> {
    let text = std::fs::read_to_string(path).map_err(|e| AdaptError::io(path, e))?;
    let mut phases = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed = line
            .split_once(',')
            .and_then(|(p, v)| v.trim().parse::<f64>().ok().map(|v| (p.trim().to_string(), v)));
        match parsed {
            Some(entry) => phases.push(entry),
            None => {
                return Err(AdaptError::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("expected `phase,mean_seconds`, found {line:?}"),
                })
            }
        }
    }
    Ok(Baseline { phases })
}

/// Baseline for efficiency figures: the run itself when single-threaded,
/// otherwise the configured file or `dir/baseline.csv`.
pub(crate) fn resolve_baseline(report: &BenchReport, dir: &Path) -> Option<Baseline> {
    if report.config.threads == 1 {
        return Some(Baseline::of(report));
    }
    let path = report.config.baseline.clone().unwrap_or_else(|| dir.join("baseline.csv"));
    read_baseline(&path).ok()
}

fn stats_csv(report: &BenchReport) -> String {
    let mut s = String::from("step,phase,seconds,elements,vertices,min_q,mean_q\n");
    for step in &report.steps {
        let q = &step.adapt.quality;
        for phase in PHASES {
            let _ = writeln!(
                s,
                "{},{},{:e},{},{},{:.6},{:.6}",
                step.step,
                phase,
                phase_time(step, phase).as_secs_f64(),
                step.adapt.elements,
                step.adapt.vertices,
                q.min,
                q.mean
            );
        }
    }
    s
}

fn efficiency_csv(report: &BenchReport, baseline: Option<&Baseline>) -> String {
    let threads = report.config.threads;
    let mut s = String::new();
    match baseline {
        Some(b) => {
            s.push_str("phase,threads,mean_seconds,baseline_seconds,speedup,efficiency\n");
            if report.steps.is_empty() {
                return s;
            }
            for phase in PHASES {
                let mean = report.mean_phase_seconds(phase);
                let base = b.get(phase).unwrap_or(f64::NAN);
                let speedup = if mean > 0.0 { base / mean } else { f64::NAN };
                let _ = writeln!(
                    s,
                    "{phase},{threads},{mean:e},{base:e},{speedup:.4},{:.4}",
                    speedup / threads as f64
                );
            }
        }
        None => {
            s.push_str("phase,threads,mean_seconds\n");
            if report.steps.is_empty() {
                return s;
            }
            for phase in PHASES {
                let _ = writeln!(s, "{phase},{threads},{:e}", report.mean_phase_seconds(phase));
            }
        }
    }
    s
}

fn trace_csv(report: &BenchReport) -> String {
    let mut s = String::from(
        "step,t,elements,vertices,iterations,converged,in_band,steals,worklist_overflows,edits_committed,ownership_violations,violations\n",
    );
    for st in &report.steps {
        let a = &st.adapt;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{:.6},{},{},{},{},{}",
            st.step,
            st.t,
            a.elements,
            a.vertices,
            a.iterations,
            a.converged,
            st.in_band,
            a.runtime.steals,
            a.runtime.worklist_overflows,
            a.runtime.edits_committed,
            a.ownership_violations(),
            st.violations
        );
    }
    s
}

fn summary_csv(report: &BenchReport, baseline_found: bool) -> String {
    let c = &report.config;
    let mut rows: Vec<(String, String)> = vec![
        ("n".into(), c.n.to_string()),
        ("steps".into(), c.steps.to_string()),
        ("threads".into(), c.threads.to_string()),
        ("period".into(), c.period().to_string()),
        ("eta".into(), report.eta.to_string()),
        ("h_min".into(), c.h_min.to_string()),
        ("h_max".into(), c.h_max.to_string()),
        ("seed".into(), c.seed.to_string()),
        ("jitter".into(), c.jitter.to_string()),
        ("reproducible".into(), report.reproducible.to_string()),
        ("all_checks_passed".into(), report.all_checks_passed().to_string()),
        ("mean_adapt_seconds".into(), format!("{:e}", report.mean_adapt_seconds())),
        (
            "final_elements".into(),
            report.steps.last().map_or(String::new(), |s| s.adapt.elements.to_string()),
        ),
    ];
    if let Some(cal) = &report.calibration {
        rows.push(("calibration_target".into(), cal.target.to_string()));
        rows.push(("calibration_elements".into(), cal.elements.to_string()));
        rows.push(("calibration_passes".into(), cal.passes.to_string()));
    }
    if !baseline_found {
        rows.push(("note".into(), NO_BASELINE.into()));
    }
    for n in report.notes.iter().filter(|n| n.as_str() != NO_BASELINE) {
        rows.push(("note".into(), n.clone()));
    }
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        let v = if v.contains(',') { format!("\"{v}\"") } else { v };
        let _ = writeln!(s, "{k},{v}");
    }
    s
}

/// Writes the report files into `dir` and returns their paths.
pub fn emit_report(report: &BenchReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let baseline = resolve_baseline(report, dir);
    let hist = report
        .final_quality
        .clone()
        .unwrap_or(QualityStats {
            min: 1.0,
            mean: 1.0,
            histogram: [0; QualityStats::BINS],
        });
    let mut files = vec![
        ("stats.csv", stats_csv(report)),
        ("efficiency.csv", efficiency_csv(report, baseline.as_ref())),
        ("quality_hist.csv", hist.histogram_csv()),
        ("trace.csv", trace_csv(report)),
        ("summary.csv", summary_csv(report, baseline.is_some())),
    ];
    if report.config.threads == 1 && !report.steps.is_empty() {
        files.push(("baseline.csv", Baseline::of(report).to_csv()));
    }
    let mut written = Vec::with_capacity(files.len());
    for (name, content) in files {
        let path = dir.join(name);
        write_atomic(&path, content.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
