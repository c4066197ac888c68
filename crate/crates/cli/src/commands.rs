//! Implementations behind the `run`, `reach` and `digest` subcommands.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use foldray::reach::{reachability, ReachOptions, ReachabilityReport};
use foldray::scene::bundled;
use foldray::session::{parse_trace, replay, ReplaySummary};
use foldray::{load_scene, Config, Scene};

/// Loads a scene file, or a bundled scene when `arg` names one and no such
/// file exists.
pub fn load_scene_arg(arg: &str) -> Result<Scene> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(scene) = bundled::by_name(arg) {
            return Ok(scene);
        }
    }
    let bytes = std::fs::read(path).with_context(|| format!("reading scene {arg}"))?;
    load_scene(&bytes).with_context(|| format!("loading scene {arg}"))
}

pub fn load_config(path: Option<&Path>) -> Result<Config> {
    let config = match path {
        None => Config::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", p.display()))?
        }
    };
    config.validate()?;
    Ok(config)
}

/// Replays `trace_text`, writing each event-log line to `out` as it is
/// produced.
pub fn run_trace(
    scene: Scene,
    config: Config,
    trace_text: &str,
    out: &mut dyn Write,
) -> Result<ReplaySummary> {
    let frames = parse_trace(trace_text)?;
    let mut write_err = None;
    let summary = replay(Arc::new(scene), config, &frames, |e| {
        if write_err.is_none() {
            if let Err(err) = writeln!(out, "{}", e.to_json_line()) {
                write_err = Some(err);
            }
        }
    })?;
    if let Some(err) = write_err {
        return Err(err).context("writing event log");
    }
    out.flush()?;
    Ok(summary)
}

pub fn summary_line(s: &ReplaySummary) -> String {
    let ids: Vec<String> = s.selections.iter().map(|id| id.0.to_string()).collect();
    format!(
        "frames={} events={} selections=[{}] final_folds={}",
        s.frames,
        s.events.len(),
        ids.join(","),
        s.final_fold_count
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Json,
    Table,
}

pub fn reach(scene: &Scene, max_folds: usize, grid: f64) -> Result<ReachabilityReport> {
    if !(grid > 0.0 && grid.is_finite()) {
        bail!("grid step must be positive, got {grid}");
    }
    let opts = ReachOptions {
        max_folds,
        grid_step: grid,
        ..ReachOptions::default()
    };
    Ok(reachability(scene, &opts)?)
}

/// One JSON object per target, or an aligned text table.
pub fn format_report(scene: &Scene, report: &ReachabilityReport, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Json => {
            for e in &report.entries {
                out.push_str(&serde_json::to_string(e).expect("report serializes"));
                out.push('\n');
            }
        }
        ReportFormat::Table => {
            let _ = writeln!(
                out,
                "{:<8} {:<16} {:<10} fold points",
                "target", "label", "min_folds"
            );
            for e in &report.entries {
                let label = scene.object(e.target).map_or("", |o| o.label.as_str());
                let folds = match e.min_folds {
                    Some(k) => k.to_string(),
                    None => format!(">{}", report.max_folds),
                };
                let points: Vec<String> = e
                    .witness
                    .iter()
                    .skip(1)
                    .take(e.witness.len().saturating_sub(2))
                    .map(|p| format!("({:.2}, {:.2}, {:.2})", p.x, p.y, p.z))
                    .collect();
                let _ = writeln!(
                    out,
                    "{:<8} {:<16} {:<10} {}",
                    e.target.0,
                    label,
                    folds,
                    points.join(" ")
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_name_falls_back() {
        let s = load_scene_arg("wall_room").unwrap();
        assert_eq!(s.digest(), bundled::wall_room().digest());
        assert!(load_scene_arg("no_such_scene").is_err());
    }

    #[test]
    fn table_lists_every_target() {
        let s = bundled::wall_room();
        let report = reach(&s, 2, 0.5).unwrap();
        let table = format_report(&s, &report, ReportFormat::Table);
        assert_eq!(table.lines().count(), 1 + report.entries.len());
        assert!(table.lines().nth(1).unwrap().starts_with("1 "));
        assert!(reach(&s, 2, 0.0).is_err());
    }

    #[test]
    fn summary_names_selections() {
        let s = ReplaySummary {
            frames: 6,
            selections: vec![foldray::ObjectId(1)],
            final_fold_count: 1,
            events: vec![],
        };
        assert_eq!(
            summary_line(&s),
            "frames=6 events=0 selections=[1] final_folds=1"
        );
    }
}
