//! Report files: a JSON summary, CSV curve tables and per-frame diagnostics.
//!
//! Layout under the output directory:
//!
//! - `summary.json`: per-sequence, aggregate and per-attribute scores
//! - `precision.csv`, `success.csv`: curves averaged over sequences
//! - `<sequence>/precision.csv`, `<sequence>/success.csv`
//! - `<sequence>/frames.csv`: `frame,cpe,iou,apce,r_t,alpha_t,gate`
//! - `<sequence>/trajectory.txt`: predicted boxes, 1-based `x,y,w,h`
//! - `<sequence>/result.json`: the full report, reloadable by [`load_reports`]

use crate::error::{io_err, BenchError, Result};
use crate::eval::{Curve, EvalReport};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const SUMMARY_FILE: &str = "summary.json";
pub const RESULT_FILE: &str = "result.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSummary {
    pub name: String,
    pub frames: usize,
    pub precision_at_20: f64,
    pub success_auc: f64,
    pub success_at_50: f64,
    pub fps: Option<f64>,
    pub attributes: Vec<String>,
}

/// Unweighted means over sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub sequences: usize,
    pub precision_at_20: f64,
    pub success_auc: f64,
    pub success_at_50: f64,
    /// Mean over sequences that report a frame rate.
    pub fps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub sequences: Vec<SequenceSummary>,
    pub aggregate: Aggregate,
    pub attributes: BTreeMap<String, Aggregate>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn aggregate(reports: &[&EvalReport]) -> Aggregate {
    Aggregate {
        sequences: reports.len(),
        precision_at_20: mean(reports.iter().map(|r| r.precision.at_20)).unwrap_or(0.0),
        success_auc: mean(reports.iter().map(|r| r.success.auc)).unwrap_or(0.0),
        success_at_50: mean(reports.iter().map(|r| r.success.at_50)).unwrap_or(0.0),
        fps: mean(reports.iter().filter_map(|r| r.fps)),
    }
}

pub fn summarize(reports: &[EvalReport]) -> Summary {
    let all: Vec<&EvalReport> = reports.iter().collect();
    let mut tags: BTreeMap<String, Vec<&EvalReport>> = BTreeMap::new();
    for r in reports {
        for t in &r.attributes {
            tags.entry(t.clone()).or_default().push(r);
        }
    }
    Summary {
        sequences: reports
            .iter()
            .map(|r| SequenceSummary {
                name: r.name.clone(),
                frames: r.frames,
                precision_at_20: r.precision.at_20,
                success_auc: r.success.auc,
                success_at_50: r.success.at_50,
                fps: r.fps,
                attributes: r.attributes.clone(),
            })
            .collect(),
        aggregate: aggregate(&all),
        attributes: tags.into_iter().map(|(k, v)| (k, aggregate(&v))).collect(),
    }
}

fn mean_curve(curves: &[&Curve]) -> Curve {
    let n = curves.len() as f64;
    Curve {
        thresholds: curves[0].thresholds.clone(),
        values: (0..curves[0].values.len()).map(|i| curves.iter().map(|c| c.values[i]).sum::<f64>() / n).collect(),
    }
}

pub fn write_curve_csv(path: &Path, curve: &Curve) -> Result<()> {
    let csv_err = |source| BenchError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["threshold", "value"]).map_err(csv_err)?;
    for (t, v) in curve.thresholds.iter().zip(&curve.values) {
        w.serialize((t, v)).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_curve_csv(path: &Path) -> Result<Curve> {
    let csv_err = |source| BenchError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut curve = Curve { thresholds: Vec::new(), values: Vec::new() };
    for row in r.deserialize() {
        let (t, v): (f64, f64) = row.map_err(csv_err)?;
        curve.thresholds.push(t);
        curve.values.push(v);
    }
    Ok(curve)
}

fn write_frames_csv(path: &Path, report: &EvalReport) -> Result<()> {
    let csv_err = |source| BenchError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["frame", "cpe", "iou", "apce", "r_t", "alpha_t", "gate"]).map_err(csv_err)?;
    for f in &report.per_frame {
        w.serialize((f.frame, f.cpe, f.iou, f.apce, f.r_t, f.alpha_t, f.gate)).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| BenchError::Json { path: path.to_path_buf(), source })?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

/// Directory-safe form of a sequence name.
fn dir_name(name: &str) -> String {
    name.chars().map(|c| if c.is_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' }).collect()
}

/// Writes all report files for `reports` under `out` and returns the summary.
pub fn emit_report(reports: &[EvalReport], out: &Path) -> Result<Summary> {
    if reports.is_empty() {
        return Err(BenchError::Invalid("no sequence reports to emit".into()));
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    for r in reports {
        let dir = out.join(dir_name(&r.name));
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        write_curve_csv(&dir.join("precision.csv"), &r.precision.curve)?;
        write_curve_csv(&dir.join("success.csv"), &r.success.curve)?;
        write_frames_csv(&dir.join("frames.csv"), r)?;
        let trajectory: String = r.per_frame.iter().map(|f| format!("{},{},{},{}\n", f.bbox[0], f.bbox[1], f.bbox[2], f.bbox[3])).collect();
        let traj_path = dir.join("trajectory.txt");
        fs::write(&traj_path, trajectory).map_err(io_err(&traj_path))?;
        write_json(&dir.join(RESULT_FILE), r)?;
    }
    let precision: Vec<&Curve> = reports.iter().map(|r| &r.precision.curve).collect();
    let success: Vec<&Curve> = reports.iter().map(|r| &r.success.curve).collect();
    write_curve_csv(&out.join("precision.csv"), &mean_curve(&precision))?;
    write_curve_csv(&out.join("success.csv"), &mean_curve(&success))?;
    let summary = summarize(reports);
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

/// Reloads every `<sequence>/result.json` under `dir`, sorted by name.
pub fn load_reports(dir: &Path) -> Result<Vec<EvalReport>> {
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let p = entry.map_err(io_err(dir))?.path().join(RESULT_FILE);
        if p.is_file() {
            paths.push(p);
        }
    }
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            serde_json::from_str(&text).map_err(|source| BenchError::Json { path: p.clone(), source })
        })
        .collect()
}

/// Plain-text table of a summary.
pub fn format_summary(summary: &Summary) -> String {
    let fps = |f: Option<f64>| f.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"));
    let mut out = format!("{:<24} {:>7} {:>8} {:>7} {:>8}\n", "sequence", "frames", "prec@20", "auc", "fps");
    for s in &summary.sequences {
        out += &format!("{:<24} {:>7} {:>8.3} {:>7.3} {:>8}\n", s.name, s.frames, s.precision_at_20, s.success_auc, fps(s.fps));
    }
    let a = &summary.aggregate;
    out += &format!("{:<24} {:>7} {:>8.3} {:>7.3} {:>8}\n", "mean", a.sequences, a.precision_at_20, a.success_auc, fps(a.fps));
    for (tag, a) in &summary.attributes {
        out += &format!("{:<24} {:>7} {:>8.3} {:>7.3} {:>8}\n", format!("[{tag}]"), a.sequences, a.precision_at_20, a.success_auc, fps(a.fps));
    }
    out
}
