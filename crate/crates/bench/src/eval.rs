//! One-pass evaluation: run a tracker from the first ground-truth box and
//! score the trajectory by center error and overlap.

use crate::dataset::Sequence;
use crate::error::{BenchError, Result};
use fusetrack_core::tracker::{Diagnostics, Tracker, TrackerConfig};
use fusetrack_core::BoundingBox;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Largest center-error threshold of the precision curve, in pixels.
pub const PRECISION_MAX_THRESHOLD: usize = 50;
pub const PRECISION_HEADLINE: usize = 20;
/// Overlap thresholds are `i / SUCCESS_STEPS` for `i = 0..=SUCCESS_STEPS`.
pub const SUCCESS_STEPS: usize = 50;

#[derive(Debug, Clone)]
pub struct OpeRun {
    pub boxes: Vec<BoundingBox>,
    /// `None` for the initialization frame.
    pub diagnostics: Vec<Option<Diagnostics>>,
    pub steps: usize,
    /// Wall-clock time spent inside `Tracker::step`.
    pub step_seconds: f64,
}

impl OpeRun {
    pub fn fps(&self) -> Option<f64> {
        (self.steps > 0 && self.step_seconds > 0.0).then(|| self.steps as f64 / self.step_seconds)
    }
}

/// Initializes on frame 0's ground truth and steps through the rest without
/// re-initialization. Only `step` calls are timed.
pub fn run_ope(config: &TrackerConfig, seq: &Sequence) -> Result<OpeRun> {
    if seq.is_empty() {
        return Err(BenchError::Invalid(format!("{}: empty sequence", seq.name)));
    }
    if !seq.is_valid(0) {
        return Err(BenchError::Invalid(format!("{}: first ground-truth box is invalid", seq.name)));
    }
    let init_box = seq.groundtruth[0];
    let first = seq.frame(0)?;
    let mut tracker =
        Tracker::new(&first, init_box, config.clone()).map_err(|source| BenchError::Tracker { frame: 1, source })?;
    let mut boxes = vec![init_box];
    let mut diagnostics = vec![None];
    let mut step_seconds = 0.0;
    for i in 1..seq.len() {
        let frame = seq.frame(i)?;
        let started = Instant::now();
        let out = tracker.step(&frame).map_err(|source| BenchError::Tracker { frame: i + 1, source })?;
        step_seconds += started.elapsed().as_secs_f64();
        boxes.push(out.bbox);
        diagnostics.push(Some(out.diagnostics));
    }
    Ok(OpeRun { boxes, diagnostics, steps: seq.len() - 1, step_seconds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionCurve {
    pub curve: Curve,
    pub at_20: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub curve: Curve,
    pub auc: f64,
    pub at_50: f64,
}

fn check_lengths(traj: &[BoundingBox], gt: &[BoundingBox]) -> Result<()> {
    if traj.len() != gt.len() {
        return Err(BenchError::LengthMismatch { expected: gt.len(), found: traj.len() });
    }
    if gt.is_empty() {
        return Err(BenchError::Invalid("no frames to evaluate".into()));
    }
    Ok(())
}

pub fn center_errors(traj: &[BoundingBox], gt: &[BoundingBox]) -> Vec<f64> {
    traj.iter().zip(gt).map(|(a, b)| a.center_distance(b)).collect()
}

pub fn overlaps(traj: &[BoundingBox], gt: &[BoundingBox]) -> Vec<f64> {
    traj.iter().zip(gt).map(|(a, b)| a.iou(b)).collect()
}

fn fraction(values: &[f64], pass: impl Fn(f64) -> bool) -> f64 {
    values.iter().filter(|&&v| pass(v)).count() as f64 / values.len() as f64
}

/// Fraction of frames with center error `<= tau` for `tau = 0..=50` pixels.
pub fn precision_curve(traj: &[BoundingBox], gt: &[BoundingBox]) -> Result<PrecisionCurve> {
    check_lengths(traj, gt)?;
    let errors = center_errors(traj, gt);
    let thresholds: Vec<f64> = (0..=PRECISION_MAX_THRESHOLD).map(|t| t as f64).collect();
    let values: Vec<f64> = thresholds.iter().map(|&tau| fraction(&errors, |e| e <= tau)).collect();
    let at_20 = values[PRECISION_HEADLINE];
    Ok(PrecisionCurve { curve: Curve { thresholds, values }, at_20 })
}

/// Fraction of frames with overlap `>= tau` for 51 thresholds in `[0, 1]`;
/// the AUC is the mean over thresholds.
pub fn success_curve(traj: &[BoundingBox], gt: &[BoundingBox]) -> Result<SuccessCurve> {
    check_lengths(traj, gt)?;
    let ious = overlaps(traj, gt);
    let thresholds: Vec<f64> = (0..=SUCCESS_STEPS).map(|i| i as f64 / SUCCESS_STEPS as f64).collect();
    let values: Vec<f64> = thresholds.iter().map(|&tau| fraction(&ious, |o| o >= tau)).collect();
    let auc = values.iter().sum::<f64>() / values.len() as f64;
    let at_50 = values[SUCCESS_STEPS / 2];
    Ok(SuccessCurve { curve: Curve { thresholds, values }, auc, at_50 })
}

/// Per-frame record; diagnostics are absent on the initialization frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    /// 1-based frame number.
    pub frame: usize,
    /// Predicted box as 1-based `[x, y, w, h]`.
    pub bbox: [f64; 4],
    /// `None` where the ground truth is invalid.
    pub cpe: Option<f64>,
    pub iou: Option<f64>,
    pub apce: Option<f64>,
    pub r_t: Option<f64>,
    pub alpha_t: Option<f64>,
    pub gate: Option<bool>,
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub name: String,
    pub attributes: Vec<String>,
    pub frames: usize,
    /// Frames scored (valid ground truth).
    pub scored_frames: usize,
    pub precision: PrecisionCurve,
    pub success: SuccessCurve,
    pub fps: Option<f64>,
    pub per_frame: Vec<FrameRecord>,
}

impl EvalReport {
    pub fn precision_at_20(&self) -> f64 {
        self.precision.at_20
    }

    pub fn auc(&self) -> f64 {
        self.success.auc
    }
}

pub fn corner_1based(b: &BoundingBox) -> [f64; 4] {
    let (x, y, w, h) = b.to_corner();
    [x + 1.0, y + 1.0, w, h]
}

/// Scores a run against the sequence ground truth, skipping invalid rows.
pub fn evaluate(seq: &Sequence, run: &OpeRun) -> Result<EvalReport> {
    check_lengths(&run.boxes, &seq.groundtruth)?;
    let valid: Vec<usize> = (0..seq.len()).filter(|&i| seq.is_valid(i)).collect();
    let traj: Vec<BoundingBox> = valid.iter().map(|&i| run.boxes[i]).collect();
    let gt: Vec<BoundingBox> = valid.iter().map(|&i| seq.groundtruth[i]).collect();
    let precision = precision_curve(&traj, &gt)?;
    let success = success_curve(&traj, &gt)?;
    let per_frame = (0..seq.len())
        .map(|i| {
            let scored = seq.is_valid(i);
            let (b, g) = (run.boxes[i], seq.groundtruth[i]);
            let d = run.diagnostics.get(i).copied().flatten();
            FrameRecord {
                frame: i + 1,
                bbox: corner_1based(&b),
                cpe: scored.then(|| b.center_distance(&g)),
                iou: scored.then(|| b.iou(&g)),
                apce: d.map(|d| d.apce),
                r_t: d.map(|d| d.relative_confidence),
                alpha_t: d.map(|d| d.alpha),
                gate: d.map(|d| d.gate),
                scale: d.map(|d| d.scale),
            }
        })
        .collect();
    Ok(EvalReport {
        name: seq.name.clone(),
        attributes: seq.attributes.clone(),
        frames: seq.len(),
        scored_frames: valid.len(),
        precision,
        success,
        fps: run.fps(),
        per_frame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxes(offsets: &[f64]) -> (Vec<BoundingBox>, Vec<BoundingBox>) {
        let gt: Vec<BoundingBox> = offsets.iter().map(|_| BoundingBox::new(50.0, 50.0, 20.0, 20.0)).collect();
        let traj = offsets.iter().map(|&d| BoundingBox::new(50.0 + d, 50.0, 20.0, 20.0)).collect();
        (traj, gt)
    }

    #[test]
    fn perfect_tracking() {
        let (_, gt) = boxes(&[0.0; 7]);
        let p = precision_curve(&gt, &gt).unwrap();
        assert_eq!(p.at_20, 1.0);
        assert!(p.curve.values.iter().all(|&v| v == 1.0));
        let s = success_curve(&gt, &gt).unwrap();
        assert_eq!(s.auc, 1.0);
        assert_eq!(s.at_50, 1.0);
    }

    #[test]
    fn constant_offset_step() {
        let (traj, gt) = boxes(&[25.0; 4]);
        let p = precision_curve(&traj, &gt).unwrap();
        assert_eq!(p.at_20, 0.0);
        assert_eq!(p.curve.values[24], 0.0);
        assert_eq!(p.curve.values[25], 1.0);
    }

    #[test]
    fn mixed_offsets() {
        let (traj, gt) = boxes(&[0.0, 10.0, 30.0]);
        assert!((precision_curve(&traj, &gt).unwrap().at_20 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn overlap_fixtures() {
        let a = BoundingBox::from_corner(0.0, 0.0, 10.0, 10.0);
        let b = BoundingBox::from_corner(5.0, 0.0, 10.0, 10.0);
        assert!((a.iou(&b) - 1.0 / 3.0).abs() < 1e-15);
        let far = BoundingBox::from_corner(100.0, 0.0, 10.0, 10.0);
        let s = success_curve(&[far], &[a]).unwrap();
        assert_eq!(s.at_50, 0.0);
        assert!(success_curve(&[a, b], &[a]).is_err());
    }

    #[test]
    fn curves_are_monotone() {
        let (traj, gt) = boxes(&[0.0, 3.0, 7.5, 12.0, 19.0, 33.0, 48.0, 70.0]);
        let p = precision_curve(&traj, &gt).unwrap();
        assert!(p.curve.values.windows(2).all(|w| w[1] >= w[0]));
        let s = success_curve(&traj, &gt).unwrap();
        assert!(s.curve.values.windows(2).all(|w| w[1] <= w[0]));
        assert!(s.curve.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
