use fusetrack_bench::dataset::{Frames, Sequence};
use fusetrack_bench::eval::{evaluate, Curve, EvalReport, OpeRun};
use fusetrack_bench::report::{emit_report, load_reports, read_curve_csv, summarize, write_curve_csv, SUMMARY_FILE};
use fusetrack_core::features::Frame;
use fusetrack_core::BoundingBox;

fn report(name: &str, offset: f64, attributes: &[&str]) -> EvalReport {
    let gt: Vec<BoundingBox> = (0..4).map(|i| BoundingBox::new(30.0 + i as f64, 20.0, 10.0, 8.0)).collect();
    let frames = vec![Frame::from_fn(64, 48, |_, _| [0, 0, 0]); 4];
    let mut seq = Sequence::new(name, Frames::Memory(frames), gt.clone()).unwrap();
    seq.attributes = attributes.iter().map(|s| s.to_string()).collect();
    let boxes = gt.iter().enumerate().map(|(i, b)| if i == 0 { *b } else { BoundingBox::new(b.cx + offset, b.cy, b.w, b.h) }).collect();
    let run = OpeRun { boxes, diagnostics: vec![None; 4], steps: 3, step_seconds: 0.1 };
    evaluate(&seq, &run).unwrap()
}

#[test]
fn perfect_sequence_aggregates_to_one() {
    let s = summarize(&[report("a", 0.0, &[])]);
    assert_eq!(s.aggregate.precision_at_20, 1.0);
    assert_eq!(s.aggregate.success_auc, 1.0);
    assert_eq!(s.aggregate.success_at_50, 1.0);
}

#[test]
fn aggregate_is_mean_over_sequences() {
    // 3 of 4 frames are 30 px off in the second sequence
    let reports = [report("a", 0.0, &["IV"]), report("b", 30.0, &["IV", "OCC"])];
    assert_eq!(reports[1].precision.at_20, 0.25);
    let s = summarize(&reports);
    assert_eq!(s.aggregate.sequences, 2);
    assert!((s.aggregate.precision_at_20 - 0.625).abs() < 1e-12);
    assert_eq!(s.attributes["IV"].sequences, 2);
    assert_eq!(s.attributes["OCC"].precision_at_20, 0.25);
    assert!((s.aggregate.fps.unwrap() - 30.0).abs() < 1e-9);
}

#[test]
fn curve_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let curve = Curve { thresholds: vec![0.0, 0.1, 1.0 / 3.0], values: vec![1.0, 0.123456789012, 2.0 / 7.0] };
    write_curve_csv(&path, &curve).unwrap();
    let back = read_curve_csv(&path).unwrap();
    for (a, b) in back.values.iter().chain(&back.thresholds).zip(curve.values.iter().chain(&curve.thresholds)) {
        assert!((a - b).abs() <= 1e-9);
    }
}

#[test]
fn emitted_reports_reload() {
    let dir = tempfile::tempdir().unwrap();
    let reports = vec![report("a", 0.0, &[]), report("b", 30.0, &["OCC"])];
    let summary = emit_report(&reports, dir.path()).unwrap();
    assert!(dir.path().join(SUMMARY_FILE).is_file());
    for f in ["precision.csv", "success.csv", "frames.csv", "trajectory.txt"] {
        assert!(dir.path().join("b").join(f).is_file(), "{f}");
    }
    let trajectory = std::fs::read_to_string(dir.path().join("a/trajectory.txt")).unwrap();
    assert_eq!(trajectory.lines().next().unwrap(), "26,17,10,8");
    let back = load_reports(dir.path()).unwrap();
    assert_eq!(back, reports);
    assert_eq!(summarize(&back), summary);
    assert!(emit_report(&[], dir.path()).is_err());
}
