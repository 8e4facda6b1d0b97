use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fusetrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fusetrack")).args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn synth_track_report_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("scene.toml");
    fs::write(
        &spec,
        r#"
name = "drift"
seed = 11
frames = 12
width = 200
height = 150
target = { x = 70.0, y = 50.0, w = 32.0, h = 28.0 }

[[events]]
kind = "translate"
dx = 2.0
dy = 1.0
"#,
    )
    .unwrap();
    let data = tmp.path().join("data");
    let seq = data.join("drift");
    let out = fusetrack(&["synth", p(&spec), "--out", p(&seq)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_dir(seq.join("img")).unwrap().count(), 12);

    let config = tmp.path().join("tracker.conf");
    fs::write(&config, "# quicker learning\nc_dim = 8\ngn_iters = 2\n").unwrap();
    let results = tmp.path().join("results");
    let out = fusetrack(&["track", p(&seq), "--config", p(&config), "--out", p(&results)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("drift"));
    let frames = fs::read_to_string(results.join("drift/frames.csv")).unwrap();
    assert_eq!(frames.lines().next().unwrap(), "frame,cpe,iou,apce,r_t,alpha_t,gate");
    assert_eq!(frames.lines().count(), 13);

    let benched = tmp.path().join("bench");
    let out = fusetrack(&["bench", p(&data), "--sequences", "drift", "--out", p(&benched), "--jobs", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(benched.join("summary.json").is_file());

    fs::remove_file(results.join("summary.json")).unwrap();
    let out = fusetrack(&["report", p(&results)]);
    assert!(out.status.success());
    assert!(results.join("summary.json").is_file());
}

#[test]
fn errors_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(!fusetrack(&["track", p(&tmp.path().join("missing"))]).status.success());
    assert!(!fusetrack(&["bench", p(tmp.path())]).status.success());
    assert!(!fusetrack(&["report", p(tmp.path())]).status.success());
    let bad = tmp.path().join("bad.conf");
    fs::write(&bad, "lambda = -1\n").unwrap();
    let data = tmp.path().join("d");
    fs::create_dir(&data).unwrap();
    assert!(!fusetrack(&["bench", p(&data), "--config", p(&bad)]).status.success());
    assert!(!fusetrack(&["bench", p(&data), "--sequences", "nope"]).status.success());
    assert!(!fusetrack(&["frobnicate"]).status.success());
}
