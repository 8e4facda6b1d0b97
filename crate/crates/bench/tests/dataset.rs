use fusetrack_bench::dataset::{
    discover_sequences, load_attributes, load_otb_sequence, write_sequence, Frames, Sequence, ATTRIBUTES_FILE,
    GROUNDTRUTH_FILE,
};
use fusetrack_core::features::Frame;
use fusetrack_core::BoundingBox;
use std::fs;

fn fixture() -> Sequence {
    let frames: Vec<Frame> =
        (0..4).map(|t| Frame::from_fn(24, 16, |x, y| [(x * 10) as u8, (y * 15) as u8, (t * 60) as u8])).collect();
    let gt = (0..4).map(|t| BoundingBox::from_corner(2.0 + t as f64, 3.0, 8.0, 6.5)).collect();
    Sequence::new("fixture", Frames::Memory(frames), gt).unwrap()
}

#[test]
fn four_frame_fixture_round_trips() {
    let root = tempfile::tempdir().unwrap();
    let seq = fixture();
    let dir = root.path().join("fixture");
    write_sequence(&seq, &dir).unwrap();
    let text = fs::read_to_string(dir.join(GROUNDTRUTH_FILE)).unwrap();
    assert_eq!(text.lines().next().unwrap(), "3,4,8,6.5");
    let back = load_otb_sequence(&dir).unwrap();
    assert_eq!(back.name, "fixture");
    assert_eq!(back.groundtruth, seq.groundtruth);
    for i in 0..4 {
        assert_eq!(back.frame(i).unwrap(), seq.frame(i).unwrap());
    }
    // serialize the reloaded copy again: identical files
    let again = root.path().join("again");
    write_sequence(&back, &again).unwrap();
    assert_eq!(fs::read_to_string(again.join(GROUNDTRUTH_FILE)).unwrap(), text);
    assert_eq!(discover_sequences(root.path()).unwrap(), vec![again, dir]);
}

#[test]
fn frame_count_mismatch_and_attributes() {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("seq");
    write_sequence(&fixture(), &dir).unwrap();
    fs::write(dir.join(GROUNDTRUTH_FILE), "1,1,5,5\n2,2,5,5\n").unwrap();
    assert!(load_otb_sequence(&dir).is_err());
    fs::write(root.path().join(ATTRIBUTES_FILE), "seq IV, occ\nother SV\n").unwrap();
    let tags = load_attributes(root.path()).unwrap();
    assert_eq!(tags["seq"], vec!["IV".to_string(), "OCC".to_string()]);
}
