//! OTB-layout sequences: `img/` with numbered frames plus
//! `groundtruth_rect.txt` holding one 1-based `x,y,w,h` box per line.

use crate::error::{io_err, BenchError, Result};
use fusetrack_core::features::Frame;
use fusetrack_core::BoundingBox;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const GROUNDTRUTH_FILE: &str = "groundtruth_rect.txt";
pub const ATTRIBUTES_FILE: &str = "attributes.txt";
const IMAGE_EXTENSIONS: [&str; 4] = ["jpg", "jpeg", "png", "bmp"];

#[derive(Debug, Clone)]
pub enum Frames {
    Files(Vec<PathBuf>),
    Memory(Vec<Frame>),
}

#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub frames: Frames,
    /// One box per frame, in 0-based image coordinates.
    pub groundtruth: Vec<BoundingBox>,
    /// Frame indices whose ground truth lacks a positive extent; they are
    /// excluded from metrics.
    pub invalid: Vec<usize>,
    pub attributes: Vec<String>,
}

impl Sequence {
    /// Builds a sequence, flagging boxes without a positive finite extent.
    pub fn new(name: impl Into<String>, frames: Frames, groundtruth: Vec<BoundingBox>) -> Result<Self> {
        let count = match &frames {
            Frames::Files(f) => f.len(),
            Frames::Memory(f) => f.len(),
        };
        let name = name.into();
        if count != groundtruth.len() {
            return Err(BenchError::CountMismatch { path: PathBuf::from(&name), frames: count, boxes: groundtruth.len() });
        }
        let invalid = groundtruth.iter().enumerate().filter(|(_, b)| !b.is_valid()).map(|(i, _)| i).collect();
        Ok(Sequence { name, frames, groundtruth, invalid, attributes: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.groundtruth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groundtruth.is_empty()
    }

    pub fn is_valid(&self, frame: usize) -> bool {
        self.invalid.binary_search(&frame).is_err()
    }

    /// Decodes (or clones) frame `index`.
    pub fn frame(&self, index: usize) -> Result<Frame> {
        match &self.frames {
            Frames::Files(paths) => load_frame(&paths[index]),
            Frames::Memory(frames) => Ok(frames[index].clone()),
        }
    }
}

pub fn load_frame(path: &Path) -> Result<Frame> {
    let img = image::open(path).map_err(|source| BenchError::Image { path: path.to_path_buf(), source })?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = img.pixels().map(|p| p.0).collect();
    Frame::new(w, h, pixels).map_err(|e| BenchError::Invalid(format!("{}: {e}", path.display())))
}

pub fn save_frame(frame: &Frame, path: &Path) -> Result<()> {
    let raw: Vec<u8> = frame.pixels().iter().flatten().copied().collect();
    let img = image::RgbImage::from_raw(frame.width() as u32, frame.height() as u32, raw)
        .expect("pixel buffer matches frame size");
    img.save(path).map_err(|source| BenchError::Image { path: path.to_path_buf(), source })
}

/// Parses ground-truth text; fields may be separated by commas, tabs or spaces.
pub fn parse_groundtruth(text: &str, path: &Path) -> Result<Vec<BoundingBox>> {
    let mut boxes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        let err = |message: String| BenchError::Parse { path: path.to_path_buf(), line: i + 1, message };
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        let mut v = [0.0; 4];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f.parse().map_err(|_| err(format!("invalid number {f:?}")))?;
        }
        boxes.push(BoundingBox::from_corner(v[0] - 1.0, v[1] - 1.0, v[2], v[3]));
    }
    Ok(boxes)
}

/// Formats boxes as 1-based `x,y,w,h` lines.
pub fn format_groundtruth(boxes: &[BoundingBox]) -> String {
    let mut out = String::new();
    for b in boxes {
        let (x, y, w, h) = b.to_corner();
        writeln!(out, "{},{},{},{}", x + 1.0, y + 1.0, w, h).expect("writing to a string");
    }
    out
}

pub fn write_groundtruth(path: &Path, boxes: &[BoundingBox]) -> Result<()> {
    std::fs::write(path, format_groundtruth(boxes)).map_err(io_err(path))
}

/// Numbered image files of `dir`, ordered by their numeric stem.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut frames = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase());
        if !ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
        let digits: String = stem.chars().filter(|c| c.is_ascii_digit()).collect();
        let number: u64 = digits.parse().unwrap_or(u64::MAX);
        frames.push((number, stem.to_string(), path));
    }
    frames.sort();
    Ok(frames.into_iter().map(|(_, _, p)| p).collect())
}

pub fn load_otb_sequence(dir: &Path) -> Result<Sequence> {
    let frames = list_frames(&dir.join("img"))?;
    if frames.is_empty() {
        return Err(BenchError::NoFrames { path: dir.join("img") });
    }
    let gt_path = dir.join(GROUNDTRUTH_FILE);
    let text = std::fs::read_to_string(&gt_path).map_err(io_err(&gt_path))?;
    let boxes = parse_groundtruth(&text, &gt_path)?;
    if boxes.len() != frames.len() {
        return Err(BenchError::CountMismatch { path: dir.to_path_buf(), frames: frames.len(), boxes: boxes.len() });
    }
    let name = dir
        .file_name()
        .and_then(|n| n.to_str())
        .map(str::to_string)
        .unwrap_or_else(|| dir.display().to_string());
    Sequence::new(name, Frames::Files(frames), boxes)
}

/// Writes `seq` in OTB layout under `dir` (frames as PNG).
pub fn write_sequence(seq: &Sequence, dir: &Path) -> Result<()> {
    let img = dir.join("img");
    std::fs::create_dir_all(&img).map_err(io_err(&img))?;
    for i in 0..seq.len() {
        save_frame(&seq.frame(i)?, &img.join(format!("{:04}.png", i + 1)))?;
    }
    write_groundtruth(&dir.join(GROUNDTRUTH_FILE), &seq.groundtruth)
}

/// Sequence directories (those holding a ground-truth file) below `root`.
pub fn discover_sequences(root: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for entry in std::fs::read_dir(root).map_err(io_err(root))? {
        let path = entry.map_err(io_err(root))?.path();
        if path.is_dir() && path.join(GROUNDTRUTH_FILE).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

/// Reads `Name TAG TAG ...` lines of the dataset attribute sidecar. A missing
/// file yields no tags.
pub fn load_attributes(root: &Path) -> Result<BTreeMap<String, Vec<String>>> {
    let path = root.join(ATTRIBUTES_FILE);
    let mut map = BTreeMap::new();
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(map),
        Err(e) => return Err(BenchError::Io { path, source: e }),
    };
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        let mut parts = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty());
        if let Some(name) = parts.next() {
            map.insert(name.to_string(), parts.map(|t| t.to_ascii_uppercase()).collect());
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_delimiters_alike() {
        let p = Path::new("gt");
        let comma = parse_groundtruth("100,80,50,60\n", p).unwrap();
        let tab = parse_groundtruth("100\t80\t50\t60\n", p).unwrap();
        let space = parse_groundtruth("100 80  50 60\n", p).unwrap();
        assert_eq!(comma, tab);
        assert_eq!(comma, space);
        assert_eq!(comma[0].to_corner(), (99.0, 79.0, 50.0, 60.0));
    }

    #[test]
    fn bad_line_reports_its_number() {
        let err = parse_groundtruth("1,2,3,4\n1,2,x,4\n", Path::new("gt")).unwrap_err();
        assert!(matches!(err, BenchError::Parse { line: 2, .. }), "{err}");
        assert!(matches!(parse_groundtruth("1,2,3\n", Path::new("gt")), Err(BenchError::Parse { line: 1, .. })));
    }

    #[test]
    fn format_round_trips() {
        let boxes = vec![BoundingBox::from_corner(0.0, 0.0, 10.0, 12.0), BoundingBox::from_corner(3.25, 4.5, 7.125, 9.0)];
        assert_eq!(parse_groundtruth(&format_groundtruth(&boxes), Path::new("gt")).unwrap(), boxes);
    }

    #[test]
    fn invalid_rows_are_flagged() {
        let boxes = parse_groundtruth("1,1,5,5\n0,0,0,0\nNaN,NaN,NaN,NaN\n1,1,5,5\n", Path::new("gt")).unwrap();
        let frames = Frames::Memory(vec![Frame::from_fn(8, 8, |_, _| [0; 3]); 4]);
        let seq = Sequence::new("s", frames, boxes).unwrap();
        assert_eq!(seq.invalid, vec![1, 2]);
        assert!(seq.is_valid(0) && !seq.is_valid(2));
    }
}
