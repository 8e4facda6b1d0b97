//! Seeded synthetic sequences: a textured target over a textured static
//! background, driven by a script of motion and appearance events.
//!
//! ```toml
//! name = "slide"
//! seed = 3
//! frames = 60
//! width = 320
//! height = 240
//! target = { x = 100, y = 90, w = 40, h = 32 }
//!
//! [[events]]
//! kind = "translate"
//! dx = 4
//! dy = 0
//! start = 1
//! ```
//!
//! Frame indices are 0-based; frame 0 is the initial state. Event ranges are
//! half-open `[start, end)` and `end` defaults to the sequence length.

use crate::dataset::{Frames, Sequence};
use crate::error::{BenchError, Result};
use fusetrack_core::features::Frame;
use fusetrack_core::BoundingBox;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const LATTICE: usize = 16;
const TILES: usize = 4;
const GRAIN: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    /// Top-left corner, 0-based pixels.
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Event {
    /// Moves the target by `(dx, dy)` on every frame of the range.
    Translate {
        dx: f64,
        dy: f64,
        #[serde(default = "one")]
        start: usize,
        end: Option<usize>,
    },
    /// Multiplies the target size by `factor` on every frame of the range,
    /// keeping its center.
    Scale {
        factor: f64,
        #[serde(default = "one")]
        start: usize,
        end: Option<usize>,
    },
    /// Multiplies all pixel values by `factor` (clipped at 255).
    Gain { factor: f64, start: usize, end: Option<usize> },
    /// Hides the left `fraction` of the target behind background texture.
    Occlude { fraction: f64, start: usize, duration: usize },
    /// Static target-like distractors drawn beneath the target.
    Clutter {
        count: usize,
        #[serde(default)]
        start: usize,
    },
}

fn one() -> usize {
    1
}

fn default_name() -> String {
    "synthetic".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub target: TargetSpec,
    #[serde(default)]
    pub events: Vec<Event>,
    #[serde(default)]
    pub attributes: Vec<String>,
}

pub fn parse_synth_spec(text: &str) -> Result<SynthSpec> {
    toml::from_str(text).map_err(|e| BenchError::Synth(e.to_string()))
}

fn active(t: usize, start: usize, end: Option<usize>) -> bool {
    t >= start && end.is_none_or(|e| t < e)
}

impl SynthSpec {
    /// Ground-truth box of every frame.
    pub fn trajectory(&self) -> Result<Vec<BoundingBox>> {
        if self.frames == 0 || self.width == 0 || self.height == 0 {
            return Err(BenchError::Synth("frames, width and height must be positive".into()));
        }
        let t0 = &self.target;
        if !(t0.w > 0.0 && t0.h > 0.0) {
            return Err(BenchError::Synth("target size must be positive".into()));
        }
        let mut b = BoundingBox::from_corner(t0.x, t0.y, t0.w, t0.h);
        let mut out = Vec::with_capacity(self.frames);
        for t in 0..self.frames {
            for e in &self.events {
                match *e {
                    Event::Translate { dx, dy, start, end } if active(t, start, end) => {
                        b.cx += dx;
                        b.cy += dy;
                    }
                    Event::Scale { factor, start, end } if active(t, start, end) => {
                        b.w *= factor;
                        b.h *= factor;
                    }
                    _ => {}
                }
            }
            if b.left() < 0.0 || b.top() < 0.0 || b.right() > self.width as f64 || b.bottom() > self.height as f64 {
                return Err(BenchError::Synth(format!("target leaves the canvas at frame {t}")));
            }
            out.push(b);
        }
        Ok(out)
    }
}

/// Saturated tile colors with one dominant channel.
fn palette(rng: &mut ChaCha8Rng) -> Vec<[u8; 3]> {
    let hue = rng.random_range(0..3usize);
    (0..TILES * TILES)
        .map(|_| {
            let mut c = [rng.random_range(20..80u8), rng.random_range(20..80u8), rng.random_range(20..80u8)];
            c[hue] = rng.random_range(190..=250);
            if rng.random_bool(0.3) {
                c[(hue + 1) % 3] = rng.random_range(150..=230);
            }
            c
        })
        .collect()
}

/// Texture of a tiled, striped object at normalized coordinates `(u, v)`.
fn object_pixel(tiles: &[[u8; 3]], u: f64, v: f64) -> [u8; 3] {
    let tx = ((u * TILES as f64) as usize).min(TILES - 1);
    let ty = ((v * TILES as f64) as usize).min(TILES - 1);
    let c = tiles[ty * TILES + tx];
    let stripe = ((u * 12.0 + v * 8.0).floor() as i64).rem_euclid(2) == 0;
    let k = if stripe { 1.0 } else { 0.7 };
    [(c[0] as f64 * k) as u8, (c[1] as f64 * k) as u8, (c[2] as f64 * k) as u8]
}

struct Patch {
    bbox: BoundingBox,
    tiles: Vec<[u8; 3]>,
    start: usize,
}

/// Muted value-noise background.
fn background(width: usize, height: usize, rng: &mut ChaCha8Rng) -> Vec<[u8; 3]> {
    let (lw, lh) = (width / LATTICE + 2, height / LATTICE + 2);
    let lattice: Vec<[f64; 3]> = (0..lw * lh)
        .map(|_| {
            let base = rng.random_range(70.0..150.0);
            [base + rng.random_range(-15.0..15.0), base + rng.random_range(-15.0..15.0), base + rng.random_range(-15.0..15.0)]
        })
        .collect();
    let mut px = Vec::with_capacity(width * height);
    for y in 0..height {
        let fy = y as f64 / LATTICE as f64;
        let (y0, ty) = (fy.floor() as usize, fy.fract());
        for x in 0..width {
            let fx = x as f64 / LATTICE as f64;
            let (x0, tx) = (fx.floor() as usize, fx.fract());
            let mut c = [0u8; 3];
            for (k, out) in c.iter_mut().enumerate() {
                let a = lattice[y0 * lw + x0][k] * (1.0 - tx) + lattice[y0 * lw + x0 + 1][k] * tx;
                let b = lattice[(y0 + 1) * lw + x0][k] * (1.0 - tx) + lattice[(y0 + 1) * lw + x0 + 1][k] * tx;
                *out = (a * (1.0 - ty) + b * ty).round().clamp(0.0, 255.0) as u8;
            }
            px.push(c);
        }
    }
    px
}

fn draw(frame: &mut [[u8; 3]], width: usize, height: usize, b: &BoundingBox, tiles: &[[u8; 3]], hidden: f64) {
    let x0 = b.left().floor().max(0.0) as usize;
    let y0 = b.top().floor().max(0.0) as usize;
    let x1 = (b.right().ceil() as usize).min(width);
    let y1 = (b.bottom().ceil() as usize).min(height);
    for y in y0..y1 {
        let v = (y as f64 + 0.5 - b.top()) / b.h;
        if !(0.0..1.0).contains(&v) {
            continue;
        }
        for x in x0..x1 {
            let u = (x as f64 + 0.5 - b.left()) / b.w;
            if !(0.0..1.0).contains(&u) || u < hidden {
                continue;
            }
            frame[y * width + x] = object_pixel(tiles, u, v);
        }
    }
}

/// Renders the scripted sequence in memory. Identical specs give identical
/// frames.
pub fn synth_sequence(spec: &SynthSpec) -> Result<Sequence> {
    let boxes = spec.trajectory()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bg = background(w, h, &mut rng);
    let target_tiles = palette(&mut rng);
    let mut clutter = Vec::new();
    for e in &spec.events {
        if let Event::Clutter { count, start } = *e {
            for _ in 0..count {
                let (cw, ch) = (spec.target.w.min(w as f64), spec.target.h.min(h as f64));
                let x = rng.random_range(0.0..=(w as f64 - cw));
                let y = rng.random_range(0.0..=(h as f64 - ch));
                clutter.push(Patch { bbox: BoundingBox::from_corner(x, y, cw, ch), tiles: palette(&mut rng), start });
            }
        }
    }
    let mut frames = Vec::with_capacity(spec.frames);
    for (t, b) in boxes.iter().enumerate() {
        let mut px = bg.clone();
        for c in clutter.iter().filter(|c| t >= c.start) {
            draw(&mut px, w, h, &c.bbox, &c.tiles, 0.0);
        }
        let mut hidden: f64 = 0.0;
        let mut gain = 1.0;
        for e in &spec.events {
            match *e {
                Event::Occlude { fraction, start, duration } if t >= start && t < start + duration => {
                    hidden = hidden.max(fraction);
                }
                Event::Gain { factor, start, end } if active(t, start, end) => gain *= factor,
                _ => {}
            }
        }
        draw(&mut px, w, h, b, &target_tiles, hidden);
        // fresh sensor noise every frame
        for p in px.iter_mut() {
            let grain: f64 = rng.random_range(-GRAIN..GRAIN);
            for c in p.iter_mut() {
                *c = (*c as f64 * gain + grain).round().clamp(0.0, 255.0) as u8;
            }
        }
        frames.push(Frame::new(w, h, px).map_err(|e| BenchError::Synth(e.to_string()))?);
    }
    let mut seq = Sequence::new(spec.name.clone(), Frames::Memory(frames), boxes)?;
    seq.attributes = spec.attributes.clone();
    Ok(seq)
}
