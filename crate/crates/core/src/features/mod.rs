//! Image patches and the per-cell feature representations fed to the
//! correlation filter and the color model.

mod hog;

pub use hog::{hog_channel_count, hog_features, HOG_TRUNCATION};

use crate::{BoundingBox, Error, RealGrid, Result};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

/// 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("frame dimensions must be positive"));
        }
        if pixels.len() != width * height {
            return Err(Error::ShapeMismatch {
                expected: (width, height, 3),
                found: (pixels.len(), 1, 3),
            });
        }
        Ok(Frame { width, height, pixels })
    }

    /// Builds a frame with `r = g = b` from an 8-bit gray buffer.
    pub fn from_gray(width: usize, height: usize, gray: &[u8]) -> Result<Self> {
        Frame::new(width, height, gray.iter().map(|&v| [v, v, v]).collect())
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0);
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Frame { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [[u8; 3]] {
        &mut self.pixels
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    /// True when every pixel has equal channels.
    pub fn is_grayscale(&self) -> bool {
        self.pixels.iter().all(|p| p[0] == p[1] && p[1] == p[2])
    }

    /// Luma (`0.299 R + 0.587 G + 0.114 B`) on the 0..255 scale.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.pixels.iter().map(|&p| luma(p)).collect(),
        }
    }
}

#[inline]
pub fn luma(p: [u8; 3]) -> f64 {
    0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64
}

/// Single-channel real image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl GrayImage {
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        GrayImage { width, height, data }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

/// Per-cell feature stack. Channels are stored as consecutive row-major planes.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub cols: usize,
    pub rows: usize,
    pub channels: usize,
    pub data: Vec<f64>,
    /// Pixels per cell.
    pub cell_size: f64,
    /// Coordinate of the center of cell (0, 0).
    pub origin: (f64, f64),
}

impl FeatureMap {
    pub fn zeros(cols: usize, rows: usize, channels: usize, cell_size: f64) -> Self {
        FeatureMap {
            cols,
            rows,
            channels,
            data: vec![0.0; cols * rows * channels],
            cell_size,
            origin: (cell_size / 2.0, cell_size / 2.0),
        }
    }

    pub fn cells(&self) -> usize {
        self.cols * self.rows
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.cells();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.cells();
        &mut self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[c * self.cells() + y * self.cols + x]
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.cols, self.rows, self.channels)
    }

    /// Extracts one channel as its own map.
    pub fn single_channel(&self, c: usize) -> FeatureMap {
        FeatureMap {
            cols: self.cols,
            rows: self.rows,
            channels: 1,
            data: self.channel(c).to_vec(),
            cell_size: self.cell_size,
            origin: self.origin,
        }
    }

    /// Concatenates channel stacks that share one grid.
    pub fn stack(maps: &[&FeatureMap]) -> Result<FeatureMap> {
        let first = maps.first().ok_or(Error::InvalidArgument("no feature maps to stack"))?;
        let mut data = Vec::new();
        let mut channels = 0;
        for m in maps {
            if m.cols != first.cols || m.rows != first.rows {
                return Err(Error::ShapeMismatch {
                    expected: (first.cols, first.rows, m.channels),
                    found: m.shape(),
                });
            }
            data.extend_from_slice(&m.data);
            channels += m.channels;
        }
        Ok(FeatureMap {
            cols: first.cols,
            rows: first.rows,
            channels,
            data,
            cell_size: first.cell_size,
            origin: first.origin,
        })
    }

    /// Multiplies every channel by a spatial window of the same grid.
    pub fn apply_window(&mut self, window: &RealGrid) -> Result<()> {
        if window.cols != self.cols || window.rows != self.rows {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                found: (window.cols, window.rows, self.channels),
            });
        }
        let n = self.cells();
        for plane in self.data.chunks_mut(n) {
            for (v, w) in plane.iter_mut().zip(&window.data) {
                *v *= w;
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Samples the region under `bbox` onto an `out_w x out_h` grid with bilinear
/// interpolation; samples outside the frame replicate the nearest border pixel.
pub fn extract_patch(frame: &Frame, bbox: &BoundingBox, out_w: usize, out_h: usize) -> Frame {
    assert!(out_w >= 1 && out_h >= 1, "output patch must be non-empty");
    let w = bbox.w.max(1.0);
    let h = bbox.h.max(1.0);
    let left = bbox.cx - w / 2.0;
    let top = bbox.cy - h / 2.0;
    let xs = sample_positions(left, w, out_w, frame.width);
    let ys = sample_positions(top, h, out_h, frame.height);
    let mut pixels = Vec::with_capacity(out_w * out_h);
    for &(y0, y1, fy) in &ys {
        let row0 = &frame.pixels[y0 * frame.width..(y0 + 1) * frame.width];
        let row1 = &frame.pixels[y1 * frame.width..(y1 + 1) * frame.width];
        for &(x0, x1, fx) in &xs {
            let mut px = [0u8; 3];
            for (c, out) in px.iter_mut().enumerate() {
                let top = row0[x0][c] as f64 * (1.0 - fx) + row0[x1][c] as f64 * fx;
                let bot = row1[x0][c] as f64 * (1.0 - fx) + row1[x1][c] as f64 * fx;
                let v = top * (1.0 - fy) + bot * fy;
                *out = Float::round(v).clamp(0.0, 255.0) as u8;
            }
            pixels.push(px);
        }
    }
    Frame { width: out_w, height: out_h, pixels }
}

/// For each output sample: the two source indices and the weight of the second.
fn sample_positions(start: f64, extent: f64, count: usize, size: usize) -> Vec<(usize, usize, f64)> {
    let step = extent / count as f64;
    let last = (size - 1) as f64;
    (0..count)
        .map(|i| {
            // pixel i covers [i, i+1); its center sits at i + 0.5
            let p = (start + (i as f64 + 0.5) * step - 0.5).clamp(0.0, last);
            let i0 = Float::floor(p) as usize;
            let i1 = (i0 + 1).min(size - 1);
            (i0, i1, p - i0 as f64)
        })
        .collect()
}

/// Separable raised-cosine window, zero at the borders and one at the center.
pub fn hann_window(cols: usize, rows: usize) -> RealGrid {
    let wx = hann_1d(cols);
    let wy = hann_1d(rows);
    RealGrid::from_fn(cols, rows, |x, y| wx[x] * wy[y])
}

pub fn hann_1d(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 * (1.0 - Float::cos(2.0 * PI * i as f64 / (n - 1) as f64)))
        .collect()
}

/// Joint RGB histogram bin, `br * B^2 + bg * B + bb` with `bc = c * B / 256`.
#[inline]
pub fn color_bin_index(r: u8, g: u8, b: u8, bins_per_channel: usize) -> usize {
    let q = |c: u8| c as usize * bins_per_channel / 256;
    (q(r) * bins_per_channel + q(g)) * bins_per_channel + q(b)
}

/// Per-cell mean intensity, minus the patch mean, scaled so the full 8-bit
/// difference range maps onto `[-0.5, 0.5]`.
pub fn gray_features(patch: &GrayImage, cell_size: usize) -> Result<FeatureMap> {
    check_divisible(patch.width, patch.height, cell_size)?;
    let cols = patch.width / cell_size;
    let rows = patch.height / cell_size;
    let mut map = FeatureMap::zeros(cols, rows, 1, cell_size as f64);
    let norm = 1.0 / (cell_size * cell_size) as f64;
    for y in 0..patch.height {
        let cy = y / cell_size;
        for x in 0..patch.width {
            map.data[cy * cols + x / cell_size] += patch.data[y * patch.width + x] * norm;
        }
    }
    let mean = map.data.iter().sum::<f64>() / map.data.len() as f64;
    for v in map.data.iter_mut() {
        *v = (*v - mean) / 510.0;
    }
    Ok(map)
}

pub(crate) fn check_divisible(width: usize, height: usize, cell_size: usize) -> Result<()> {
    if cell_size == 0 || width % cell_size != 0 || height % cell_size != 0 || width == 0 || height == 0 {
        return Err(Error::NotDivisible { width, height, cell_size });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn checker(n: usize) -> Frame {
        Frame::from_fn(n, n, |x, y| {
            let v = ((x * 37 + y * 91) % 251) as u8;
            [v, v.wrapping_mul(3), 255 - v]
        })
    }

    #[test]
    fn identity_patch() {
        let f = checker(32);
        let bb = BoundingBox::from_corner(0.0, 0.0, 32.0, 32.0);
        assert_eq!(extract_patch(&f, &bb, 32, 32), f);
    }

    #[test]
    fn box_at_origin_replicates_corner() {
        let f = checker(20);
        let bb = BoundingBox::new(0.0, 0.0, 10.0, 10.0);
        let p = extract_patch(&f, &bb, 10, 10);
        for y in 0..5 {
            for x in 0..5 {
                assert_eq!(p.pixel(x, y), f.pixel(0, 0));
            }
        }
    }

    #[test]
    fn bilinear_upsample_of_two_by_two() {
        let vals = [[0u8, 200u8], [100u8, 40u8]];
        let f = Frame::from_fn(2, 2, |x, y| {
            let v = vals[y][x];
            [v, v, v]
        });
        let bb = BoundingBox::from_corner(0.0, 0.0, 2.0, 2.0);
        let p = extract_patch(&f, &bb, 4, 4);
        // independent evaluation: output sample k sits at pixel coordinate (k + 0.5) / 2 - 0.5
        for j in 0..4 {
            for i in 0..4 {
                let u = ((i as f64 + 0.5) / 2.0 - 0.5).clamp(0.0, 1.0);
                let v = ((j as f64 + 0.5) / 2.0 - 0.5).clamp(0.0, 1.0);
                let expect = vals[0][0] as f64 * (1.0 - u) * (1.0 - v)
                    + vals[0][1] as f64 * u * (1.0 - v)
                    + vals[1][0] as f64 * (1.0 - u) * v
                    + vals[1][1] as f64 * u * v;
                assert_eq!(p.pixel(i, j)[0], expect.round() as u8, "sample ({i},{j})");
            }
        }
        // the corner samples are clamped onto the corner pixels
        assert_eq!(p.pixel(0, 0)[0], 0);
        assert_eq!(p.pixel(3, 3)[0], 40);
    }

    #[test]
    fn extract_is_idempotent_under_identity_box() {
        let f = checker(40);
        let bb = BoundingBox::new(17.3, 22.1, 23.0, 11.0);
        let p = extract_patch(&f, &bb, 31, 17);
        let whole = BoundingBox::from_corner(0.0, 0.0, 31.0, 17.0);
        assert_eq!(extract_patch(&p, &whole, 31, 17), p);
    }

    #[test]
    fn hann_cases() {
        assert_eq!(hann_window(1, 1).data, vec![1.0]);
        let w = hann_window(5, 5);
        assert!((w.get(2, 2) - 1.0).abs() < 1e-15);
        assert_eq!(w.get(0, 2), 0.0);
        for (x, y) in [(0, 0), (4, 0), (0, 4), (4, 4)] {
            assert_eq!(w.get(x, y), 0.0);
        }
        let w = hann_window(7, 4);
        let (px, py) = (hann_1d(7), hann_1d(4));
        for y in 0..4 {
            for x in 0..7 {
                assert_eq!(w.get(x, y), px[x] * py[y]);
                assert!((0.0..=1.0).contains(&w.get(x, y)));
            }
        }
    }

    #[test]
    fn color_bins() {
        assert_eq!(color_bin_index(0, 0, 0, 32), 0);
        assert_eq!(color_bin_index(255, 255, 255, 32), 32767);
        assert_eq!(color_bin_index(128, 0, 255, 32), 16 * 1024 + 31);
        assert_eq!(color_bin_index(255, 255, 255, 8), 511);
    }

    proptest! {
        #[test]
        fn color_bin_monotone(r in 0u8..255, g: u8, b: u8, bins in prop::sample::select(vec![8usize, 16, 32])) {
            prop_assert!(color_bin_index(r + 1, g, b, bins) >= color_bin_index(r, g, b, bins));
            prop_assert!(color_bin_index(g, r + 1, b, bins) >= color_bin_index(g, r, b, bins));
            prop_assert!(color_bin_index(g, b, r + 1, bins) >= color_bin_index(g, b, r, bins));
            prop_assert!(color_bin_index(r, g, b, bins) < bins * bins * bins);
        }
    }

    #[test]
    fn gray_feature_cases() {
        let flat = GrayImage::from_fn(8, 8, |_, _| 77.0);
        let m = gray_features(&flat, 4).unwrap();
        assert_eq!(m.shape(), (2, 2, 1));
        assert!(m.data.iter().all(|&v| v == 0.0));

        let two_tone = GrayImage::from_fn(8, 8, |x, _| if x < 4 { 0.0 } else { 255.0 });
        let m = gray_features(&two_tone, 4).unwrap();
        assert_eq!(m.data, vec![-0.25, 0.25, -0.25, 0.25]);

        assert!(matches!(gray_features(&flat, 3), Err(Error::NotDivisible { .. })));
    }
}
