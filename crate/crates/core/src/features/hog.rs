//! Felzenszwalb-style HOG: per cell, `2n` contrast-sensitive orientation
//! channels, `n` contrast-insensitive ones and 4 gradient-energy (texture)
//! channels, each normalized against the four 2x2 cell blocks that contain
//! the cell. With `n = 9` this is the usual 31-channel descriptor.

use super::{check_divisible, FeatureMap, GrayImage};
use crate::Result;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

/// Clipping level applied to every normalized histogram entry.
pub const HOG_TRUNCATION: f64 = 0.2;

const EPS: f64 = 1e-4;
const TEXTURE_WEIGHT: f64 = 0.2357;

/// Block offsets used for normalization, in output texture-channel order.
pub(super) const QUADRANTS: [(isize, isize); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

pub fn hog_channel_count(orientations: usize) -> usize {
    3 * orientations + 4
}

pub fn hog_features(patch: &GrayImage, cell_size: usize, orientations: usize) -> Result<FeatureMap> {
    check_divisible(patch.width, patch.height, cell_size)?;
    assert!(orientations >= 1);
    let cols = patch.width / cell_size;
    let rows = patch.height / cell_size;
    let hist = cell_histograms(patch, cell_size, orientations);
    Ok(normalize(&hist, cols, rows, orientations, cell_size))
}

/// Raw magnitude-weighted signed orientation histograms, cell-major with
/// `2 * orientations` bins per cell.
pub(crate) fn cell_histograms(patch: &GrayImage, cell_size: usize, orientations: usize) -> Vec<f64> {
    let (w, h) = (patch.width, patch.height);
    let cols = w / cell_size;
    let rows = h / cell_size;
    let nbins = 2 * orientations;
    let dirs: Vec<(f64, f64)> = (0..orientations)
        .map(|o| {
            let a = o as f64 * PI / orientations as f64;
            (Float::cos(a), Float::sin(a))
        })
        .collect();
    let mut hist = vec![0.0; cols * rows * nbins];
    let inv_cell = 1.0 / cell_size as f64;
    // spatial bilinear weights only depend on the coordinate along each axis
    let axis = |n: usize| -> Vec<(isize, f64)> {
        (0..n)
            .map(|i| {
                let p = (i as f64 + 0.5) * inv_cell - 0.5;
                let ip = Float::floor(p);
                (ip as isize, p - ip)
            })
            .collect()
    };
    let xw = axis(w);
    let yw = axis(h);
    let d = &patch.data;
    for y in 0..h {
        let up = if y == 0 { 0 } else { y - 1 };
        let down = (y + 1).min(h - 1);
        let (iy, fy) = yw[y];
        for x in 0..w {
            let left = if x == 0 { 0 } else { x - 1 };
            let right = (x + 1).min(w - 1);
            let gx = d[y * w + right] - d[y * w + left];
            let gy = d[down * w + x] - d[up * w + x];
            let mag2 = gx * gx + gy * gy;
            if mag2 == 0.0 {
                continue;
            }
            let mag = Float::sqrt(mag2);
            let mut best = 0.0;
            let mut best_o = 0;
            for (o, &(c, s)) in dirs.iter().enumerate() {
                let dot = c * gx + s * gy;
                if dot > best {
                    best = dot;
                    best_o = o;
                } else if -dot > best {
                    best = -dot;
                    best_o = o + orientations;
                }
            }
            let (ix, fx) = xw[x];
            for (dy, wy) in [(0isize, 1.0 - fy), (1, fy)] {
                let cy = iy + dy;
                if cy < 0 || cy >= rows as isize || wy == 0.0 {
                    continue;
                }
                for (dx, wx) in [(0isize, 1.0 - fx), (1, fx)] {
                    let cx = ix + dx;
                    if cx < 0 || cx >= cols as isize || wx == 0.0 {
                        continue;
                    }
                    hist[(cy as usize * cols + cx as usize) * nbins + best_o] += wx * wy * mag;
                }
            }
        }
    }
    hist
}

fn normalize(hist: &[f64], cols: usize, rows: usize, n: usize, cell_size: usize) -> FeatureMap {
    let nbins = 2 * n;
    let energy: Vec<f64> = hist
        .chunks(nbins)
        .map(|h| (0..n).map(|o| (h[o] + h[o + n]) * (h[o] + h[o + n])).sum())
        .collect();
    let at = |x: isize, y: isize| -> f64 {
        let x = x.clamp(0, cols as isize - 1) as usize;
        let y = y.clamp(0, rows as isize - 1) as usize;
        energy[y * cols + x]
    };
    let channels = hog_channel_count(n);
    let mut out = FeatureMap::zeros(cols, rows, channels, cell_size as f64);
    let plane = cols * rows;
    for y in 0..rows {
        for x in 0..cols {
            let (xi, yi) = (x as isize, y as isize);
            let mut inv = [0.0; 4];
            for (q, &(sx, sy)) in QUADRANTS.iter().enumerate() {
                let e = at(xi, yi) + at(xi + sx, yi) + at(xi, yi + sy) + at(xi + sx, yi + sy);
                inv[q] = 1.0 / Float::sqrt(e + EPS);
            }
            let cell = y * cols + x;
            let h = &hist[cell * nbins..(cell + 1) * nbins];
            let mut texture = [0.0; 4];
            for (o, &v) in h.iter().enumerate() {
                let mut acc = 0.0;
                for q in 0..4 {
                    let t = (v * inv[q]).min(HOG_TRUNCATION);
                    acc += t;
                    texture[q] += t;
                }
                out.data[o * plane + cell] = 0.5 * acc;
            }
            for o in 0..n {
                let s = h[o] + h[o + n];
                let acc: f64 = inv.iter().map(|&k| (s * k).min(HOG_TRUNCATION)).sum();
                out.data[(nbins + o) * plane + cell] = 0.5 * acc;
            }
            for q in 0..4 {
                out.data[(3 * n + q) * plane + cell] = (TEXTURE_WEIGHT * texture[q]).min(1.0);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_patch(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(w, h, |_, _| rng.random_range(0.0..255.0))
    }

    #[test]
    fn constant_patch_is_zero() {
        let p = GrayImage::from_fn(16, 16, |_, _| 123.0);
        let f = hog_features(&p, 4, 9).unwrap();
        assert!(f.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_contract() {
        let p = random_patch(16, 16, 1);
        let f = hog_features(&p, 4, 9).unwrap();
        assert_eq!(f.shape(), (4, 4, 31));
        assert!(f.data.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(hog_features(&random_patch(18, 16, 1), 4, 9).is_err());
    }

    #[test]
    fn horizontal_ramp_votes_vertical_edge_bin() {
        let p = GrayImage::from_fn(32, 24, |x, _| 7.0 * x as f64);
        let f = hog_features(&p, 4, 9).unwrap();
        // direct gradient oracle: every pixel has gradient (+g, 0), i.e. orientation 0
        let plane = f.cells();
        for cell in 0..plane {
            let signed: Vec<f64> = (0..18).map(|o| f.data[o * plane + cell]).collect();
            let total: f64 = signed.iter().sum();
            if total > 0.0 {
                assert!(signed[0] / total >= 0.95, "cell {cell}: {signed:?}");
            }
        }
        let hist = cell_histograms(&p, 4, 9);
        for h in hist.chunks(18) {
            let total: f64 = h.iter().sum();
            assert!(h[0] >= 0.95 * total);
        }
    }

    #[test]
    fn invariant_to_intensity_offset() {
        let p = random_patch(24, 20, 9);
        let q = GrayImage { data: p.data.iter().map(|v| v + 40.0).collect(), ..p.clone() };
        let a = hog_features(&p, 4, 9).unwrap();
        let b = hog_features(&q, 4, 9).unwrap();
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn rotation_by_180_permutes_channels() {
        let n = 9;
        let p = random_patch(24, 20, 21);
        let r = GrayImage::from_fn(24, 20, |x, y| p.get(23 - x, 19 - y));
        let a = hog_features(&p, 4, n).unwrap();
        let b = hog_features(&r, 4, n).unwrap();
        let (cols, rows) = (a.cols, a.rows);
        let channel_map = |c: usize| -> usize {
            if c < 2 * n {
                (c + n) % (2 * n)
            } else if c < 3 * n {
                c
            } else {
                // quadrant (sx, sy) becomes (-sx, -sy)
                3 * n + (3 - (c - 3 * n))
            }
        };
        for c in 0..a.channels {
            for y in 0..rows {
                for x in 0..cols {
                    let va = a.get(x, y, c);
                    let vb = b.get(cols - 1 - x, rows - 1 - y, channel_map(c));
                    assert!((va - vb).abs() < 1e-9, "c={c} ({x},{y}) {va} vs {vb}");
                }
            }
        }
    }
}
