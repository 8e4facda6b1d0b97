//! Per-pixel color classifier: each histogram bin carries a weight `beta`
//! estimating how likely a pixel of that color belongs to the target, and the
//! response at a candidate center is the mean weight over a target-sized box.

use crate::features::{color_bin_index, Frame};
use crate::{BoundingBox, Error, RealGrid, Result};
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

/// Histogram layout: joint RGB with `bins^3` cells, or intensity with `bins`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorSpace {
    Rgb { bins: usize },
    Gray { bins: usize },
}

impl ColorSpace {
    /// Joint RGB unless every pixel of `frame` is gray.
    pub fn for_frame(frame: &Frame, bins: usize) -> Self {
        if frame.is_grayscale() {
            ColorSpace::Gray { bins }
        } else {
            ColorSpace::Rgb { bins }
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            ColorSpace::Rgb { bins } => bins * bins * bins,
            ColorSpace::Gray { bins } => bins,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn bin(&self, p: [u8; 3]) -> usize {
        match *self {
            ColorSpace::Rgb { bins } => color_bin_index(p[0], p[1], p[2], bins),
            ColorSpace::Gray { bins } => {
                let v = Float::round(crate::features::luma(p)).clamp(0.0, 255.0) as usize;
                v * bins / 256
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorModel {
    space: ColorSpace,
    lambda_hist: f64,
    fg_prop: Vec<f64>,
    bg_prop: Vec<f64>,
    beta: Vec<f64>,
}

impl ColorModel {
    /// Builds a model directly from region proportions.
    pub fn from_proportions(space: ColorSpace, fg_prop: Vec<f64>, bg_prop: Vec<f64>, lambda_hist: f64) -> Result<Self> {
        if fg_prop.len() != space.len() || bg_prop.len() != space.len() {
            return Err(Error::InvalidArgument("proportion vectors must have one entry per bin"));
        }
        if !(lambda_hist >= 0.0) {
            return Err(Error::InvalidArgument("histogram regularizer must be non-negative"));
        }
        let mut model = ColorModel { space, lambda_hist, fg_prop, bg_prop, beta: vec![0.0; space.len()] };
        model.recompute_beta();
        Ok(model)
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn lambda_hist(&self) -> f64 {
        self.lambda_hist
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn fg_prop(&self) -> &[f64] {
        &self.fg_prop
    }

    pub fn bg_prop(&self) -> &[f64] {
        &self.bg_prop
    }

    #[inline]
    pub fn likelihood(&self, p: [u8; 3]) -> f64 {
        self.beta[self.space.bin(p)]
    }

    fn recompute_beta(&mut self) {
        for ((b, &o), &g) in self.beta.iter_mut().zip(&self.fg_prop).zip(&self.bg_prop) {
            let den = o + g + self.lambda_hist;
            *b = if den > 0.0 { o / den } else { 0.0 };
        }
    }

    /// Blends the region proportions towards `new` with rate `theta`.
    pub fn blend(&mut self, new: &ColorModel, theta: f64) -> Result<()> {
        if new.space != self.space {
            return Err(Error::InvalidArgument("color models use different histograms"));
        }
        let keep = 1.0 - theta;
        for (a, b) in self.fg_prop.iter_mut().zip(&new.fg_prop) {
            *a = keep * *a + theta * b;
        }
        for (a, b) in self.bg_prop.iter_mut().zip(&new.bg_prop) {
            *a = keep * *a + theta * b;
        }
        self.recompute_beta();
        Ok(())
    }
}

#[inline]
fn center_inside(x: usize, y: usize, b: &BoundingBox) -> bool {
    let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
    px >= b.left() && px < b.right() && py >= b.top() && py < b.bottom()
}

/// Fits per-bin weights from the pixels whose centers fall inside `fg`
/// (target) and inside `outer` but outside `fg` (background). Boxes are in
/// patch pixel coordinates.
///
/// Each bin minimizes `rho_O (beta - 1)^2 + rho_B beta^2 + lambda_hist beta^2`.
pub fn fit_color_weights(
    patch: &Frame,
    fg: &BoundingBox,
    outer: &BoundingBox,
    space: ColorSpace,
    lambda_hist: f64,
) -> Result<ColorModel> {
    let mut fg_count = vec![0.0; space.len()];
    let mut bg_count = vec![0.0; space.len()];
    let (mut n_fg, mut n_bg) = (0usize, 0usize);
    for y in 0..patch.height() {
        for x in 0..patch.width() {
            let bin = space.bin(patch.pixel(x, y));
            if center_inside(x, y, fg) {
                fg_count[bin] += 1.0;
                n_fg += 1;
            } else if center_inside(x, y, outer) {
                bg_count[bin] += 1.0;
                n_bg += 1;
            }
        }
    }
    if n_fg == 0 {
        return Err(Error::EmptyRegion("foreground"));
    }
    if n_bg == 0 {
        return Err(Error::EmptyRegion("background"));
    }
    for v in fg_count.iter_mut() {
        *v /= n_fg as f64;
    }
    for v in bg_count.iter_mut() {
        *v /= n_bg as f64;
    }
    ColorModel::from_proportions(space, fg_count, bg_count, lambda_hist)
}

/// Returns `model` with its proportions blended towards `new` at rate `theta`.
pub fn update_color_weights(model: &ColorModel, new: &ColorModel, theta: f64) -> Result<ColorModel> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidArgument("learning rate must lie in [0, 1]"));
    }
    let mut next = model.clone();
    next.blend(new, theta)?;
    Ok(next)
}

/// Per-pixel weight map `beta[bin(pixel)]`.
pub fn likelihood_map(patch: &Frame, model: &ColorModel) -> RealGrid {
    RealGrid::from_fn(patch.width(), patch.height(), |x, y| model.likelihood(patch.pixel(x, y)))
}

/// Summed-area table with a zero first row and column.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    width: usize,
    sums: Vec<f64>,
}

impl IntegralImage {
    pub fn new(grid: &RealGrid) -> Self {
        let (w, h) = (grid.cols, grid.rows);
        let stride = w + 1;
        let mut sums = vec![0.0; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += grid.get(x, y);
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        IntegralImage { width: w, sums }
    }

    /// Sum over `x0..x1`, `y0..y1` (exclusive ends).
    pub fn sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        let s = self.width + 1;
        self.sums[y1 * s + x1] - self.sums[y0 * s + x1] - self.sums[y1 * s + x0] + self.sums[y0 * s + x0]
    }
}

/// Mean of `grid` over a `box_w x box_h` window centered on every cell; the
/// window is clipped to the grid and the mean taken over the cells it keeps.
/// Box sides are rounded to the nearest odd count so windows stay centered.
pub fn box_mean(grid: &RealGrid, box_w: f64, box_h: f64) -> RealGrid {
    let half = |v: f64| Float::round((v.max(1.0) - 1.0) / 2.0) as usize;
    let (hw, hh) = (half(box_w), half(box_h));
    let table = IntegralImage::new(grid);
    RealGrid::from_fn(grid.cols, grid.rows, |x, y| {
        let x0 = x.saturating_sub(hw);
        let y0 = y.saturating_sub(hh);
        let x1 = (x + hw + 1).min(grid.cols);
        let y1 = (y + hh + 1).min(grid.rows);
        table.sum(x0, y0, x1, y1) / ((x1 - x0) * (y1 - y0)) as f64
    })
}

/// Regular sample lattice in patch pixel coordinates: sample `(i, j)` sits
/// at `origin + (i, j) * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub cols: usize,
    pub rows: usize,
    pub origin: (f64, f64),
    pub step: f64,
}

/// Box-filtered color likelihood sampled bilinearly on `grid`.
pub fn color_response(patch: &Frame, model: &ColorModel, target_w: f64, target_h: f64, grid: &SampleGrid) -> RealGrid {
    let means = box_mean(&likelihood_map(patch, model), target_w, target_h);
    RealGrid::from_fn(grid.cols, grid.rows, |i, j| {
        let px = grid.origin.0 + i as f64 * grid.step;
        let py = grid.origin.1 + j as f64 * grid.step;
        sample_bilinear(&means, px, py)
    })
}

/// Bilinear sample at continuous pixel coordinate `(px, py)`; cell `k` is
/// centered at `k + 0.5`. Positions outside clamp to the border.
pub fn sample_bilinear(grid: &RealGrid, px: f64, py: f64) -> f64 {
    let fx = (px - 0.5).clamp(0.0, (grid.cols - 1) as f64);
    let fy = (py - 0.5).clamp(0.0, (grid.rows - 1) as f64);
    let (x0, y0) = (Float::floor(fx) as usize, Float::floor(fy) as usize);
    let (x1, y1) = ((x0 + 1).min(grid.cols - 1), (y0 + 1).min(grid.rows - 1));
    let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
    let top = grid.get(x0, y0) * (1.0 - tx) + grid.get(x1, y0) * tx;
    let bot = grid.get(x0, y1) * (1.0 - tx) + grid.get(x1, y1) * tx;
    top * (1.0 - ty) + bot * ty
}
