//! Initialization and per-frame update of the fused tracker.
//!
//! Each frame: sample the search window at several scales, compute the
//! projected filter response for each and keep the best scale, compute the
//! color response on the same grid, blend the two with a weight driven by the
//! filter's relative confidence, take the blended peak as the new position
//! and, when confidence is high enough, update both models there.

mod config;
mod peak;

pub use config::{ProjectionMode, TrackerConfig};
pub use peak::{locate_peak, peak_cell};

use crate::colormodel::{color_response, fit_color_weights, ColorModel, ColorSpace, SampleGrid};
use crate::corrfilter::{gaussian_label, scale_search, train_filter, FilterModel, GaussianLabel, ResponseMap, ScaleSet};
use crate::features::{extract_patch, gray_features, hann_window, hog_features, FeatureMap, Frame};
use crate::fft::smooth_size_at_most;
use crate::fusion::{adaptive_alpha, apce, fuse_responses, relative_confidence, update_gate, ConfidenceHistory, FusionParams};
use crate::projection::{
    apply_projection, learn_projection, pca_projection, ProjectionInit, ProjectionMatrix, ProjectionParams,
};
use crate::{BoundingBox, Error, RealGrid, Result};
use alloc::vec::Vec;
use num_traits::Float;

const MIN_GRID_CELLS: usize = 4;
const MIN_TARGET_AREA: f64 = 16.0;

/// Per-frame record of the fusion and update decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub apce: f64,
    pub relative_confidence: f64,
    pub alpha: f64,
    /// Whether the models were updated on this frame.
    pub gate: bool,
    /// Relative scale factor chosen on this frame.
    pub scale_step: f64,
    /// Accumulated scale relative to the first frame.
    pub scale: f64,
    /// Maximum of the filter response at the chosen scale.
    pub peak: f64,
    /// The search window reached outside the frame and was border-replicated.
    pub search_clamped: bool,
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub bbox: BoundingBox,
    pub diagnostics: Diagnostics,
}

/// Search-window sampling geometry, fixed at initialization.
#[derive(Debug, Clone)]
struct Layout {
    cols: usize,
    rows: usize,
    cell_size: usize,
    orientations: usize,
    /// Patch pixels per image pixel at scale 1.
    zoom: f64,
    /// Target size in image pixels at scale 1.
    base_target: (f64, f64),
    window: RealGrid,
}

impl Layout {
    fn new(bbox: &BoundingBox, config: &TrackerConfig) -> Self {
        let cell = config.cell_size as f64;
        let search = (bbox.w * (1.0 + config.padding), bbox.h * (1.0 + config.padding));
        let zoom = Float::sqrt(config.fixed_area / (search.0 * search.1));
        let grid_dim =
            |extent: f64| smooth_size_at_most((Float::round(extent * zoom / cell) as usize).max(MIN_GRID_CELLS));
        let (cols, rows) = (grid_dim(search.0), grid_dim(search.1));
        Layout {
            cols,
            rows,
            cell_size: config.cell_size,
            orientations: config.hog_orientations,
            zoom,
            base_target: (bbox.w, bbox.h),
            window: hann_window(cols, rows),
        }
    }

    fn patch_size(&self) -> (usize, usize) {
        (self.cols * self.cell_size, self.rows * self.cell_size)
    }

    fn target_in_patch(&self) -> (f64, f64) {
        (self.base_target.0 * self.zoom, self.base_target.1 * self.zoom)
    }

    fn label_sigma(&self, factor: f64) -> f64 {
        let (tw, th) = self.target_in_patch();
        let cell = self.cell_size as f64;
        Float::sqrt(tw / cell * th / cell) * factor
    }

    fn search_window(&self, center: (f64, f64), scale: f64) -> BoundingBox {
        let (pw, ph) = self.patch_size();
        BoundingBox::new(center.0, center.1, pw as f64 / self.zoom * scale, ph as f64 / self.zoom * scale)
    }

    /// Resampled search patch and its windowed, unprojected features, with
    /// cell geometry expressed in image coordinates.
    fn sample(&self, frame: &Frame, center: (f64, f64), scale: f64) -> Result<(Frame, FeatureMap)> {
        let (pw, ph) = self.patch_size();
        let win = self.search_window(center, scale);
        let patch = extract_patch(frame, &win, pw, ph);
        let mut raw = raw_features(&patch, self.cell_size, self.orientations)?;
        raw.apply_window(&self.window)?;
        let cell = win.w / self.cols as f64;
        raw.cell_size = cell;
        raw.origin = (win.left() + cell / 2.0, win.top() + cell / 2.0);
        Ok((patch, raw))
    }

    /// Target-vs-surroundings color model from a search patch.
    fn fit_color(&self, patch: &Frame, space: ColorSpace, lambda_hist: f64) -> Result<ColorModel> {
        let (pw, ph) = self.patch_size();
        let (tw, th) = self.target_in_patch();
        let (mx, my) = (pw as f64 / 2.0, ph as f64 / 2.0);
        fit_color_weights(
            patch,
            &BoundingBox::new(mx, my, tw, th),
            &BoundingBox::new(mx, my, pw as f64, ph as f64),
            space,
            lambda_hist,
        )
    }

    /// Color response sampled on the filter response grid of the same patch.
    fn color_map(&self, patch: &Frame, color: &ColorModel, like: &ResponseMap) -> ResponseMap {
        let (pw, ph) = self.patch_size();
        let cell = self.cell_size as f64;
        let grid = SampleGrid {
            cols: self.cols,
            rows: self.rows,
            origin: (
                pw as f64 / 2.0 - (self.cols / 2) as f64 * cell,
                ph as f64 / 2.0 - (self.rows / 2) as f64 * cell,
            ),
            step: cell,
        };
        let (tw, th) = self.target_in_patch();
        ResponseMap { grid: color_response(patch, color, tw, th, &grid), cell_size: like.cell_size, origin: like.origin }
    }
}

#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    layout: Layout,
    center: (f64, f64),
    scale: f64,
    label: GaussianLabel,
    projection: ProjectionMatrix,
    filter: FilterModel,
    color: ColorModel,
    history: ConfidenceHistory,
    scales: ScaleSet,
    fusion: FusionParams,
}

/// HOG channels followed by the gray channel, on one cell grid.
pub fn raw_features(patch: &Frame, cell_size: usize, orientations: usize) -> Result<FeatureMap> {
    let gray = patch.to_gray();
    let hog = hog_features(&gray, cell_size, orientations)?;
    let intensity = gray_features(&gray, cell_size)?;
    FeatureMap::stack(&[&hog, &intensity])
}

impl Tracker {
    pub fn new(frame: &Frame, bbox: BoundingBox, config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        if !bbox.is_valid() || bbox.area() < MIN_TARGET_AREA {
            return Err(Error::DegenerateBox);
        }
        let (fw, fh) = (frame.width() as f64, frame.height() as f64);
        if !(bbox.cx >= 0.0 && bbox.cx <= fw && bbox.cy >= 0.0 && bbox.cy <= fh) {
            return Err(Error::DegenerateBox);
        }
        let layout = Layout::new(&bbox, &config);
        let label = gaussian_label(layout.cols, layout.rows, layout.label_sigma(config.output_sigma_factor));
        let center = (bbox.cx, bbox.cy);
        let (patch, raw) = layout.sample(frame, center, 1.0)?;
        let projection = match config.projection {
            ProjectionMode::Identity => ProjectionMatrix::identity(raw.channels),
            ProjectionMode::Pca => pca_projection(core::slice::from_ref(&raw), config.c_dim)?,
            ProjectionMode::Learned => {
                let params = ProjectionParams {
                    c_dim: config.c_dim,
                    lambda: config.lambda,
                    lambda_p: config.lambda_p,
                    gn_iters: config.gn_iters,
                    cg_iters: config.cg_iters,
                    cg_tol: config.cg_tol,
                    init: ProjectionInit::Pca,
                };
                learn_projection(core::slice::from_ref(&raw), core::slice::from_ref(&label.grid), &params)?.projection
            }
        };
        let filter = train_filter(&apply_projection(&raw, &projection)?, &label, config.lambda, config.solver)?;
        let color = layout.fit_color(&patch, ColorSpace::for_frame(frame, config.bins), config.lambda_hist)?;
        Ok(Tracker {
            layout,
            center,
            scale: 1.0,
            label,
            projection,
            filter,
            color,
            history: ConfidenceHistory::new(),
            scales: ScaleSet::pyramid(config.n_scales, config.scale_step, config.scale_penalty),
            fusion: FusionParams {
                alpha: config.alpha,
                rho: config.rho,
                invert_confidence: config.invert_confidence,
                adaptive: config.adaptive_fusion,
            },
            config,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn bbox(&self) -> BoundingBox {
        let (w, h) = self.layout.base_target;
        BoundingBox::new(self.center.0, self.center.1, w * self.scale, h * self.scale)
    }

    /// Feature grid dimensions `(cols, rows)`.
    pub fn grid(&self) -> (usize, usize) {
        (self.layout.cols, self.layout.rows)
    }

    /// Search window in image coordinates for the current state.
    pub fn search_window(&self) -> BoundingBox {
        self.layout.search_window(self.center, self.scale)
    }

    pub fn projection(&self) -> &ProjectionMatrix {
        &self.projection
    }

    pub fn filter(&self) -> &FilterModel {
        &self.filter
    }

    pub fn color(&self) -> &ColorModel {
        &self.color
    }

    pub fn history(&self) -> &ConfidenceHistory {
        &self.history
    }

    /// Filter response at the current state, without updating anything.
    pub fn filter_response(&self, frame: &Frame) -> Result<ResponseMap> {
        let (_, raw) = self.layout.sample(frame, self.center, self.scale)?;
        crate::corrfilter::detect(&self.filter, &apply_projection(&raw, &self.projection)?)
    }

    /// Tracks the target into `frame`.
    pub fn step(&mut self, frame: &Frame) -> Result<StepOutput> {
        let mut patches: Vec<(f64, Frame)> = Vec::with_capacity(self.scales.factors.len());
        let detection = scale_search(&self.filter, &self.scales, |k| {
            let (patch, raw) = self.layout.sample(frame, self.center, self.scale * k)?;
            patches.push((k, patch));
            apply_projection(&raw, &self.projection)
        })?;
        let patch = &patches
            .iter()
            .find(|(k, _)| *k == detection.scale)
            .expect("patch recorded for every searched scale")
            .1;
        let cf = detection.response;
        let hist = self.layout.color_map(patch, &self.color, &cf);

        let apce_t = apce(&cf.grid);
        let r_t = relative_confidence(apce_t, &self.history);
        let alpha_t = adaptive_alpha(r_t, &self.fusion);
        let fused = fuse_responses(&cf, &hist, alpha_t)?;
        let gate = update_gate(apce_t, &self.history, self.config.gate_margin);

        let searched = self.layout.search_window(self.center, self.scale * detection.scale);
        let (fw, fh) = (frame.width() as f64, frame.height() as f64);
        let search_clamped =
            searched.left() < 0.0 || searched.top() < 0.0 || searched.right() > fw || searched.bottom() > fh;

        let (px, py) = locate_peak(&fused);
        self.center = (px.clamp(0.0, fw), py.clamp(0.0, fh));
        self.scale = (self.scale * detection.scale).clamp(self.config.min_scale, self.config.max_scale);

        if gate {
            self.update_models(frame)?;
        }
        self.history.push(apce_t);

        Ok(StepOutput {
            bbox: self.bbox(),
            diagnostics: Diagnostics {
                apce: apce_t,
                relative_confidence: r_t,
                alpha: alpha_t,
                gate,
                scale_step: detection.scale,
                scale: self.scale,
                peak: detection.peak,
                search_clamped,
            },
        })
    }

    fn update_models(&mut self, frame: &Frame) -> Result<()> {
        let (patch, raw) = self.layout.sample(frame, self.center, self.scale)?;
        let projected = apply_projection(&raw, &self.projection)?;
        let fresh_color = self.layout.fit_color(&patch, self.color.space(), self.config.lambda_hist)?;
        self.filter.blend_features(&projected, &self.label, self.config.eta)?;
        self.color.blend(&fresh_color, self.config.theta)?;
        Ok(())
    }
}
