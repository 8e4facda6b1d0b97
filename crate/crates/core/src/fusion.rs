//! Confidence of a response map (average peak-to-correlation energy), the
//! confidence-driven blend of filter and color responses, and the gate that
//! suppresses model updates on unreliable frames.

use crate::corrfilter::ResponseMap;
use crate::{Error, RealGrid, Result};
use alloc::vec::Vec;
use num_traits::Float;

/// `(max - min)^2 / mean((F - min)^2)`; zero for a constant map.
pub fn apce(grid: &RealGrid) -> f64 {
    assert!(!grid.is_empty(), "apce of an empty response");
    let (hi, lo) = (grid.max(), grid.min());
    let energy = grid.data.iter().map(|v| (v - lo) * (v - lo)).sum::<f64>() / grid.len() as f64;
    if energy <= 0.0 || !energy.is_finite() {
        return 0.0;
    }
    (hi - lo) * (hi - lo) / energy
}

/// Append-only record of per-frame confidence values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfidenceHistory {
    values: Vec<f64>,
    sum: f64,
}

impl ConfidenceHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, apce: f64) {
        self.values.push(apce);
        self.sum += apce;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.sum / self.values.len() as f64)
        }
    }
}

/// Current confidence over the mean of the history including it; 1 when there
/// is no history or all values are zero.
pub fn relative_confidence(apce_t: f64, history: &ConfidenceHistory) -> f64 {
    let mean = (history.sum + apce_t) / (history.len() + 1) as f64;
    if history.is_empty() || !(mean > 0.0) {
        1.0
    } else {
        apce_t / mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionParams {
    /// Base color weight; the adaptive weight ranges over `(0, 2 alpha)`.
    pub alpha: f64,
    /// Sensitivity of the weight to relative confidence.
    pub rho: f64,
    /// Lower the color weight when confidence is high instead of raising it.
    pub invert_confidence: bool,
    /// When false the weight stays at `alpha`.
    pub adaptive: bool,
}

impl Default for FusionParams {
    fn default() -> Self {
        FusionParams { alpha: 0.25, rho: 1.0, invert_confidence: false, adaptive: true }
    }
}

/// `2 alpha / (1 + exp(rho (1 - r_t)))`, or with the exponent negated when
/// `invert_confidence` is set.
pub fn adaptive_alpha(r_t: f64, params: &FusionParams) -> f64 {
    if !params.adaptive {
        return params.alpha;
    }
    let sign = if params.invert_confidence { -1.0 } else { 1.0 };
    2.0 * params.alpha / (1.0 + Float::exp(sign * params.rho * (1.0 - r_t)))
}

/// Pointwise `(1 - alpha_t) cf + alpha_t hist`; the result keeps `cf`'s geometry.
pub fn fuse_responses(cf: &ResponseMap, hist: &ResponseMap, alpha_t: f64) -> Result<ResponseMap> {
    if !cf.grid.same_shape(&hist.grid) {
        return Err(Error::ShapeMismatch {
            expected: (cf.grid.cols, cf.grid.rows, 1),
            found: (hist.grid.cols, hist.grid.rows, 1),
        });
    }
    if !(0.0..=1.0).contains(&alpha_t) {
        return Err(Error::InvalidArgument("fusion weight must lie in [0, 1]"));
    }
    let mut out = cf.clone();
    for (o, h) in out.grid.data.iter_mut().zip(&hist.grid.data) {
        *o = (1.0 - alpha_t) * *o + alpha_t * h;
    }
    Ok(out)
}

/// True when `apce_t` reaches `margin` times the mean of earlier frames, and
/// always on the first frame.
pub fn update_gate(apce_t: f64, history: &ConfidenceHistory, margin: f64) -> bool {
    match history.mean() {
        None => true,
        Some(mean) => apce_t >= margin * mean,
    }
}
