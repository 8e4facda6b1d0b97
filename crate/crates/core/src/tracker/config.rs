use crate::corrfilter::SolverKind;
use crate::{Error, Result};
use alloc::format;
use alloc::string::ToString;

/// How the `D -> C` channel projection is obtained on the first frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionMode {
    /// Principal components refined jointly with the filter.
    #[default]
    Learned,
    /// Principal components only.
    Pca,
    /// No reduction; all channels are kept.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Filter ridge regularizer.
    pub lambda: f64,
    /// Filter learning rate.
    pub eta: f64,
    /// Color model learning rate.
    pub theta: f64,
    /// Histogram bins per color channel.
    pub bins: usize,
    pub alpha: f64,
    pub rho: f64,
    pub invert_confidence: bool,
    pub adaptive_fusion: bool,
    pub gate_margin: f64,
    /// Projected channel count.
    pub c_dim: usize,
    pub projection: ProjectionMode,
    pub lambda_p: f64,
    pub gn_iters: usize,
    pub cg_iters: usize,
    pub cg_tol: f64,
    pub solver: SolverKind,
    pub n_scales: usize,
    pub scale_step: f64,
    pub scale_penalty: f64,
    /// Bounds on the accumulated scale relative to the first frame.
    pub min_scale: f64,
    pub max_scale: f64,
    /// Context around the target: the search window is `target * (1 + padding)`.
    pub padding: f64,
    pub cell_size: usize,
    /// Pixel area the search window is resampled to.
    pub fixed_area: f64,
    /// Label sigma as a fraction of `sqrt(cols * rows)` of the target in cells.
    pub output_sigma_factor: f64,
    pub hog_orientations: usize,
    pub lambda_hist: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            lambda: 1e-3,
            eta: 0.01,
            theta: 0.04,
            bins: 32,
            alpha: 0.25,
            rho: 1.0,
            invert_confidence: false,
            adaptive_fusion: true,
            gate_margin: 1.0,
            c_dim: 12,
            projection: ProjectionMode::Learned,
            lambda_p: 1e-2,
            gn_iters: 5,
            cg_iters: 20,
            cg_tol: 1e-6,
            solver: SolverKind::Exact,
            n_scales: 5,
            scale_step: 1.02,
            scale_penalty: 1.015,
            min_scale: 0.2,
            max_scale: 5.0,
            padding: 2.0,
            cell_size: 4,
            fixed_area: 150.0 * 150.0,
            output_sigma_factor: 1.0 / 16.0,
            hog_orientations: 9,
            lambda_hist: 1e-3,
        }
    }
}

fn parse<T: core::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::InvalidConfig(format!("invalid value {value:?} for {key}")))
}

impl TrackerConfig {
    /// Sets one option by name from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "lambda" => self.lambda = parse(key, v)?,
            "eta" => self.eta = parse(key, v)?,
            "theta" => self.theta = parse(key, v)?,
            "bins" => self.bins = parse(key, v)?,
            "alpha" => self.alpha = parse(key, v)?,
            "rho" => self.rho = parse(key, v)?,
            "invert_confidence" | "fusion.invert_confidence" => self.invert_confidence = parse(key, v)?,
            "adaptive_fusion" | "fusion.adaptive" => self.adaptive_fusion = parse(key, v)?,
            "gate_margin" => self.gate_margin = parse(key, v)?,
            "c_dim" => self.c_dim = parse(key, v)?,
            "projection" => {
                self.projection = match v {
                    "learned" => ProjectionMode::Learned,
                    "pca" => ProjectionMode::Pca,
                    "identity" => ProjectionMode::Identity,
                    _ => return Err(Error::InvalidConfig(format!("unknown projection mode {v:?}"))),
                }
            }
            "lambda_p" => self.lambda_p = parse(key, v)?,
            "gn_iters" => self.gn_iters = parse(key, v)?,
            "cg_iters" => self.cg_iters = parse(key, v)?,
            "cg_tol" => self.cg_tol = parse(key, v)?,
            "solver" => {
                self.solver = match v {
                    "exact" => SolverKind::Exact,
                    "diagonal" => SolverKind::Diagonal,
                    _ => return Err(Error::InvalidConfig(format!("unknown solver {v:?}"))),
                }
            }
            "n_scales" | "scales" => self.n_scales = parse(key, v)?,
            "scale_step" => self.scale_step = parse(key, v)?,
            "scale_penalty" => self.scale_penalty = parse(key, v)?,
            "min_scale" => self.min_scale = parse(key, v)?,
            "max_scale" => self.max_scale = parse(key, v)?,
            "padding" => self.padding = parse(key, v)?,
            "cell_size" => self.cell_size = parse(key, v)?,
            "fixed_area" => self.fixed_area = parse(key, v)?,
            "output_sigma_factor" => self.output_sigma_factor = parse(key, v)?,
            "hog_orientations" => self.hog_orientations = parse(key, v)?,
            "lambda_hist" => self.lambda_hist = parse(key, v)?,
            other => return Err(Error::InvalidConfig(format!("unknown option {:?}", other.to_string()))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        let rate = |v: f64| (0.0..=1.0).contains(&v);
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be positive");
        }
        if !rate(self.eta) || !rate(self.theta) {
            return bad("learning rates must lie in [0, 1]");
        }
        if !(0.0..=0.5).contains(&self.alpha) || !(self.rho >= 0.0) {
            return bad("alpha must lie in [0, 0.5] and rho must be non-negative");
        }
        if !(self.gate_margin > 0.0) {
            return bad("gate margin must be positive");
        }
        if self.bins == 0 || self.bins > 256 {
            return bad("bins must lie in 1..=256");
        }
        if self.c_dim == 0 {
            return bad("c_dim must be at least 1");
        }
        if self.n_scales == 0 || self.n_scales % 2 == 0 {
            return bad("n_scales must be odd");
        }
        if !(self.scale_step >= 1.0) || !(self.scale_penalty >= 1.0) {
            return bad("scale step and penalty must be at least 1");
        }
        if !(self.min_scale > 0.0) || !(self.max_scale >= self.min_scale) || !(self.min_scale <= 1.0 && self.max_scale >= 1.0) {
            return bad("scale bounds must satisfy 0 < min_scale <= 1 <= max_scale");
        }
        if !(self.padding >= 0.0) || self.cell_size == 0 || !(self.fixed_area >= 64.0) {
            return bad("padding, cell_size or fixed_area out of range");
        }
        if !(self.output_sigma_factor > 0.0) || self.hog_orientations == 0 {
            return bad("output_sigma_factor and hog_orientations must be positive");
        }
        if !(self.lambda_hist >= 0.0) || !(self.lambda_p >= 0.0) || !(self.cg_tol >= 0.0) {
            return bad("regularizers and tolerances must be non-negative");
        }
        Ok(())
    }
}
