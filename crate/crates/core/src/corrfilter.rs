//! Multi-channel correlation filter learned by ridge regression over all
//! cyclic shifts of a sample, trained and applied in the Fourier domain.
//!
//! Per frequency `u` the filter solves `(s[u] + lambda I) h[u] = r[u]` with
//! `r[u] = conj(x[u]) y[u]` and `s[u] = conj(x[u]) x[u]^T`. Model updates
//! blend `r` and `s` with the running statistics, not the solved filter.

use crate::features::FeatureMap;
use crate::fft::Fft2d;
use crate::linalg::solve_complex_in_place;
use crate::{Error, RealGrid, Result};
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Desired response: a Gaussian with its peak on the zero-shift bin.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLabel {
    pub grid: RealGrid,
    pub sigma: f64,
    spectrum: Vec<Complex64>,
}

impl GaussianLabel {
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }
}

pub fn gaussian_label(cols: usize, rows: usize, sigma: f64) -> GaussianLabel {
    assert!(sigma > 0.0, "label sigma must be positive");
    let grid = RealGrid::from_fn(cols, rows, |x, y| {
        let dx = x.min(cols - x) as f64;
        let dy = y.min(rows - y) as f64;
        Float::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))
    });
    let spectrum = Fft2d::new(cols, rows).forward_real(&grid.data);
    GaussianLabel { grid, sigma, spectrum }
}

/// How the per-frequency system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Full `C x C` Hermitian system per frequency.
    #[default]
    Exact,
    /// Shared scalar denominator `sum_c |x_c|^2` (KCF/DCF-style).
    Diagonal,
}

/// Multi-channel spectrum stored frequency-major: entry `u * channels + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralStack {
    pub cols: usize,
    pub rows: usize,
    pub channels: usize,
    pub data: Vec<Complex64>,
}

impl SpectralStack {
    pub fn zeros(cols: usize, rows: usize, channels: usize) -> Self {
        SpectralStack { cols, rows, channels, data: vec![ZERO; cols * rows * channels] }
    }

    pub fn from_features(fft: &Fft2d, features: &FeatureMap) -> Self {
        let (cols, rows) = (features.cols, features.rows);
        let n = features.cells();
        let c = features.channels;
        let mut data = vec![ZERO; n * c];
        // two real channels per complex transform: z = a + ib, then
        // A[u] = (Z[u] + conj Z[-u]) / 2 and B[u] = (Z[u] - conj Z[-u]) / 2i
        let mut ch = 0;
        while ch < c {
            if ch + 1 == c {
                for (u, v) in fft.forward_real(features.channel(ch)).into_iter().enumerate() {
                    data[u * c + ch] = v;
                }
                break;
            }
            let packed: Vec<Complex64> = features
                .channel(ch)
                .iter()
                .zip(features.channel(ch + 1))
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect();
            let z = fft.forward(&packed);
            for u in 0..n {
                let zm = z[mirror(u, cols, rows)].conj();
                data[u * c + ch] = (z[u] + zm) * 0.5;
                let d = z[u] - zm;
                data[u * c + ch + 1] = Complex64::new(d.im * 0.5, -d.re * 0.5);
            }
            ch += 2;
        }
        SpectralStack { cols, rows, channels: c, data }
    }

    pub fn frequencies(&self) -> usize {
        self.cols * self.rows
    }

    #[inline]
    pub fn at(&self, u: usize) -> &[Complex64] {
        &self.data[u * self.channels..(u + 1) * self.channels]
    }
}

/// Index of the frequency `-u` on a `cols x rows` grid.
#[inline]
fn mirror(u: usize, cols: usize, rows: usize) -> usize {
    let (kx, ky) = (u % cols, u / cols);
    (cols - kx) % cols + (rows - ky) % rows * cols
}

#[derive(Debug, Clone, PartialEq)]
pub enum Denominator {
    /// Row-major `C x C` block per frequency.
    Full(Vec<Complex64>),
    Diagonal(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct FilterModel {
    cols: usize,
    rows: usize,
    channels: usize,
    lambda: f64,
    numerator: Vec<Complex64>,
    denominator: Denominator,
    filter: SpectralStack,
    fft: Fft2d,
}

impl PartialEq for FilterModel {
    fn eq(&self, other: &Self) -> bool {
        self.cols == other.cols
            && self.rows == other.rows
            && self.channels == other.channels
            && self.lambda == other.lambda
            && self.numerator == other.numerator
            && self.denominator == other.denominator
            && self.filter == other.filter
    }
}

impl FilterModel {
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.cols, self.rows, self.channels)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn numerator(&self) -> &[Complex64] {
        &self.numerator
    }

    pub fn denominator(&self) -> &Denominator {
        &self.denominator
    }

    pub fn solver(&self) -> SolverKind {
        match self.denominator {
            Denominator::Full(_) => SolverKind::Exact,
            Denominator::Diagonal(_) => SolverKind::Diagonal,
        }
    }

    /// The solved filter `h[u]`.
    pub fn filter(&self) -> &SpectralStack {
        &self.filter
    }

    pub fn fft(&self) -> &Fft2d {
        &self.fft
    }

    /// Blends in the statistics of `sample` with rate `eta` and re-solves.
    pub fn blend(&mut self, sample: &FilterModel, eta: f64) -> Result<()> {
        if sample.shape() != self.shape() || sample.solver() != self.solver() {
            return Err(Error::ShapeMismatch { expected: self.shape(), found: sample.shape() });
        }
        self.blend_statistics(&sample.numerator, &sample.denominator, eta)
    }

    /// Same as training on `features` and blending the result in, without
    /// solving the intermediate single-sample filter.
    pub fn blend_features(&mut self, features: &FeatureMap, label: &GaussianLabel, eta: f64) -> Result<()> {
        if features.shape() != self.shape() || (label.grid.cols, label.grid.rows) != (self.cols, self.rows) {
            return Err(Error::ShapeMismatch { expected: self.shape(), found: features.shape() });
        }
        let x = SpectralStack::from_features(&self.fft, features);
        let (num, den) = sample_statistics(&[&x], &[label.spectrum()], &[1.0], self.solver());
        self.blend_statistics(&num, &den, eta)
    }

    fn blend_statistics(&mut self, numerator: &[Complex64], denominator: &Denominator, eta: f64) -> Result<()> {
        let keep = 1.0 - eta;
        for (a, b) in self.numerator.iter_mut().zip(numerator) {
            *a = *a * keep + *b * eta;
        }
        match (&mut self.denominator, denominator) {
            (Denominator::Full(a), Denominator::Full(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = *x * keep + *y * eta;
                }
            }
            (Denominator::Diagonal(a), Denominator::Diagonal(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = *x * keep + *y * eta;
                }
            }
            _ => return Err(Error::InvalidArgument("solver kinds differ")),
        }
        self.solve()
    }

    fn solve(&mut self) -> Result<()> {
        let c = self.channels;
        let n = self.cols * self.rows;
        let lambda = self.lambda;
        match &self.denominator {
            Denominator::Diagonal(d) => {
                for u in 0..n {
                    let inv = 1.0 / (d[u] + lambda);
                    for ch in 0..c {
                        self.filter.data[u * c + ch] = self.numerator[u * c + ch] * inv;
                    }
                }
            }
            Denominator::Full(s) => {
                let mut a = vec![ZERO; c * c];
                for u in 0..n {
                    // statistics of real signals are conjugate-symmetric
                    let m = mirror(u, self.cols, self.rows);
                    if m < u {
                        for ch in 0..c {
                            self.filter.data[u * c + ch] = self.filter.data[m * c + ch].conj();
                        }
                        continue;
                    }
                    a.copy_from_slice(&s[u * c * c..(u + 1) * c * c]);
                    for i in 0..c {
                        a[i * c + i] += lambda;
                    }
                    let h = &mut self.filter.data[u * c..(u + 1) * c];
                    h.copy_from_slice(&self.numerator[u * c..(u + 1) * c]);
                    if !solve_complex_in_place(&mut a, h, c) {
                        return Err(Error::NonFinite("per-frequency filter solve"));
                    }
                }
            }
        }
        if self.filter.data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("filter"));
        }
        Ok(())
    }
}

/// Accumulates the ridge statistics of one or more weighted samples.
pub(crate) fn sample_statistics(
    spectra: &[&SpectralStack],
    labels: &[&[Complex64]],
    weights: &[f64],
    solver: SolverKind,
) -> (Vec<Complex64>, Denominator) {
    let first = spectra[0];
    let (n, c) = (first.frequencies(), first.channels);
    let mut num = vec![ZERO; n * c];
    let mut den = match solver {
        SolverKind::Exact => Denominator::Full(vec![ZERO; n * c * c]),
        SolverKind::Diagonal => Denominator::Diagonal(vec![0.0; n]),
    };
    for ((x, y), &w) in spectra.iter().zip(labels).zip(weights) {
        for u in 0..n {
            let xu = x.at(u);
            for ch in 0..c {
                num[u * c + ch] += xu[ch].conj() * y[u] * w;
            }
            match &mut den {
                Denominator::Full(s) => {
                    let block = &mut s[u * c * c..(u + 1) * c * c];
                    for i in 0..c {
                        let ci = xu[i].conj() * w;
                        for j in 0..c {
                            block[i * c + j] += ci * xu[j];
                        }
                    }
                }
                Denominator::Diagonal(d) => {
                    d[u] += w * xu.iter().map(|v| v.norm_sqr()).sum::<f64>();
                }
            }
        }
    }
    (num, den)
}

pub fn train_filter(features: &FeatureMap, label: &GaussianLabel, lambda: f64, solver: SolverKind) -> Result<FilterModel> {
    if features.cols != label.grid.cols || features.rows != label.grid.rows {
        return Err(Error::ShapeMismatch {
            expected: (label.grid.cols, label.grid.rows, features.channels),
            found: features.shape(),
        });
    }
    if !(lambda > 0.0) && lambda != 0.0 {
        return Err(Error::InvalidArgument("lambda must be non-negative"));
    }
    let fft = Fft2d::new(features.cols, features.rows);
    let x = SpectralStack::from_features(&fft, features);
    let (numerator, denominator) = sample_statistics(&[&x], &[label.spectrum()], &[1.0], solver);
    FilterModel::from_statistics(fft, features.channels, lambda, numerator, denominator)
}

impl FilterModel {
    pub(crate) fn from_statistics(
        fft: Fft2d,
        channels: usize,
        lambda: f64,
        numerator: Vec<Complex64>,
        denominator: Denominator,
    ) -> Result<FilterModel> {
        let (cols, rows) = (fft.cols(), fft.rows());
        let mut model = FilterModel {
            cols,
            rows,
            channels,
            lambda,
            numerator,
            denominator,
            filter: SpectralStack::zeros(cols, rows, channels),
            fft,
        };
        if lambda == 0.0 {
            // an unregularized solve is only defined where the sample has energy
            model.solve_unregularized();
        } else {
            model.solve()?;
        }
        Ok(model)
    }

    fn solve_unregularized(&mut self) {
        let c = self.channels;
        let n = self.cols * self.rows;
        let lambda = self.lambda;
        let mut a = vec![ZERO; c * c];
        for u in 0..n {
            let h = &mut self.filter.data[u * c..(u + 1) * c];
            h.copy_from_slice(&self.numerator[u * c..(u + 1) * c]);
            let ok = match &self.denominator {
                Denominator::Diagonal(d) => {
                    if d[u] + lambda > 0.0 {
                        for v in h.iter_mut() {
                            *v /= d[u] + lambda;
                        }
                        true
                    } else {
                        false
                    }
                }
                Denominator::Full(s) => {
                    a.copy_from_slice(&s[u * c * c..(u + 1) * c * c]);
                    solve_complex_in_place(&mut a, h, c)
                }
            };
            if !ok {
                h.fill(ZERO);
            }
        }
    }
}

/// Returns `model` blended towards `sample` with learning rate `eta`.
pub fn update_filter(model: &FilterModel, sample: &FilterModel, eta: f64) -> Result<FilterModel> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidArgument("learning rate must lie in [0, 1]"));
    }
    let mut next = model.clone();
    next.blend(sample, eta)?;
    Ok(next)
}

/// Response map whose center cell `(cols/2, rows/2)` is the zero-displacement
/// position. Cell `(i, j)` maps to `origin + (i, j) * cell_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap {
    pub grid: RealGrid,
    pub cell_size: f64,
    pub origin: (f64, f64),
}

impl ResponseMap {
    /// Wraps a cyclic response (zero shift at index 0) so zero shift sits at
    /// the grid center, which is placed at image coordinate `center`.
    pub fn from_cyclic(raw: &RealGrid, cell_size: f64, center: (f64, f64)) -> Self {
        let (cols, rows) = (raw.cols, raw.rows);
        let (hx, hy) = (cols / 2, rows / 2);
        let grid = RealGrid::from_fn(cols, rows, |x, y| raw.get((x + cols - hx) % cols, (y + rows - hy) % rows));
        ResponseMap {
            grid,
            cell_size,
            origin: (center.0 - hx as f64 * cell_size, center.1 - hy as f64 * cell_size),
        }
    }

    pub fn center_cell(&self) -> (usize, usize) {
        (self.grid.cols / 2, self.grid.rows / 2)
    }

    pub fn position(&self, x: f64, y: f64) -> (f64, f64) {
        (self.origin.0 + x * self.cell_size, self.origin.1 + y * self.cell_size)
    }

    pub fn peak(&self) -> f64 {
        self.grid.max()
    }
}

/// Raw cyclic response `IFFT(sum_c h_c z_c)` (zero shift at index 0).
pub fn correlate(filter: &SpectralStack, fft: &Fft2d, features: &FeatureMap) -> Result<RealGrid> {
    if (features.cols, features.rows, features.channels) != (filter.cols, filter.rows, filter.channels) {
        return Err(Error::ShapeMismatch {
            expected: (filter.cols, filter.rows, filter.channels),
            found: features.shape(),
        });
    }
    let n = features.cells();
    let z = SpectralStack::from_features(fft, features);
    let acc: Vec<Complex64> = (0..n).map(|u| filter.at(u).iter().zip(z.at(u)).map(|(h, x)| h * x).sum()).collect();
    Ok(RealGrid { cols: features.cols, rows: features.rows, data: fft.inverse_real(&acc) })
}

/// Applies the filter to `features`; positions follow the feature map's cell
/// geometry, with zero displacement at the patch center.
pub fn detect(model: &FilterModel, features: &FeatureMap) -> Result<ResponseMap> {
    let raw = correlate(&model.filter, &model.fft, features)?;
    if raw.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("filter response"));
    }
    Ok(ResponseMap::from_cyclic(&raw, features.cell_size, patch_center(features)))
}

pub(crate) fn patch_center(features: &FeatureMap) -> (f64, f64) {
    (
        features.origin.0 + (features.cols as f64 - 1.0) / 2.0 * features.cell_size,
        features.origin.1 + (features.rows as f64 - 1.0) / 2.0 * features.cell_size,
    )
}

/// Relative scale factors searched per frame and their score penalties.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSet {
    pub factors: Vec<f64>,
    pub penalties: Vec<f64>,
}

impl ScaleSet {
    /// `count` factors `step^k` centered on 1, each penalized by `penalty^|k|`.
    pub fn pyramid(count: usize, step: f64, penalty: f64) -> Self {
        assert!(count >= 1);
        let half = (count as isize - 1) / 2;
        let ks: Vec<isize> = (0..count as isize).map(|i| i - half).collect();
        ScaleSet {
            factors: ks.iter().map(|&k| Float::powi(step, k as i32)).collect(),
            penalties: ks.iter().map(|&k| Float::powi(penalty, k.abs() as i32)).collect(),
        }
    }

    pub fn single() -> Self {
        ScaleSet { factors: vec![1.0], penalties: vec![1.0] }
    }
}

#[derive(Debug, Clone)]
pub struct ScaleDetection {
    pub response: ResponseMap,
    pub scale: f64,
    pub peak: f64,
    pub score: f64,
    /// Index into the searched factors.
    pub index: usize,
}

/// Runs `detect` on the features produced for each scale factor and keeps the
/// best penalized peak. Ties go to the factor closest to 1.
pub fn scale_search(
    model: &FilterModel,
    scales: &ScaleSet,
    mut features_at: impl FnMut(f64) -> Result<FeatureMap>,
) -> Result<ScaleDetection> {
    if scales.factors.is_empty() || scales.factors.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument("scale factors must be positive and non-empty"));
    }
    let mut order: Vec<usize> = (0..scales.factors.len()).collect();
    order.sort_by(|&a, &b| {
        let da = Float::abs(Float::ln(scales.factors[a]));
        let db = Float::abs(Float::ln(scales.factors[b]));
        da.partial_cmp(&db).unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut best: Option<ScaleDetection> = None;
    for i in order {
        let s = scales.factors[i];
        let response = detect(model, &features_at(s)?)?;
        let peak = response.peak();
        let score = peak / scales.penalties.get(i).copied().unwrap_or(1.0);
        if best.as_ref().map_or(true, |b| score > b.score) {
            best = Some(ScaleDetection { response, scale: s, peak, score, index: i });
        }
    }
    Ok(best.expect("at least one scale"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_features(cols: usize, rows: usize, ch: usize, rng: &mut ChaCha8Rng) -> FeatureMap {
        let mut f = FeatureMap::zeros(cols, rows, ch, 1.0);
        for v in f.data.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        f
    }

    #[test]
    fn label_values() {
        let l = gaussian_label(5, 5, 1.0);
        assert_eq!(l.grid.get(0, 0), 1.0);
        assert!((l.grid.get(1, 0) - (-0.5f64).exp()).abs() < 1e-15);
        assert!((l.grid.get(4, 0) - 0.6065306597).abs() < 1e-9);
        let wide = gaussian_label(3, 3, 1e9);
        assert!(wide.grid.data.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn scalar_filter_closed_form() {
        // 1x1 grid: x = 2, y = 1, lambda = 0 -> h = 2 * 1 / 4
        let mut f = FeatureMap::zeros(1, 1, 1, 1.0);
        f.data[0] = 2.0;
        let label = gaussian_label(1, 1, 1.0);
        let m = train_filter(&f, &label, 0.0, SolverKind::Exact).unwrap();
        assert!((m.filter().data[0] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_features_give_zero_filter_and_response() {
        let f = FeatureMap::zeros(6, 4, 2, 1.0);
        let label = gaussian_label(6, 4, 1.0);
        let m = train_filter(&f, &label, 1e-3, SolverKind::Exact).unwrap();
        assert!(m.numerator().iter().all(|v| v.norm() == 0.0));
        assert!(m.filter().data.iter().all(|v| v.norm() == 0.0));
        let r = detect(&m, &f).unwrap();
        assert!(r.grid.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn training_sample_reproduces_label() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for solver in [SolverKind::Exact, SolverKind::Diagonal] {
            let f = random_features(8, 8, 3, &mut rng);
            let label = gaussian_label(8, 8, 1.5);
            let m = train_filter(&f, &label, 1e-9, solver).unwrap();
            let raw = correlate(m.filter(), m.fft(), &f).unwrap();
            for (a, b) in raw.data.iter().zip(&label.grid.data) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn solve_satisfies_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_features(4, 4, 2, &mut rng);
        let label = gaussian_label(4, 4, 1.0);
        let m = train_filter(&f, &label, 0.01, SolverKind::Exact).unwrap();
        let Denominator::Full(s) = m.denominator() else { panic!() };
        for u in 0..16 {
            for i in 0..2 {
                let mut lhs = m.filter().data[u * 2 + i] * 0.01;
                for j in 0..2 {
                    lhs += s[u * 4 + i * 2 + j] * m.filter().data[u * 2 + j];
                    // Hermitian block
                    assert!((s[u * 4 + i * 2 + j] - s[u * 4 + j * 2 + i].conj()).norm() < 1e-9);
                }
                assert!((lhs - m.numerator()[u * 2 + i]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn frequency_response_matches_spatial_correlation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_features(8, 8, 1, &mut rng);
        let z = random_features(8, 8, 1, &mut rng);
        let label = gaussian_label(8, 8, 1.0);
        let m = train_filter(&f, &label, 0.1, SolverKind::Exact).unwrap();
        let raw = correlate(m.filter(), m.fft(), &z).unwrap();
        // spatial filter taps via inverse transform, then brute-force cyclic sum
        let taps: Vec<f64> = m.fft().inverse(&m.filter().data).iter().map(|c| c.re).collect();
        for y in 0..8 {
            for x in 0..8 {
                let mut acc = 0.0;
                for qy in 0..8 {
                    for qx in 0..8 {
                        acc += taps[qy * 8 + qx] * z.data[((y + 8 - qy) % 8) * 8 + (x + 8 - qx) % 8];
                    }
                }
                assert!((acc - raw.get(x, y)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn cyclic_shift_moves_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = random_features(12, 10, 2, &mut rng);
        let label = gaussian_label(12, 10, 1.0);
        let m = train_filter(&f, &label, 1e-3, SolverKind::Exact).unwrap();
        let (dx, dy) = (3, 7);
        let mut shifted = f.clone();
        for c in 0..2 {
            for y in 0..10 {
                for x in 0..12 {
                    shifted.data[c * 120 + ((y + dy) % 10) * 12 + (x + dx) % 12] = f.get(x, y, c);
                }
            }
        }
        let raw = correlate(m.filter(), m.fft(), &shifted).unwrap();
        assert_eq!(raw.argmax(), (dx, dy));
    }

    #[test]
    fn update_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let label = gaussian_label(6, 6, 1.0);
        let a = train_filter(&random_features(6, 6, 2, &mut rng), &label, 1e-3, SolverKind::Exact).unwrap();
        let b = train_filter(&random_features(6, 6, 2, &mut rng), &label, 1e-3, SolverKind::Exact).unwrap();
        assert_eq!(update_filter(&a, &b, 0.0).unwrap(), a);
        let full = update_filter(&a, &b, 1.0).unwrap();
        assert_eq!(full.numerator(), b.numerator());
        assert_eq!(full.denominator(), b.denominator());
        let half = update_filter(&a, &b, 0.25).unwrap();
        for ((h, x), y) in half.numerator().iter().zip(a.numerator()).zip(b.numerator()) {
            // distance to the new statistics shrinks by (1 - eta)
            assert!(((h - y).norm() - 0.75 * (x - y).norm()).abs() < 1e-9);
        }
        assert!(update_filter(&a, &b, 1.5).is_err());
    }

    #[test]
    fn paired_transform_matches_per_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (cols, rows, ch) in [(6, 5, 1), (6, 5, 2), (5, 7, 3), (8, 6, 4)] {
            let f = random_features(cols, rows, ch, &mut rng);
            let fft = Fft2d::new(cols, rows);
            let stack = SpectralStack::from_features(&fft, &f);
            for c in 0..ch {
                for (u, v) in fft.forward_real(f.channel(c)).iter().enumerate() {
                    assert!((stack.at(u)[c] - v).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn blend_features_equals_train_then_blend() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let label = gaussian_label(6, 5, 1.0);
        for solver in [SolverKind::Exact, SolverKind::Diagonal] {
            let a = train_filter(&random_features(6, 5, 3, &mut rng), &label, 1e-2, solver).unwrap();
            let x = random_features(6, 5, 3, &mut rng);
            let expected = update_filter(&a, &train_filter(&x, &label, 1e-2, solver).unwrap(), 0.3).unwrap();
            let mut got = a.clone();
            got.blend_features(&x, &label, 0.3).unwrap();
            for (g, e) in got.filter().data.iter().zip(&expected.filter().data) {
                assert!((g - e).norm() < 1e-12);
            }
            assert!(got.blend_features(&random_features(5, 5, 3, &mut rng), &label, 0.3).is_err());
        }
    }

    #[test]
    fn scalar_ema() {
        let mut f = FeatureMap::zeros(1, 1, 1, 1.0);
        let label = gaussian_label(1, 1, 1.0);
        f.data[0] = 1.0;
        let a = train_filter(&f, &label, 1.0, SolverKind::Diagonal).unwrap();
        f.data[0] = 3.0f64.sqrt();
        let b = train_filter(&f, &label, 1.0, SolverKind::Diagonal).unwrap();
        let m = update_filter(&a, &b, 0.5).unwrap();
        let Denominator::Diagonal(d) = m.denominator() else { panic!() };
        assert!((d[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scale_pyramid_and_single_scale() {
        let s = ScaleSet::pyramid(5, 1.02, 1.015);
        assert_eq!(s.factors.len(), 5);
        assert!((s.factors[2] - 1.0).abs() < 1e-15);
        assert!((s.factors[4] - 1.02f64.powi(2)).abs() < 1e-15);
        assert!((s.penalties[0] - 1.015f64.powi(2)).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_features(8, 8, 2, &mut rng);
        let label = gaussian_label(8, 8, 1.0);
        let m = train_filter(&f, &label, 1e-3, SolverKind::Exact).unwrap();
        let single = scale_search(&m, &ScaleSet::single(), |_| Ok(f.clone())).unwrap();
        assert_eq!(single.response, detect(&m, &f).unwrap());
        // identical features at every scale: the penalty keeps scale 1
        let tie = scale_search(&m, &ScaleSet::pyramid(5, 1.02, 1.0), |_| Ok(f.clone())).unwrap();
        assert_eq!(tie.scale, 1.0);
    }

    #[test]
    fn shape_mismatch_errors() {
        let label = gaussian_label(6, 6, 1.0);
        let f = FeatureMap::zeros(6, 6, 2, 1.0);
        let m = train_filter(&f, &label, 1e-3, SolverKind::Exact).unwrap();
        assert!(detect(&m, &FeatureMap::zeros(6, 6, 3, 1.0)).is_err());
        assert!(train_filter(&FeatureMap::zeros(5, 6, 2, 1.0), &label, 1e-3, SolverKind::Exact).is_err());
    }
}
