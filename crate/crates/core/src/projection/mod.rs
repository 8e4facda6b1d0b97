//! Channel resampling onto a common grid and a learned `D -> C` projection of
//! feature channels, fitted jointly with the filter on the first frame.
//!
//! The joint objective over filter `f` (per frequency, `C` channels) and
//! projection `P` (`D x C`) is
//!
//! `E = 1/N sum_j w_j sum_u |f(u)^T P^T z_j(u) - y_j(u)|^2
//!      + lambda/N sum_u |f(u)|^2 + lambda_p |P|_F^2`
//!
//! which, by Parseval, is the spatial ridge objective of the projected
//! filter. It is minimized by Gauss-Newton steps whose normal equations are
//! solved with Jacobi-preconditioned conjugate gradient.

mod cg;
mod kernel;

pub use cg::{cg_solve, pcg_solve, CgOutcome};
pub use kernel::{resample_channel, InterpolationKernel};

use crate::corrfilter::{sample_statistics, FilterModel, SolverKind, SpectralStack};
use crate::features::FeatureMap;
use crate::fft::Fft2d;
use crate::linalg::symmetric_eigen;
use crate::{Error, RealGrid, Result};
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MAX_HALVINGS: usize = 10;

/// Real `D x C` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl ProjectionMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if cols > rows {
            return Err(Error::InvalidChannelCount { requested: cols, available: rows });
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument("projection data length must equal rows * cols"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("projection matrix"));
        }
        Ok(ProjectionMatrix { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        ProjectionMatrix { rows: n, cols: n, data }
    }

    #[inline]
    pub fn get(&self, d: usize, c: usize) -> f64 {
        self.data[d * self.cols + c]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Largest deviation of `P^T P` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.cols {
            for b in 0..self.cols {
                let dot: f64 = (0..self.rows).map(|d| self.get(d, a) * self.get(d, b)).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Output channel `c` at each cell is `sum_d p[d, c] * input[d]`.
pub fn apply_projection(features: &FeatureMap, p: &ProjectionMatrix) -> Result<FeatureMap> {
    if features.channels != p.rows {
        return Err(Error::ShapeMismatch {
            expected: (features.cols, features.rows, p.rows),
            found: features.shape(),
        });
    }
    let n = features.cells();
    let mut out = FeatureMap::zeros(features.cols, features.rows, p.cols, features.cell_size);
    out.origin = features.origin;
    for d in 0..p.rows {
        let src = features.channel(d);
        for c in 0..p.cols {
            let w = p.get(d, c);
            if w == 0.0 {
                continue;
            }
            let dst = &mut out.data[c * n..(c + 1) * n];
            for (o, s) in dst.iter_mut().zip(src) {
                *o += w * s;
            }
        }
    }
    Ok(out)
}

/// Top `c_dim` principal directions of the per-cell channel vectors, with each
/// column's largest-magnitude entry made positive.
pub fn pca_projection(samples: &[FeatureMap], c_dim: usize) -> Result<ProjectionMatrix> {
    let first = samples.first().ok_or(Error::InvalidArgument("no samples"))?;
    let d = first.channels;
    if c_dim == 0 || c_dim > d {
        return Err(Error::InvalidChannelCount { requested: c_dim, available: d });
    }
    let mut mean = vec![0.0; d];
    let mut count = 0usize;
    for s in samples {
        if s.channels != d {
            return Err(Error::ShapeMismatch { expected: first.shape(), found: s.shape() });
        }
        for (ch, m) in mean.iter_mut().enumerate() {
            *m += s.channel(ch).iter().sum::<f64>();
        }
        count += s.cells();
    }
    for m in mean.iter_mut() {
        *m /= count as f64;
    }
    let mut cov = vec![0.0; d * d];
    for s in samples {
        let n = s.cells();
        for a in 0..d {
            let ca = s.channel(a);
            for b in a..d {
                let cb = s.channel(b);
                let mut acc = 0.0;
                for k in 0..n {
                    acc += (ca[k] - mean[a]) * (cb[k] - mean[b]);
                }
                cov[a * d + b] += acc;
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            cov[a * d + b] /= count as f64;
            cov[b * d + a] = cov[a * d + b];
        }
    }
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("channel covariance"));
    }
    let (_, vectors) = symmetric_eigen(&cov, d);
    let mut data = vec![0.0; d * c_dim];
    for c in 0..c_dim {
        let mut pivot = 0.0f64;
        for r in 0..d {
            let v = vectors[r * d + c];
            if v.abs() > pivot.abs() {
                pivot = v;
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for r in 0..d {
            data[r * c_dim + c] = sign * vectors[r * d + c];
        }
    }
    ProjectionMatrix::new(d, c_dim, data)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionInit {
    Pca,
    Fixed(ProjectionMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionParams {
    pub c_dim: usize,
    /// Filter ridge weight.
    pub lambda: f64,
    /// Weight of `|P|_F^2`.
    pub lambda_p: f64,
    pub gn_iters: usize,
    pub cg_iters: usize,
    pub cg_tol: f64,
    pub init: ProjectionInit,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        ProjectionParams {
            c_dim: 12,
            lambda: 1e-3,
            lambda_p: 1e-2,
            gn_iters: 5,
            cg_iters: 20,
            cg_tol: 1e-6,
            init: ProjectionInit::Pca,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LearnedProjection {
    pub projection: ProjectionMatrix,
    /// Jointly optimized filter over the projected channels.
    pub filter: SpectralStack,
    /// Objective at the initialization followed by one value per accepted
    /// Gauss-Newton step.
    pub objective_trace: Vec<f64>,
}

struct Problem {
    cols: usize,
    rows: usize,
    d: usize,
    z: Vec<SpectralStack>,
    y: Vec<Vec<Complex64>>,
    w: Vec<f64>,
    lambda: f64,
    lambda_p: f64,
}

impl Problem {
    fn new(samples: &[FeatureMap], labels: &[RealGrid], lambda: f64, lambda_p: f64) -> Result<Self> {
        let first = samples.first().ok_or(Error::InvalidArgument("no samples"))?;
        if labels.len() != samples.len() {
            return Err(Error::InvalidArgument("one label per sample is required"));
        }
        let fft = Fft2d::new(first.cols, first.rows);
        let mut z = Vec::with_capacity(samples.len());
        let mut y = Vec::with_capacity(samples.len());
        for (s, l) in samples.iter().zip(labels) {
            if s.shape() != first.shape() {
                return Err(Error::ShapeMismatch { expected: first.shape(), found: s.shape() });
            }
            if (l.cols, l.rows) != (s.cols, s.rows) {
                return Err(Error::ShapeMismatch { expected: s.shape(), found: (l.cols, l.rows, 1) });
            }
            if !s.is_finite() || l.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("projection training sample"));
            }
            z.push(SpectralStack::from_features(&fft, s));
            y.push(fft.forward_real(&l.data));
        }
        let m = samples.len();
        Ok(Problem {
            cols: first.cols,
            rows: first.rows,
            d: first.channels,
            z,
            y,
            w: vec![1.0 / m as f64; m],
            lambda,
            lambda_p,
        })
    }

    fn n(&self) -> usize {
        self.cols * self.rows
    }

    fn project(&self, p: &ProjectionMatrix) -> Vec<SpectralStack> {
        let (n, c, d) = (self.n(), p.cols, self.d);
        self.z
            .iter()
            .map(|z| {
                let mut x = SpectralStack::zeros(self.cols, self.rows, c);
                for u in 0..n {
                    let zu = z.at(u);
                    let xu = &mut x.data[u * c..(u + 1) * c];
                    for (dd, zv) in zu.iter().enumerate().take(d) {
                        for (cc, xv) in xu.iter_mut().enumerate() {
                            *xv += *zv * p.get(dd, cc);
                        }
                    }
                }
                x
            })
            .collect()
    }

    fn objective(&self, p: &ProjectionMatrix, f: &SpectralStack) -> f64 {
        let x = self.project(p);
        self.objective_with(&x, p, f)
    }

    fn objective_with(&self, x: &[SpectralStack], p: &ProjectionMatrix, f: &SpectralStack) -> f64 {
        let n = self.n();
        let mut data = 0.0;
        for ((xj, yj), &wj) in x.iter().zip(&self.y).zip(&self.w) {
            let mut acc = 0.0;
            for u in 0..n {
                let pred: Complex64 = f.at(u).iter().zip(xj.at(u)).map(|(a, b)| a * b).sum();
                acc += (pred - yj[u]).norm_sqr();
            }
            data += wj * acc;
        }
        let reg_f: f64 = f.data.iter().map(|v| v.norm_sqr()).sum();
        (data + self.lambda * reg_f) / n as f64 + self.lambda_p * p.frobenius_sq()
    }

    /// Ridge-optimal filter for a fixed projection.
    fn best_filter(&self, x: &[SpectralStack]) -> Result<SpectralStack> {
        let spectra: Vec<&SpectralStack> = x.iter().collect();
        let labels: Vec<&[Complex64]> = self.y.iter().map(|v| v.as_slice()).collect();
        let (num, den) = sample_statistics(&spectra, &labels, &self.w, SolverKind::Exact);
        let model = FilterModel::from_statistics(Fft2d::new(self.cols, self.rows), x[0].channels, self.lambda, num, den)?;
        Ok(model.filter().clone())
    }
}

/// Layout of the flattened real parameter vector: `(Re f, Im f)` pairs for
/// every frequency and output channel, followed by `P` row-major.
struct Layout {
    n: usize,
    c: usize,
    d: usize,
}

impl Layout {
    fn len(&self) -> usize {
        2 * self.n * self.c + self.d * self.c
    }

    fn p_offset(&self) -> usize {
        2 * self.n * self.c
    }

    fn f_at(&self, v: &[f64], u: usize, c: usize) -> Complex64 {
        let i = 2 * (u * self.c + c);
        Complex64::new(v[i], v[i + 1])
    }

    fn add_f(&self, v: &mut [f64], u: usize, c: usize, val: Complex64) {
        let i = 2 * (u * self.c + c);
        v[i] += val.re;
        v[i + 1] += val.im;
    }
}

/// Linearization of the residuals around `(f, P)`.
struct Linearized<'a> {
    problem: &'a Problem,
    layout: Layout,
    x: &'a [SpectralStack],
    f: &'a SpectralStack,
}

impl Linearized<'_> {
    /// `out = J^H W J v / N + R v`.
    fn apply_normal(&self, v: &[f64], out: &mut [f64]) {
        let pr = self.problem;
        let (n, c, d) = (self.layout.n, self.layout.c, self.layout.d);
        let po = self.layout.p_offset();
        out.fill(0.0);
        let inv_n = 1.0 / n as f64;
        let mut q = vec![ZERO; d];
        let mut t = vec![ZERO; n * d];
        for u in 0..n {
            let fu = self.f.at(u);
            for (dd, qd) in q.iter_mut().enumerate() {
                *qd = (0..c).map(|cc| fu[cc] * v[po + dd * c + cc]).sum();
            }
            for ((xj, zj), &wj) in self.x.iter().zip(&pr.z).zip(&pr.w) {
                let (xu, zu) = (xj.at(u), zj.at(u));
                let mut e = ZERO;
                for cc in 0..c {
                    e += self.layout.f_at(v, u, cc) * xu[cc];
                }
                for dd in 0..d {
                    e += zu[dd] * q[dd];
                }
                let e = e * (wj * inv_n);
                for cc in 0..c {
                    self.layout.add_f(out, u, cc, xu[cc].conj() * e);
                }
                for dd in 0..d {
                    t[u * d + dd] += zu[dd].conj() * e;
                }
            }
            let reg = pr.lambda * inv_n;
            for cc in 0..c {
                self.layout.add_f(out, u, cc, self.layout.f_at(v, u, cc) * reg);
            }
        }
        self.accumulate_p(&t, out);
        for i in 0..d * c {
            out[po + i] += pr.lambda_p * v[po + i];
        }
    }

    /// `out_P[d, c] += Re sum_u conj(f_c(u)) t_d(u)`.
    fn accumulate_p(&self, t: &[Complex64], out: &mut [f64]) {
        let (n, c, d) = (self.layout.n, self.layout.c, self.layout.d);
        let po = self.layout.p_offset();
        for u in 0..n {
            let fu = self.f.at(u);
            for dd in 0..d {
                let td = t[u * d + dd];
                for cc in 0..c {
                    out[po + dd * c + cc] += (fu[cc].conj() * td).re;
                }
            }
        }
    }

    /// Negative gradient: `-(J^H W r / N + R theta)`.
    fn rhs(&self, p: &ProjectionMatrix) -> Vec<f64> {
        let pr = self.problem;
        let (n, c, d) = (self.layout.n, self.layout.c, self.layout.d);
        let po = self.layout.p_offset();
        let inv_n = 1.0 / n as f64;
        let mut g = vec![0.0; self.layout.len()];
        let mut t = vec![ZERO; n * d];
        for u in 0..n {
            let fu = self.f.at(u);
            for (((xj, zj), yj), &wj) in self.x.iter().zip(&pr.z).zip(&pr.y).zip(&pr.w) {
                let (xu, zu) = (xj.at(u), zj.at(u));
                let pred: Complex64 = fu.iter().zip(xu).map(|(a, b)| a * b).sum();
                let r = (pred - yj[u]) * (wj * inv_n);
                for cc in 0..c {
                    self.layout.add_f(&mut g, u, cc, xu[cc].conj() * r);
                }
                for dd in 0..d {
                    t[u * d + dd] += zu[dd].conj() * r;
                }
            }
            for cc in 0..c {
                self.layout.add_f(&mut g, u, cc, fu[cc] * (pr.lambda * inv_n));
            }
        }
        self.accumulate_p(&t, &mut g);
        for i in 0..d * c {
            g[po + i] += pr.lambda_p * p.data[i];
        }
        for v in g.iter_mut() {
            *v = -*v;
        }
        g
    }

    fn diagonal(&self) -> Vec<f64> {
        let pr = self.problem;
        let (n, c, d) = (self.layout.n, self.layout.c, self.layout.d);
        let po = self.layout.p_offset();
        let inv_n = 1.0 / n as f64;
        let mut diag = vec![0.0; self.layout.len()];
        for u in 0..n {
            let fu = self.f.at(u);
            for ((xj, zj), &wj) in self.x.iter().zip(&pr.z).zip(&pr.w) {
                let (xu, zu) = (xj.at(u), zj.at(u));
                for cc in 0..c {
                    let v = wj * inv_n * xu[cc].norm_sqr();
                    diag[2 * (u * c + cc)] += v;
                    diag[2 * (u * c + cc) + 1] += v;
                }
                for dd in 0..d {
                    let zn = zu[dd].norm_sqr() * wj * inv_n;
                    for cc in 0..c {
                        diag[po + dd * c + cc] += zn * fu[cc].norm_sqr();
                    }
                }
            }
            for cc in 0..c {
                diag[2 * (u * c + cc)] += pr.lambda * inv_n;
                diag[2 * (u * c + cc) + 1] += pr.lambda * inv_n;
            }
        }
        for v in diag[po..].iter_mut() {
            *v += pr.lambda_p;
        }
        diag
    }
}

/// Evaluates the joint objective for projection `p` and filter `filter`.
pub fn projection_objective(
    samples: &[FeatureMap],
    labels: &[RealGrid],
    p: &ProjectionMatrix,
    filter: &SpectralStack,
    lambda: f64,
    lambda_p: f64,
) -> Result<f64> {
    let problem = Problem::new(samples, labels, lambda, lambda_p)?;
    check_shapes(&problem, p, filter)?;
    Ok(problem.objective(p, filter))
}

fn check_shapes(problem: &Problem, p: &ProjectionMatrix, filter: &SpectralStack) -> Result<()> {
    if p.rows != problem.d {
        return Err(Error::InvalidChannelCount { requested: p.rows, available: problem.d });
    }
    if (filter.cols, filter.rows, filter.channels) != (problem.cols, problem.rows, p.cols) {
        return Err(Error::ShapeMismatch {
            expected: (problem.cols, problem.rows, p.cols),
            found: (filter.cols, filter.rows, filter.channels),
        });
    }
    Ok(())
}

/// Fits `P` and the filter jointly. `P` starts from the principal components
/// (or a fixed matrix), the filter from the ridge solution for that `P`.
pub fn learn_projection(samples: &[FeatureMap], labels: &[RealGrid], params: &ProjectionParams) -> Result<LearnedProjection> {
    let problem = Problem::new(samples, labels, params.lambda, params.lambda_p)?;
    if params.c_dim == 0 || params.c_dim > problem.d {
        return Err(Error::InvalidChannelCount { requested: params.c_dim, available: problem.d });
    }
    let mut p = match &params.init {
        ProjectionInit::Pca => pca_projection(samples, params.c_dim)?,
        ProjectionInit::Fixed(p) => {
            if (p.rows, p.cols) != (problem.d, params.c_dim) {
                return Err(Error::InvalidChannelCount { requested: p.cols, available: problem.d });
            }
            p.clone()
        }
    };
    let mut x = problem.project(&p);
    let mut f = problem.best_filter(&x)?;
    let mut energy = problem.objective_with(&x, &p, &f);
    if !energy.is_finite() {
        return Err(Error::NonFinite("projection objective"));
    }
    let mut trace = vec![energy];
    let layout = || Layout { n: problem.n(), c: params.c_dim, d: problem.d };
    for _ in 0..params.gn_iters {
        let lin = Linearized { problem: &problem, layout: layout(), x: &x, f: &f };
        let b = lin.rhs(&p);
        let diag = lin.diagonal();
        let step = pcg_solve(
            |v, out| lin.apply_normal(v, out),
            |r, z| {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(&diag) {
                    *zi = if *di > 0.0 { ri / di } else { *ri };
                }
            },
            &b,
            params.cg_iters,
            params.cg_tol,
        )?;
        let lay = layout();
        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..=MAX_HALVINGS {
            let mut f_new = f.clone();
            for u in 0..lay.n {
                for cc in 0..lay.c {
                    f_new.data[u * lay.c + cc] += lay.f_at(&step.x, u, cc) * t;
                }
            }
            let mut p_new = p.clone();
            for (i, v) in p_new.data.iter_mut().enumerate() {
                *v += t * step.x[lay.p_offset() + i];
            }
            let x_new = problem.project(&p_new);
            let e_new = problem.objective_with(&x_new, &p_new, &f_new);
            if !e_new.is_finite() {
                return Err(Error::NonFinite("projection objective"));
            }
            if e_new <= energy {
                accepted = Some((f_new, p_new, x_new, e_new));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((f_new, p_new, x_new, e_new)) => {
                f = f_new;
                p = p_new;
                x = x_new;
                energy = e_new;
                trace.push(energy);
            }
            None => break,
        }
    }
    Ok(LearnedProjection { projection: p, filter: f, objective_trace: trace })
}
