//! Mixed-radix complex FFT (radix 2 and 4 butterflies plus a generic one for
//! odd prime factors) and a separable 2-D transform built on it.
//!
//! Forward transforms are unnormalized; inverse transforms scale by `1/n`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    stages: Vec<(usize, usize)>,
    forward: Vec<Complex64>,
    inverse: Vec<Complex64>,
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "fft length must be positive");
        let forward: Vec<Complex64> = (0..n)
            .map(|k| {
                let phase = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(Float::cos(phase), Float::sin(phase))
            })
            .collect();
        let inverse = forward.iter().map(|t| t.conj()).collect();
        FftPlan { n, stages: factorize(n), forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized forward DFT, `out[k] = sum_j in[j] exp(-2 pi i jk/n)`.
    pub fn forward(&self, input: &[Complex64], output: &mut [Complex64]) {
        self.run(input, output, false);
    }

    /// Inverse DFT including the `1/n` factor.
    pub fn inverse(&self, input: &[Complex64], output: &mut [Complex64]) {
        self.run(input, output, true);
        let scale = 1.0 / self.n as f64;
        for v in output.iter_mut() {
            *v *= scale;
        }
    }

    fn run(&self, input: &[Complex64], output: &mut [Complex64], inverse: bool) {
        assert_eq!(input.len(), self.n);
        assert_eq!(output.len(), self.n);
        if self.n == 1 {
            output[0] = input[0];
            return;
        }
        let tw = if inverse { &self.inverse } else { &self.forward };
        let mut scratch = Vec::new();
        self.work(output, input, 0, 1, &self.stages, tw, inverse, &mut scratch);
    }

    #[allow(clippy::too_many_arguments)]
    fn work(
        &self,
        out: &mut [Complex64],
        input: &[Complex64],
        offset: usize,
        fstride: usize,
        stages: &[(usize, usize)],
        tw: &[Complex64],
        inverse: bool,
        scratch: &mut Vec<Complex64>,
    ) {
        let (p, m) = stages[0];
        if m == 1 {
            for (q, o) in out.iter_mut().take(p).enumerate() {
                *o = input[offset + q * fstride];
            }
        } else {
            for q in 0..p {
                self.work(
                    &mut out[q * m..(q + 1) * m],
                    input,
                    offset + q * fstride,
                    fstride * p,
                    &stages[1..],
                    tw,
                    inverse,
                    scratch,
                );
            }
        }
        match p {
            2 => butterfly2(out, fstride, m, tw),
            4 => butterfly4(out, fstride, m, tw, inverse),
            _ => butterfly_generic(out, fstride, p, m, tw, self.n, scratch),
        }
    }
}

/// Factor `n` into `(radix, remaining length)` stages, preferring radix 4.
fn factorize(mut n: usize) -> Vec<(usize, usize)> {
    let mut stages = Vec::new();
    let mut p = 4;
    while n > 1 {
        while n % p != 0 {
            p = match p {
                4 => 2,
                2 => 3,
                _ => p + 2,
            };
            if p * p > n {
                p = n;
            }
        }
        n /= p;
        stages.push((p, n));
    }
    stages
}

fn butterfly2(out: &mut [Complex64], fstride: usize, m: usize, tw: &[Complex64]) {
    for k in 0..m {
        let t = out[m + k] * tw[k * fstride];
        out[m + k] = out[k] - t;
        out[k] += t;
    }
}

fn butterfly4(out: &mut [Complex64], fstride: usize, m: usize, tw: &[Complex64], inverse: bool) {
    for k in 0..m {
        let s0 = out[k + m] * tw[k * fstride];
        let s1 = out[k + 2 * m] * tw[2 * k * fstride];
        let s2 = out[k + 3 * m] * tw[3 * k * fstride];
        let s5 = out[k] - s1;
        let a = out[k] + s1;
        let s3 = s0 + s2;
        let s4 = s0 - s2;
        out[k + 2 * m] = a - s3;
        out[k] = a + s3;
        if inverse {
            out[k + m] = Complex64::new(s5.re - s4.im, s5.im + s4.re);
            out[k + 3 * m] = Complex64::new(s5.re + s4.im, s5.im - s4.re);
        } else {
            out[k + m] = Complex64::new(s5.re + s4.im, s5.im - s4.re);
            out[k + 3 * m] = Complex64::new(s5.re - s4.im, s5.im + s4.re);
        }
    }
}

fn butterfly_generic(
    out: &mut [Complex64],
    fstride: usize,
    p: usize,
    m: usize,
    tw: &[Complex64],
    n: usize,
    scratch: &mut Vec<Complex64>,
) {
    scratch.clear();
    scratch.resize(p, Complex64::new(0.0, 0.0));
    for u in 0..m {
        for q in 0..p {
            scratch[q] = out[u + q * m];
        }
        for q1 in 0..p {
            let k = u + q1 * m;
            let mut acc = scratch[0];
            let step = fstride * k % n;
            let mut twidx = 0;
            for s in scratch.iter().skip(1) {
                twidx += step;
                if twidx >= n {
                    twidx -= n;
                }
                acc += *s * tw[twidx];
            }
            out[k] = acc;
        }
    }
}

/// Separable 2-D FFT over a row-major `cols x rows` grid.
#[derive(Debug, Clone)]
pub struct Fft2d {
    cols: usize,
    rows: usize,
    row_plan: FftPlan,
    col_plan: FftPlan,
}

impl Fft2d {
    pub fn new(cols: usize, rows: usize) -> Self {
        Fft2d { cols, rows, row_plan: FftPlan::new(cols), col_plan: FftPlan::new(rows) }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(buf, false)
    }

    pub fn forward(&self, data: &[Complex64]) -> Vec<Complex64> {
        self.transform(data.to_vec(), false)
    }

    pub fn inverse(&self, data: &[Complex64]) -> Vec<Complex64> {
        self.transform(data.to_vec(), true)
    }

    /// Real part of the inverse transform.
    pub fn inverse_real(&self, data: &[Complex64]) -> Vec<f64> {
        self.inverse(data).into_iter().map(|c| c.re).collect()
    }

    fn transform(&self, mut buf: Vec<Complex64>, inverse: bool) -> Vec<Complex64> {
        let (cols, rows) = (self.cols, self.rows);
        assert_eq!(buf.len(), cols * rows);
        let mut line = vec![Complex64::new(0.0, 0.0); cols.max(rows)];
        for r in 0..rows {
            let row = &mut buf[r * cols..(r + 1) * cols];
            line[..cols].copy_from_slice(row);
            if inverse {
                self.row_plan.inverse(&line[..cols], row);
            } else {
                self.row_plan.forward(&line[..cols], row);
            }
        }
        let mut col_in = vec![Complex64::new(0.0, 0.0); rows];
        for c in 0..cols {
            for r in 0..rows {
                col_in[r] = buf[r * cols + c];
            }
            if inverse {
                self.col_plan.inverse(&col_in, &mut line[..rows]);
            } else {
                self.col_plan.forward(&col_in, &mut line[..rows]);
            }
            for r in 0..rows {
                buf[r * cols + c] = line[r];
            }
        }
        buf
    }
}

/// Largest `m <= n` whose prime factors are all 2, 3 or 5.
pub fn smooth_size_at_most(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, &v)| {
                    let ph = sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    acc + v * Complex64::new(ph.cos(), ph.sin())
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_many_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 3, 4, 5, 6, 7, 8, 9, 12, 16, 17, 18, 25, 27, 30, 32, 36, 45, 49, 64, 97] {
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let plan = FftPlan::new(n);
            let mut y = vec![Complex64::new(0.0, 0.0); n];
            plan.forward(&x, &mut y);
            let expect = naive_dft(&x, -1.0);
            for (a, b) in y.iter().zip(&expect) {
                assert!((a - b).norm() < 1e-10, "n={n}");
            }
            let mut back = vec![Complex64::new(0.0, 0.0); n];
            plan.inverse(&y, &mut back);
            for (a, b) in back.iter().zip(&x) {
                assert!((a - b).norm() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn fft2d_roundtrip_and_dc() {
        let f = Fft2d::new(6, 10);
        let data: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin()).collect();
        let spec = f.forward_real(&data);
        let sum: f64 = data.iter().sum();
        assert!((spec[0].re - sum).abs() < 1e-10);
        let back = f.inverse_real(&spec);
        for (a, b) in back.iter().zip(&data) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_size_at_most(37), 36);
        assert_eq!(smooth_size_at_most(32), 32);
        assert_eq!(smooth_size_at_most(7), 6);
        assert_eq!(smooth_size_at_most(1), 1);
    }
}
