use crate::features::FeatureMap;
use alloc::vec::Vec;
use num_traits::Float;

/// Cubic convolution kernel (`a = -0.5`) with four-cell support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationKernel {
    a: f64,
}

impl Default for InterpolationKernel {
    fn default() -> Self {
        InterpolationKernel::cubic()
    }
}

impl InterpolationKernel {
    pub fn cubic() -> Self {
        InterpolationKernel { a: -0.5 }
    }

    pub fn support(&self) -> usize {
        4
    }

    pub fn weight(&self, t: f64) -> f64 {
        let a = self.a;
        let t = t.abs();
        if t <= 1.0 {
            (a + 2.0) * t * t * t - (a + 3.0) * t * t + 1.0
        } else if t < 2.0 {
            a * t * t * t - 5.0 * a * t * t + 8.0 * a * t - 4.0 * a
        } else {
            0.0
        }
    }

    /// The four taps around continuous position `t` (in source-sample units):
    /// first index and weights normalized to sum to one.
    pub fn taps(&self, t: f64) -> (isize, [f64; 4]) {
        let base = Float::floor(t) as isize - 1;
        let mut w = [0.0; 4];
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = self.weight(t - (base + k as isize) as f64);
        }
        let s: f64 = w.iter().sum();
        for wk in w.iter_mut() {
            *wk /= s;
        }
        (base, w)
    }
}

/// Sample `i` of `x`, linearly extrapolated beyond either end.
#[inline]
fn extended(x: &[f64], i: isize) -> f64 {
    let n = x.len() as isize;
    if n == 1 {
        return x[0];
    }
    if i < 0 {
        x[0] + i as f64 * (x[1] - x[0])
    } else if i >= n {
        let last = x[(n - 1) as usize];
        last + (i - n + 1) as f64 * (last - x[(n - 2) as usize])
    } else {
        x[i as usize]
    }
}

/// Source position (in source-cell units) of target cell `m` when `n` source
/// cells and `m_count` target cells tile the same extent.
#[inline]
pub(crate) fn source_position(m: usize, n: usize, m_count: usize) -> f64 {
    (m as f64 + 0.5) * n as f64 / m_count as f64 - 0.5
}

fn resample_line(src: &[f64], out_len: usize, kernel: &InterpolationKernel, out: &mut Vec<f64>) {
    let n = src.len();
    for m in 0..out_len {
        let t = source_position(m, n, out_len);
        let (base, w) = kernel.taps(t);
        let mut acc = 0.0;
        for (k, wk) in w.iter().enumerate() {
            acc += wk * extended(src, base + k as isize);
        }
        out.push(acc);
    }
}

/// Interpolates one feature channel onto a `target_cols x target_rows` grid
/// covering the same extent, separably along rows then columns.
pub fn resample_channel(
    channel: &FeatureMap,
    target_cols: usize,
    target_rows: usize,
    kernel: &InterpolationKernel,
) -> FeatureMap {
    assert_eq!(channel.channels, 1, "resample_channel expects a single channel");
    assert!(target_cols >= 1 && target_rows >= 1);
    let (cols, rows) = (channel.cols, channel.rows);
    let mut horiz = Vec::with_capacity(target_cols * rows);
    for r in 0..rows {
        resample_line(&channel.data[r * cols..(r + 1) * cols], target_cols, kernel, &mut horiz);
    }
    let mut data = alloc::vec![0.0; target_cols * target_rows];
    let mut column = Vec::with_capacity(rows);
    let mut line = Vec::with_capacity(target_rows);
    for c in 0..target_cols {
        column.clear();
        column.extend((0..rows).map(|r| horiz[r * target_cols + c]));
        line.clear();
        resample_line(&column, target_rows, kernel, &mut line);
        for (r, v) in line.iter().enumerate() {
            data[r * target_cols + c] = *v;
        }
    }
    let cell = channel.cell_size * cols as f64 / target_cols as f64;
    let half_src = channel.cell_size / 2.0;
    FeatureMap {
        cols: target_cols,
        rows: target_rows,
        channels: 1,
        data,
        cell_size: cell,
        origin: (channel.origin.0 - half_src + cell / 2.0, channel.origin.1 - half_src + cell / 2.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(cols: usize, rows: usize, f: impl Fn(usize, usize) -> f64) -> FeatureMap {
        let mut m = FeatureMap::zeros(cols, rows, 1, 4.0);
        for y in 0..rows {
            for x in 0..cols {
                m.data[y * cols + x] = f(x, y);
            }
        }
        m
    }

    /// Keys cubic written out independently of `InterpolationKernel`.
    fn keys(t: f64) -> f64 {
        let t = t.abs();
        if t < 1.0 {
            1.5 * t.powi(3) - 2.5 * t.powi(2) + 1.0
        } else if t < 2.0 {
            -0.5 * t.powi(3) + 2.5 * t.powi(2) - 4.0 * t + 2.0
        } else {
            0.0
        }
    }

    #[test]
    fn partition_of_unity() {
        let k = InterpolationKernel::cubic();
        for i in 0..100 {
            let f = i as f64 / 100.0;
            let s: f64 = (-3..=3).map(|n| k.weight(f - n as f64)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_grid_is_exact() {
        let src = map(7, 5, |x, y| (x * 3 + y * 11) as f64 * 0.1 - 1.0);
        let out = resample_channel(&src, 7, 5, &InterpolationKernel::cubic());
        for (a, b) in out.data.iter().zip(&src.data) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(out.cell_size, src.cell_size);
        assert_eq!(out.origin, src.origin);
    }

    #[test]
    fn constant_channel_stays_constant() {
        let src = map(6, 9, |_, _| 0.37);
        let out = resample_channel(&src, 13, 4, &InterpolationKernel::cubic());
        assert!(out.data.iter().all(|v| (v - 0.37).abs() < 1e-12));
    }

    #[test]
    fn ramp_upsampling_matches_direct_summation() {
        let n = 8;
        let ramp: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let src = map(n, 1, |x, _| ramp[x]);
        let out = resample_channel(&src, 16, 1, &InterpolationKernel::cubic());
        // brute force: sum over a wide index window of x[n] b(t - n), with the
        // samples continued linearly past both ends
        let slope = ramp[1] - ramp[0];
        for m in 0..16 {
            let t = (m as f64 + 0.5) * n as f64 / 16.0 - 0.5;
            let (mut num, mut den) = (0.0, 0.0);
            for k in -10i32..20 {
                let xk = k as f64 * slope;
                let w = keys(t - k as f64);
                num += xk * w;
                den += w;
            }
            assert!((out.data[m] - num / den).abs() < 1e-12, "m={m}");
            assert!((out.data[m] - t * slope).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn affine_fields_survive_a_round_trip(a in -2.0..2.0f64, bx in -1.0..1.0f64, by in -1.0..1.0f64,
                                              cols in 3usize..12, rows in 3usize..12,
                                              tc in 3usize..24, tr in 3usize..24) {
            let src = map(cols, rows, |x, y| a + bx * x as f64 + by * y as f64);
            let k = InterpolationKernel::cubic();
            let there = resample_channel(&src, tc, tr, &k);
            let back = resample_channel(&there, cols, rows, &k);
            for (p, q) in back.data.iter().zip(&src.data) {
                prop_assert!((p - q).abs() < 1e-9);
            }
        }
    }
}
