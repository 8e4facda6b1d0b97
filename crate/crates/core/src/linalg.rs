//! Small dense solvers used per frequency and for the PCA initialization.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

/// Solves `a x = b` in place for a small dense complex system by Gaussian
/// elimination with partial pivoting. `a` is row-major `n x n` and is
/// destroyed; the solution overwrites `b`. Returns `false` if singular.
pub fn solve_complex_in_place(a: &mut [Complex64], b: &mut [Complex64], n: usize) -> bool {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm_sqr();
        for r in col + 1..n {
            let v = a[r * n + col].norm_sqr();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return false;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let inv = a[col * n + col].inv();
        for r in col + 1..n {
            let factor = a[r * n + col] * inv;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[r * n + k] -= factor * v;
            }
            let bv = b[col];
            b[r] -= factor * bv;
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * b[k];
        }
        b[col] = acc / a[col * n + col];
    }
    true
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// the columns of a row-major `n x n` matrix.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].partial_cmp(&a[i * n + i]).unwrap_or(core::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new_col] = v[r * n + old_col];
        }
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complex_solve_matches_nalgebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..8 {
            let a: Vec<Complex64> = (0..n * n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let b: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let na = nalgebra::DMatrix::from_row_slice(n, n, &a);
            let nb = nalgebra::DVector::from_column_slice(&b);
            let expect = na.lu().solve(&nb).unwrap();
            let mut a2 = a.clone();
            let mut x = b.clone();
            assert!(solve_complex_in_place(&mut a2, &mut x, n));
            for i in 0..n {
                assert!((x[i] - expect[i]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn singular_system_reported() {
        let mut a = vec![Complex64::new(0.0, 0.0); 4];
        let mut b = vec![Complex64::new(1.0, 0.0); 2];
        assert!(!solve_complex_in_place(&mut a, &mut b, 2));
    }

    #[test]
    fn jacobi_eigen_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 7;
        let m: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                s[i * n + j] = m[i * n + j] + m[j * n + i];
            }
        }
        let (vals, vecs) = symmetric_eigen(&s, n);
        for w in vals.windows(2) {
            assert!(w[0] >= w[1]);
        }
        for i in 0..n {
            for j in 0..n {
                let rec: f64 = (0..n).map(|k| vecs[i * n + k] * vals[k] * vecs[j * n + k]).sum();
                assert!((rec - s[i * n + j]).abs() < 1e-10);
                let dot: f64 = (0..n).map(|k| vecs[k * n + i] * vecs[k * n + j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12);
            }
        }
    }
}
