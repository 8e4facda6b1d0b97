use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

/// Conjugate gradient for a symmetric positive (semi-)definite operator,
/// starting from zero. Stops when `|r| <= tol * |b|` or after `iters` steps.
pub fn cg_solve(
    apply_a: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    iters: usize,
    tol: f64,
) -> Result<CgOutcome> {
    pcg_solve(apply_a, |r, z| z.copy_from_slice(r), b, iters, tol)
}

/// Preconditioned conjugate gradient; `precondition(r, z)` applies the
/// inverse preconditioner `z = M^-1 r`.
pub fn pcg_solve(
    mut apply_a: impl FnMut(&[f64], &mut [f64]),
    mut precondition: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    iters: usize,
    tol: f64,
) -> Result<CgOutcome> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let b_norm = norm(b);
    if !b_norm.is_finite() {
        return Err(Error::NonFinite("conjugate gradient right-hand side"));
    }
    if b_norm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, residual_norm: 0.0 });
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = b_norm;
    let mut done = 0;
    for it in 0..iters {
        apply_a(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() || !rz.is_finite() {
            return Err(Error::NonFinite("conjugate gradient iteration"));
        }
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        done = it + 1;
        res = norm(&r);
        if !res.is_finite() {
            return Err(Error::NonFinite("conjugate gradient residual"));
        }
        if res <= tol * b_norm {
            break;
        }
        precondition(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(CgOutcome { x, iterations: done, residual_norm: res })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    Float::sqrt(dot(a, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_system_in_one_step() {
        let b = [1.0, -2.0, 3.5, 0.25];
        let out = cg_solve(|x, y| y.copy_from_slice(x), &b, 10, 1e-12).unwrap();
        assert_eq!(out.iterations, 1);
        for (x, y) in out.x.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_rhs() {
        let out = cg_solve(|x, y| y.copy_from_slice(x), &[0.0; 5], 10, 1e-12).unwrap();
        assert!(out.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn random_spd_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let n = 6;
            let m = nalgebra::DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let a = &m * m.transpose() + nalgebra::DMatrix::identity(n, n) * 0.5;
            let b = nalgebra::DVector::<f64>::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let expect = a.clone().cholesky().unwrap().solve(&b);
            let out = cg_solve(
                |x, y| {
                    let v = &a * nalgebra::DVector::from_column_slice(x);
                    y.copy_from_slice(v.as_slice());
                },
                b.as_slice(),
                50,
                1e-10,
            )
            .unwrap();
            for i in 0..n {
                assert!((out.x[i] - expect[i]).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn non_finite_is_an_error() {
        let r = cg_solve(|_, y| y.fill(f64::NAN), &[1.0, 1.0], 5, 1e-9);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }
}
