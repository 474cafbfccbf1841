//! Lanczos solver for the lowest eigenpair of a Hermitian linear map.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Stop once `‖A v - λ v‖ < tol`.
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 40,
            max_restarts: 20,
            tol: 1e-11,
        }
    }
}

/// Lowest eigenpair of `apply`, started from `start` (need not be normalized).
///
/// Restarts from the current Ritz vector; the Krylov basis is fully
/// reorthogonalized.
pub fn lowest_eigenpair<F>(apply: F, start: &[C64], opts: LanczosOptions) -> Result<(f64, Vec<C64>)>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let n = start.len();
    let mut v0: Vec<C64> = start.to_vec();
    let mut nrm = norm(&v0);
    if !(nrm > 1e-300) {
        v0 = (0..n).map(|i| C64::new(1.0 + (i as f64 * 0.7).sin(), 0.0)).collect();
        nrm = norm(&v0);
    }
    v0.iter_mut().for_each(|x| *x /= nrm);
    let mut best = (f64::INFINITY, v0.clone());

    for _ in 0..=opts.max_restarts {
        let m = opts.krylov_dim.min(n);
        let mut basis: Vec<Vec<C64>> = vec![v0.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            let mut w = apply(&basis[j]);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            // Full reorthogonalization (twice for stability).
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = norm(&w);
            if j + 1 == m || b < 1e-14 {
                break;
            }
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(w);
        }
        let k = alpha.len();
        let t = Mat::<f64>::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = t
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Linalg(format!("tridiagonal eigensolver: {e:?}")))?;
        let y = eig.U();
        let mut ritz = vec![C64::new(0.0, 0.0); n];
        for (j, q) in basis.iter().enumerate().take(k) {
            let c = y[(j, 0)];
            ritz.iter_mut().zip(q).for_each(|(x, v)| *x += c * v);
        }
        let rn = norm(&ritz);
        ritz.iter_mut().for_each(|x| *x /= rn);
        let ar = apply(&ritz);
        let energy = dot(&ritz, &ar).re;
        let residual = ar
            .iter()
            .zip(&ritz)
            .map(|(a, r)| (a - r * energy).norm_sqr())
            .sum::<f64>()
            .sqrt();
        best = (energy, ritz.clone());
        if residual < opts.tol || k < m.min(opts.krylov_dim) || k == n {
            return Ok(best);
        }
        v0 = ritz;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_lowest_of_diagonal_plus_coupling() {
        let n = 200;
        let apply = |v: &[C64]| -> Vec<C64> {
            (0..n)
                .map(|i| {
                    let mut acc = v[i] * (i as f64 * 0.1);
                    if i > 0 {
                        acc += v[i - 1] * 0.3;
                    }
                    if i + 1 < n {
                        acc += v[i + 1] * 0.3;
                    }
                    acc
                })
                .collect()
        };
        let dense = Mat::<f64>::from_fn(n, n, |i, j| {
            if i == j {
                i as f64 * 0.1
            } else if i.abs_diff(j) == 1 {
                0.3
            } else {
                0.0
            }
        });
        let exact = dense.self_adjoint_eigenvalues(Side::Lower).unwrap()[0];
        let start: Vec<C64> = (0..n).map(|i| C64::new(1.0, (i % 3) as f64)).collect();
        let (e, v) = lowest_eigenpair(apply, &start, LanczosOptions::default()).unwrap();
        assert!((e - exact).abs() < 1e-10, "{e} vs {exact}");
        assert!((norm(&v) - 1.0).abs() < 1e-12);
    }
}
