//! Multistart Gauss–Newton for small nonlinear systems, with a
//! finite-difference Jacobian.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::linalg::{lstsq, solve, Matrix};

#[derive(Clone, Copy, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub fd_step: f64,
    /// Euclidean residual norm needed to accept a root.
    pub tol: f64,
    /// Roots closer than this (max norm, relative) are merged.
    pub dedupe: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iter: 100,
            fd_step: 1e-7,
            tol: 1e-10,
            dedupe: 1e-6,
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Root {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub start: usize,
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub enum NewtonError {
    NoConvergence { best_residual: f64, iterations: usize },
    NonFinite { iteration: usize },
}

impl fmt::Display for NewtonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NewtonError::NoConvergence { best_residual, iterations } => {
                write!(f, "no convergence after {iterations} iterations (best residual {best_residual:e})")
            }
            NewtonError::NonFinite { iteration } => write!(f, "non-finite residual at iteration {iteration}"),
        }
    }
}

impl core::error::Error for NewtonError {}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x: &[f64], fx: &[f64], h: f64) -> Option<Matrix> {
    let mut j = Matrix::zeros(fx.len(), x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let step = h * libm::fabs(x[k]).max(1.0);
        xp[k] = x[k] + step;
        let fp = f(&xp);
        xp[k] = x[k];
        if fp.len() != fx.len() || !finite(&fp) {
            return None;
        }
        for i in 0..fx.len() {
            j[(i, k)] = (fp[i] - fx[i]) / step;
        }
    }
    Some(j)
}

/// Damped normal equations `(JᵀJ + μI) δ = −Jᵀf`, used when `J` is rank
/// deficient.
fn damped_step(j: &Matrix, fx: &[f64]) -> Option<Vec<f64>> {
    let n = j.cols();
    let mut a = Matrix::zeros(n, n);
    let mut g = vec![0.0; n];
    for p in 0..n {
        for q in 0..n {
            a[(p, q)] = (0..j.rows()).map(|i| j[(i, p)] * j[(i, q)]).sum();
        }
        g[p] = -(0..j.rows()).map(|i| j[(i, p)] * fx[i]).sum::<f64>();
    }
    let mu = 1e-8 * (0..n).map(|k| a[(k, k)]).fold(0.0, f64::max).max(1e-300);
    for k in 0..n {
        a[(k, k)] += mu;
    }
    solve(&a, &g)
}

/// Gauss–Newton from `x0` with backtracking.
pub fn newton<F: Fn(&[f64]) -> Vec<f64>>(f: &F, x0: &[f64], opts: &NewtonOptions) -> Result<Root, NewtonError> {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !finite(&fx) {
        return Err(NewtonError::NonFinite { iteration: 0 });
    }
    let mut r = norm(&fx);
    for it in 0..=opts.max_iter {
        if r < opts.tol {
            return Ok(Root {
                x,
                residual_norm: r,
                iterations: it,
                start: 0,
            });
        }
        if it == opts.max_iter {
            break;
        }
        let Some(j) = jacobian(f, &x, &fx, opts.fd_step) else {
            return Err(NewtonError::NonFinite { iteration: it });
        };
        let neg: Vec<f64> = fx.iter().map(|v| -v).collect();
        let step = if j.rows() >= j.cols() { lstsq(&j, &neg) } else { None };
        let Some(delta) = step.or_else(|| damped_step(&j, &fx)) else {
            break;
        };
        let mut alpha = 1.0;
        let mut accepted = false;
        while alpha > 1e-6 {
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a + alpha * d).collect();
            let ft = f(&trial);
            if finite(&ft) {
                let rt = norm(&ft);
                if rt < r {
                    x = trial;
                    fx = ft;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(NewtonError::NoConvergence {
        best_residual: r,
        iterations: opts.max_iter,
    })
}

#[derive(Clone, PartialEq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MultistartReport {
    pub roots: Vec<Root>,
    pub n_starts: usize,
    pub n_failed: usize,
}

/// Starting points: `center` itself, then alternately a ±20 % perturbation of
/// `center` and a uniform draw from `[-2, 2]^n`.
pub fn starts<R: Rng + ?Sized>(center: &[f64], n_starts: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(n_starts);
    if n_starts == 0 {
        return out;
    }
    out.push(center.to_vec());
    for k in 1..n_starts {
        let v = if k % 2 == 1 {
            center
                .iter()
                .map(|c| c + rng.gen_range(-0.2..=0.2) * libm::fabs(*c).max(0.1))
                .collect()
        } else {
            center.iter().map(|_| rng.gen_range(-2.0..=2.0)).collect()
        };
        out.push(v);
    }
    out
}

/// Run [`newton`] from every start and keep the distinct converged roots.
pub fn multistart<F: Fn(&[f64]) -> Vec<f64>>(f: &F, starts: &[Vec<f64>], opts: &NewtonOptions) -> MultistartReport {
    let mut roots: Vec<Root> = Vec::new();
    let mut failed = 0;
    for (i, s) in starts.iter().enumerate() {
        match newton(f, s, opts) {
            Ok(mut root) => {
                root.start = i;
                let dup = roots.iter().any(|other| {
                    other
                        .x
                        .iter()
                        .zip(&root.x)
                        .all(|(a, b)| libm::fabs(a - b) <= opts.dedupe * libm::fabs(*a).max(1.0))
                });
                if !dup {
                    roots.push(root);
                }
            }
            Err(_) => failed += 1,
        }
    }
    MultistartReport {
        roots,
        n_starts: starts.len(),
        n_failed: failed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circle_line(x: &[f64]) -> Vec<f64> {
        vec![x[0] * x[0] + x[1] * x[1] - 4.0, x[0] - x[1], 0.5 * (x[0] - x[1])]
    }

    #[test]
    fn recovers_known_root() {
        let s = libm::sqrt(2.0);
        let root = newton(&circle_line, &[1.0, 1.2], &NewtonOptions::default()).unwrap();
        assert!((root.x[0] - s).abs() < 1e-10 && (root.x[1] - s).abs() < 1e-10);
        assert!(root.residual_norm < 1e-10);
    }

    #[test]
    fn exact_start_takes_no_iterations() {
        let s = libm::sqrt(2.0);
        let root = newton(&circle_line, &[s, s], &NewtonOptions::default()).unwrap();
        assert!(root.iterations <= 3);
    }

    #[test]
    fn multistart_finds_both_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let st = starts(&[1.0, 1.0], 12, &mut rng);
        let rep = multistart(&circle_line, &st, &NewtonOptions::default());
        assert_eq!(rep.roots.len(), 2, "{rep:?}");
        assert!(rep.roots.iter().all(|r| r.residual_norm < 1e-10));
    }

    #[test]
    fn no_root_is_reported_as_failure() {
        let f = |x: &[f64]| vec![x[0] * x[0] + 1.0];
        assert!(matches!(
            newton(&f, &[0.3], &NewtonOptions::default()),
            Err(NewtonError::NoConvergence { .. })
        ));
    }
}
