//! Small dense linear algebra: least squares, square solves, matrix exponential.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Debug)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Matrix {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn scaled(&self, k: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    fn add_assign(&mut self, rhs: &Matrix) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| libm::fabs(self[(i, j)])).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `1e-300` in magnitude.
pub fn solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows;
    assert_eq!(n, a.cols);
    assert_eq!(n, b.len());
    let mut m = a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| libm::fabs(m[(i, k)]).total_cmp(&libm::fabs(m[(j, k)])))?;
        if libm::fabs(m[(p, k)]) < 1e-300 {
            return None;
        }
        if p != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = tmp;
            }
            x.swap(k, p);
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[(i, j)] -= f * m[(k, j)];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[(k, j)] * x[j]).sum();
        x[k] = (x[k] - s) / m[(k, k)];
    }
    Some(x)
}

/// Least-squares solution of an overdetermined system via Householder QR.
///
/// Returns `None` if the matrix is numerically rank deficient (a diagonal
/// entry of `R` below `1e-12` times the largest).
pub fn lstsq(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let (m, n) = (a.rows, a.cols);
    assert!(m >= n, "lstsq needs at least as many rows as columns");
    assert_eq!(b.len(), m);
    let mut r = a.clone();
    let mut y = b.to_vec();
    for k in 0..n {
        let norm = libm::sqrt((k..m).map(|i| r[(i, k)] * r[(i, k)]).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[(k, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                r[(i, j)] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * y[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..m {
            y[i] -= f * v[i - k];
        }
    }
    let dmax = (0..n).map(|k| libm::fabs(r[(k, k)])).fold(0.0, f64::max);
    if dmax == 0.0 {
        return None;
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        if libm::fabs(r[(k, k)]) < 1e-12 * dmax {
            return None;
        }
        let s: f64 = (k + 1..n).map(|j| r[(k, j)] * x[j]).sum();
        x[k] = (y[k] - s) / r[(k, k)];
    }
    Some(x)
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm(a: &Matrix) -> Matrix {
    let n = a.rows;
    assert_eq!(n, a.cols);
    let norm = a.norm_inf();
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let s = a.scaled(scale);
    let mut out = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    // ||s|| <= 1/2, so 20 terms are far below 1e-16
    for k in 1..=20 {
        term = term.mul(&s).scaled(1.0 / k as f64);
        out.add_assign(&term);
        if term.norm_inf() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        out = out.mul(&out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lstsq_recovers_exact_solution() {
        let a = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![1.0, 3.0],
        ]);
        let b = [1.0, 3.0, 5.0, 7.0];
        let x = lstsq(&a, &b).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-13);
        assert_relative_eq!(x[1], 2.0, epsilon = 1e-13);
    }

    #[test]
    fn lstsq_rank_deficient() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]);
        assert!(lstsq(&a, &[1.0, 2.0, 3.0]).is_none());
    }

    #[test]
    fn solve_with_pivoting() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 1.0]]);
        let x = solve(&a, &[3.0, 5.0]).unwrap();
        assert_relative_eq!(x[0], 1.0);
        assert_relative_eq!(x[1], 3.0);
        assert!(solve(&Matrix::zeros(2, 2), &[1.0, 1.0]).is_none());
    }

    #[test]
    fn expm_diagonal_and_nilpotent() {
        let d = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, -1.5]]);
        let e = expm(&d);
        assert_relative_eq!(e[(0, 0)], libm::exp(3.0), max_relative = 1e-13);
        assert_relative_eq!(e[(1, 1)], libm::exp(-1.5), max_relative = 1e-13);
        let n = Matrix::from_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]);
        let e = expm(&n);
        assert_eq!(e, Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]));
    }

    #[test]
    fn expm_rotation() {
        let th = 2.3;
        let a = Matrix::from_rows(&[vec![0.0, -th], vec![th, 0.0]]);
        let e = expm(&a);
        assert_relative_eq!(e[(0, 0)], libm::cos(th), epsilon = 1e-13);
        assert_relative_eq!(e[(1, 0)], libm::sin(th), epsilon = 1e-13);
    }
}
