use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PronyError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Small dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(PronyError::InvalidInput(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(PronyError::InvalidInput("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flatten()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        Self::from_row_major(rows.len(), cols, data)
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Inverse by LU with partial pivoting.
    pub fn inverse(&self) -> Result<DenseMatrix> {
        if !self.is_square() {
            return Err(PronyError::InvalidInput(
                "inverse of a non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let scale = self.max_abs();
        if n == 0 {
            return Ok(DenseMatrix::zeros(0, 0));
        }
        if scale == 0.0 || !scale.is_finite() {
            return Err(PronyError::SingularMatrix);
        }
        let mut lu = self.clone();
        let mut inv = DenseMatrix::identity(n);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&a, &b| lu[(a, k)].norm().total_cmp(&lu[(b, k)].norm()))
                .unwrap();
            if lu[(p, k)].norm() <= f64::EPSILON * scale {
                return Err(PronyError::SingularMatrix);
            }
            lu.swap_rows(k, p);
            inv.swap_rows(k, p);
            let pivot = lu[(k, k)];
            for r in k + 1..n {
                let f = lu[(r, k)] / pivot;
                if f == ZERO {
                    continue;
                }
                for c in k..n {
                    let v = lu[(k, c)];
                    lu[(r, c)] -= f * v;
                }
                for c in 0..n {
                    let v = inv[(k, c)];
                    inv[(r, c)] -= f * v;
                }
            }
        }
        for k in (0..n).rev() {
            let pivot = lu[(k, k)];
            for c in 0..n {
                let mut s = inv[(k, c)];
                for j in k + 1..n {
                    s -= lu[(k, j)] * inv[(j, c)];
                }
                inv[(k, c)] = s / pivot;
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn qr_pivoted(&self) -> PivotedQr {
        PivotedQr::new(self)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;

    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

/// Householder QR with column pivoting, `A P = Q R`.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    r: DenseMatrix,
    reflectors: Vec<Vec<Complex64>>,
    perm: Vec<usize>,
}

impl PivotedQr {
    fn new(a: &DenseMatrix) -> Self {
        let (m, n) = (a.rows, a.cols);
        let mut r = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut reflectors = Vec::new();
        let mut norms: Vec<f64> = (0..n).map(|c| col_norm2(&r, c, 0)).collect();

        for k in 0..m.min(n) {
            let p = (k..n)
                .max_by(|&x, &y| norms[x].total_cmp(&norms[y]))
                .unwrap();
            if p != k {
                for row in 0..m {
                    r.data.swap(row * n + k, row * n + p);
                }
                perm.swap(k, p);
                norms.swap(k, p);
            }

            let alpha_norm = col_norm2(&r, k, k).sqrt();
            let mut v: Vec<Complex64> = (k..m).map(|row| r[(row, k)]).collect();
            if alpha_norm == 0.0 {
                reflectors.push(Vec::new());
                continue;
            }
            let phase = if v[0] == ZERO {
                ONE
            } else {
                v[0] / v[0].norm()
            };
            let alpha = -phase * alpha_norm;
            v[0] -= alpha;
            let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if vnorm2 > 0.0 {
                for c in k..n {
                    let dot: Complex64 = (k..m).map(|row| v[row - k].conj() * r[(row, c)]).sum();
                    let f = dot * (2.0 / vnorm2);
                    for row in k..m {
                        r[(row, c)] -= f * v[row - k];
                    }
                }
            }
            for row in k + 1..m {
                r[(row, k)] = ZERO;
            }
            reflectors.push(if vnorm2 > 0.0 { v } else { Vec::new() });
            for c in k + 1..n {
                norms[c] = col_norm2(&r, c, k + 1);
            }
        }
        PivotedQr {
            r,
            reflectors,
            perm,
        }
    }

    /// `|R_ii|` in pivot order.
    pub fn diagonal_magnitudes(&self) -> Vec<f64> {
        (0..self.r.rows.min(self.r.cols))
            .map(|i| self.r[(i, i)].norm())
            .collect()
    }

    /// Number of pivots with `|R_ii| > rel_tol * |R_00|`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let d = self.diagonal_magnitudes();
        let Some(&lead) = d.first() else { return 0 };
        if lead == 0.0 {
            return 0;
        }
        d.iter().take_while(|&&x| x > rel_tol * lead).count()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn r(&self) -> &DenseMatrix {
        &self.r
    }

    /// Applies `Q^H` to `b`.
    pub fn apply_qh(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut y = b.to_vec();
        for (k, v) in self.reflectors.iter().enumerate() {
            if v.is_empty() {
                continue;
            }
            let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            let dot: Complex64 = v.iter().zip(&y[k..]).map(|(a, b)| a.conj() * b).sum();
            let f = dot * (2.0 / vnorm2);
            for (yi, vi) in y[k..].iter_mut().zip(v) {
                *yi -= f * vi;
            }
        }
        y
    }

    /// Least-squares solution of `A x = b` for full column rank `A` (rows >= cols).
    pub fn solve_least_squares(&self, b: &[Complex64], rel_tol: f64) -> Result<Vec<Complex64>> {
        let (m, n) = (self.r.rows, self.r.cols);
        if b.len() != m {
            return Err(PronyError::InvalidInput(
                "right-hand side length mismatch".into(),
            ));
        }
        if m < n || self.rank(rel_tol) < n {
            return Err(PronyError::SingularMatrix);
        }
        let y = self.apply_qh(b);
        let mut z = vec![ZERO; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.r[(i, j)] * z[j];
            }
            z[i] = s / self.r[(i, i)];
        }
        let mut x = vec![ZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        Ok(x)
    }

    /// Null vector of an `n x (n+1)` matrix of full row rank, with the free
    /// pivot column set to one.
    pub fn null_vector(&self) -> Vec<Complex64> {
        let (m, n) = (self.r.rows, self.r.cols);
        debug_assert!(n == m + 1);
        let k = m;
        let mut z = vec![ZERO; n];
        z[k] = ONE;
        for i in (0..k).rev() {
            let mut s = -self.r[(i, k)];
            for j in i + 1..k {
                s -= self.r[(i, j)] * z[j];
            }
            z[i] = s / self.r[(i, i)];
        }
        let mut x = vec![ZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }
}

fn col_norm2(a: &DenseMatrix, c: usize, from: usize) -> f64 {
    (from..a.rows).map(|r| a[(r, c)].norm_sqr()).sum()
}
