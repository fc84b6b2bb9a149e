use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

pub type C64 = Complex64;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(SimError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Square matrix from nested rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(SimError::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: n,
            cols: n,
            data,
        })
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Matrix::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// |ket⟩⟨bra|
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        let mut m = Matrix::zeros(ket.len(), bra.len());
        for (i, k) in ket.iter().enumerate() {
            for (j, b) in bra.iter().enumerate() {
                m[(i, j)] = k * b.conj();
            }
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

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn kron(&self, other: &Matrix) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        m[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max |A - A†|
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (self - &self.adjoint()).max_abs()
    }

    /// max |U†U - I|
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&(&self.adjoint() * self) - &Matrix::identity(self.rows)).max_abs()
    }

    /// max(|P² - P|, |P - P†|)
    pub fn projector_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let sq = &(self * self) - self;
        sq.max_abs().max(self.hermiticity_defect())
    }

    /// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
    /// Columns of the returned matrix are the eigenvectors.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, Matrix) {
        let n = self.rows;
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            // Symmetrize so rounding noise cannot break the solver's assumptions.
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        });
        let eig = nalgebra::SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = Matrix::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            for i in 0..n {
                vectors[(i, col)] = eig.eigenvectors[(i, k)];
            }
        }
        (values, vectors)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut m = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    m[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        m
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let k = Matrix::identity(2).kron(&Matrix::identity(3));
        assert_eq!(k, Matrix::identity(6));
    }

    #[test]
    fn kron_places_blocks_row_major() {
        let a = Matrix::from_rows(&[vec![c(1., 0.), c(2., 0.)], vec![c(3., 0.), c(4., 0.)]]).unwrap();
        let b = Matrix::from_rows(&[vec![c(0., 1.), c(0., 0.)], vec![c(0., 0.), c(1., 0.)]]).unwrap();
        let k = a.kron(&b);
        assert_eq!(k[(0, 2)], c(0., 2.));
        assert_eq!(k[(3, 1)], c(3., 0.));
        assert_eq!(k[(3, 3)], c(4., 0.));
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let m = Matrix::from_rows(&[vec![c(1., 0.), c(0., -1.)], vec![c(0., 1.), c(-1., 0.)]]).unwrap();
        let (vals, vecs) = m.hermitian_eigen();
        let s = 2f64.sqrt();
        assert!((vals[0] + s).abs() < 1e-12 && (vals[1] - s).abs() < 1e-12);
        let rebuilt = &(&vecs * &Matrix::diagonal(&[c(vals[0], 0.), c(vals[1], 0.)])) * &vecs.adjoint();
        assert!((&rebuilt - &m).max_abs() < 1e-12);
    }
}
