use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::{Error, Result, C64};

/// Dense square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    /// Builds a `dim x dim` matrix from row-major entries.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMatrix("dimension must be at least 1".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(dim, dim, &entries))
    }

    pub fn from_dmatrix(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.nrows() != inner.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "matrix must be square and non-empty, got {}x{}",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if let Some(pos) = inner
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            // nalgebra storage is column-major
            let (row, col) = (pos % inner.nrows(), pos / inner.nrows());
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({row}, {col})"
            )));
        }
        Ok(Self { inner })
    }

    pub(crate) fn from_dmatrix_unchecked(inner: DMatrix<C64>) -> Self {
        debug_assert!(inner.is_square());
        Self { inner }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_dmatrix_unchecked(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_dmatrix_unchecked(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(values: &[C64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidMatrix("empty diagonal".into()));
        }
        Self::from_dmatrix(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(
            values,
        )))
    }

    pub fn real_diagonal(values: &[f64]) -> Result<Self> {
        let values: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diagonal(&values)
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn row_major_entries(&self) -> Vec<C64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_dmatrix_unchecked(self.inner.adjoint())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_dmatrix_unchecked(&self.inner * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = 1.0 + self.frobenius_norm();
        (&self.inner - self.inner.adjoint())
            .iter()
            .all(|z| z.norm() <= tol * scale)
    }

    /// Short hex digest of the entry bits, used in diagnostics.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.dim() as u64).to_le_bytes());
        for z in self.row_major_entries() {
            hasher.update(z.re.to_bits().to_le_bytes());
            hasher.update(z.im.to_bits().to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    fn check_same_dim(&self, other: &Self) {
        assert_eq!(
            self.dim(),
            other.dim(),
            "matrix dimensions differ: {} vs {}",
            self.dim(),
            other.dim()
        );
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        ComplexMatrix::from_dmatrix_unchecked(&self.inner + &rhs.inner)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        ComplexMatrix::from_dmatrix_unchecked(&self.inner - &rhs.inner)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        ComplexMatrix::from_dmatrix_unchecked(&self.inner * &rhs.inner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(ComplexMatrix::new(0, vec![]).is_err());
        assert!(ComplexMatrix::new(2, vec![c(1.0, 0.0); 3]).is_err());
        let err = ComplexMatrix::new(
            2,
            vec![c(1.0, 0.0), c(f64::NAN, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap_err();
        assert!(err.to_string().contains("(0, 1)"), "{err}");
    }

    #[test]
    fn row_major_layout_roundtrips() {
        let entries = vec![c(1.0, 0.0), c(2.0, 0.5), c(3.0, 0.0), c(4.0, -1.0)];
        let m = ComplexMatrix::new(2, entries.clone()).unwrap();
        assert_eq!(m.get(0, 1), c(2.0, 0.5));
        assert_eq!(m.get(1, 0), c(3.0, 0.0));
        assert_eq!(m.row_major_entries(), entries);
    }

    #[test]
    fn fingerprint_distinguishes_matrices() {
        let a = ComplexMatrix::identity(3);
        let b = ComplexMatrix::zeros(3);
        assert_eq!(a.fingerprint(), ComplexMatrix::identity(3).fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 16);
    }
}
