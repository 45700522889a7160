//! Eigenvalue and singular value sequences of dense complex matrices.
//!
//! Eigenvalues come from a complex Schur reduction, so algebraic multiplicity
//! is automatic. Orderings follow [`eigen_order`].

mod matrix;
mod sequence;

use nalgebra::{DMatrix, SymmetricEigen};

pub use matrix::ComplexMatrix;
pub use sequence::{eigen_order, DecayProfile, EigenSequence, LinearCountBound, ScalarSequence};

use crate::{Error, Result, C64};

const SOLVER_EPS: f64 = 1e-15;
const SOLVER_MAX_ITER: usize = 10_000;

/// All `dim` eigenvalues with multiplicity, in canonical order.
pub fn eigenvalue_sequence(m: &ComplexMatrix) -> Result<EigenSequence> {
    let values = raw_eigenvalues(m)?;
    EigenSequence::new(values, m.dim())
}

fn raw_eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let dim = m.dim();
    if dim == 1 {
        return Ok(vec![m.get(0, 0)]);
    }
    let inner = m.as_dmatrix();
    if is_upper_triangular(inner) {
        return Ok(inner.diagonal().iter().copied().collect());
    }
    let (exponent, scaled) = power_of_two_scaled(inner);
    let schur = nalgebra::Schur::try_new(scaled, SOLVER_EPS, SOLVER_MAX_ITER).ok_or_else(|| {
        Error::NoConvergence {
            fingerprint: m.fingerprint(),
        }
    })?;
    let (_, t) = schur.unpack();
    if t.diagonal()
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::NoConvergence {
            fingerprint: m.fingerprint(),
        });
    }
    let factor = 2f64.powi(exponent);
    let values: Vec<C64> = t.diagonal().iter().map(|z| z * factor).collect();
    if values
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::Domain(format!(
            "eigenvalues of matrix {} exceed the f64 range",
            m.fingerprint()
        )));
    }
    Ok(values)
}

/// `(e, 2^-e m)` with the largest entry component of `2^-e m` in `[1, 2)`.
/// Powers of two keep the rescaling exact.
fn power_of_two_scaled(m: &DMatrix<C64>) -> (i32, DMatrix<C64>) {
    let largest = m
        .iter()
        .fold(0.0f64, |acc, z| acc.max(z.re.abs()).max(z.im.abs()));
    if largest == 0.0 {
        return (0, m.clone());
    }
    let exponent = (largest.log2().floor() as i32).clamp(-1000, 1000);
    (exponent, m.map(|z| z * 2f64.powi(-exponent)))
}

fn is_upper_triangular(m: &DMatrix<C64>) -> bool {
    (0..m.ncols()).all(|j| ((j + 1)..m.nrows()).all(|i| m[(i, j)] == C64::new(0.0, 0.0)))
}

/// Singular values as a finite nonincreasing sequence of length `dim`.
pub fn singular_sequence(m: &ComplexMatrix) -> Result<ScalarSequence> {
    let (exponent, scaled) = power_of_two_scaled(m.as_dmatrix());
    let svd = scaled
        .try_svd(false, false, SOLVER_EPS, SOLVER_MAX_ITER)
        .ok_or_else(|| Error::NoConvergence {
            fingerprint: m.fingerprint(),
        })?;
    let factor = 2f64.powi(exponent);
    let mut values: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|s| s.max(0.0) * factor)
        .collect();
    if values.iter().any(|s| !s.is_finite()) {
        return Err(Error::Domain(format!(
            "singular values of matrix {} exceed the f64 range",
            m.fingerprint()
        )));
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(ScalarSequence::Finite { values })
}

/// `H = (T + T*)/2` and `K = (T - T*)/(2i)`, so that `T = H + iK`.
pub fn hermitian_split(t: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let adj = t.adjoint();
    let h = (t + &adj).scale_real(0.5);
    let k = (t - &adj).scale(C64::new(0.0, -0.5));
    (h, k)
}

/// `F(z) = (T + z T*)/2`.
pub fn pencil(t: &ComplexMatrix, z: C64) -> ComplexMatrix {
    (t + &t.adjoint().scale(z)).scale_real(0.5)
}

/// Positive square root of `T* T`, with negative rounding eigenvalues clamped.
pub fn abs_operator(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    let gram = t.adjoint().as_dmatrix() * t.as_dmatrix();
    let gram = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(gram, SOLVER_EPS, SOLVER_MAX_ITER).ok_or_else(|| {
        Error::NoConvergence {
            fingerprint: t.fingerprint(),
        }
    })?;
    let roots = eig.eigenvalues.map(|x| C64::new(x.max(0.0).sqrt(), 0.0));
    let q = &eig.eigenvectors;
    let root = q * DMatrix::from_diagonal(&roots) * q.adjoint();
    let root = (&root + root.adjoint()) * C64::new(0.5, 0.0);
    Ok(ComplexMatrix::from_dmatrix_unchecked(root))
}

/// Block-diagonal `A (+) B`.
pub fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = (a.dim(), b.dim());
    let mut out = DMatrix::zeros(n + m, n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a.as_dmatrix());
    out.view_mut((n, n), (m, m)).copy_from(b.as_dmatrix());
    ComplexMatrix::from_dmatrix_unchecked(out)
}
