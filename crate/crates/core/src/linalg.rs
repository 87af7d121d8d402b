//! Dense complex linear algebra used throughout the crate.
//!
//! Every operator is stored as a `DMatrix<Complex64>`; the helpers here cover
//! the handful of things nalgebra does not provide directly (spectral norm
//! shortcuts, Pauli matrices, commutators) and the matrix exponential.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMatrix {
    CMatrix::zeros(dim, dim)
}

pub fn sigma_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Computational basis vector `|j⟩` in dimension `dim`.
pub fn basis_vector(dim: usize, j: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[j] = ONE;
    v
}

/// `|a⟩⟨b|`
pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral (largest singular value) norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Largest absolute entry; cheap proxy used by the structural checks.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn anti_hermitian_defect(m: &CMatrix) -> f64 {
    max_abs(&(m + m.adjoint()))
}

pub fn unitary_defect(m: &CMatrix) -> f64 {
    let id = identity(m.nrows());
    max_abs(&(m.adjoint() * m - &id)).max(max_abs(&(m * m.adjoint() - &id)))
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub(crate) fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Eigen-decomposition `M = Q diag(λ) Q†` of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectral {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl Spectral {
    /// Decomposes the Hermitian part of `m`.
    pub fn of_hermitian(m: &CMatrix) -> Self {
        let eig = SymmetricEigen::new(hermitize(m));
        Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    /// `Q diag(f(λ)) Q†`
    pub fn apply<F: Fn(f64) -> Complex64>(&self, f: F) -> CMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..d {
            let mut col = scaled.column_mut(j);
            col *= f(self.values[j]);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Matrix exponential `e^A`.
///
/// Hermitian and anti-Hermitian inputs go through an eigen-decomposition so
/// that `exp` of an anti-Hermitian matrix is unitary to machine precision.
/// Anything else falls back to scaling-and-squaring with a Padé approximant.
pub fn mat_exp(a: &CMatrix) -> Result<CMatrix> {
    check_square(a)?;
    if !is_finite(a) {
        return Err(Error::NonFinite);
    }
    if a.is_empty() {
        return Ok(a.clone());
    }
    let scale = max_abs(a).max(1.0);
    let structural = 64.0 * f64::EPSILON * scale;
    if hermitian_defect(a) <= structural {
        return Ok(Spectral::of_hermitian(a).apply(|x| c(x.exp(), 0.0)));
    }
    if anti_hermitian_defect(a) <= structural {
        // A = iB with B = -iA Hermitian.
        let b = a.map(|z| -I * z);
        return Ok(Spectral::of_hermitian(&b).apply(|x| c(0.0, x).exp()));
    }
    Ok(a.clone().exp())
}

/// `exp(-i H t)` for Hermitian `H` given through its spectral decomposition.
pub fn evolution_operator(spec: &Spectral, t: f64) -> CMatrix {
    spec.apply(|x| c(0.0, -x * t).exp())
}
