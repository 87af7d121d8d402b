//! Validated quantum operator types.
//!
//! Each newtype checks its defining identities once at construction (within
//! [`Tolerances::tol_alg`]) so the rest of the crate can rely on them.

use num_complex::Complex64;

use crate::linalg::{
    self, check_square, hermitian_defect, hermitize, is_finite, max_abs, CMatrix, CVector, Spectral, ONE,
};
use crate::{Error, Result, Tolerances};

fn validate_matrix(m: &CMatrix, tol: &Tolerances) -> Result<usize> {
    let dim = check_square(m)?;
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if dim > tol.max_dim {
        return Err(Error::DimensionTooLarge { dim, max: tol.max_dim });
    }
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    Ok(dim)
}

/// A self-adjoint operator in the Hamiltonian role, with its spectral
/// decomposition computed up front.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    spectral: Spectral,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        validate_matrix(&matrix, tol)?;
        let defect = hermitian_defect(&matrix);
        if defect > tol.tol_alg * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        let matrix = hermitize(&matrix);
        let spectral = Spectral::of_hermitian(&matrix);
        Ok(Self { matrix, spectral })
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(linalg::zeros(dim)).expect("zero operator is Hermitian")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// `exp(-i H t)`
    pub fn propagator(&self, t: f64) -> CMatrix {
        linalg::evolution_operator(&self.spectral, t)
    }

    /// `⟨ψ|H|ψ⟩` for a normalized `ψ`.
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        psi.0.dotc(&(&self.matrix * &psi.0)).re
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.matrix.map(|z| z * s)).expect("real multiple of a Hermitian operator")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator(CMatrix);

impl UnitaryOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        validate_matrix(&matrix, tol)?;
        let defect = linalg::unitary_defect(&matrix);
        if defect > tol.tol_alg {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        Self(linalg::identity(dim))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }
}

/// Orthogonal projector `E = E² = E†`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: CMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        validate_matrix(&matrix, tol)?;
        let defect = hermitian_defect(&matrix).max(max_abs(&(&matrix * &matrix - &matrix)));
        if defect > tol.tol_alg {
            return Err(Error::NotProjector { defect });
        }
        let rank = linalg::trace(&matrix).re.round().max(0.0) as usize;
        Ok(Self {
            matrix: hermitize(&matrix),
            rank,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: linalg::identity(dim),
            rank: dim,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: linalg::zeros(dim),
            rank: 0,
        }
    }

    /// `|ψ⟩⟨ψ|` for a normalized state.
    pub fn rank_one(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > Tolerances::default().tol_alg {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(linalg::outer(&psi.0, &psi.0))
    }

    /// Projector onto the span of orthonormal columns.
    pub fn from_orthonormal(vectors: &[CVector]) -> Result<Self> {
        let dim = vectors
            .first()
            .map(|v| v.len())
            .ok_or_else(|| Error::InvalidArgument("empty vector list".into()))?;
        let mut m = linalg::zeros(dim);
        for v in vectors {
            linalg::check_dims(dim, v.len())?;
            m += linalg::outer(v, v);
        }
        Self::new(m)
    }

    /// Diagonal projector onto the listed computational-basis indices.
    pub fn from_indices<I: IntoIterator<Item = usize>>(dim: usize, indices: I) -> Result<Self> {
        let mut diag = CVector::zeros(dim);
        for j in indices {
            if j >= dim {
                return Err(Error::InvalidArgument(format!(
                    "basis index {j} out of range for dimension {dim}"
                )));
            }
            diag[j] = ONE;
        }
        Self::new(CMatrix::from_diagonal(&diag))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `Ē = 1 − E`
    pub fn complement(&self) -> Self {
        Self {
            matrix: linalg::identity(self.dim()) - &self.matrix,
            rank: self.dim() - self.rank,
        }
    }

    /// Orthonormal basis of `range(E)`.
    pub fn range_basis(&self) -> Vec<CVector> {
        let spec = Spectral::of_hermitian(&self.matrix);
        let mut idx: Vec<usize> = (0..self.dim()).collect();
        idx.sort_by(|&a, &b| spec.values[b].total_cmp(&spec.values[a]));
        idx.into_iter()
            .take(self.rank)
            .map(|j| spec.vectors.column(j).into_owned())
            .collect()
    }

    /// Structural defect `max(‖E²−E‖, ‖E−E†‖)` (entrywise max).
    pub fn defect(m: &CMatrix) -> f64 {
        hermitian_defect(m).max(max_abs(&(m * m - m)))
    }
}

/// Positive semi-definite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(CMatrix);

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    /// Validates the density-operator identities. Eigenvalues in
    /// `[-tol_alg, 0)` are clipped to zero and the result renormalized.
    pub fn with_tolerances(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        validate_matrix(&matrix, tol)?;
        let defect = hermitian_defect(&matrix);
        if defect > tol.tol_alg {
            return Err(Error::NotHermitian { defect });
        }
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > tol.tol_alg {
            return Err(Error::NotDensity(format!("trace {tr} differs from 1")));
        }
        let matrix = hermitize(&matrix);
        let spec = Spectral::of_hermitian(&matrix);
        let min = spec.min_value();
        if min < -tol.tol_alg {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
        }
        if min < 0.0 {
            let clipped = spec.apply(|x| Complex64::new(x.max(0.0), 0.0));
            let tr = linalg::trace(&clipped).re;
            return Ok(Self(hermitize(&clipped.unscale(tr))));
        }
        Ok(Self(matrix))
    }

    /// Normalizes a positive operator `M ↦ M / Tr M`.
    pub fn from_unnormalized(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        check_square(&matrix)?;
        let tr = linalg::trace(&matrix).re;
        if !(tr > tol.prob_floor) {
            return Err(Error::NullOutcome { probability: tr });
        }
        Self::with_tolerances(hermitize(&matrix.unscale(tr)), tol)
    }

    pub fn pure(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        let v = psi.0.unscale(norm);
        Self::new(linalg::outer(&v, &v))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(linalg::identity(dim).unscale(dim as f64))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = Spectral::of_hermitian(&self.0).values.iter().cloned().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> f64 {
        linalg::trace(&(&self.0 * &self.0)).re
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    /// Dominant eigenvector; the state vector of a pure density operator.
    pub fn dominant_state(&self) -> StateVector {
        let spec = Spectral::of_hermitian(&self.0);
        let j = spec.values.imax();
        StateVector(spec.vectors.column(j).into_owned())
    }

    /// `⟨ψ|ρ|ψ⟩`
    pub fn fidelity_with(&self, psi: &StateVector) -> f64 {
        psi.0.dotc(&(&self.0 * &psi.0)).re
    }
}

/// Amplitudes of a state vector. Normalization is not enforced; use
/// [`StateVector::normalized`] where it matters.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVector);

impl StateVector {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("empty state vector".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(amplitudes))
    }

    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let s = Self::new(amplitudes)?;
        let norm = s.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self(s.0.unscale(norm)))
    }

    pub fn basis(dim: usize, j: usize) -> Self {
        Self(linalg::basis_vector(dim, j))
    }

    pub fn from_slice(amps: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amps))
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.0
    }

    pub fn into_amplitudes(self) -> CVector {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.0.dotc(&other.0)
    }

    pub fn apply(&self, op: &CMatrix) -> Result<Self> {
        linalg::check_dims(op.ncols(), self.dim())?;
        Ok(Self(op * &self.0))
    }

    /// Unit-norm vectors in the same ray have overlap modulus one.
    pub fn overlap_sqr(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }
}
