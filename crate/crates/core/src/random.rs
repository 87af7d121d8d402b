//! Seeded random operators for property tests and scenario instances.
//!
//! Hermitian matrices are Hermitized complex Gaussian matrices scaled by
//! `1/√d` so their spectrum stays O(1) as the dimension grows. Projectors and
//! unitaries come from QR-orthonormalized Gaussian columns. All generators are
//! deterministic in the supplied RNG state.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMatrix, CVector};
use crate::operators::{DensityOperator, HermitianOperator, Projector, StateVector, UnitaryOperator};
use crate::{Error, Result};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    // Fill column-major explicitly so the draw order is fixed.
    let data: Vec<Complex64> = (0..rows * cols).map(|_| gaussian(rng)).collect();
    DMatrix::from_vec(rows, cols, data)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    Ok(())
}

/// Orthonormal `dim × cols` frame from the QR factor of a Gaussian matrix.
fn orthonormal_columns<R: Rng + ?Sized>(rng: &mut R, dim: usize, cols: usize) -> CMatrix {
    let g = gaussian_matrix(rng, dim, cols);
    let qr = g.qr();
    // Fix the phase ambiguity of QR so the distribution is rotation invariant.
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn random_hermitian_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<HermitianOperator> {
    check_dim(dim)?;
    let g = gaussian_matrix(rng, dim, dim);
    let h = linalg::hermitize(&g).unscale((dim as f64).sqrt());
    HermitianOperator::new(h)
}

pub fn random_hermitian(dim: usize, seed: u64) -> Result<HermitianOperator> {
    random_hermitian_with(&mut rng_from_seed(seed), dim)
}

pub fn random_projector_with<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<Projector> {
    check_dim(dim)?;
    if rank == 0 || rank > dim {
        return Err(Error::InvalidArgument(format!("rank {rank} must lie in 1..={dim}")));
    }
    let q = orthonormal_columns(rng, dim, rank);
    Projector::new(&q * q.adjoint())
}

pub fn random_projector(dim: usize, rank: usize, seed: u64) -> Result<Projector> {
    random_projector_with(&mut rng_from_seed(seed), dim, rank)
}

/// Full-rank density operator `GG†/Tr(GG†)` from a Ginibre matrix.
pub fn random_density_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<DensityOperator> {
    check_dim(dim)?;
    let g = gaussian_matrix(rng, dim, dim);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    DensityOperator::new(linalg::hermitize(&m.unscale(tr)))
}

pub fn random_density(dim: usize, seed: u64) -> Result<DensityOperator> {
    random_density_with(&mut rng_from_seed(seed), dim)
}

/// Density operator supported on `range(E)`, so that `EρE = ρ`.
pub fn random_density_in_range<R: Rng + ?Sized>(rng: &mut R, e: &Projector) -> Result<DensityOperator> {
    let g = gaussian_matrix(rng, e.dim(), e.dim());
    let m = e.matrix() * &g * g.adjoint() * e.matrix();
    let tr = linalg::trace(&m).re;
    DensityOperator::new(linalg::hermitize(&m.unscale(tr)))
}

pub fn random_state_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<StateVector> {
    check_dim(dim)?;
    let v: CVector = CVector::from_iterator(dim, (0..dim).map(|_| gaussian(rng)));
    StateVector::normalized(v)
}

pub fn random_state(dim: usize, seed: u64) -> Result<StateVector> {
    random_state_with(&mut rng_from_seed(seed), dim)
}

/// Normalized state drawn inside `range(E)`.
pub fn random_state_in_range<R: Rng + ?Sized>(rng: &mut R, e: &Projector) -> Result<StateVector> {
    let v = random_state_with(rng, e.dim())?;
    StateVector::normalized(e.matrix() * v.amplitudes())
}

pub fn random_unitary_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<UnitaryOperator> {
    check_dim(dim)?;
    UnitaryOperator::new(orthonormal_columns(rng, dim, dim))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let a = random_hermitian(4, 11).unwrap();
        let b = random_hermitian(4, 11).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = random_hermitian(4, 12).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn projector_has_requested_rank() {
        for seed in 0..5 {
            let p = random_projector(4, 2, seed).unwrap();
            assert_eq!(p.rank(), 2);
            assert!(Projector::defect(p.matrix()) < 1e-12);
        }
        assert!(random_projector(4, 5, 0).is_err());
        assert!(random_projector(4, 0, 0).is_err());
    }

    #[test]
    fn density_is_valid() {
        let rho = random_density(3, 5).unwrap();
        let ev = rho.eigenvalues();
        assert!(ev.iter().all(|&x| x >= 0.0));
        assert!((ev.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_in_range_is_fixed_by_projector() {
        let mut rng = rng_from_seed(3);
        let e = random_projector_with(&mut rng, 4, 2).unwrap();
        let rho = random_density_in_range(&mut rng, &e).unwrap();
        let fixed = e.matrix() * rho.matrix() * e.matrix();
        assert!(linalg::max_abs(&(fixed - rho.matrix())) < 1e-12);
    }
}
