//! Steering a state by a dense sequence of non-selective measurements.
//!
//! Measuring the interpolants `ψ^{(ν)} = cos(πν/2k) φ + sin(πν/2k) ψ` in turn
//! (each completed to an orthonormal basis) moves `|φ⟩⟨φ|` towards `|ψ⟩⟨ψ|`
//! with fidelity at least `[cos(π/2k)]^{2k}`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, c, CMatrix, CVector};
use crate::measurement::{lueders_mix, von_neumann_entropy};
use crate::operators::{DensityOperator, Projector, StateVector};
use crate::random::{rng_from_seed, SeededRng};
use crate::{Error, Result, Tolerances};

/// Steering from `φ` to an orthogonal `ψ` in `k` measurements. The basis
/// completion of every interpolant is drawn from a generator seeded with
/// `completion_seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringPlan {
    phi: StateVector,
    psi: StateVector,
    k: usize,
    completion_seed: u64,
}

impl SteeringPlan {
    pub fn new(phi: StateVector, psi: StateVector, k: usize, completion_seed: u64) -> Result<Self> {
        linalg::check_dims(phi.dim(), psi.dim())?;
        if phi.dim() < 2 {
            return Err(Error::InvalidArgument("steering needs dimension at least 2".into()));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let tol = Tolerances::default().tol_alg;
        for s in [&phi, &psi] {
            if !s.is_normalized(tol) {
                return Err(Error::NotNormalized { norm: s.norm() });
            }
        }
        let overlap = phi.inner(&psi).norm();
        if overlap > tol {
            return Err(Error::Precondition(format!(
                "endpoints must be orthogonal (|⟨φ|ψ⟩| = {overlap:.3e})"
            )));
        }
        Ok(Self {
            phi,
            psi,
            k,
            completion_seed,
        })
    }

    /// `|0⟩ → |1⟩` in dimension `dim`.
    pub fn basis_pair(dim: usize, k: usize, completion_seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument("steering needs dimension at least 2".into()));
        }
        Self::new(
            StateVector::basis(dim, 0),
            StateVector::basis(dim, 1),
            k,
            completion_seed,
        )
    }

    pub fn phi(&self) -> &StateVector {
        &self.phi
    }

    pub fn psi(&self) -> &StateVector {
        &self.psi
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn completion_seed(&self) -> u64 {
        self.completion_seed
    }

    pub fn interpolant(&self, nu: usize) -> CVector {
        let a = std::f64::consts::FRAC_PI_2 * nu as f64 / self.k as f64;
        self.phi.amplitudes() * c(a.cos(), 0.0) + self.psi.amplitudes() * c(a.sin(), 0.0)
    }
}

/// Final state, fidelity with the target, and the entropy after each step
/// (`entropy[0]` is the initial state).
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringOutcome {
    pub rho: DensityOperator,
    pub fidelity: f64,
    pub entropy: Vec<f64>,
}

/// `[cos(π/2k)]^{2k}`.
pub fn vn_bound(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let k = k as f64;
    Ok((std::f64::consts::PI / (2.0 * k)).cos().powf(2.0 * k))
}

/// Orthonormal vectors spanning the complement of `fixed`, obtained by
/// Gram–Schmidt on Gaussian draws.
fn random_completion(fixed: &[CVector], dim: usize, rng: &mut SeededRng) -> Vec<CVector> {
    let mut frame: Vec<CVector> = fixed.to_vec();
    let mut extra = Vec::new();
    while frame.len() < dim {
        let mut v = CVector::from_iterator(
            dim,
            (0..dim).map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                c(re, im)
            }),
        );
        for _ in 0..2 {
            for b in &frame {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            v.unscale_mut(n);
            frame.push(v.clone());
            extra.push(v);
        }
    }
    extra
}

/// Deterministic completion from the computational basis.
fn standard_completion(fixed: &[CVector], dim: usize) -> Vec<CVector> {
    let mut frame: Vec<CVector> = fixed.to_vec();
    let mut extra = Vec::new();
    for j in 0..dim {
        if frame.len() == dim {
            break;
        }
        let mut v = linalg::basis_vector(dim, j);
        for _ in 0..2 {
            for b in &frame {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let n = v.norm();
        if n > 1e-6 {
            v.unscale_mut(n);
            frame.push(v.clone());
            extra.push(v);
        }
    }
    extra
}

fn measurement_family(target: &CVector, rng: &mut SeededRng) -> Result<Vec<Projector>> {
    let dim = target.len();
    let mut vectors = vec![target.clone()];
    vectors.extend(random_completion(std::slice::from_ref(target), dim, rng));
    vectors.iter().map(|v| Projector::new(linalg::outer(v, v))).collect()
}

fn steer_from(rho: DensityOperator, plan: &SteeringPlan, rng: &mut SeededRng) -> Result<SteeringOutcome> {
    let tol = Tolerances::default();
    let mut rho = rho;
    let mut entropy = vec![von_neumann_entropy(&rho, &tol)];
    for nu in 1..=plan.k {
        let family = measurement_family(&plan.interpolant(nu), rng)?;
        rho = lueders_mix(&rho, &family, &tol)?;
        entropy.push(von_neumann_entropy(&rho, &tol));
    }
    let psi = plan.psi.amplitudes();
    let fidelity = (psi.adjoint() * rho.matrix() * psi)[(0, 0)].re;
    Ok(SteeringOutcome { rho, fidelity, entropy })
}

/// Applies the `k` non-selective measurements to `|φ⟩⟨φ|`.
pub fn vn_steering_run(plan: &SteeringPlan) -> Result<SteeringOutcome> {
    let mut rng = rng_from_seed(plan.completion_seed);
    steer_from(DensityOperator::pure(&plan.phi)?, plan, &mut rng)
}

/// The target `ψ` followed by a fixed completion to an orthonormal basis.
pub fn psi_extended_basis(plan: &SteeringPlan) -> Vec<CVector> {
    let psi = plan.psi.amplitudes().clone();
    let mut basis = vec![psi.clone()];
    basis.extend(standard_completion(&[psi], plan.dim()));
    basis
}

/// `ρ` in the given orthonormal basis.
pub fn in_basis(rho: &DensityOperator, basis: &[CVector]) -> CMatrix {
    let n = basis.len();
    CMatrix::from_fn(n, n, |a, b| (basis[a].adjoint() * rho.matrix() * &basis[b])[(0, 0)])
}

/// Largest `|ρ_mn|² − ρ_mm ρ_nn` over `m ≠ n`; non-positive for any density operator.
pub fn cauchy_schwarz_excess(rho: &DensityOperator, basis: &[CVector]) -> f64 {
    let m = in_basis(rho, basis);
    let n = basis.len();
    let mut worst = f64::NEG_INFINITY;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                worst = worst.max(m[(a, b)].norm_sqr() - m[(a, a)].re * m[(b, b)].re);
            }
        }
    }
    worst
}

/// Largest off-diagonal magnitude of the steered state in the
/// `ψ`-extended basis.
pub fn vn_offdiagonal_decay(plan: &SteeringPlan) -> Result<f64> {
    let out = vn_steering_run(plan)?;
    let m = in_basis(&out.rho, &psi_extended_basis(plan));
    let n = m.nrows();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            if a != b {
                worst = worst.max(m[(a, b)].norm());
            }
        }
    }
    Ok(worst)
}

/// Steers between non-orthogonal states through an intermediate `χ`
/// orthogonal to both, as two chained runs of `k` measurements each.
/// Requires dimension at least 3.
pub fn vn_steering_route(phi: &StateVector, psi: &StateVector, k: usize, seed: u64) -> Result<SteeringOutcome> {
    linalg::check_dims(phi.dim(), psi.dim())?;
    let dim = phi.dim();
    if dim < 3 {
        return Err(Error::InvalidArgument(
            "routing through χ needs dimension at least 3".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let span = {
        let a = phi.amplitudes().clone();
        let mut b = psi.amplitudes() - &a * a.dotc(psi.amplitudes());
        let n = b.norm();
        if n > 1e-9 {
            b.unscale_mut(n);
            vec![a, b]
        } else {
            vec![a]
        }
    };
    let chi = StateVector::new(random_completion(&span, dim, &mut rng).remove(0))?;
    let first = SteeringPlan::new(phi.clone(), chi.clone(), k, seed)?;
    let second = SteeringPlan::new(chi, psi.clone(), k, seed)?;
    let mid = steer_from(DensityOperator::pure(phi)?, &first, &mut rng)?;
    let mut last = steer_from(mid.rho, &second, &mut rng)?;
    let mut entropy = mid.entropy;
    entropy.extend(last.entropy.drain(1..));
    last.entropy = entropy;
    Ok(last)
}
