//! Single-instant measurement semantics: free evolution, Born probabilities,
//! collapse, Lüders mixing and the von Neumann entropy.

use crate::linalg::{self, check_dims, max_abs, Spectral};
use crate::operators::{DensityOperator, HermitianOperator, Projector, StateVector};
use crate::{Error, Result, Tolerances};

/// `|ψ(t)⟩ = exp(−iHt)|ψ(0)⟩`
pub fn evolve_state(psi: &StateVector, h: &HermitianOperator, t: f64) -> Result<StateVector> {
    check_dims(h.dim(), psi.dim())?;
    psi.apply(&h.propagator(t))
}

/// `ρ(t) = exp(−iHt) ρ(0) exp(iHt)`
pub fn evolve_density(rho: &DensityOperator, h: &HermitianOperator, t: f64) -> Result<DensityOperator> {
    check_dims(h.dim(), rho.dim())?;
    let u = h.propagator(t);
    DensityOperator::new(linalg::hermitize(&(&u * rho.matrix() * u.adjoint())))
}

/// Clamps a computed probability to `[0, 1]`, tolerating round-off up to
/// `10·tol_alg` on either side.
pub fn clamp_probability(p: f64, tol: &Tolerances) -> Result<f64> {
    let slack = 10.0 * tol.tol_alg;
    if !p.is_finite() || p < -slack || p > 1.0 + slack {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Probability `Tr(EρE)` of finding `E = 1`.
pub fn measure_prob(rho: &DensityOperator, e: &Projector) -> Result<f64> {
    check_dims(e.dim(), rho.dim())?;
    let p = linalg::trace(&(e.matrix() * rho.matrix() * e.matrix())).re;
    clamp_probability(p, &Tolerances::default())
}

/// Post-measurement state `EρE / Tr(EρE)` on finding `E = 1`.
pub fn collapse(rho: &DensityOperator, e: &Projector, tol: &Tolerances) -> Result<DensityOperator> {
    check_dims(e.dim(), rho.dim())?;
    let m = e.matrix() * rho.matrix() * e.matrix();
    let p = linalg::trace(&m).re;
    if p <= tol.prob_floor {
        return Err(Error::NullOutcome { probability: p });
    }
    DensityOperator::from_unnormalized(m, tol)
}

/// Checks that `family` is a complete set of mutually orthogonal projectors.
pub fn check_complete_family(family: &[Projector], dim: usize, tol: &Tolerances) -> Result<()> {
    if family.is_empty() {
        return Err(Error::InvalidFamily("empty projector family".into()));
    }
    let mut sum = linalg::zeros(dim);
    for (a, pa) in family.iter().enumerate() {
        check_dims(dim, pa.dim())?;
        sum += pa.matrix();
        for pb in &family[a + 1..] {
            let overlap = max_abs(&(pa.matrix() * pb.matrix()));
            if overlap > tol.tol_alg {
                return Err(Error::InvalidFamily(format!(
                    "projectors are not mutually orthogonal (overlap {overlap:.3e})"
                )));
            }
        }
    }
    let defect = max_abs(&(sum - linalg::identity(dim)));
    if defect > tol.tol_alg {
        return Err(Error::InvalidFamily(format!(
            "projectors do not sum to the identity (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Non-selective measurement `ρ ↦ Σₙ EₙρEₙ` over a complete orthogonal family.
pub fn lueders_mix(rho: &DensityOperator, family: &[Projector], tol: &Tolerances) -> Result<DensityOperator> {
    check_complete_family(family, rho.dim(), tol)?;
    let mut out = linalg::zeros(rho.dim());
    for e in family {
        out += e.matrix() * rho.matrix() * e.matrix();
    }
    DensityOperator::with_tolerances(linalg::hermitize(&out), tol)
}

/// Heisenberg-picture projector `e^{iHt} E e^{−iHt}`.
pub fn heisenberg_transform(e: &Projector, h: &HermitianOperator, t: f64) -> Result<Projector> {
    check_dims(h.dim(), e.dim())?;
    let u = h.propagator(t);
    Projector::new(u.adjoint() * e.matrix() * u)
}

/// `S = −Tr ρ ln ρ`; eigenvalues below `tol_alg` contribute nothing.
pub fn von_neumann_entropy(rho: &DensityOperator, tol: &Tolerances) -> f64 {
    let spec = Spectral::of_hermitian(rho.matrix());
    let s: f64 = spec
        .values
        .iter()
        .filter(|&&x| x > tol.tol_alg)
        .map(|&x| -x * x.ln())
        .sum();
    s.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, outer, sigma_x, sigma_y, sigma_z, CMatrix, CVector};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn ket0() -> StateVector {
        StateVector::basis(2, 0)
    }

    fn hx() -> HermitianOperator {
        HermitianOperator::new(sigma_x()).unwrap()
    }

    fn proj(j: usize) -> Projector {
        Projector::from_indices(2, [j]).unwrap()
    }

    #[test]
    fn evolve_state_examples() {
        let psi = ket0();
        let same = evolve_state(&psi, &hx(), 0.0).unwrap();
        assert_abs_diff_eq!((same.amplitudes() - psi.amplitudes()).norm(), 0.0, epsilon = 1e-15);

        let hz = HermitianOperator::new(sigma_z()).unwrap();
        let t = 0.7;
        let out = evolve_state(&psi, &hz, t).unwrap();
        let expected = c(0.0, -t).exp();
        assert_abs_diff_eq!((out.amplitudes()[0] - expected).norm(), 0.0, epsilon = 1e-14);

        let out = evolve_state(&psi, &hx(), PI / 2.0).unwrap();
        assert_abs_diff_eq!((out.amplitudes()[1] - c(0.0, -1.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(out.amplitudes()[0].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn evolve_state_dimension_mismatch() {
        let err = evolve_state(&StateVector::basis(3, 0), &hx(), 1.0).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });
    }

    #[test]
    fn evolve_density_examples() {
        let mixed = DensityOperator::maximally_mixed(2);
        let out = evolve_density(&mixed, &hx(), 1.3).unwrap();
        assert!(max_abs(&(out.matrix() - mixed.matrix())) < 1e-15);

        // Direct 2x2 conjugation: e^{-iσx t} = cos t − i sin t σx, t = π/4.
        let rho0 = DensityOperator::pure(&ket0()).unwrap();
        let t = PI / 4.0;
        let u = crate::linalg::identity(2).map(|z| z * t.cos()) + sigma_x().map(|z| z * c(0.0, -t.sin()));
        let direct = &u * rho0.matrix() * u.adjoint();
        // Closed form: ½(1 + cos 2t σz − sin 2t σy) at t = π/4 is ½(1 − σy).
        let closed = (crate::linalg::identity(2) - sigma_y()).map(|z| z * 0.5);
        let out = evolve_density(&rho0, &hx(), t).unwrap();
        assert!(max_abs(&(out.matrix() - &direct)) < 1e-14);
        assert!(max_abs(&(out.matrix() - &closed)) < 1e-14);
    }

    #[test]
    fn measure_prob_examples() {
        let rho0 = DensityOperator::pure(&ket0()).unwrap();
        assert_abs_diff_eq!(
            measure_prob(&rho0, &Projector::identity(2)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(measure_prob(&rho0, &proj(1)).unwrap(), 0.0, epsilon = 1e-15);
        let mixed = DensityOperator::maximally_mixed(2);
        assert_abs_diff_eq!(measure_prob(&mixed, &proj(0)).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn collapse_examples() {
        let tol = Tolerances::default();
        let rho0 = DensityOperator::pure(&ket0()).unwrap();
        let fixed = collapse(&rho0, &proj(0), &tol).unwrap();
        assert!(max_abs(&(fixed.matrix() - rho0.matrix())) < 1e-15);

        let mixed = DensityOperator::maximally_mixed(2);
        let out = collapse(&mixed, &proj(0), &tol).unwrap();
        assert!(max_abs(&(out.matrix() - rho0.matrix())) < 1e-15);

        let err = collapse(&rho0, &proj(1), &tol).unwrap_err();
        assert!(matches!(err, Error::NullOutcome { .. }));
    }

    #[test]
    fn lueders_examples() {
        let tol = Tolerances::default();
        let z_basis = [proj(0), proj(1)];
        let diag = DensityOperator::new(CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(0.3, 0.0),
            c(0.7, 0.0),
        ])))
        .unwrap();
        let out = lueders_mix(&diag, &z_basis, &tol).unwrap();
        assert!(max_abs(&(out.matrix() - diag.matrix())) < 1e-15);

        let plus = CVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]);
        let rho_plus = DensityOperator::new(outer(&plus, &plus)).unwrap();
        let out = lueders_mix(&rho_plus, &z_basis, &tol).unwrap();
        assert!(max_abs(&(out.matrix() - DensityOperator::maximally_mixed(2).matrix())) < 1e-15);
    }

    #[test]
    fn lueders_rejects_bad_families() {
        let tol = Tolerances::default();
        let rho = DensityOperator::maximally_mixed(2);
        let incomplete = [proj(0)];
        assert!(matches!(
            lueders_mix(&rho, &incomplete, &tol),
            Err(Error::InvalidFamily(_))
        ));
        let overlapping = [proj(0), proj(0), proj(1)];
        assert!(matches!(
            lueders_mix(&rho, &overlapping, &tol),
            Err(Error::InvalidFamily(_))
        ));
    }

    #[test]
    fn heisenberg_examples() {
        let e = proj(0);
        let same = heisenberg_transform(&e, &hx(), 0.0).unwrap();
        assert!(max_abs(&(same.matrix() - e.matrix())) < 1e-15);

        let hz = HermitianOperator::new(sigma_z()).unwrap();
        let commuting = heisenberg_transform(&e, &hz, 2.1).unwrap();
        assert!(max_abs(&(commuting.matrix() - e.matrix())) < 1e-14);

        // Direct conjugation: e^{iσx t}|0⟩⟨0|e^{−iσx t} = ½(1 + cos 2t σz + sin 2t σy).
        let t = 0.37;
        let out = heisenberg_transform(&e, &hx(), t).unwrap();
        let closed = (crate::linalg::identity(2)
            + sigma_z().map(|z| z * (2.0 * t).cos())
            + sigma_y().map(|z| z * (2.0 * t).sin()))
        .map(|z| z * 0.5);
        assert!(max_abs(&(out.matrix() - &closed)) < 1e-14);
        assert_eq!(out.rank(), 1);
    }

    #[test]
    fn entropy_examples() {
        let tol = Tolerances::default();
        let rho0 = DensityOperator::pure(&ket0()).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&rho0, &tol), 0.0, epsilon = 1e-12);
        let mixed = DensityOperator::maximally_mixed(5);
        assert_abs_diff_eq!(von_neumann_entropy(&mixed, &tol), 5f64.ln(), epsilon = 1e-12);
        let d = DensityOperator::new(CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(0.75, 0.0),
            c(0.25, 0.0),
        ])))
        .unwrap();
        let expected = -0.75 * 0.75f64.ln() - 0.25 * 0.25f64.ln();
        assert_abs_diff_eq!(von_neumann_entropy(&d, &tol), expected, epsilon = 1e-14);
    }
}
