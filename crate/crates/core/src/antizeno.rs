//! Continuously measured projectors in closed form.
//!
//! For a fixed projector `E` the survival amplitude freezes (the Zeno
//! effect). For a steered family `E_s(t) = U(t) E U†(t)` the watched state is
//! dragged along with probability one. With `V(t) = e^{iHt} U(t)` the
//! measured-branch operator is
//!
//! ```text
//! A_h(t, t1) = V(t) · T exp(∫_{t1}^{t} E V̇†V E dt') · E · V†(t1)
//! ```
//!
//! and the time-ordered factor `W` is unitary because `E V̇†V E` is
//! anti-Hermitian.

use crate::chain::{chain_operator_heisenberg, chain_probability, ChainOptions, HistoryOutcome, MeasurementSchedule};
use crate::continuum::{time_ordered_exp, OdeConfig};
use crate::family::{rk4_step, HeisenbergFamily, ProjectorFamily, UnitaryFamily};
use crate::linalg::{self, c, check_dims, op_norm, CMatrix, CVector, I};
use crate::measurement::clamp_probability;
use crate::operators::{DensityOperator, HermitianOperator, Projector, StateVector};
use crate::{Error, Result, Tolerances};

/// A projector `E` steered by `U(t)` under Hamiltonian `H`, watched from the
/// initial state `ρ0` on `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct SteeredMeasurement {
    projector: Projector,
    unitary: UnitaryFamily,
    hamiltonian: HermitianOperator,
    rho0: DensityOperator,
    horizon: f64,
    tol: Tolerances,
}

impl SteeredMeasurement {
    pub fn new(
        projector: Projector,
        unitary: UnitaryFamily,
        hamiltonian: HermitianOperator,
        rho0: DensityOperator,
        horizon: f64,
    ) -> Result<Self> {
        Self::with_tolerances(projector, unitary, hamiltonian, rho0, horizon, Tolerances::default())
    }

    pub fn with_tolerances(
        projector: Projector,
        unitary: UnitaryFamily,
        hamiltonian: HermitianOperator,
        rho0: DensityOperator,
        horizon: f64,
        tol: Tolerances,
    ) -> Result<Self> {
        tol.validate()?;
        let d = projector.dim();
        check_dims(d, unitary.dim())?;
        check_dims(d, hamiltonian.dim())?;
        check_dims(d, rho0.dim())?;
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidArgument(format!("horizon {horizon} must be positive")));
        }
        let u0 = linalg::max_abs(&(unitary.at(0.0) - linalg::identity(d)));
        if u0 > tol.tol_alg {
            return Err(Error::Precondition(format!("U(0) differs from 1 by {u0:.3e}")));
        }
        let e = projector.matrix();
        let leak = op_norm(&(e * rho0.matrix() * e - rho0.matrix()));
        if leak > tol.tol_alg {
            return Err(Error::Precondition(format!(
                "initial state is not fixed by the projector (‖EρE − ρ‖ = {leak:.3e})"
            )));
        }
        Ok(Self {
            projector,
            unitary,
            hamiltonian,
            rho0,
            horizon,
            tol,
        })
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn unitary(&self) -> &UnitaryFamily {
        &self.unitary
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn rho0(&self) -> &DensityOperator {
        &self.rho0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn dim(&self) -> usize {
        self.projector.dim()
    }

    /// The pure initial state; fails for a mixed `ρ0`.
    pub fn initial_state(&self) -> Result<StateVector> {
        if !self.rho0.is_pure(self.tol.tol_conv) {
            return Err(Error::NotDensity("initial state is mixed".into()));
        }
        Ok(self.rho0.dominant_state())
    }

    pub fn check_in_domain(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::OutOfDomain {
                t,
                start: 0.0,
                end: self.horizon,
            });
        }
        Ok(())
    }

    /// `E_s(t) = U(t) E U†(t)`.
    pub fn schrodinger_projector(&self, t: f64) -> CMatrix {
        let u = self.unitary.at(t);
        &u * self.projector.matrix() * u.adjoint()
    }

    pub fn projector_family(&self) -> Result<ProjectorFamily> {
        ProjectorFamily::steered(self.projector.clone(), self.unitary.clone(), 0.0, self.horizon)
    }

    pub fn heisenberg_family(&self) -> Result<HeisenbergFamily> {
        HeisenbergFamily::new(self.projector_family()?, self.hamiltonian.clone())
    }

    pub fn v_family(&self) -> VFamily<'_> {
        VFamily { m: self }
    }
}

/// `V(t) = e^{iHt} U(t)`.
#[derive(Debug, Clone, Copy)]
pub struct VFamily<'a> {
    m: &'a SteeredMeasurement,
}

impl VFamily<'_> {
    pub fn at(&self, t: f64) -> CMatrix {
        self.m.hamiltonian.propagator(-t) * self.m.unitary.at(t)
    }

    /// `V̇†V = U̇†U − iU†HU = −U†(g + iH)U`, anti-Hermitian.
    pub fn vdot_dagger_v(&self, t: f64) -> CMatrix {
        let u = self.m.unitary.at(t);
        let g = self.m.unitary.generator(t);
        let ih = self.m.hamiltonian.matrix().map(|z| z * I);
        -(u.adjoint() * (g + ih) * u)
    }
}

/// `A = e^{i(H−H̄)t} |ψ0⟩⟨ψ0| e^{−i(H−H̄)t1}` with `H̄ = ⟨ψ0|H|ψ0⟩`.
pub fn zeno_closed_form(psi0: &StateVector, h: &HermitianOperator, t1: f64, t: f64) -> Result<CMatrix> {
    check_dims(psi0.dim(), h.dim())?;
    if !psi0.is_normalized(Tolerances::default().tol_alg) {
        return Err(Error::NotNormalized { norm: psi0.norm() });
    }
    let hbar = h.expectation(psi0);
    let left = h.propagator(-t) * c(0.0, -hbar * t).exp();
    let right = h.propagator(t1) * c(0.0, hbar * t1).exp();
    let p = linalg::outer(psi0.amplitudes(), psi0.amplitudes());
    Ok(left * p * right)
}

/// `‖e^{−iHt} A(t, 0) ψ0‖²` from the closed form.
pub fn zeno_probability(psi0: &StateVector, h: &HermitianOperator, t: f64) -> Result<f64> {
    let k = h.propagator(t) * zeno_closed_form(psi0, h, 0.0, t)?;
    let amp = k * psi0.amplitudes();
    clamp_probability(amp.norm_squared(), &Tolerances::default())
}

/// `G(t) = E V̇†(t) V(t) E`.
pub fn steering_generator(m: &SteeredMeasurement, t: f64) -> Result<CMatrix> {
    m.check_in_domain(t)?;
    Ok(generator_unchecked(m, t))
}

fn generator_unchecked(m: &SteeredMeasurement, t: f64) -> CMatrix {
    let e = m.projector.matrix();
    e * m.v_family().vdot_dagger_v(t) * e
}

/// The time-ordered factor `W(t, t1)` and the assembled `A_h(t, t1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringPropagator {
    pub w: CMatrix,
    pub a_h: CMatrix,
    pub t1: f64,
    pub t: f64,
}

impl SteeringPropagator {
    pub fn unitarity_defect(&self) -> f64 {
        linalg::unitary_defect(&self.w)
    }
}

fn check_interval(m: &SteeredMeasurement, t1: f64, t: f64) -> Result<()> {
    m.check_in_domain(t1)?;
    m.check_in_domain(t)?;
    if t < t1 {
        return Err(Error::InvalidArgument(format!("interval end {t} precedes start {t1}")));
    }
    Ok(())
}

fn assemble(m: &SteeredMeasurement, w: &CMatrix, t1: f64, t: f64) -> CMatrix {
    let v = m.v_family();
    v.at(t) * w * m.projector.matrix() * v.at(t1).adjoint()
}

/// Integrates `dW/dt' = G(t') W`, `W(t1) = 1`, with `cfg.step_count` RK4 steps.
pub fn solve_steering(m: &SteeredMeasurement, t1: f64, t: f64, cfg: &OdeConfig) -> Result<SteeringPropagator> {
    cfg.validate()?;
    check_interval(m, t1, t)?;
    let g = |s: f64| generator_unchecked(m, s);
    let w = time_ordered_exp(&g, m.dim(), t1, t, cfg.step_count);
    let a_h = assemble(m, &w, t1, t);
    Ok(SteeringPropagator { w, a_h, t1, t })
}

/// `solve_steering` at every node `t1 + k(t − t1)/N`, `k = 0..=N`.
pub fn steering_trajectory(
    m: &SteeredMeasurement,
    t1: f64,
    t: f64,
    cfg: &OdeConfig,
) -> Result<Vec<SteeringPropagator>> {
    cfg.validate()?;
    check_interval(m, t1, t)?;
    let n = cfg.step_count;
    let h = (t - t1) / n as f64;
    let node = |k: usize| if k == n { t } else { t1 + k as f64 * h };
    let g = |s: f64| generator_unchecked(m, s);
    let mut w = linalg::identity(m.dim());
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 {
            w = rk4_step(&g, &w, node(k - 1), h);
        }
        let s = node(k);
        out.push(SteeringPropagator {
            a_h: assemble(m, &w, t1, s),
            w: w.clone(),
            t1,
            t: s,
        });
    }
    Ok(out)
}

/// `p(h) = Tr(A_h ρ0 A_h†)` on `[0, t]`.
pub fn antizeno_probability(m: &SteeredMeasurement, t: f64, cfg: &OdeConfig) -> Result<f64> {
    let sp = solve_steering(m, 0.0, t, cfg)?;
    chain_probability(&m.rho0, &sp.a_h)
}

/// Probability of the all-`E` history for `n` measurements on `[0, t]`.
pub fn discrete_probability(m: &SteeredMeasurement, n: usize, t: f64) -> Result<f64> {
    check_interval(m, 0.0, t)?;
    let fam = m.heisenberg_family()?;
    let sched = MeasurementSchedule::new(0.0, t, n)?;
    let a = chain_operator_heisenberg(&fam, &sched, &HistoryOutcome::all_measured(n), ChainOptions::default())?;
    chain_probability(&m.rho0, &a)
}

/// `ψ_h(t) = e^{−iHt} A_h(t, 0) ψ(0) = U(t) W(t, 0) ψ(0)`.
pub fn evolved_state(m: &SteeredMeasurement, t: f64, cfg: &OdeConfig) -> Result<StateVector> {
    let psi0 = m.initial_state()?;
    let sp = solve_steering(m, 0.0, t, cfg)?;
    let k = m.hamiltonian.propagator(t) * sp.a_h;
    StateVector::new(k * psi0.amplitudes())
}

/// `K_h ρ0 K_h†` with `K_h = e^{−iHt} A_h(t, 0)`.
pub fn evolved_density(m: &SteeredMeasurement, t: f64, cfg: &OdeConfig) -> Result<DensityOperator> {
    let sp = solve_steering(m, 0.0, t, cfg)?;
    let k = m.hamiltonian.propagator(t) * sp.a_h;
    DensityOperator::with_tolerances(
        linalg::hermitize(&(&k * m.rho0.matrix() * k.adjoint())),
        &Tolerances {
            tol_alg: m.tol.tol_conv,
            ..m.tol
        },
    )
}

/// `H_eff(t) = E_s H E_s + i[Ė_s, E_s]` with `Ė_s = [g, E_s]`.
pub fn effective_hamiltonian(m: &SteeredMeasurement, t: f64) -> Result<CMatrix> {
    m.check_in_domain(t)?;
    let es = m.schrodinger_projector(t);
    let des = linalg::commutator(&m.unitary.generator(t), &es);
    let comm = linalg::commutator(&des, &es).map(|z| z * I);
    Ok(&es * m.hamiltonian.matrix() * &es + comm)
}

/// Composite Simpson rule with an even number of panels (at least `panels`).
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = (panels.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

fn simpson_matrix(f: &dyn Fn(f64) -> CMatrix, a: f64, b: f64, panels: usize) -> CMatrix {
    let n = (panels.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += f(a + k as f64 * h).scale(w);
    }
    s.scale(h / 3.0)
}

/// Integrand `⟨ψ̃|(i∂_t − H)|ψ̃⟩` with `ψ̃ = U(t)ψ(0)`.
pub fn rank1_phase_density(m: &SteeredMeasurement, t: f64) -> Result<f64> {
    let psi0 = rank1_initial_state(m)?;
    m.check_in_domain(t)?;
    Ok(phase_density(m, psi0.amplitudes(), t))
}

fn phase_density(m: &SteeredMeasurement, psi0: &CVector, t: f64) -> f64 {
    let tilde = m.unitary.at(t) * psi0;
    let ig = m.unitary.generator(t).map(|z| z * I);
    let op = ig - m.hamiltonian.matrix();
    (tilde.adjoint() * op * &tilde)[(0, 0)].re
}

fn rank1_initial_state(m: &SteeredMeasurement) -> Result<StateVector> {
    if m.projector.rank() != 1 {
        return Err(Error::InvalidArgument(format!(
            "phase integral needs a rank-1 projector (rank {})",
            m.projector.rank()
        )));
    }
    m.initial_state()
}

/// `∫₀ᵗ ⟨ψ̃|(i∂_{t'} − H)|ψ̃⟩ dt'`, unwrapped, by Simpson's rule on
/// `cfg.step_count` panels.
pub fn rank1_phase(m: &SteeredMeasurement, t: f64, cfg: &OdeConfig) -> Result<f64> {
    cfg.validate()?;
    let psi0 = rank1_initial_state(m)?;
    check_interval(m, 0.0, t)?;
    let amps = psi0.amplitudes().clone();
    Ok(simpson(&|s| phase_density(m, &amps, s), 0.0, t, cfg.step_count))
}

/// `e^{iφ} U(t) ψ(0)`, the phase form of the watched state.
pub fn rank1_state(m: &SteeredMeasurement, t: f64, cfg: &OdeConfig) -> Result<StateVector> {
    let phi = rank1_phase(m, t, cfg)?;
    let psi0 = m.initial_state()?;
    StateVector::new((m.unitary.at(t) * psi0.amplitudes()) * c(0.0, phi).exp())
}

fn check_basis(m: &SteeredMeasurement, basis: &[CVector]) -> Result<()> {
    let tol = m.tol.tol_alg.max(1e-12) * 10.0;
    if basis.len() != m.projector.rank() {
        return Err(Error::LengthMismatch {
            expected: m.projector.rank(),
            found: basis.len(),
        });
    }
    for (a, va) in basis.iter().enumerate() {
        check_dims(m.dim(), va.len())?;
        for (b, vb) in basis.iter().enumerate() {
            let want = if a == b { 1.0 } else { 0.0 };
            if (va.dotc(vb) - c(want, 0.0)).norm() > tol {
                return Err(Error::InvalidArgument("basis is not orthonormal".into()));
            }
        }
        let out = m.projector.matrix() * va - va;
        if out.norm() > tol {
            return Err(Error::InvalidArgument("basis vector lies outside range(E)".into()));
        }
    }
    Ok(())
}

fn f_matrix(m: &SteeredMeasurement, basis: &[CVector], t: f64) -> CMatrix {
    let vv = m.v_family().vdot_dagger_v(t);
    let n = basis.len();
    CMatrix::from_fn(n, n, |a, b| (basis[a].adjoint() * &vv * &basis[b])[(0, 0)])
}

/// `f_{αβ}(t) = i⟨ψ̃_α|(i∂_t − H)|ψ̃_β⟩ = ⟨α|V̇†V|β⟩`, anti-Hermitian.
pub fn rankn_f_matrix(m: &SteeredMeasurement, basis: &[CVector], t: f64) -> Result<CMatrix> {
    check_basis(m, basis)?;
    m.check_in_domain(t)?;
    Ok(f_matrix(m, basis, t))
}

fn coordinates(basis: &[CVector], psi: &CVector) -> CVector {
    CVector::from_iterator(basis.len(), basis.iter().map(|b| b.dotc(psi)))
}

fn embed(m: &SteeredMeasurement, basis: &[CVector], y: &CMatrix, coords: &CVector, t: f64) -> CVector {
    let inner = y * coords;
    let mut v = CVector::zeros(m.dim());
    for (b, &a) in basis.iter().zip(inner.iter()) {
        v += b * a;
    }
    m.unitary.at(t) * v
}

fn rankn_inputs(m: &SteeredMeasurement, basis: &[CVector], t: f64) -> Result<(StateVector, CVector)> {
    check_basis(m, basis)?;
    check_interval(m, 0.0, t)?;
    let psi0 = m.initial_state()?;
    let coords = coordinates(basis, psi0.amplitudes());
    if (coords.norm() - 1.0).abs() > m.tol.tol_conv {
        return Err(Error::Precondition("initial state lies outside range(E)".into()));
    }
    Ok((psi0, coords))
}

/// `U(t) · Y(t) · ψ(0)` where `dY/dt = f(t) Y`, `Y(0) = 1` on `range(E)`.
pub fn rankn_state(m: &SteeredMeasurement, basis: &[CVector], t: f64, cfg: &OdeConfig) -> Result<StateVector> {
    cfg.validate()?;
    let (_, coords) = rankn_inputs(m, basis, t)?;
    let f = |s: f64| f_matrix(m, basis, s);
    let y = time_ordered_exp(&f, basis.len(), 0.0, t, cfg.step_count);
    StateVector::new(embed(m, basis, &y, &coords, t))
}

/// Same as [`rankn_state`] but with the plain exponential of `∫f`, ignoring
/// time ordering. Agrees only when the `f(t)` commute.
pub fn rankn_state_unordered(
    m: &SteeredMeasurement,
    basis: &[CVector],
    t: f64,
    cfg: &OdeConfig,
) -> Result<StateVector> {
    cfg.validate()?;
    let (_, coords) = rankn_inputs(m, basis, t)?;
    let f = |s: f64| f_matrix(m, basis, s);
    let integral = simpson_matrix(&f, 0.0, t, cfg.step_count);
    let y = linalg::mat_exp(&integral)?;
    StateVector::new(embed(m, basis, &y, &coords, t))
}
