//! Time-dependent unitaries and projector families `t ↦ E_s(t)`, plus their
//! Heisenberg-picture view `E_H(t) = e^{iHt} E_s(t) e^{−iHt}`.

use std::fmt;
use std::sync::Arc;

use crate::linalg::{self, c, check_dims, commutator, CMatrix, Spectral};
use crate::operators::{HermitianOperator, Projector, UnitaryOperator};
use crate::path::ScalarPath;
use crate::{Error, Result, Tolerances};

type MatrixFn = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;

/// Which chain is being followed: every `E_i = 1` found (`h`) or every
/// complement `Ē_i = 1` found (`h̄`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Measured,
    Complement,
}

/// How `dE_s/dt` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DerivativeMode {
    /// From the family's generator or closed form; falls back to central
    /// differences when the family has none.
    #[default]
    Analytic,
    CentralDifference {
        step: f64,
    },
}

pub const DEFAULT_FD_STEP: f64 = 1e-5;

fn central_difference(f: &dyn Fn(f64) -> CMatrix, t: f64, h: f64) -> CMatrix {
    (f(t + h) - f(t - h)).unscale(2.0 * h)
}

/// One factor `exp(−i K θ(t))` of a [`UnitaryFamily::Rotations`] product.
#[derive(Debug, Clone)]
pub struct RotationFactor {
    generator: HermitianOperator,
    angle: ScalarPath,
}

impl RotationFactor {
    pub fn new(generator: HermitianOperator, angle: ScalarPath) -> Self {
        Self { generator, angle }
    }

    fn at(&self, t: f64) -> CMatrix {
        self.generator.propagator(self.angle.value(t))
    }
}

/// A unitary-valued path `t ↦ U(t)` with `U(0) = 1`.
#[derive(Clone)]
pub enum UnitaryFamily {
    /// `U(t) = Π_j exp(−i K_j θ_j(t))`, factors applied left to right.
    /// Generator known in closed form.
    Rotations { dim: usize, factors: Vec<RotationFactor> },
    /// Defined by an anti-Hermitian generator `g(t)` with `U' = gU`,
    /// `U(0) = 1`; values obtained by fixed-step RK4 with step ≤ `max_step`.
    Generated {
        dim: usize,
        generator: MatrixFn,
        max_step: f64,
    },
    /// Closed-form callback; generator optional (central differences otherwise).
    ClosedForm {
        dim: usize,
        unitary: MatrixFn,
        generator: Option<MatrixFn>,
    },
}

impl fmt::Debug for UnitaryFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rotations { dim, factors } => f
                .debug_struct("Rotations")
                .field("dim", dim)
                .field("factors", &factors.len())
                .finish(),
            Self::Generated { dim, max_step, .. } => f
                .debug_struct("Generated")
                .field("dim", dim)
                .field("max_step", max_step)
                .finish(),
            Self::ClosedForm { dim, .. } => f.debug_struct("ClosedForm").field("dim", dim).finish(),
        }
    }
}

impl UnitaryFamily {
    pub fn identity(dim: usize) -> Self {
        Self::Rotations {
            dim,
            factors: Vec::new(),
        }
    }

    pub fn rotations(factors: Vec<RotationFactor>) -> Result<Self> {
        let dim = factors
            .first()
            .map(|f| f.generator.dim())
            .ok_or_else(|| Error::InvalidArgument("at least one rotation factor".into()))?;
        for f in &factors {
            check_dims(dim, f.generator.dim())?;
            let theta0 = f.angle.value(0.0);
            if theta0.abs() > 1e-14 {
                return Err(Error::Precondition(format!(
                    "rotation angle must vanish at t = 0 (got {theta0})"
                )));
            }
        }
        Ok(Self::Rotations { dim, factors })
    }

    /// `exp(−i K θ(t))` for a single Hermitian `K`.
    pub fn rotation(generator: HermitianOperator, angle: ScalarPath) -> Result<Self> {
        Self::rotations(vec![RotationFactor::new(generator, angle)])
    }

    pub fn generated<G>(dim: usize, generator: G, max_step: f64) -> Result<Self>
    where
        G: Fn(f64) -> CMatrix + Send + Sync + 'static,
    {
        if !(max_step > 0.0) {
            return Err(Error::InvalidArgument("max_step must be positive".into()));
        }
        let g0 = generator(0.0);
        check_dims(dim, g0.nrows())?;
        let defect = linalg::anti_hermitian_defect(&g0);
        if defect > Tolerances::default().tol_alg {
            return Err(Error::Precondition(format!(
                "generator is not anti-Hermitian (defect {defect:.3e})"
            )));
        }
        Ok(Self::Generated {
            dim,
            generator: Arc::new(generator),
            max_step,
        })
    }

    pub fn closed_form<U>(dim: usize, unitary: U, generator: Option<MatrixFn>) -> Result<Self>
    where
        U: Fn(f64) -> CMatrix + Send + Sync + 'static,
    {
        let u0 = unitary(0.0);
        check_dims(dim, u0.nrows())?;
        let defect = linalg::max_abs(&(u0 - linalg::identity(dim)));
        if defect > Tolerances::default().tol_alg {
            return Err(Error::Precondition(format!("U(0) differs from 1 by {defect:.3e}")));
        }
        Ok(Self::ClosedForm {
            dim,
            unitary: Arc::new(unitary),
            generator,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Rotations { dim, .. } | Self::Generated { dim, .. } | Self::ClosedForm { dim, .. } => *dim,
        }
    }

    pub fn at(&self, t: f64) -> CMatrix {
        match self {
            Self::Rotations { dim, factors } => factors.iter().fold(linalg::identity(*dim), |acc, f| acc * f.at(t)),
            Self::Generated {
                dim,
                generator,
                max_step,
            } => integrate_generator(generator.as_ref(), *dim, t, *max_step),
            Self::ClosedForm { unitary, .. } => unitary(t),
        }
    }

    pub fn unitary(&self, t: f64) -> Result<UnitaryOperator> {
        UnitaryOperator::new(self.at(t))
    }

    /// Anti-Hermitian generator `g(t) = U'(t) U†(t)`.
    pub fn generator(&self, t: f64) -> CMatrix {
        match self {
            Self::Rotations { dim, factors } => {
                // g = Σ_j P_{<j} (−i K_j θ_j') P_{<j}†, P_{<j} = product of earlier factors.
                let mut prefix = linalg::identity(*dim);
                let mut g = linalg::zeros(*dim);
                for f in factors {
                    let rate = f.angle.derivative(t);
                    if rate != 0.0 {
                        let term = f.generator.matrix().map(|z| z * c(0.0, -rate));
                        g += &prefix * term * prefix.adjoint();
                    }
                    prefix *= f.at(t);
                }
                g
            }
            Self::Generated { generator, .. } => generator(t),
            Self::ClosedForm { unitary, generator, .. } => match generator {
                Some(g) => g(t),
                None => {
                    let du = central_difference(unitary.as_ref(), t, DEFAULT_FD_STEP);
                    du * unitary(t).adjoint()
                }
            },
        }
    }

    /// `U'(t) = g(t) U(t)`
    pub fn derivative(&self, t: f64) -> CMatrix {
        self.generator(t) * self.at(t)
    }
}

fn integrate_generator(g: &(dyn Fn(f64) -> CMatrix + Send + Sync), dim: usize, t: f64, max_step: f64) -> CMatrix {
    let mut u = linalg::identity(dim);
    if t == 0.0 {
        return u;
    }
    let steps = (t.abs() / max_step).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    for k in 0..steps {
        let s = k as f64 * h;
        u = rk4_step(&|x| g(x), &u, s, h);
    }
    u
}

/// One classical RK4 step for `Y' = G(t) Y`.
pub(crate) fn rk4_step(g: &dyn Fn(f64) -> CMatrix, y: &CMatrix, t: f64, h: f64) -> CMatrix {
    let g_mid = g(t + 0.5 * h);
    let k1 = g(t) * y;
    let k2 = &g_mid * (y + k1.scale(0.5 * h));
    let k3 = &g_mid * (y + k2.scale(0.5 * h));
    let k4 = g(t + h) * (y + k3.scale(h));
    y + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0)
}

/// The kinds of measured projector family.
#[derive(Clone)]
pub enum ProjectorKind {
    /// `E_s(t) = U(t) E U†(t)`.
    Steered {
        projector: Projector,
        unitary: UnitaryFamily,
    },
    /// `E_s(t) = Σ_{j : λ_L(t) ≤ j ≤ λ_R(t)} |j⟩⟨j|` on the computational basis.
    /// Piecewise constant in `t`.
    DiagonalWindow {
        dim: usize,
        lower: ScalarPath,
        upper: ScalarPath,
    },
    /// Spin-½ projector `(1 + σ·n(t))/2` with `n = (sin θ, 0, cos θ)`.
    SpinDirection { theta: ScalarPath },
    /// Arbitrary callback; derivative optional.
    Tabulated {
        dim: usize,
        projector: MatrixFn,
        derivative: Option<MatrixFn>,
    },
}

/// A projector-valued function `t ↦ E_s(t)` on `[t_start, t_end]`.
#[derive(Clone)]
pub struct ProjectorFamily {
    kind: ProjectorKind,
    t_start: f64,
    t_end: f64,
}

impl fmt::Debug for ProjectorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            ProjectorKind::Steered { .. } => "Steered",
            ProjectorKind::DiagonalWindow { .. } => "DiagonalWindow",
            ProjectorKind::SpinDirection { .. } => "SpinDirection",
            ProjectorKind::Tabulated { .. } => "Tabulated",
        };
        f.debug_struct("ProjectorFamily")
            .field("kind", &kind)
            .field("domain", &(self.t_start, self.t_end))
            .finish()
    }
}

impl ProjectorFamily {
    fn new(kind: ProjectorKind, t_start: f64, t_end: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) || t_end < t_start {
            return Err(Error::InvalidArgument(format!("invalid domain [{t_start}, {t_end}]")));
        }
        let fam = Self { kind, t_start, t_end };
        // Probe both ends and the midpoint so obviously broken families fail early.
        let tol = Tolerances::default();
        for t in [t_start, 0.5 * (t_start + t_end), t_end] {
            let defect = Projector::defect(&fam.projector(t));
            if defect > tol.tol_alg.sqrt() {
                return Err(Error::InvalidFamily(format!(
                    "E_s({t}) is not a projector (defect {defect:.3e})"
                )));
            }
        }
        Ok(fam)
    }

    pub fn steered(projector: Projector, unitary: UnitaryFamily, t_start: f64, t_end: f64) -> Result<Self> {
        check_dims(projector.dim(), unitary.dim())?;
        Self::new(ProjectorKind::Steered { projector, unitary }, t_start, t_end)
    }

    /// Time-independent projector.
    pub fn constant(projector: Projector, t_start: f64, t_end: f64) -> Result<Self> {
        let dim = projector.dim();
        Self::steered(projector, UnitaryFamily::identity(dim), t_start, t_end)
    }

    pub fn diagonal_window(dim: usize, lower: ScalarPath, upper: ScalarPath, t_start: f64, t_end: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Self::new(ProjectorKind::DiagonalWindow { dim, lower, upper }, t_start, t_end)
    }

    pub fn spin_direction(theta: ScalarPath, t_start: f64, t_end: f64) -> Result<Self> {
        Self::new(ProjectorKind::SpinDirection { theta }, t_start, t_end)
    }

    pub fn tabulated<P>(
        dim: usize,
        projector: P,
        derivative: Option<MatrixFn>,
        t_start: f64,
        t_end: f64,
    ) -> Result<Self>
    where
        P: Fn(f64) -> CMatrix + Send + Sync + 'static,
    {
        Self::new(
            ProjectorKind::Tabulated {
                dim,
                projector: Arc::new(projector),
                derivative,
            },
            t_start,
            t_end,
        )
    }

    pub fn kind(&self) -> &ProjectorKind {
        &self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ProjectorKind::Steered { projector, .. } => projector.dim(),
            ProjectorKind::DiagonalWindow { dim, .. } | ProjectorKind::Tabulated { dim, .. } => *dim,
            ProjectorKind::SpinDirection { .. } => 2,
        }
    }

    /// True for families whose `E_s(t)` only changes by jumps.
    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self.kind, ProjectorKind::DiagonalWindow { .. })
    }

    pub fn check_in_domain(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * (1.0 + self.t_end.abs().max(self.t_start.abs()));
        if !t.is_finite() || t < self.t_start - slack || t > self.t_end + slack {
            return Err(Error::OutOfDomain {
                t,
                start: self.t_start,
                end: self.t_end,
            });
        }
        Ok(())
    }

    /// `E_s(t)` as a raw matrix. Evaluation outside the domain is allowed
    /// (finite differences need it); public operations check the domain.
    pub fn projector(&self, t: f64) -> CMatrix {
        match &self.kind {
            ProjectorKind::Steered { projector, unitary } => {
                let u = unitary.at(t);
                &u * projector.matrix() * u.adjoint()
            }
            ProjectorKind::DiagonalWindow { dim, lower, upper } => {
                let (lo, hi) = (lower.value(t), upper.value(t));
                let diag = linalg::CVector::from_iterator(
                    *dim,
                    (0..*dim).map(|j| {
                        let x = j as f64;
                        if lo <= x && x <= hi {
                            linalg::ONE
                        } else {
                            linalg::ZERO
                        }
                    }),
                );
                CMatrix::from_diagonal(&diag)
            }
            ProjectorKind::SpinDirection { theta } => spin_projector(theta.value(t)),
            ProjectorKind::Tabulated { projector, .. } => projector(t),
        }
    }

    pub fn projector_checked(&self, t: f64) -> Result<Projector> {
        self.check_in_domain(t)?;
        Projector::new(self.projector(t))
    }

    /// Analytic `dE_s/dt` where the family provides one.
    ///
    /// For the diagonal window this is zero away from the jump times.
    pub fn analytic_derivative(&self, t: f64) -> Option<CMatrix> {
        match &self.kind {
            ProjectorKind::Steered { projector, unitary } => {
                let u = unitary.at(t);
                let es = &u * projector.matrix() * u.adjoint();
                Some(commutator(&unitary.generator(t), &es))
            }
            ProjectorKind::DiagonalWindow { dim, .. } => Some(linalg::zeros(*dim)),
            ProjectorKind::SpinDirection { theta } => {
                let (th, rate) = (theta.value(t), theta.derivative(t));
                let m = linalg::sigma_x().map(|z| z * th.cos()) - linalg::sigma_z().map(|z| z * th.sin());
                Some(m.map(|z| z * (0.5 * rate)))
            }
            ProjectorKind::Tabulated { derivative, .. } => derivative.as_ref().map(|d| d(t)),
        }
    }

    pub fn derivative(&self, t: f64, mode: DerivativeMode) -> CMatrix {
        match mode {
            DerivativeMode::Analytic => self
                .analytic_derivative(t)
                .unwrap_or_else(|| self.finite_difference(t, DEFAULT_FD_STEP)),
            DerivativeMode::CentralDifference { step } => self.finite_difference(t, step),
        }
    }

    fn finite_difference(&self, t: f64, h: f64) -> CMatrix {
        central_difference(&|x| self.projector(x), t, h)
    }
}

/// `(1 + sin θ σx + cos θ σz)/2`
pub fn spin_projector(theta: f64) -> CMatrix {
    let m =
        linalg::identity(2) + linalg::sigma_x().map(|z| z * theta.sin()) + linalg::sigma_z().map(|z| z * theta.cos());
    m.map(|z| z * 0.5)
}

/// Heisenberg view of a projector family under a fixed Hamiltonian.
#[derive(Debug, Clone)]
pub struct HeisenbergFamily {
    family: ProjectorFamily,
    hamiltonian: HermitianOperator,
    mode: DerivativeMode,
}

impl HeisenbergFamily {
    pub fn new(family: ProjectorFamily, hamiltonian: HermitianOperator) -> Result<Self> {
        check_dims(family.dim(), hamiltonian.dim())?;
        Ok(Self {
            family,
            hamiltonian,
            mode: DerivativeMode::Analytic,
        })
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Result<Self> {
        if let DerivativeMode::CentralDifference { step } = mode {
            if !(step > 0.0) {
                return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
            }
        }
        self.mode = mode;
        Ok(self)
    }

    pub fn family(&self) -> &ProjectorFamily {
        &self.family
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn spectral(&self) -> &Spectral {
        self.hamiltonian.spectral()
    }

    /// `E_H(t) = e^{iHt} E_s(t) e^{−iHt}`
    pub fn projector(&self, t: f64) -> CMatrix {
        let u = self.hamiltonian.propagator(t);
        u.adjoint() * self.family.projector(t) * u
    }

    /// `dE_H/dt = i[H, E_H] + e^{iHt} (dE_s/dt) e^{−iHt}`
    pub fn derivative(&self, t: f64) -> CMatrix {
        self.derivative_with_mode(t, self.mode)
    }

    pub fn derivative_with_mode(&self, t: f64, mode: DerivativeMode) -> CMatrix {
        let u = self.hamiltonian.propagator(t);
        let eh = u.adjoint() * self.family.projector(t) * &u;
        let moving = u.adjoint() * self.family.derivative(t, mode) * &u;
        commutator(self.hamiltonian.matrix(), &eh).map(|z| z * linalg::I) + moving
    }

    pub fn branch_projector(&self, branch: Branch, t: f64) -> CMatrix {
        let e = self.projector(t);
        match branch {
            Branch::Measured => e,
            Branch::Complement => linalg::identity(self.dim()) - e,
        }
    }

    pub fn branch_derivative(&self, branch: Branch, t: f64) -> CMatrix {
        self.branch_derivative_with_mode(branch, t, self.mode)
    }

    pub fn branch_derivative_with_mode(&self, branch: Branch, t: f64, mode: DerivativeMode) -> CMatrix {
        let d = self.derivative_with_mode(t, mode);
        match branch {
            Branch::Measured => d,
            Branch::Complement => -d,
        }
    }
}
