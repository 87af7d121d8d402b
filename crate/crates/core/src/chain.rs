//! Discrete repeated-measurement chains on a uniform time grid.
//!
//! For projectors `E_H(t_i)` measured at `t_1 < … < t_n` the chain operator is
//! the time-ordered product `A = P_n ⋯ P_1` (latest time on the left), where
//! each `P_i` is `E_H(t_i)` or its complement depending on the recorded
//! outcome. History probabilities are `Tr(A ρ₀ A†)` and the propagator after
//! the last measurement is `K(t') = e^{−iHt'} A`.

use crate::family::{HeisenbergFamily, ProjectorFamily};
use crate::linalg::{self, check_dims, CMatrix, Spectral};
use crate::measurement::clamp_probability;
use crate::operators::{DensityOperator, HermitianOperator};
use crate::{Error, Result, Tolerances};

/// Largest `n` accepted by [`all_histories_closure`].
pub const MAX_ENUMERATED_HISTORIES: usize = 12;

/// Uniform grid `t_i = t_start + (t_end − t_start)(i − 1)/(n − 1)`,
/// `i = 1..=n`, both endpoints measured. `n = 1` measures once at `t_start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSchedule {
    t_start: f64,
    t_end: f64,
    n: usize,
}

impl MeasurementSchedule {
    pub fn new(t_start: f64, t_end: f64, n: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(Error::NonFinite);
        }
        if n == 0 {
            return Err(Error::InvalidArgument("schedule needs at least one measurement".into()));
        }
        if n >= 2 && !(t_end > t_start) {
            return Err(Error::InvalidArgument(format!(
                "grid [{t_start}, {t_end}] with n = {n} is not strictly increasing"
            )));
        }
        Ok(Self { t_start, t_end, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Zero-based grid time.
    pub fn time(&self, i: usize) -> f64 {
        if self.n == 1 {
            return self.t_start;
        }
        if i + 1 == self.n {
            return self.t_end;
        }
        self.t_start + (self.t_end - self.t_start) * i as f64 / (self.n - 1) as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.time(i))
    }

    /// Time of the last measurement.
    pub fn last(&self) -> f64 {
        self.time(self.n - 1)
    }
}

/// Recorded outcomes, one per grid point: `true` for `E_i = 1`, `false` for
/// `Ē_i = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HistoryOutcome(Vec<bool>);

impl HistoryOutcome {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// The history `h`: every measurement finds `E = 1`.
    pub fn all_measured(n: usize) -> Self {
        Self(vec![true; n])
    }

    /// The complementary history `h̄`.
    pub fn all_complement(n: usize) -> Self {
        Self(vec![false; n])
    }

    /// Outcome encoded by the low `n` bits of `code` (bit `i` ↦ measurement `i`).
    pub fn from_code(code: u64, n: usize) -> Self {
        Self((0..n).map(|i| code >> i & 1 == 1).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChainOptions {
    /// Snap each factor's spectrum to {0, 1} before multiplying. Off by default
    /// so the raw product is what gets analysed.
    pub reidempotentize: bool,
}

/// Chain operator, its probability, and the normalized post-chain state.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    pub chain_op: CMatrix,
    pub probability: f64,
    /// Present iff `probability > prob_floor`.
    pub posterior: Option<DensityOperator>,
}

fn check_schedule(family: &ProjectorFamily, sched: &MeasurementSchedule) -> Result<()> {
    family.check_in_domain(sched.t_start())?;
    family.check_in_domain(sched.last())
}

fn snap_projector(m: &CMatrix) -> CMatrix {
    Spectral::of_hermitian(m).apply(|x| linalg::c(if x > 0.5 { 1.0 } else { 0.0 }, 0.0))
}

/// Time-ordered product over a Heisenberg family; shared by the public
/// entry points and the continuum cross-checks.
pub fn chain_operator_heisenberg(
    fam: &HeisenbergFamily,
    sched: &MeasurementSchedule,
    outcome: &HistoryOutcome,
    opts: ChainOptions,
) -> Result<CMatrix> {
    if outcome.len() != sched.n() {
        return Err(Error::LengthMismatch {
            expected: sched.n(),
            found: outcome.len(),
        });
    }
    check_schedule(fam.family(), sched)?;
    let dim = fam.dim();
    let id = linalg::identity(dim);
    let mut acc = id.clone();
    for (i, &found) in outcome.bits().iter().enumerate() {
        let e = fam.projector(sched.time(i));
        let e = if opts.reidempotentize { snap_projector(&e) } else { e };
        let factor = if found { e } else { &id - e };
        acc = factor * acc;
    }
    Ok(acc)
}

/// `T Π_i P_i(t_i)`, rightmost factor at the earliest time.
pub fn chain_operator(
    family: &ProjectorFamily,
    h: &HermitianOperator,
    sched: &MeasurementSchedule,
    outcome: &HistoryOutcome,
) -> Result<CMatrix> {
    let fam = HeisenbergFamily::new(family.clone(), h.clone())?;
    chain_operator_heisenberg(&fam, sched, outcome, ChainOptions::default())
}

/// History probability `Tr(A ρ₀ A†)`.
pub fn chain_probability(rho0: &DensityOperator, chain_op: &CMatrix) -> Result<f64> {
    check_dims(rho0.dim(), chain_op.nrows())?;
    check_dims(rho0.dim(), chain_op.ncols())?;
    let p = linalg::trace(&(chain_op * rho0.matrix() * chain_op.adjoint())).re;
    clamp_probability(p, &Tolerances::default())
}

/// State after the chain, at time `t_final`: `Kρ₀K†/Tr(Kρ₀K†)` with
/// `K = e^{−iHt_final} A`.
pub fn posterior_state(
    rho0: &DensityOperator,
    h: &HermitianOperator,
    chain_op: &CMatrix,
    t_final: f64,
    tol: &Tolerances,
) -> Result<DensityOperator> {
    check_dims(rho0.dim(), h.dim())?;
    check_dims(rho0.dim(), chain_op.nrows())?;
    let k = h.propagator(t_final) * chain_op;
    let m = &k * rho0.matrix() * k.adjoint();
    let p = linalg::trace(&m).re;
    if p <= tol.prob_floor {
        return Err(Error::NullOutcome { probability: p });
    }
    DensityOperator::from_unnormalized(m, tol)
}

/// Chain operator, probability and posterior in one pass.
pub fn run_chain(
    family: &ProjectorFamily,
    h: &HermitianOperator,
    sched: &MeasurementSchedule,
    outcome: &HistoryOutcome,
    rho0: &DensityOperator,
    t_final: f64,
    tol: &Tolerances,
) -> Result<ChainResult> {
    let chain_op = chain_operator(family, h, sched, outcome)?;
    let probability = chain_probability(rho0, &chain_op)?;
    let posterior = if probability > tol.prob_floor {
        Some(posterior_state(rho0, h, &chain_op, t_final, tol)?)
    } else {
        None
    };
    Ok(ChainResult {
        chain_op,
        probability,
        posterior,
    })
}

/// Propagator for "at least one `E_i = 1`": `K_{h'}(t') = e^{−iHt'}(1 − A_h̄)`.
pub fn union_propagator(
    family: &ProjectorFamily,
    h: &HermitianOperator,
    sched: &MeasurementSchedule,
    t_prime: f64,
) -> Result<CMatrix> {
    let a_bar = chain_operator(family, h, sched, &HistoryOutcome::all_complement(sched.n()))?;
    Ok(h.propagator(t_prime) * (linalg::identity(h.dim()) - a_bar))
}

/// `Σ_h p(h)` over all `2ⁿ` outcome sequences, by depth-first expansion of
/// the shared prefixes.
pub fn all_histories_closure(
    family: &ProjectorFamily,
    h: &HermitianOperator,
    sched: &MeasurementSchedule,
    rho0: &DensityOperator,
) -> Result<f64> {
    let n = sched.n();
    if n > MAX_ENUMERATED_HISTORIES {
        return Err(Error::TooManyHistories {
            n,
            max: MAX_ENUMERATED_HISTORIES,
        });
    }
    check_dims(family.dim(), rho0.dim())?;
    check_schedule(family, sched)?;
    let fam = HeisenbergFamily::new(family.clone(), h.clone())?;
    let factors: Vec<(CMatrix, CMatrix)> = sched
        .times()
        .map(|t| {
            let e = fam.projector(t);
            let e_bar = linalg::identity(fam.dim()) - &e;
            (e, e_bar)
        })
        .collect();

    fn expand(acc: &CMatrix, depth: usize, factors: &[(CMatrix, CMatrix)], rho: &CMatrix) -> f64 {
        if depth == factors.len() {
            return linalg::trace(&(acc * rho * acc.adjoint())).re;
        }
        let (e, e_bar) = &factors[depth];
        expand(&(e * acc), depth + 1, factors, rho) + expand(&(e_bar * acc), depth + 1, factors, rho)
    }

    Ok(expand(&linalg::identity(fam.dim()), 0, &factors, rho0.matrix()))
}
