//! The continuous-measurement limit of the discrete chains.
//!
//! In the limit `n → ∞` the chain operators obey the linear measurement
//! equations
//!
//! ```text
//! dA_h/dt = (dE_H/dt) A_h(t₋),   A_h(t₁) = E_H(t₁)
//! dA_h̄/dt = (dĒ_H/dt) A_h̄(t₋),  A_h̄(t₁) = Ē_H(t₁)
//! ```
//!
//! solved by a time-ordered exponential. This module integrates them with a
//! fixed-step RK4 scheme, evaluates the ordered-simplex (Dyson) series term by
//! term, and measures how well a candidate trajectory satisfies the equation.

use crate::family::{rk4_step, Branch, DerivativeMode, HeisenbergFamily};
use crate::linalg::{self, op_norm, CMatrix};
use crate::{Error, Result};

/// Highest Dyson order accepted by [`dyson_series`].
pub const MAX_DYSON_ORDER: usize = 8;

/// Fixed-step integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OdeScheme {
    /// Classical four-stage Runge–Kutta; each stage is
    /// `(derivative at the stage time) · (accumulated A)`.
    #[default]
    RungeKutta4,
    /// `A ← A + [P(t + δ) − P(t)] A`, the increment form of the equation.
    /// Exact for piecewise-constant families where `dP/dt` only exists as a
    /// sum of jumps.
    Increment,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub step_count: usize,
    pub scheme: OdeScheme,
    pub derivative_mode: DerivativeMode,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            step_count: 1000,
            scheme: OdeScheme::RungeKutta4,
            derivative_mode: DerivativeMode::Analytic,
        }
    }
}

impl OdeConfig {
    pub fn with_steps(step_count: usize) -> Self {
        Self {
            step_count,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.step_count < 2 {
            return Err(Error::InvalidArgument("step_count must be at least 2".into()));
        }
        if let DerivativeMode::CentralDifference { step } = self.derivative_mode {
            if !(step > 0.0) {
                return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Truncation of the time-ordered exponential series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DysonTruncation {
    pub order: usize,
    /// Trapezoid intervals per simplex dimension.
    pub quadrature_points: usize,
    /// Combine `Q` and `2Q` intervals to cancel the `O(h²)` quadrature error.
    pub richardson: bool,
}

impl DysonTruncation {
    pub fn new(order: usize) -> Self {
        Self {
            order,
            quadrature_points: 64,
            richardson: true,
        }
    }
}

/// Central-difference stencil used by [`residual_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    /// `(A(t+h) − A(t−h)) / 2h`, error `O(h²)`.
    Central2,
    /// Five-point stencil, error `O(h⁴)`.
    #[default]
    Central4,
}

fn check_interval(fam: &HeisenbergFamily, t1: f64, t: f64) -> Result<()> {
    fam.family().check_in_domain(t1)?;
    fam.family().check_in_domain(t)?;
    if t < t1 {
        return Err(Error::InvalidArgument(format!("interval end {t} precedes start {t1}")));
    }
    Ok(())
}

/// `dE_H/dt` at `t`, using the family's derivative mode.
pub fn heisenberg_derivative(fam: &HeisenbergFamily, t: f64) -> Result<CMatrix> {
    fam.family().check_in_domain(t)?;
    Ok(fam.derivative(t))
}

/// Solves `Y' = G(s) Y`, `Y(t1) = 1` on `[t1, t]` with `steps` RK4 steps.
pub fn time_ordered_exp(generator: &dyn Fn(f64) -> CMatrix, dim: usize, t1: f64, t: f64, steps: usize) -> CMatrix {
    let steps = steps.max(1);
    let h = (t - t1) / steps as f64;
    let mut y = linalg::identity(dim);
    for k in 0..steps {
        y = rk4_step(generator, &y, t1 + k as f64 * h, h);
    }
    y
}

/// Solution of the measurement equation at every grid node
/// `t1 + k (t − t1)/N`, `k = 0..=N`.
pub fn solve_chain_ode_trajectory(
    fam: &HeisenbergFamily,
    branch: Branch,
    t1: f64,
    t: f64,
    cfg: &OdeConfig,
) -> Result<Vec<CMatrix>> {
    cfg.validate()?;
    check_interval(fam, t1, t)?;
    let n = cfg.step_count;
    let h = (t - t1) / n as f64;
    let node = |k: usize| if k == n { t } else { t1 + k as f64 * h };
    let mut a = fam.branch_projector(branch, t1);
    let mut out = Vec::with_capacity(n + 1);
    out.push(a.clone());
    match cfg.scheme {
        OdeScheme::RungeKutta4 => {
            let g = |s: f64| fam.branch_derivative_with_mode(branch, s, cfg.derivative_mode);
            for k in 0..n {
                a = rk4_step(&g, &a, node(k), h);
                out.push(a.clone());
            }
        }
        OdeScheme::Increment => {
            let mut prev = fam.branch_projector(branch, t1);
            for k in 1..=n {
                let next = fam.branch_projector(branch, node(k));
                a = &a + (&next - &prev) * &a;
                prev = next;
                out.push(a.clone());
            }
        }
    }
    Ok(out)
}

/// `A(t)` for the chosen branch, integrated from `A(t1) = P(t1)`.
pub fn solve_chain_ode(fam: &HeisenbergFamily, branch: Branch, t1: f64, t: f64, cfg: &OdeConfig) -> Result<CMatrix> {
    let mut traj = solve_chain_ode_trajectory(fam, branch, t1, t, cfg)?;
    Ok(traj.pop().expect("trajectory has at least one node"))
}

/// Nested cumulative trapezoid: `S_0 = 1`, `S_m(s) = ∫_{t1}^{s} Ṗ(u) S_{m−1}(u) du`.
fn nested_trapezoid(derivs: &[CMatrix], h: f64, order: usize, dim: usize) -> Vec<CMatrix> {
    let q = derivs.len() - 1;
    let mut terms = vec![linalg::identity(dim)];
    let mut prev: Vec<CMatrix> = vec![linalg::identity(dim); q + 1];
    for _ in 1..=order {
        let mut cur = vec![linalg::zeros(dim); q + 1];
        let integrand: Vec<CMatrix> = derivs.iter().zip(&prev).map(|(d, s)| d * s).collect();
        for j in 1..=q {
            cur[j] = &cur[j - 1] + (&integrand[j - 1] + &integrand[j]).scale(0.5 * h);
        }
        terms.push(cur[q].clone());
        prev = cur;
    }
    terms
}

/// Terms `m = 0..=order` of `T exp(∫_{t1}^{t} Ṗ dt')`, each the iterated
/// integral over the ordered simplex `t > t'_1 > … > t'_m > t1` with later
/// times on the left.
pub fn dyson_terms(
    fam: &HeisenbergFamily,
    branch: Branch,
    t1: f64,
    t: f64,
    trunc: &DysonTruncation,
) -> Result<Vec<CMatrix>> {
    if trunc.order > MAX_DYSON_ORDER {
        return Err(Error::InvalidArgument(format!(
            "Dyson order {} exceeds the limit {MAX_DYSON_ORDER}",
            trunc.order
        )));
    }
    if trunc.quadrature_points < 2 {
        return Err(Error::InvalidArgument("need at least two quadrature intervals".into()));
    }
    check_interval(fam, t1, t)?;
    let dim = fam.dim();
    let run = |q: usize| {
        let h = (t - t1) / q as f64;
        let derivs: Vec<CMatrix> = (0..=q)
            .map(|j| fam.branch_derivative(branch, if j == q { t } else { t1 + j as f64 * h }))
            .collect();
        nested_trapezoid(&derivs, h, trunc.order, dim)
    };
    let coarse = run(trunc.quadrature_points);
    if !trunc.richardson {
        return Ok(coarse);
    }
    let fine = run(2 * trunc.quadrature_points);
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (f.scale(4.0) - c).unscale(3.0))
        .collect())
}

/// `[1 + Σ_{m=1}^{k} (ordered integrals)] · P(t1)`.
pub fn dyson_series(
    fam: &HeisenbergFamily,
    branch: Branch,
    t1: f64,
    t: f64,
    trunc: &DysonTruncation,
) -> Result<CMatrix> {
    let terms = dyson_terms(fam, branch, t1, t, trunc)?;
    let sum = terms.into_iter().fold(linalg::zeros(fam.dim()), |acc, m| acc + m);
    Ok(sum * fam.branch_projector(branch, t1))
}

/// Largest operator-norm residual `‖dA/dt' − Ṗ(t') A(t')‖` of a candidate
/// trajectory on the uniform grid of `cfg.step_count` intervals, with `dA/dt'`
/// from central differences of the candidate at the grid nodes.
pub fn residual_check(
    fam: &HeisenbergFamily,
    candidate: &dyn Fn(f64) -> CMatrix,
    branch: Branch,
    t1: f64,
    t: f64,
    cfg: &OdeConfig,
    stencil: Stencil,
) -> Result<f64> {
    cfg.validate()?;
    check_interval(fam, t1, t)?;
    let n = cfg.step_count;
    let radius = match stencil {
        Stencil::Central2 => 1,
        Stencil::Central4 => 2,
    };
    if n < 2 * radius + 1 {
        return Err(Error::InvalidArgument("grid too coarse for the stencil".into()));
    }
    let h = (t - t1) / n as f64;
    let node = |k: usize| if k == n { t } else { t1 + k as f64 * h };
    let values: Vec<CMatrix> = (0..=n).map(|k| candidate(node(k))).collect();
    let mut worst = 0.0f64;
    for k in radius..=n - radius {
        let da = match stencil {
            Stencil::Central2 => (&values[k + 1] - &values[k - 1]).unscale(2.0 * h),
            Stencil::Central4 => (&values[k - 2] - values[k - 1].scale(8.0) + values[k + 1].scale(8.0)
                - &values[k + 2])
                .unscale(12.0 * h),
        };
        let rhs = fam.branch_derivative_with_mode(branch, node(k), cfg.derivative_mode) * &values[k];
        worst = worst.max(op_norm(&(da - rhs)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{chain_operator_heisenberg, ChainOptions, HistoryOutcome, MeasurementSchedule};
    use crate::family::{ProjectorFamily, UnitaryFamily};
    use crate::linalg::{max_abs, sigma_y};
    use crate::operators::{HermitianOperator, Projector};
    use crate::path::ScalarPath;
    use crate::random;

    fn steered_instance(seed: u64, dim: usize, rank: usize) -> HeisenbergFamily {
        let mut rng = random::rng_from_seed(seed);
        let e = random::random_projector_with(&mut rng, dim, rank).unwrap();
        let k = random::random_hermitian_with(&mut rng, dim).unwrap();
        let h = random::random_hermitian_with(&mut rng, dim).unwrap().scaled(0.5);
        let u = UnitaryFamily::rotation(k, ScalarPath::linear(0.8)).unwrap();
        let fam = ProjectorFamily::steered(e, u, 0.0, 1.0).unwrap();
        HeisenbergFamily::new(fam, h).unwrap()
    }

    #[test]
    fn time_independent_commuting_projector_has_zero_derivative() {
        let e = Projector::from_indices(3, [1]).unwrap();
        let h = HermitianOperator::new(CMatrix::from_diagonal(&crate::CVector::from_vec(vec![
            linalg::c(0.3, 0.0),
            linalg::c(1.0, 0.0),
            linalg::c(-2.0, 0.0),
        ])))
        .unwrap();
        let fam = HeisenbergFamily::new(ProjectorFamily::constant(e.clone(), 0.0, 1.0).unwrap(), h).unwrap();
        assert!(max_abs(&heisenberg_derivative(&fam, 0.4).unwrap()) < 1e-14);
        let a = solve_chain_ode(&fam, Branch::Measured, 0.0, 1.0, &OdeConfig::default()).unwrap();
        assert!(max_abs(&(a - e.matrix())) < 1e-13);
    }

    #[test]
    fn time_independent_projector_derivative_is_commutator_only() {
        let fam = steered_instance(1, 3, 1);
        let e = Projector::from_indices(3, [0]).unwrap();
        let fixed = HeisenbergFamily::new(
            ProjectorFamily::constant(e, 0.0, 1.0).unwrap(),
            fam.hamiltonian().clone(),
        )
        .unwrap();
        let t = 0.6;
        let eh = fixed.projector(t);
        let expected = linalg::commutator(fixed.hamiltonian().matrix(), &eh).map(|z| z * linalg::I);
        assert!(max_abs(&(heisenberg_derivative(&fixed, t).unwrap() - expected)) < 1e-13);
    }

    #[test]
    fn derivative_is_hermitian_and_matches_finite_difference() {
        let fam = steered_instance(2, 4, 2);
        let t = 0.45;
        let d = heisenberg_derivative(&fam, t).unwrap();
        assert!(linalg::hermitian_defect(&d) < 1e-12);
        let h = 1e-5;
        let fd = (fam.projector(t + h) - fam.projector(t - h)).unscale(2.0 * h);
        assert!(max_abs(&(d - fd)) < 1e-8);
        assert!(heisenberg_derivative(&fam, 1.5).is_err());
    }

    #[test]
    fn steered_qubit_without_hamiltonian_matches_closed_form() {
        // H = 0, U = exp(−iσy θ/2), E = |0⟩⟨0|: E σy E = 0 so A(t) = U(t) E U†(0) = U(t) E.
        let sy = HermitianOperator::new(sigma_y().scale(0.5)).unwrap();
        let u = UnitaryFamily::rotation(sy, ScalarPath::linear(1.1)).unwrap();
        let e = Projector::from_indices(2, [0]).unwrap();
        let fam = HeisenbergFamily::new(
            ProjectorFamily::steered(e.clone(), u.clone(), 0.0, 1.0).unwrap(),
            HermitianOperator::zero(2),
        )
        .unwrap();
        let closed = u.at(1.0) * e.matrix();
        let a = solve_chain_ode(&fam, Branch::Measured, 0.0, 1.0, &OdeConfig::with_steps(200)).unwrap();
        assert!(max_abs(&(a - closed)) < 1e-9);
    }

    #[test]
    fn rk4_convergence_order() {
        let fam = steered_instance(3, 4, 2);
        let reference = solve_chain_ode(&fam, Branch::Measured, 0.0, 1.0, &OdeConfig::with_steps(4096)).unwrap();
        let err = |n| {
            let a = solve_chain_ode(&fam, Branch::Measured, 0.0, 1.0, &OdeConfig::with_steps(n)).unwrap();
            op_norm(&(a - &reference))
        };
        let ratio = err(16) / err(32);
        assert!((ratio - 16.0).abs() < 3.0, "ratio {ratio}");
    }

    #[test]
    fn trajectory_stays_in_range() {
        let fam = steered_instance(4, 4, 2);
        let cfg = OdeConfig::with_steps(500);
        let traj = solve_chain_ode_trajectory(&fam, Branch::Measured, 0.0, 1.0, &cfg).unwrap();
        for (k, a) in traj.iter().enumerate() {
            let t = k as f64 / 500.0;
            assert!(op_norm(&(fam.projector(t) * a - a)) < 1e-6, "node {k}");
        }
        let traj = solve_chain_ode_trajectory(&fam, Branch::Complement, 0.0, 1.0, &cfg).unwrap();
        for (k, a) in traj.iter().enumerate() {
            let t = k as f64 / 500.0;
            assert!(op_norm(&(fam.projector(t) * a)) < 1e-6, "node {k}");
        }
    }

    #[test]
    fn discrete_chain_approaches_ode() {
        let fam = steered_instance(5, 4, 2);
        let ode = solve_chain_ode(&fam, Branch::Measured, 0.0, 1.0, &OdeConfig::with_steps(4096)).unwrap();
        let gap = |n: usize| {
            let s = MeasurementSchedule::new(0.0, 1.0, n).unwrap();
            let a =
                chain_operator_heisenberg(&fam, &s, &HistoryOutcome::all_measured(n), ChainOptions::default()).unwrap();
            op_norm(&(a - &ode))
        };
        let g4096 = gap(4096);
        assert!(g4096 <= 1e-3, "gap {g4096}");
        // O(1/n): quadrupling n shrinks the gap about fourfold.
        let ratio = gap(256) / gap(1024);
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn dyson_order_zero_is_initial_projector() {
        let fam = steered_instance(6, 3, 1);
        let a = dyson_series(&fam, Branch::Measured, 0.2, 0.7, &DysonTruncation::new(0)).unwrap();
        assert!(max_abs(&(a - fam.projector(0.2))) < 1e-15);
        assert!(dyson_series(&fam, Branch::Measured, 0.0, 1.0, &DysonTruncation::new(9)).is_err());
    }

    #[test]
    fn dyson_remainder_respects_factorial_bound() {
        let fam = steered_instance(7, 4, 2);
        let (t1, t) = (0.0, 0.6);
        let ode = solve_chain_ode(&fam, Branch::Complement, t1, t, &OdeConfig::with_steps(2000)).unwrap();
        let m = (0..=200)
            .map(|k| op_norm(&fam.derivative(t1 + (t - t1) * k as f64 / 200.0)))
            .fold(0.0, f64::max);
        let x = (t - t1) * m;
        let mut fact = 1.0;
        for k in 0..=6usize {
            fact *= (k + 1) as f64;
            let series = dyson_series(&fam, Branch::Complement, t1, t, &DysonTruncation::new(k)).unwrap();
            let diff = op_norm(&(series - &ode));
            let bound = x.powi(k as i32 + 1) / fact * x.exp();
            assert!(diff <= bound, "order {k}: {diff} > {bound}");
        }
    }

    #[test]
    fn residual_check_examples() {
        let fam = steered_instance(8, 4, 2);
        let cfg = OdeConfig::with_steps(400);
        let traj = solve_chain_ode_trajectory(&fam, Branch::Measured, 0.0, 1.0, &cfg).unwrap();
        let lookup = move |s: f64| traj[(s * 400.0).round() as usize].clone();
        let r = residual_check(&fam, &lookup, Branch::Measured, 0.0, 1.0, &cfg, Stencil::Central2).unwrap();
        assert!(r < 1e-3, "self-consistency residual {r}");

        let wrong = fam.projector(0.0);
        let constant = move |_: f64| wrong.clone();
        let r = residual_check(&fam, &constant, Branch::Measured, 0.0, 1.0, &cfg, Stencil::Central4).unwrap();
        assert!(r > 0.1, "negative control residual {r}");
    }

    #[test]
    fn increment_scheme_reproduces_chain() {
        let fam = steered_instance(9, 3, 1);
        let cfg = OdeConfig {
            step_count: 63,
            scheme: OdeScheme::Increment,
            ..OdeConfig::default()
        };
        let a = solve_chain_ode(&fam, Branch::Complement, 0.0, 1.0, &cfg).unwrap();
        let s = MeasurementSchedule::new(0.0, 1.0, 64).unwrap();
        let chain =
            chain_operator_heisenberg(&fam, &s, &HistoryOutcome::all_complement(64), ChainOptions::default()).unwrap();
        assert!(max_abs(&(a - chain)) < 1e-12);
    }
}
