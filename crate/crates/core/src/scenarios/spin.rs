//! A spin-½ whose direction of measurement rotates in the x–z plane while a
//! Hamiltonian `H = −½ α σ_y` rotates it further.
//!
//! With `ε(t) = θ(t) + αt` the Heisenberg projector is
//! `E_H(t) = R(ε)(1 + σ_z)/2 R†(ε)`, `R(ε) = exp(−iσ_y ε/2)`, and every term
//! of the time-ordered series for the complement branch is a function of `ε`
//! alone. The first four are tabulated here as coefficients on
//! `{1, σ_x, σ_y, σ_z}`.

use num_complex::Complex64;

use crate::continuum::{dyson_terms, time_ordered_exp, DysonTruncation};
use crate::family::{Branch, HeisenbergFamily, ProjectorFamily};
use crate::linalg::{self, c, op_norm, CMatrix};
use crate::operators::HermitianOperator;
use crate::path::ScalarPath;
use crate::{Error, Result};

/// Highest order with a tabulated closed form.
pub const SPIN_SERIES_MAX_ORDER: usize = 4;

#[derive(Debug, Clone)]
pub struct SpinFamilyParams {
    pub alpha: f64,
    pub theta: ScalarPath,
    /// Families are defined on `[0, horizon]`.
    pub horizon: f64,
}

impl SpinFamilyParams {
    pub fn new(alpha: f64, theta: ScalarPath, horizon: f64) -> Result<Self> {
        let p = Self { alpha, theta, horizon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || !self.horizon.is_finite() {
            return Err(Error::NonFinite);
        }
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidArgument("horizon must be positive".into()));
        }
        let theta0 = self.theta.value(0.0);
        if theta0.abs() > 1e-14 {
            return Err(Error::Precondition(format!("θ(0) must vanish (got {theta0})")));
        }
        Ok(())
    }

    /// `ε(t) = θ(t) + αt`.
    pub fn epsilon(&self, t: f64) -> f64 {
        self.theta.value(t) + self.alpha * t
    }

    pub fn epsilon_rate(&self, t: f64) -> f64 {
        self.theta.derivative(t) + self.alpha
    }

    /// True when `ε̇ ≥ 0` at every one of `samples + 1` grid points on `[0, t]`.
    pub fn is_monotone_on(&self, t: f64, samples: usize) -> bool {
        let samples = samples.max(1);
        (0..=samples).all(|k| self.epsilon_rate(t * k as f64 / samples as f64) >= 0.0)
    }
}

/// `H = −½ α σ_y`.
pub fn spin_hamiltonian(alpha: f64) -> HermitianOperator {
    HermitianOperator::new(linalg::sigma_y().scale(-0.5 * alpha)).expect("scaled Pauli matrix is Hermitian")
}

/// Schrödinger-picture family `E_s(t) = (1 + σ·n(t))/2`, `n = (sin θ, 0, cos θ)`.
pub fn spin_family(params: &SpinFamilyParams) -> Result<ProjectorFamily> {
    params.validate()?;
    ProjectorFamily::spin_direction(params.theta.clone(), 0.0, params.horizon)
}

pub fn spin_heisenberg_family(params: &SpinFamilyParams) -> Result<HeisenbergFamily> {
    HeisenbergFamily::new(spin_family(params)?, spin_hamiltonian(params.alpha))
}

/// `exp(−iσ_y ε/2) (1 + σ_z)/2 exp(iσ_y ε/2)`.
pub fn spin_heisenberg_closed(epsilon: f64) -> CMatrix {
    let r = linalg::mat_exp(&linalg::sigma_y().map(|z| z * c(0.0, -0.5 * epsilon)))
        .expect("finite anti-Hermitian exponent");
    let up = (linalg::identity(2) + linalg::sigma_z()).scale(0.5);
    &r * up * r.adjoint()
}

/// Coefficients `[c₁, c_x, c_y, c_z]` of the order-`m` series term.
pub fn spin_series_coefficients(epsilon: f64, order: usize) -> Result<[Complex64; 4]> {
    let (s, co, e) = (epsilon.sin(), epsilon.cos(), epsilon);
    let re = |x: f64| c(x, 0.0);
    let im = |x: f64| c(0.0, x);
    Ok(match order {
        1 => [re(0.0), re(-0.5 * s), re(0.0), re(-0.5 * (co - 1.0))],
        2 => [re(0.25 * (1.0 - co)), re(0.0), im(-0.25 * (e - s)), re(0.0)],
        3 => [
            re(0.0),
            re(-0.125 * (2.0 * s - e * (co + 1.0))),
            re(0.0),
            re(-0.125 * (e * s + 2.0 * co - 2.0)),
        ],
        4 => [
            re(-(0.5 * e * e + e * s + 3.0 * (co - 1.0)) / 16.0),
            re(0.0),
            im(-(2.0 * e + e * co - 3.0 * s) / 16.0),
            re(0.0),
        ],
        _ => {
            return Err(Error::InvalidArgument(format!(
                "closed forms exist for orders 1..={SPIN_SERIES_MAX_ORDER}, not {order}"
            )))
        }
    })
}

/// The order-`m` series term as a matrix.
pub fn spin_series_closed_form(epsilon: f64, order: usize) -> Result<CMatrix> {
    let [c1, cx, cy, cz] = spin_series_coefficients(epsilon, order)?;
    Ok(linalg::identity(2).map(|z| z * c1)
        + linalg::sigma_x().map(|z| z * cx)
        + linalg::sigma_y().map(|z| z * cy)
        + linalg::sigma_z().map(|z| z * cz))
}

/// Agreement of the numeric series with the closed forms at one `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSeriesRow {
    pub epsilon: f64,
    /// Time at which `ε(t)` reaches `epsilon`.
    pub t: f64,
    /// `‖numeric term m − closed form m‖` for `m = 1..=max_order`.
    pub order_errors: Vec<f64>,
    /// `‖T exp − Σ_{m ≤ max_order} closed form m‖`.
    pub remainder: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSeriesReport {
    pub rows: Vec<SpinSeriesRow>,
    /// Least-squares slope of `ln remainder` against `ln ε`; needs two rows.
    pub remainder_slope: Option<f64>,
    /// False when `ε(t)` decreases somewhere on the sampled interval.
    pub monotone: bool,
}

fn time_for_epsilon(params: &SpinFamilyParams, target: f64) -> Result<f64> {
    let f = |t: f64| params.epsilon(t) - target;
    let (mut lo, mut hi) = (0.0, params.horizon);
    if f(lo) == 0.0 {
        return Ok(0.0);
    }
    if f(lo).signum() == f(hi).signum() {
        return Err(Error::InvalidArgument(format!(
            "ε = {target} is not reached on [0, {}]",
            params.horizon
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == f(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Compares numeric series terms (complement branch, `t1 = 0`) with the
/// closed forms for each `ε` in `eps_values`, and fits the decay of the
/// remainder after `max_order` terms.
pub fn spin_series_verify(
    params: &SpinFamilyParams,
    eps_values: &[f64],
    max_order: usize,
    trunc: &DysonTruncation,
    ode_steps: usize,
) -> Result<SpinSeriesReport> {
    if max_order == 0 || max_order > SPIN_SERIES_MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "max_order must lie in 1..={SPIN_SERIES_MAX_ORDER}"
        )));
    }
    let fam = spin_heisenberg_family(params)?;
    let trunc = DysonTruncation {
        order: max_order,
        ..*trunc
    };
    let mut rows = Vec::with_capacity(eps_values.len());
    let mut t_max = 0.0f64;
    for &eps in eps_values {
        let t = time_for_epsilon(params, eps)?;
        t_max = t_max.max(t);
        let numeric = dyson_terms(&fam, Branch::Complement, 0.0, t, &trunc)?;
        let mut order_errors = Vec::with_capacity(max_order);
        let mut closed_sum = linalg::identity(2);
        for (m, term) in numeric.iter().enumerate().skip(1) {
            let closed = spin_series_closed_form(eps, m)?;
            order_errors.push(op_norm(&(term - &closed)));
            closed_sum += closed;
        }
        let g = |s: f64| fam.branch_derivative(Branch::Complement, s);
        let full = time_ordered_exp(&g, 2, 0.0, t, ode_steps);
        rows.push(SpinSeriesRow {
            epsilon: eps,
            t,
            order_errors,
            remainder: op_norm(&(full - closed_sum)),
        });
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.epsilon.abs(), r.remainder)).collect();
    Ok(SpinSeriesReport {
        remainder_slope: log_log_slope(&points),
        monotone: params.is_monotone_on(t_max, 1024),
        rows,
    })
}
