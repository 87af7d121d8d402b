//! Scenario execution: each scenario turns a validated configuration into
//! result rows.
//!
//! Instances draw their random operators from one ChaCha stream seeded with
//! `config.seed`, in instance order, so a run is reproducible from its
//! configuration alone.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use rand::Rng;
use zenosim_core::antizeno::{
    antizeno_probability, discrete_probability, evolved_state, solve_steering, SteeredMeasurement,
};
use zenosim_core::chain::{
    all_histories_closure, chain_operator, chain_probability, HistoryOutcome, MeasurementSchedule,
};
use zenosim_core::continuum::{DysonTruncation, OdeConfig, OdeScheme};
use zenosim_core::family::RotationFactor;
use zenosim_core::linalg::{max_abs, op_norm, sigma_x, sigma_y, sigma_z};
use zenosim_core::random::{self, SeededRng};
use zenosim_core::scenarios::{
    spin_series_verify, swept_window_limit, vn_bound, vn_steering_run, window_chain_complement, SpinFamilyParams,
    SteeringPlan, WindowFamilyParams,
};
use zenosim_core::{
    DensityOperator, DerivativeMode, HermitianOperator, Projector, ProjectorFamily, ScalarPath, StateVector,
    UnitaryFamily,
};

use crate::config::{DerivativeSetting, ScenarioConfig, ScenarioKind, ScenarioParams, SchemeSetting};
use crate::report::{Check, Row, RunReport};

pub const CONTINUUM_TOLERANCE: f64 = 1e-6;
pub const UNITARITY_TOLERANCE: f64 = 1e-8;
pub const QUBIT_FIDELITY_CEILING: f64 = 0.05;
pub const STEERING_SLACK: f64 = 1e-12;
pub const SERIES_TOLERANCE: f64 = 1e-6;
pub const SLOPE_TOLERANCE: f64 = 0.3;
pub const WINDOW_TOLERANCE: f64 = 1e-10;
pub const CLOSURE_TOLERANCE: f64 = 1e-9;
/// Round-off allowance added to the analytic leakage bounds.
const BOUND_SLACK: f64 = 1e-12;
const SUP_SAMPLES: usize = 4096;

#[derive(Debug, thiserror::Error)]
#[error("{scenario} scenario failed: {source}")]
pub struct RunError {
    pub scenario: ScenarioKind,
    #[source]
    pub source: zenosim_core::Error,
}

type Res<T> = zenosim_core::Result<T>;

pub fn ode_config(cfg: &ScenarioConfig) -> OdeConfig {
    OdeConfig {
        step_count: cfg.ode.step_count,
        scheme: match cfg.ode.scheme {
            SchemeSetting::Rk4 => OdeScheme::RungeKutta4,
            SchemeSetting::Increment => OdeScheme::Increment,
        },
        derivative_mode: match cfg.ode.derivative {
            DerivativeSetting::Analytic => DerivativeMode::Analytic,
            DerivativeSetting::CentralDifference => DerivativeMode::CentralDifference { step: cfg.ode.fd_step },
        },
    }
}

/// Runs the scenario; `wall_time_s` is always filled in and left to the
/// emitter to keep or drop.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let rows = match cfg.scenario {
        ScenarioKind::Zeno => zeno_rows(cfg),
        ScenarioKind::Antizeno => antizeno_rows(cfg),
        ScenarioKind::Steering => steering_rows(cfg),
        ScenarioKind::SpinSeries => spin_rows(cfg),
        ScenarioKind::SweptWindow => window_rows(cfg),
        ScenarioKind::Closure => closure_rows(cfg),
    }
    .map_err(|source| RunError {
        scenario: cfg.scenario,
        source,
    })?;
    let mut report = RunReport::new(cfg.clone(), rows);
    report.wall_time_s = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

/// Largest `‖dE_H/dt‖` over a uniform sample of `[t0, t1]`.
fn derivative_sup(fam: &zenosim_core::HeisenbergFamily, t0: f64, t1: f64) -> f64 {
    (0..=SUP_SAMPLES)
        .map(|k| t0 + (t1 - t0) * k as f64 / SUP_SAMPLES as f64)
        .map(|t| op_norm(&fam.derivative(t)))
        .fold(0.0, f64::max)
}

/// `M²T²/(n − 1)`: the largest leakage `1 − p_n` allowed when `‖dE_H/dt‖ ≤ M`.
fn leakage_bound(m: f64, horizon: f64, n: usize) -> f64 {
    if n < 2 {
        BOUND_SLACK
    } else {
        m * m * horizon * horizon / (n - 1) as f64 + BOUND_SLACK
    }
}

fn zeno_rows(cfg: &ScenarioConfig) -> Res<Vec<Row>> {
    let mut rng = random::rng_from_seed(cfg.seed);
    let (t0, t1) = (cfg.schedule.t_start, cfg.schedule.t_end);
    let mut rows = Vec::new();
    for inst in 0..cfg.instances {
        let h = random::random_hermitian_with(&mut rng, cfg.dim)?;
        let psi = random::random_state_with(&mut rng, cfg.dim)?;
        let rho = DensityOperator::pure(&psi)?;
        let fam = ProjectorFamily::constant(Projector::rank_one(&psi)?, t0, t1)?;
        let mean = h.expectation(&psi);
        let h2 = h.matrix() * h.matrix();
        let mean_sq = (psi.amplitudes().adjoint() * h2 * psi.amplitudes())[(0, 0)].re;
        let spread = (mean_sq - mean * mean).max(0.0).sqrt();
        for &n in &cfg.schedule.n {
            let sched = MeasurementSchedule::new(t0, t1, n)?;
            let a = chain_operator(&fam, &h, &sched, &HistoryOutcome::all_measured(n))?;
            let p = chain_probability(&rho, &a)?;
            rows.push(Row::new(
                "zeno survival",
                inst,
                "n",
                n as f64,
                p,
                1.0,
                leakage_bound(spread, t1 - t0, n),
                Check::Within,
            ));
        }
    }
    Ok(rows)
}

fn steered_instance(rng: &mut SeededRng, dim: usize, rank: usize, omega: f64, horizon: f64) -> Res<SteeredMeasurement> {
    let e = random::random_projector_with(rng, dim, rank)?;
    let k1 = random::random_hermitian_with(rng, dim)?;
    let k2 = random::random_hermitian_with(rng, dim)?;
    let h = random::random_hermitian_with(rng, dim)?;
    let rho = random::random_density_in_range(rng, &e)?;
    let u = UnitaryFamily::rotations(vec![
        RotationFactor::new(k1, ScalarPath::linear(omega)),
        RotationFactor::new(k2, ScalarPath::Polynomial(vec![0.0, 0.0, 0.5 * omega])),
    ])?;
    SteeredMeasurement::new(e, u, h, rho, horizon)
}

/// `E = |0⟩⟨0|` rotated by `exp(−iσ_y ωt)` under a fixed `H`, which carries
/// `|0⟩` to `|1⟩` by `t = π/(2ω)`.
pub fn qubit_steering(omega: f64) -> Res<SteeredMeasurement> {
    let k = HermitianOperator::new(sigma_y())?;
    let u = UnitaryFamily::rotation(k, ScalarPath::linear(omega))?;
    let h = HermitianOperator::new(sigma_x().scale(0.7) + sigma_z().scale(-0.4))?;
    let e = Projector::from_indices(2, [0])?;
    let rho = DensityOperator::pure(&StateVector::basis(2, 0))?;
    SteeredMeasurement::new(e, u, h, rho, FRAC_PI_2 / omega.abs())
}

fn antizeno_rows(cfg: &ScenarioConfig) -> Res<Vec<Row>> {
    let ScenarioParams::Antizeno { rank, omega } = cfg.params else {
        unreachable!("antizeno params")
    };
    let ode = ode_config(cfg);
    let horizon = cfg.schedule.t_end;
    let mut rng = random::rng_from_seed(cfg.seed);
    let mut rows = Vec::new();
    for inst in 0..cfg.instances {
        let m = steered_instance(&mut rng, cfg.dim, rank, omega, horizon)?;
        let steps = ode.step_count as f64;
        let p = antizeno_probability(&m, horizon, &ode)?;
        rows.push(Row::new(
            "continuum survival",
            inst,
            "steps",
            steps,
            p,
            1.0,
            CONTINUUM_TOLERANCE,
            Check::Within,
        ));
        let sp = solve_steering(&m, 0.0, horizon, &ode)?;
        rows.push(Row::new(
            "W unitarity defect",
            inst,
            "steps",
            steps,
            sp.unitarity_defect(),
            0.0,
            UNITARITY_TOLERANCE,
            Check::AtMost,
        ));
        let sup = derivative_sup(&m.heisenberg_family()?, 0.0, horizon);
        for &n in &cfg.schedule.n {
            let pn = discrete_probability(&m, n, horizon)?;
            rows.push(Row::new(
                "discrete survival",
                inst,
                "n",
                n as f64,
                pn,
                1.0,
                leakage_bound(sup, horizon, n),
                Check::Within,
            ));
        }
    }
    let q = qubit_steering(omega)?;
    let t = q.horizon();
    let fidelity = evolved_state(&q, t, &ode)?.overlap_sqr(&StateVector::basis(2, 0));
    rows.push(Row::new(
        "qubit return fidelity",
        0,
        "T",
        t,
        fidelity,
        QUBIT_FIDELITY_CEILING,
        0.0,
        Check::AtMost,
    ));
    Ok(rows)
}

fn steering_rows(cfg: &ScenarioConfig) -> Res<Vec<Row>> {
    let ScenarioParams::Steering { k } = &cfg.params else {
        unreachable!("steering params")
    };
    let mut rng = random::rng_from_seed(cfg.seed);
    let mut rows = Vec::new();
    for inst in 0..cfg.instances {
        let completion_seed: u64 = rng.random();
        for &kk in k {
            let plan = SteeringPlan::basis_pair(cfg.dim, kk, completion_seed)?;
            let out = vn_steering_run(&plan)?;
            rows.push(Row::new(
                "steering fidelity",
                inst,
                "k",
                kk as f64,
                out.fidelity,
                vn_bound(kk)?,
                STEERING_SLACK,
                Check::AtLeast,
            ));
        }
    }
    Ok(rows)
}

fn spin_rows(cfg: &ScenarioConfig) -> Res<Vec<Row>> {
    let ScenarioParams::SpinSeries {
        alpha,
        omega,
        ref epsilons,
        max_order,
        quadrature_points,
    } = cfg.params
    else {
        unreachable!("spin-series params")
    };
    let eps_max = epsilons.iter().copied().fold(0.0, f64::max);
    let horizon = 1.01 * eps_max / (alpha + omega);
    let params = SpinFamilyParams::new(alpha, ScalarPath::linear(omega), horizon)?;
    let trunc = DysonTruncation {
        quadrature_points,
        ..DysonTruncation::new(max_order)
    };
    let report = spin_series_verify(&params, epsilons, max_order, &trunc, cfg.ode.step_count)?;
    let mut rows = Vec::new();
    for r in &report.rows {
        for (m, err) in r.order_errors.iter().enumerate() {
            rows.push(Row::new(
                format!("order {} term error", m + 1),
                0,
                "epsilon",
                r.epsilon,
                *err,
                0.0,
                SERIES_TOLERANCE,
                Check::AtMost,
            ));
        }
        rows.push(Row::new(
            "remainder",
            0,
            "epsilon",
            r.epsilon,
            r.remainder,
            0.0,
            0.0,
            Check::Info,
        ));
    }
    if let Some(slope) = report.remainder_slope {
        let expected = (max_order + 1) as f64;
        rows.push(Row::new(
            "remainder log-log slope",
            0,
            "max_order",
            max_order as f64,
            slope,
            expected,
            SLOPE_TOLERANCE,
            Check::Within,
        ));
    }
    rows.push(Row::new(
        "epsilon monotone",
        0,
        "horizon",
        horizon,
        if report.monotone { 1.0 } else { 0.0 },
        1.0,
        0.0,
        Check::Info,
    ));
    Ok(rows)
}

fn window_rows(cfg: &ScenarioConfig) -> Res<Vec<Row>> {
    let ScenarioParams::SweptWindow { lower, upper } = &cfg.params else {
        unreachable!("swept-window params")
    };
    let lower = ScalarPath::piecewise_linear(lower.clone())?;
    let upper = ScalarPath::piecewise_linear(upper.clone())?;
    let mut rng = random::rng_from_seed(cfg.seed);
    let mut rows = Vec::new();
    for inst in 0..cfg.instances {
        let energies: Vec<f64> = (0..cfg.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let params = WindowFamilyParams::new(cfg.dim, lower.clone(), upper.clone())?.with_energies(energies)?;
        for &n in &cfg.schedule.n {
            let sched = MeasurementSchedule::new(cfg.schedule.t_start, cfg.schedule.t_end, n)?;
            let chain = window_chain_complement(&params, &sched)?;
            let limit = swept_window_limit(&params, &sched)?;
            let gap = max_abs(&(chain - limit.matrix()));
            rows.push(Row::new(
                "window limit gap",
                inst,
                "n",
                n as f64,
                gap,
                0.0,
                WINDOW_TOLERANCE,
                Check::AtMost,
            ));
        }
    }
    Ok(rows)
}

fn closure_rows(cfg: &ScenarioConfig) -> Res<Vec<Row>> {
    let (t0, t1) = (cfg.schedule.t_start, cfg.schedule.t_end);
    let mut rng = random::rng_from_seed(cfg.seed);
    let mut rows = Vec::new();
    for inst in 0..cfg.instances {
        let rank = rng.random_range(1..=cfg.dim);
        let e = random::random_projector_with(&mut rng, cfg.dim, rank)?;
        let k = random::random_hermitian_with(&mut rng, cfg.dim)?;
        let h = random::random_hermitian_with(&mut rng, cfg.dim)?;
        let rho = random::random_density_with(&mut rng, cfg.dim)?;
        let fam = ProjectorFamily::steered(e, UnitaryFamily::rotation(k, ScalarPath::linear(1.0))?, t0, t1)?;
        for &n in &cfg.schedule.n {
            let sched = MeasurementSchedule::new(t0, t1, n)?;
            let total = all_histories_closure(&fam, &h, &sched, &rho)?;
            rows.push(Row::new(
                "history sum",
                inst,
                "n",
                n as f64,
                total,
                1.0,
                CLOSURE_TOLERANCE,
                Check::Within,
            ));
        }
    }
    Ok(rows)
}
