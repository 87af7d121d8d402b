//! A spectral window `[λ_L(t), λ_R(t)]` swept over a finite lattice.
//!
//! The measured projector keeps the basis states `|j⟩` with
//! `λ_L(t) ≤ j ≤ λ_R(t)`; the Hamiltonian is diagonal in the same basis.
//! If the window is never found occupied, the survivors are exactly the
//! states the window never touched: `j < min λ_L` or `j > max λ_R`.

use crate::chain::{chain_operator, HistoryOutcome, MeasurementSchedule};
use crate::family::ProjectorFamily;
use crate::linalg::{c, CMatrix, CVector};
use crate::operators::{HermitianOperator, Projector};
use crate::path::ScalarPath;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct WindowFamilyParams {
    pub dim: usize,
    pub lower: ScalarPath,
    pub upper: ScalarPath,
    /// Diagonal of `H`; empty means `H = 0`.
    pub energies: Vec<f64>,
}

impl WindowFamilyParams {
    pub fn new(dim: usize, lower: ScalarPath, upper: ScalarPath) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            lower,
            upper,
            energies: Vec::new(),
        })
    }

    pub fn with_energies(mut self, energies: Vec<f64>) -> Result<Self> {
        if energies.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                found: energies.len(),
            });
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.energies = energies;
        Ok(self)
    }

    pub fn hamiltonian(&self) -> HermitianOperator {
        let diag = CVector::from_iterator(
            self.dim,
            (0..self.dim).map(|j| c(self.energies.get(j).copied().unwrap_or(0.0), 0.0)),
        );
        HermitianOperator::new(CMatrix::from_diagonal(&diag)).expect("real diagonal is Hermitian")
    }

    /// `(min λ_L, max λ_R)` over the schedule grid, after checking that the
    /// window is never empty and that every lower bound lies below every
    /// upper bound.
    pub fn grid_extremes(&self, sched: &MeasurementSchedule) -> Result<(f64, f64)> {
        let lows: Vec<f64> = sched.times().map(|t| self.lower.value(t)).collect();
        let highs: Vec<f64> = sched.times().map(|t| self.upper.value(t)).collect();
        if lows.iter().chain(&highs).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let max_low = lows.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_high = highs.iter().copied().fold(f64::INFINITY, f64::min);
        if !(max_low < min_high) {
            return Err(Error::Precondition(format!(
                "window bounds overlap: max λ_L = {max_low} is not below min λ_R = {min_high}"
            )));
        }
        for (t, (lo, hi)) in sched.times().zip(lows.iter().zip(&highs)) {
            let occupied = (0..self.dim).any(|j| *lo <= j as f64 && j as f64 <= *hi);
            if !occupied {
                return Err(Error::Precondition(format!(
                    "window [{lo}, {hi}] at t = {t} contains no lattice site"
                )));
            }
        }
        let min_low = lows.iter().copied().fold(f64::INFINITY, f64::min);
        let max_high = highs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((min_low, max_high))
    }
}

pub fn window_family(params: &WindowFamilyParams, t_start: f64, t_end: f64) -> Result<ProjectorFamily> {
    ProjectorFamily::diagonal_window(params.dim, params.lower.clone(), params.upper.clone(), t_start, t_end)
}

/// Projector onto `j < min λ_L` or `j > max λ_R`, extremes taken over the
/// schedule grid.
pub fn swept_window_limit(params: &WindowFamilyParams, sched: &MeasurementSchedule) -> Result<Projector> {
    let (lo, hi) = params.grid_extremes(sched)?;
    Projector::from_indices(
        params.dim,
        (0..params.dim).filter(|&j| (j as f64) < lo || (j as f64) > hi),
    )
}

/// Chain operator of the history in which the window is never found occupied.
pub fn window_chain_complement(params: &WindowFamilyParams, sched: &MeasurementSchedule) -> Result<CMatrix> {
    params.grid_extremes(sched)?;
    let fam = window_family(params, sched.t_start(), sched.t_end())?;
    chain_operator(
        &fam,
        &params.hamiltonian(),
        sched,
        &HistoryOutcome::all_complement(sched.n()),
    )
}
