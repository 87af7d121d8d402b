//! Worked scenarios: von Neumann steering by a sequence of measurements, a
//! continuously measured spin-½, and a swept spectral window on a lattice.

pub mod spin;
pub mod steering;
pub mod window;

pub use spin::{
    spin_family, spin_hamiltonian, spin_heisenberg_closed, spin_series_closed_form, spin_series_coefficients,
    spin_series_verify, SpinFamilyParams, SpinSeriesReport, SpinSeriesRow,
};
pub use steering::{vn_bound, vn_offdiagonal_decay, vn_steering_route, vn_steering_run, SteeringOutcome, SteeringPlan};
pub use window::{swept_window_limit, window_chain_complement, window_family, WindowFamilyParams};
