/// Numerical tolerances shared by every check in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Algebraic identities (idempotency, Hermiticity, unit trace, ...).
    pub tol_alg: f64,
    /// Discretization and convergence checks.
    pub tol_conv: f64,
    /// Probabilities at or below this are treated as a null outcome.
    pub prob_floor: f64,
    /// Largest Hilbert-space dimension accepted by the validated constructors.
    pub max_dim: usize,
}

pub const DEFAULT_MAX_DIM: usize = 64;

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_alg: 1e-10,
            tol_conv: 1e-6,
            prob_floor: 1e-12,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = [self.tol_alg, self.tol_conv, self.prob_floor]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !ok || self.max_dim == 0 {
            return Err(crate::Error::InvalidArgument(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        Ok(())
    }
}
