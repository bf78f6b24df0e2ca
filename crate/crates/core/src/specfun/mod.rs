//! Real special functions: Γ, ζ, ξ, Hurwitz ζ, K_ν and the Jacobi θ function,
//! together with the adaptive quadrature they share.

mod bessel;
mod gamma;
pub mod quad;
mod theta;
mod zeta;

pub use bessel::{bessel_k, bessel_k_scaled};
pub use gamma::{gamma_fn, ln_gamma, sin_pi};
pub use quad::{QuadResult, QuadratureControl};
pub use theta::{theta, theta_prime};
pub use zeta::{eta, hurwitz_zeta, ln_riemann_xi, riemann_xi, riemann_zeta, xi_s_minus_one_zeta};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation policy for infinite series.
///
/// A series is considered converged once the magnitude of its tail estimate
/// drops below `max(abs_tol, rel_tol * |partial sum|)`. Reaching `max_terms`
/// first is reported as [`Error::NoConvergence`], never silently accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl SeriesControl {
    pub fn new(rel_tol: f64, abs_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol > 0.0) {
            return Err(Error::domain("series tolerances must be positive"));
        }
        if max_terms == 0 {
            return Err(Error::domain("max_terms must be at least 1"));
        }
        Ok(Self {
            rel_tol,
            abs_tol,
            max_terms,
        })
    }

    /// Target accuracy for a sum currently equal to `sum`.
    #[inline]
    pub fn target(&self, sum: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * sum.abs())
    }

    #[inline]
    pub fn converged(&self, tail: f64, sum: f64) -> bool {
        tail.abs() <= self.target(sum)
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-15,
            abs_tol: 1e-300,
            max_terms: 100_000,
        }
    }
}
