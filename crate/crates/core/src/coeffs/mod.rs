//! Spectral-action coefficient functions γ_μ, ω_μ, χ_μ and κ_μ.
//!
//! Each coefficient is C_μ(a) = ∫₀^∞ t^a w_μ(t) dt for the Laplace weight w_μ
//! of the matching kernel, and can be evaluated four independent ways.

mod forms;
mod moments;

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{kernel_value, ChemicalPotential, Quantity, Statistics, Variant};
use crate::specfun::quad::integrate_power_weighted;
use crate::specfun::{gamma_fn, ln_riemann_xi, QuadratureControl, SeriesControl};

pub use forms::{bessel_series_terms, lattice_sum, Parity};
pub use moments::{fermi_energy_moment_closed, fermi_log_moment_closed, moment_closed, moment_quadrature, MomentKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoeffKind {
    GammaFermiEntropy,
    OmegaFermiEnergy,
    ChiBoseEntropy,
    KappaBoseEnergy,
}

impl CoeffKind {
    pub const ALL: [CoeffKind; 4] = [
        CoeffKind::GammaFermiEntropy,
        CoeffKind::OmegaFermiEnergy,
        CoeffKind::ChiBoseEntropy,
        CoeffKind::KappaBoseEnergy,
    ];

    pub fn of(stat: Statistics, qty: Quantity) -> Self {
        match (stat, qty) {
            (Statistics::Fermi, Quantity::Entropy) => CoeffKind::GammaFermiEntropy,
            (Statistics::Fermi, Quantity::Energy) => CoeffKind::OmegaFermiEnergy,
            (Statistics::Bose, Quantity::Entropy) => CoeffKind::ChiBoseEntropy,
            (Statistics::Bose, Quantity::Energy) => CoeffKind::KappaBoseEnergy,
        }
    }

    pub fn statistics(self) -> Statistics {
        match self {
            CoeffKind::GammaFermiEntropy | CoeffKind::OmegaFermiEnergy => Statistics::Fermi,
            CoeffKind::ChiBoseEntropy | CoeffKind::KappaBoseEnergy => Statistics::Bose,
        }
    }

    pub fn quantity(self) -> Quantity {
        match self {
            CoeffKind::GammaFermiEntropy | CoeffKind::ChiBoseEntropy => Quantity::Entropy,
            CoeffKind::OmegaFermiEnergy | CoeffKind::KappaBoseEnergy => Quantity::Energy,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CoeffKind::GammaFermiEntropy => "gamma",
            CoeffKind::OmegaFermiEnergy => "omega",
            CoeffKind::ChiBoseEntropy => "chi",
            CoeffKind::KappaBoseEnergy => "kappa",
        }
    }

    /// Radius in |μ| inside which the ξ power series converges.
    pub fn xi_radius(self) -> f64 {
        match self.statistics() {
            Statistics::Fermi => PI,
            Statistics::Bose => 2.0 * PI,
        }
    }

    fn is_energy(self) -> bool {
        self.quantity() == Quantity::Energy
    }
}

impl fmt::Display for CoeffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoeffKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "gamma" | "γ" => Ok(CoeffKind::GammaFermiEntropy),
            "omega" | "ω" => Ok(CoeffKind::OmegaFermiEnergy),
            "chi" | "χ" => Ok(CoeffKind::ChiBoseEntropy),
            "kappa" | "κ" => Ok(CoeffKind::KappaBoseEnergy),
            _ => Err(format!(
                "unknown coefficient kind '{s}' (expected gamma, omega, chi, kappa)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    BesselSeries,
    PoissonSeries,
    XiSeries,
    Quadrature,
}

impl Representation {
    pub const ALL: [Representation; 4] = [
        Representation::BesselSeries,
        Representation::PoissonSeries,
        Representation::XiSeries,
        Representation::Quadrature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Representation::BesselSeries => "bessel",
            Representation::PoissonSeries => "poisson",
            Representation::XiSeries => "xi",
            Representation::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "bessel" => Ok(Representation::BesselSeries),
            "poisson" => Ok(Representation::PoissonSeries),
            "xi" => Ok(Representation::XiSeries),
            "quadrature" | "quad" => Ok(Representation::Quadrature),
            _ => Err(format!(
                "unknown representation '{s}' (expected bessel, poisson, xi, quadrature)"
            )),
        }
    }
}

/// A coefficient value with its truncation-error estimate.
///
/// `rep` is the representation actually used, which differs from the
/// requested one when the Bessel series is too slow for |μ| < 0.05.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffResult {
    pub value: f64,
    pub rep: Representation,
    pub est_error: f64,
    pub terms_used: usize,
}

/// Below this |μ| the Bessel series needs thousands of terms.
pub const BESSEL_MIN_ABS_MU: f64 = 0.05;

// Offsets used by the removable-singularity limit procedure. Powers of two
// keep a ± h exact at half-integers, so the pole parts of the two sides
// cancel to the last bit.
const LIMIT_STEPS: [f64; 2] = [1.0 / 8192.0, 1.0 / 16384.0];
const SINGULAR_WINDOW: f64 = 1e-7;

fn check_inputs(kind: CoeffKind, a: f64, mu: ChemicalPotential) -> Result<()> {
    if !a.is_finite() {
        return Err(Error::domain(format!("coefficient order must be finite, got {a}")));
    }
    if kind.statistics() == Statistics::Bose {
        mu.require_negative("a bosonic coefficient")?;
    }
    Ok(())
}

/// Evaluates C_μ(a) in the requested representation.
pub fn coeff(
    kind: CoeffKind,
    a: f64,
    mu: ChemicalPotential,
    rep: Representation,
    sctl: &SeriesControl,
    qctl: &QuadratureControl,
) -> Result<CoeffResult> {
    check_inputs(kind, a, mu)?;
    let m = mu.value().abs();
    match rep {
        Representation::BesselSeries if m < BESSEL_MIN_ABS_MU => {
            // too slow to converge: answer with the lattice sum instead
            coeff(kind, a, mu, Representation::PoissonSeries, sctl, qctl)
        }
        Representation::BesselSeries => forms::bessel(kind, a, m, sctl, qctl),
        Representation::PoissonSeries => {
            if forms::poisson_is_singular(a) {
                limit_procedure(a, |b| forms::poisson(kind, b, m, sctl), Representation::PoissonSeries)
            } else {
                forms::poisson(kind, a, m, sctl)
            }
        }
        Representation::XiSeries => {
            if m >= kind.xi_radius() {
                return Err(Error::domain(format!(
                    "xi series for {kind} needs |mu| < {:.6}, got |mu| = {m}",
                    kind.xi_radius()
                )));
            }
            if forms::xi_is_singular(kind, a) {
                limit_procedure(a, |b| forms::xi_series(kind, b, m, sctl), Representation::XiSeries)
            } else {
                forms::xi_series(kind, a, m, sctl)
            }
        }
        Representation::Quadrature => forms::weight_quadrature(kind, a, mu, sctl, qctl),
    }
}

/// Representation picked when the caller does not choose one: the Bessel
/// series for |μ| ≥ 0.05, the ξ series inside its radius, else the lattice sum.
pub fn auto_representation(kind: CoeffKind, mu: f64) -> Representation {
    let m = mu.abs();
    if m >= BESSEL_MIN_ABS_MU {
        Representation::BesselSeries
    } else if m < kind.xi_radius() {
        Representation::XiSeries
    } else {
        Representation::PoissonSeries
    }
}

pub fn coeff_auto(
    kind: CoeffKind,
    a: f64,
    mu: ChemicalPotential,
    sctl: &SeriesControl,
    qctl: &QuadratureControl,
) -> Result<CoeffResult> {
    coeff(kind, a, mu, auto_representation(kind, mu.value()), sctl, qctl)
}

/// Evaluates an analytic function at a removable singularity `a` from
/// symmetric averages at a ± h, Richardson-extrapolated in h².
///
/// The value uses the two finest steps. A third, coarser step gives a second
/// extrapolation whose disagreement feeds the error estimate, since the
/// pieces being averaged cancel against each other near the singularity.
fn limit_procedure<F>(a: f64, f: F, rep: Representation) -> Result<CoeffResult>
where
    F: Fn(f64) -> Result<CoeffResult>,
{
    let steps = [2.0 * LIMIT_STEPS[0], LIMIT_STEPS[0], LIMIT_STEPS[1]];
    let mut averages = [0.0; 3];
    let mut err: f64 = 0.0;
    let mut terms = 0;
    for (slot, h) in averages.iter_mut().zip(steps) {
        let lo = f(a - h).map_err(|e| e.context(format!("limit procedure at a = {a}")))?;
        let hi = f(a + h).map_err(|e| e.context(format!("limit procedure at a = {a}")))?;
        *slot = 0.5 * (lo.value + hi.value);
        err = err.max(lo.est_error).max(hi.est_error);
        terms += lo.terms_used + hi.terms_used;
    }
    let ratio = (LIMIT_STEPS[0] / LIMIT_STEPS[1]).powi(2);
    let extrapolate = |coarse: f64, fine: f64| (ratio * fine - coarse) / (ratio - 1.0);
    let value = extrapolate(averages[1], averages[2]);
    let check = extrapolate(averages[0], averages[1]);
    if !value.is_finite() {
        return Err(Error::NoConvergence {
            what: "removable-singularity limit",
            limit: 2,
            residual: f64::INFINITY,
        });
    }
    let est_error = err * (ratio + 1.0) / (ratio - 1.0) + 4.0 * (value - check).abs();
    Ok(CoeffResult {
        value,
        rep,
        est_error,
        terms_used: terms,
    })
}

pub(crate) fn near_half_integer_at_most(a: f64, max: f64, step: f64) -> bool {
    // a ∈ {max, max - step, max - 2·step, ...} up to the singular window
    if a > max + SINGULAR_WINDOW {
        return false;
    }
    let k = ((max - a) / step).round();
    (a - (max - k * step)).abs() < SINGULAR_WINDOW
}

/// The μ → 0 functions γ(a), ω(a), χ(a), κ(a) that enter the ξ series.
///
/// γ(0) = log 2 is a removable singularity and is returned exactly. ω and κ
/// have a genuine pole at a = 1/2 and χ at a = 0, which are reported as
/// [`Error::Pole`].
pub fn limit_coeff(kind: CoeffKind, a: f64) -> Result<f64> {
    let (ln_mag, sign) = ln_limit_coeff(kind, a)?;
    Ok(sign * ln_mag.exp())
}

/// ln|C(a)| and sign of the μ → 0 function, safe for large a.
pub(crate) fn ln_limit_coeff(kind: CoeffKind, a: f64) -> Result<(f64, f64)> {
    let lxi = ln_riemann_xi(2.0 * a);
    let lpi = PI.ln();
    // (1 - 2^{-2a})/a, which tends to 2 log 2 at a = 0
    let halving = |a: f64| {
        if a == 0.0 {
            2.0 * LN_2
        } else {
            -(-2.0 * a * LN_2).exp_m1() / a
        }
    };
    match kind {
        CoeffKind::GammaFermiEntropy => {
            let h = halving(a);
            Ok((h.abs().ln() - a * lpi + lxi, h.signum()))
        }
        CoeffKind::OmegaFermiEnergy => {
            if a == 0.5 {
                return Err(Error::Pole { func: "omega", at: a });
            }
            let h = halving(a) * a / (2.0 * a - 1.0);
            Ok(((2.0 * h).abs().ln() - a * lpi + lxi, h.signum()))
        }
        CoeffKind::ChiBoseEntropy => {
            if a == 0.0 {
                return Err(Error::Pole { func: "chi", at: a });
            }
            Ok((lxi - a * (4.0 * PI).ln() - a.abs().ln(), a.signum()))
        }
        CoeffKind::KappaBoseEnergy => {
            if a == 0.5 {
                return Err(Error::Pole { func: "kappa", at: a });
            }
            let d = 2.0 * a - 1.0;
            Ok((2f64.ln() + lxi - a * (4.0 * PI).ln() - d.abs().ln(), d.signum()))
        }
    }
}

/// Mellin-moment oracle C_μ(a) = (2/Γ(-a)) ∫₀^∞ kernel_μ(x) x^{-2a-1} dx,
/// valid for a < 0 only.
pub fn mellin_coeff_oracle(kind: CoeffKind, a: f64, mu: ChemicalPotential, qctl: &QuadratureControl) -> Result<f64> {
    if !(a < 0.0) {
        return Err(Error::domain(format!("Mellin route needs a < 0, got {a}")));
    }
    mu.require_negative("the Mellin route")?;
    let stat = kind.statistics();
    let qty = kind.quantity();
    let kernel = |x: f64| kernel_value(stat, qty, Variant::SqrtShift, mu, x).unwrap_or(f64::NAN);
    let r = integrate_power_weighted(kernel, -2.0 * a - 1.0, qctl)?;
    Ok(2.0 / gamma_fn(-a)? * r.value)
}

#[cfg(test)]
mod tests;
