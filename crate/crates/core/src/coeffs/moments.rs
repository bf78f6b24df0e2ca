//! Closed Bessel-series forms of the kernel moments ∫₀^∞ kernel_μ(x) x^ν dx.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{kernel_value, ChemicalPotential, Quantity, Statistics, Variant};
use crate::specfun::quad::integrate_power_weighted;
use crate::specfun::{bessel_k_scaled, gamma_fn, QuadResult, QuadratureControl, SeriesControl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MomentKind {
    FermiEntropy,
    BoseEntropy,
}

impl MomentKind {
    pub fn statistics(self) -> Statistics {
        match self {
            MomentKind::FermiEntropy => Statistics::Fermi,
            MomentKind::BoseEntropy => Statistics::Bose,
        }
    }
}

fn check(nu: f64, mu: ChemicalPotential) -> Result<f64> {
    if !(nu > -1.0) || !nu.is_finite() {
        return Err(Error::domain(format!("moment order must satisfy nu > -1, got {nu}")));
    }
    mu.require_negative("a closed moment formula")?;
    Ok(mu.value().abs())
}

// 2^{ν/2} Γ((ν+1)/2)/√π
fn moment_prefactor(nu: f64) -> Result<f64> {
    Ok(2f64.powf(0.5 * nu) * gamma_fn(0.5 * (nu + 1.0))? / PI.sqrt())
}

/// Sums Σ_n s_n · term(n) where term(n) is built from e^{nm}K values and
/// decays like n^p e^{-nm}.
fn bessel_sum<F>(m: f64, growth: f64, alternating: bool, sctl: &SeriesControl, term: F) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let mut sum = 0.0;
    for n in 1..=sctl.max_terms {
        let nf = n as f64;
        let decay = (-nf * m).exp();
        if decay == 0.0 {
            return Ok(sum);
        }
        let sign = if alternating && n % 2 == 0 { -1.0 } else { 1.0 };
        let t = sign * term(nf, nf * m)? * decay;
        sum += t;
        let q = (-m).exp() * (1.0 + 1.0 / nf).powf(growth);
        if nf * m > growth && q < 1.0 && t.abs() * q / (1.0 - q) <= sctl.target(sum) {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        what: "moment Bessel series",
        limit: sctl.max_terms,
        residual: f64::NAN,
    })
}

fn k_scaled(nu: f64, z: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, z, &QuadratureControl::default())?.value)
}

/// ∫₀^∞ h_μ(x) x^ν dx (fermions) or ∫₀^∞ k_μ(x) x^ν dx (bosons) for the
/// entropy kernels, from the Bessel series
/// |μ|^{ν/2+2} 2^{ν/2} Γ((ν+1)/2)/√π Σ (±1)^{n+1} n^{-ν/2} K_{ν/2+2}(n|μ|).
pub fn moment_closed(kind: MomentKind, nu: f64, mu: ChemicalPotential, sctl: &SeriesControl) -> Result<f64> {
    let m = check(nu, mu)?;
    let alt = kind == MomentKind::FermiEntropy;
    let order = 0.5 * nu + 2.0;
    let s = bessel_sum(m, order + 1.0, alt, sctl, |n, z| {
        Ok(n.powf(-0.5 * nu) * k_scaled(order, z)?)
    })?;
    Ok(m.powf(order) * moment_prefactor(nu)? * s)
}

/// ∫₀^∞ log(1 + e^{-√(x²+μ²)}) x^ν dx.
pub fn fermi_log_moment_closed(nu: f64, mu: ChemicalPotential, sctl: &SeriesControl) -> Result<f64> {
    let m = check(nu, mu)?;
    let order = 0.5 * nu + 1.0;
    let s = bessel_sum(m, order + 1.0, true, sctl, |n, z| {
        Ok(n.powf(-order) * k_scaled(order, z)?)
    })?;
    Ok(m.powf(order) * moment_prefactor(nu)? * s)
}

/// ∫₀^∞ √(x²+μ²)/(e^{√(x²+μ²)} + 1) x^ν dx.
pub fn fermi_energy_moment_closed(nu: f64, mu: ChemicalPotential, sctl: &SeriesControl) -> Result<f64> {
    let m = check(nu, mu)?;
    let half = 0.5 * nu;
    let s = bessel_sum(m, half + 2.0, true, sctl, |n, z| {
        let lead = m * n.powf(-half) * k_scaled(half, z)?;
        let next = (1.0 + nu) * n.powf(-half - 1.0) * k_scaled(half + 1.0, z)?;
        Ok(lead + next)
    })?;
    Ok(m.powf(half + 1.0) * moment_prefactor(nu)? * s)
}

/// The same moment as [`moment_closed`] by adaptive quadrature of the kernel.
pub fn moment_quadrature(
    kind: MomentKind,
    nu: f64,
    mu: ChemicalPotential,
    qctl: &QuadratureControl,
) -> Result<QuadResult> {
    check(nu, mu)?;
    let stat = kind.statistics();
    let f = |x: f64| kernel_value(stat, Quantity::Entropy, Variant::SqrtShift, mu, x).unwrap_or(f64::NAN);
    integrate_power_weighted(f, nu, qctl)
}
