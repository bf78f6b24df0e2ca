//! Grand-canonical thermodynamics of second-quantized spectra, summed mode
//! by mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    bose_energy_term, bose_entropy_term, fermi_energy_term, fermi_entropy_term, kernel_value, mode_energy,
    ChemicalPotential, Quantity, Statistics, Variant,
};
use crate::spectra::{Geometry, Spectrum};
use crate::sum::par_sum_map;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoParams {
    pub beta: f64,
    pub mu: ChemicalPotential,
    pub stat: Statistics,
    pub variant: Variant,
}

impl ThermoParams {
    pub fn new(beta: f64, mu: ChemicalPotential, stat: Statistics, variant: Variant) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::domain(format!(
                "inverse temperature must be positive, got {beta}"
            )));
        }
        Ok(ThermoParams {
            beta,
            mu,
            stat,
            variant,
        })
    }

    pub fn with_beta(self, beta: f64) -> Result<Self> {
        Self::new(beta, self.mu, self.stat, self.variant)
    }

    /// βε for an eigenvalue λ.
    pub fn scaled_energy(&self, lambda: f64) -> f64 {
        self.beta * mode_energy(self.variant, self.stat, self.mu, lambda)
    }
}

/// How a truncated model spectrum is cut off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutoffRule {
    /// keep the n_max the spectrum was built with
    AsConstructed,
    /// rebuild with the smallest n_max whose Boltzmann factor passes the guard
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPolicy {
    pub cutoff_rule: CutoffRule,
    pub guard_factor: f64,
}

impl Default for TailPolicy {
    fn default() -> Self {
        TailPolicy {
            cutoff_rule: CutoffRule::AsConstructed,
            guard_factor: 1.0,
        }
    }
}

impl TailPolicy {
    fn threshold(&self) -> f64 {
        f64::EPSILON * self.guard_factor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoReport {
    pub log_z: f64,
    pub entropy: f64,
    pub energy: f64,
    pub modes_used: usize,
    /// bound on the entropy, log Z and β·energy carried by dropped modes
    pub tail_bound: f64,
    /// largest e^{-βε} at a truncation edge, 0 for explicit spectra
    pub cutoff_factor: f64,
    pub reliable: bool,
}

fn per_mode(stat: Statistics, y: f64) -> [f64; 3] {
    // (log Z, entropy, βε·occupation) for one mode
    match stat {
        Statistics::Fermi => [(-y).exp().ln_1p(), fermi_entropy_term(y), fermi_energy_term(y)],
        Statistics::Bose => [-(-(-y).exp_m1()).ln(), bose_entropy_term(y), bose_energy_term(y)],
    }
}

fn auto_cutoff(g: Geometry, p: &ThermoParams, threshold: f64) -> Result<Geometry> {
    let target = -threshold.ln();
    let passes = |n: usize| p.scaled_energy(n as f64) > target;
    let mut hi = 1usize;
    while !passes(hi) {
        hi *= 2;
        if hi > 1 << 26 {
            return Err(Error::domain("automatic cutoff exceeds 2^26 modes per direction"));
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // the Boltzmann guard alone leaves a tail of order (1+y)e^{-y} times the shell count
    let mut g = g.with_n_max(hi.max(1));
    while g.tail_bound(p.beta, p.mu, p.stat, p.variant) > threshold {
        let n = g.n_max();
        if n > 1 << 26 {
            return Err(Error::domain("automatic cutoff exceeds 2^26 modes per direction"));
        }
        g = g.with_n_max(n + n / 8 + 1);
    }
    Ok(g)
}

/// log Z, entropy and mean energy of the Gibbs state for `s`.
pub fn thermo(s: &Spectrum, p: &ThermoParams, tail: &TailPolicy) -> Result<ThermoReport> {
    if tail.cutoff_rule == CutoffRule::Auto {
        let g = s
            .generator()
            .ok_or_else(|| Error::domain("automatic cutoff needs a generated (circle or torus) spectrum"))?;
        let rebuilt = auto_cutoff(g, p, tail.threshold())?.build()?;
        let fixed = TailPolicy {
            cutoff_rule: CutoffRule::AsConstructed,
            ..*tail
        };
        return thermo(&rebuilt, p, &fixed);
    }
    let ys: Vec<(f64, f64)> = s
        .modes()
        .iter()
        .map(|m| (p.scaled_energy(m.lambda), m.multiplicity as f64))
        .collect();
    if p.stat == Statistics::Bose {
        if let Some(&(y, _)) = ys.iter().find(|(y, _)| !(*y > 0.0)) {
            return Err(Error::domain(format!(
                "bosonic Gibbs state needs positive one-particle energies, got beta*eps = {y}"
            )));
        }
    }
    let [log_z, entropy, beta_energy] = par_sum_map(&ys, |&(y, m)| per_mode(p.stat, y).map(|v| m * v));
    let mut tail_bound = 0.0;
    let mut cutoff_factor: f64 = 0.0;
    for g in s.tails() {
        tail_bound += g.tail_bound(p.beta, p.mu, p.stat, p.variant);
        cutoff_factor = cutoff_factor.max((-p.scaled_energy(g.n_max() as f64)).exp());
    }
    let threshold = tail.threshold();
    let reliable = cutoff_factor < threshold && tail_bound <= threshold * (1.0 + log_z.abs() + entropy);
    Ok(ThermoReport {
        log_z,
        entropy,
        energy: beta_energy / p.beta,
        modes_used: s.modes().len(),
        tail_bound,
        cutoff_factor,
        reliable,
    })
}

/// Entropy and energy as traces of the scaled kernels: S = Σ m·k(βλ) and
/// E = (1/β)Σ m·u(βλ), with the kernel argument matching the variant.
pub fn entropy_energy_via_kernels(s: &Spectrum, p: &ThermoParams) -> Result<(f64, f64)> {
    let scaled_mu = ChemicalPotential::new(p.beta * p.mu.value())?;
    let arg = |lambda: f64| match (p.variant, p.stat) {
        (Variant::LinearShift, Statistics::Bose) => p.beta.sqrt() * lambda.abs(),
        _ => p.beta * lambda,
    };
    let values: Vec<(f64, f64, f64)> = s
        .modes()
        .iter()
        .map(|m| {
            let x = arg(m.lambda);
            let ent = kernel_value(p.stat, Quantity::Entropy, p.variant, scaled_mu, x)?;
            let en = kernel_value(p.stat, Quantity::Energy, p.variant, scaled_mu, x)?;
            Ok((m.multiplicity as f64, ent, en))
        })
        .collect::<Result<_>>()?;
    let [entropy, beta_energy] = par_sum_map(&values, |&(m, e, u)| [m * e, m * u]);
    Ok((entropy, beta_energy / p.beta))
}
