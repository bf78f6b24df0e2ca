//! Per-mode entropy and energy kernels and the Laplace weights that
//! reproduce them as integrals ∫₀^∞ e^{-t·x²} w(t) dt.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::quad::integrate_to_infinity;
use crate::specfun::{QuadResult, QuadratureControl, SeriesControl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Statistics {
    Fermi,
    Bose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    Entropy,
    Energy,
}

/// Which one-particle Hamiltonian is second-quantized.
///
/// `SqrtShift` is ε(λ) = √(λ²+μ²) for both statistics. `LinearShift` is
/// ε(λ) = |λ| - μ for fermions and ε(λ) = λ² - μ for bosons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    SqrtShift,
    LinearShift,
}

macro_rules! tag_strings {
    ($ty:ident { $($var:ident => $name:literal $(| $alias:literal)*),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$var),+];

            pub fn name(self) -> &'static str {
                match self { $($ty::$var => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s.to_ascii_lowercase().as_str() {
                    $($name $(| $alias)* => Ok($ty::$var),)+
                    _ => Err(format!(
                        "unknown {} '{}' (expected one of: {})",
                        stringify!($ty).to_ascii_lowercase(),
                        s,
                        [$($name),+].join(", ")
                    )),
                }
            }
        }
    };
}

tag_strings!(Statistics { Fermi => "fermi", Bose => "bose" });
tag_strings!(Quantity { Entropy => "entropy", Energy => "energy" });
tag_strings!(Variant { SqrtShift => "sqrt" | "sqrtshift", LinearShift => "linear" | "linearshift" });

/// A chemical potential μ ≤ 0.
///
/// Positive values are rejected at construction. Statistics-specific rules
/// (bosons need μ < 0 almost everywhere) are checked by the operations.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ChemicalPotential(f64);

impl ChemicalPotential {
    pub fn new(mu: f64) -> Result<Self> {
        if mu.is_nan() || mu > 0.0 || mu.is_infinite() {
            return Err(Error::domain(format!(
                "chemical potential must be finite and non-positive, got {mu}"
            )));
        }
        Ok(Self(mu))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Fails unless μ < 0.
    pub fn require_negative(self, what: &str) -> Result<()> {
        if self.0 < 0.0 {
            Ok(())
        } else {
            Err(Error::domain(format!("{what} requires mu < 0, got {}", self.0)))
        }
    }
}

/// One-particle energy ε(λ) for the given Hamiltonian variant.
pub fn mode_energy(var: Variant, stat: Statistics, mu: ChemicalPotential, lambda: f64) -> f64 {
    let mu = mu.value();
    match (var, stat) {
        (Variant::SqrtShift, _) => lambda.hypot(mu),
        (Variant::LinearShift, Statistics::Fermi) => lambda.abs() - mu,
        (Variant::LinearShift, Statistics::Bose) => lambda * lambda - mu,
    }
}

/// Fermionic mean occupation times energy, y/(e^y+1).
#[inline]
pub fn fermi_energy_term(y: f64) -> f64 {
    if y > 0.0 {
        let e = (-y).exp();
        y * e / (1.0 + e)
    } else {
        y / (y.exp() + 1.0)
    }
}

/// Fermionic per-mode entropy y/(e^y+1) + log(1+e^{-y}).
#[inline]
pub fn fermi_entropy_term(y: f64) -> f64 {
    fermi_energy_term(y) + (-y).exp().ln_1p()
}

/// Bosonic mean occupation times energy, y/(e^y-1), for y > 0.
#[inline]
pub fn bose_energy_term(y: f64) -> f64 {
    y / y.exp_m1()
}

/// Bosonic per-mode entropy y/(e^y-1) - log(1-e^{-y}), for y > 0.
#[inline]
pub fn bose_entropy_term(y: f64) -> f64 {
    bose_energy_term(y) - (-(-y).exp_m1()).ln()
}

/// Per-mode kernel in units where β = 1: h_μ, u_μ, k_μ, p_μ and their
/// LinearShift counterparts h', u', k', p'. Every kernel is even in `x`.
pub fn kernel_value(stat: Statistics, qty: Quantity, var: Variant, mu: ChemicalPotential, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("kernel argument must be finite"));
    }
    let y = mode_energy(var, stat, mu, x);
    Ok(match (stat, qty) {
        (Statistics::Fermi, Quantity::Entropy) => fermi_entropy_term(y),
        (Statistics::Fermi, Quantity::Energy) => fermi_energy_term(y),
        (Statistics::Bose, q) => {
            if !(y > 0.0) {
                return Err(Error::domain(format!(
                    "bosonic kernel needs a positive one-particle energy, got {y} at x = {x}"
                )));
            }
            match q {
                Quantity::Entropy => bose_entropy_term(y),
                Quantity::Energy => bose_energy_term(y),
            }
        }
    })
}

// Below this t the small-t forms are used; both forms agree at the switch.
const WEIGHT_SWITCH: f64 = 0.25;
const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;

/// Which weight series to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum WeightForm {
    SmallT,
    LargeT,
}

fn sum_series<F: FnMut(usize) -> f64>(
    mut term: F,
    start: usize,
    ctl: &SeriesControl,
    what: &'static str,
) -> Result<f64> {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for n in start..start + ctl.max_terms {
        let t = term(n);
        sum += t;
        let mag = t.abs();
        if mag == 0.0 || (mag <= prev && ctl.converged(mag, sum)) {
            return Ok(sum);
        }
        prev = mag;
    }
    Err(Error::NoConvergence {
        what,
        limit: ctl.max_terms,
        residual: prev,
    })
}

/// Weight at μ = 0 for the given kernel, evaluated in the requested form.
pub(crate) fn weight_form(
    stat: Statistics,
    qty: Quantity,
    t: f64,
    mu2: f64,
    form: WeightForm,
    ctl: &SeriesControl,
) -> Result<f64> {
    let damp = -t * mu2;
    let lt = t.ln();
    match form {
        WeightForm::SmallT => {
            // every term is c_n t^{-5/2} e^{-n²/(4t)} e^{-tμ²}, built in log space
            let base = -2.5 * lt + damp;
            match (stat, qty) {
                (Statistics::Fermi, Quantity::Entropy) => sum_series(
                    |n| {
                        let nf = n as f64;
                        let s = if n % 2 == 1 { 1.0 } else { -1.0 };
                        s * (2.0 * nf.ln() - nf * nf / (4.0 * t) + base - LN_SQRT_PI - 4f64.ln()).exp()
                    },
                    1,
                    ctl,
                    "fermionic entropy weight",
                ),
                (Statistics::Fermi, Quantity::Energy) => sum_series(
                    |n| {
                        let nf = n as f64;
                        let s = if n % 2 == 1 { 1.0 } else { -1.0 };
                        let c = 0.25 * nf * nf - 0.5 * t;
                        s * c.signum() * (c.abs().ln() - nf * nf / (4.0 * t) + base - LN_SQRT_PI).exp()
                    },
                    1,
                    ctl,
                    "fermionic energy weight",
                ),
                (Statistics::Bose, Quantity::Entropy) => sum_series(
                    |n| {
                        let nf = n as f64;
                        (2.0 * nf.ln() - nf * nf / (4.0 * t) + base - LN_SQRT_PI - 4f64.ln()).exp()
                    },
                    1,
                    ctl,
                    "bosonic entropy weight",
                ),
                (Statistics::Bose, Quantity::Energy) => sum_series(
                    |n| {
                        let nf = n as f64;
                        let c = 0.25 * nf * nf - 0.5 * t;
                        c.signum() * (c.abs().ln() - nf * nf / (4.0 * t) + base - LN_SQRT_PI).exp()
                    },
                    1,
                    ctl,
                    "bosonic energy weight",
                ),
            }
        }
        WeightForm::LargeT => {
            let pi2 = PI * PI;
            let e = damp.exp();
            match (stat, qty) {
                (Statistics::Fermi, Quantity::Entropy) => {
                    let s = sum_series(
                        |m| {
                            let k = (2 * m + 1) as f64;
                            (2.0 * pi2 * k * k * t - 1.0) * (-pi2 * k * k * t).exp()
                        },
                        0,
                        ctl,
                        "fermionic entropy weight",
                    )?;
                    Ok(e * s / t)
                }
                (Statistics::Fermi, Quantity::Energy) => {
                    let s = sum_series(
                        |m| {
                            let k = (2 * m + 1) as f64;
                            k * k * (-pi2 * k * k * t).exp()
                        },
                        0,
                        ctl,
                        "fermionic energy weight",
                    )?;
                    Ok(e * (2.0 * pi2 * s - t.powf(-1.5) / (4.0 * PI.sqrt())))
                }
                (Statistics::Bose, Quantity::Entropy) => {
                    let s = sum_series(
                        |n| {
                            let nf = n as f64;
                            (8.0 * pi2 * nf * nf * t - 1.0) * (-4.0 * pi2 * nf * nf * t).exp()
                        },
                        1,
                        ctl,
                        "bosonic entropy weight",
                    )?;
                    Ok(e * (1.0 - 2.0 * s) / (2.0 * t))
                }
                (Statistics::Bose, Quantity::Energy) => {
                    let s = sum_series(
                        |n| {
                            let nf = n as f64;
                            nf * nf * (-4.0 * pi2 * nf * nf * t).exp()
                        },
                        1,
                        ctl,
                        "bosonic energy weight",
                    )?;
                    Ok(e * (t.powf(-1.5) / (4.0 * PI.sqrt()) - 8.0 * pi2 * s))
                }
            }
        }
    }
}

/// Laplace weight w with kernel(√(x²+μ²)) = ∫₀^∞ e^{-t x²} w(t) dt.
///
/// The four weights are g̃_μ, r_μ, the bosonic entropy weight and s_μ. Each
/// carries the factor e^{-tμ²}. The bosonic energy weight is refused at
/// μ = 0, and every weight vanishes identically below t = 1e-8.
pub fn laplace_weight(
    stat: Statistics,
    qty: Quantity,
    mu: ChemicalPotential,
    t: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("laplace weight needs t > 0, got {t}")));
    }
    if stat == Statistics::Bose && qty == Quantity::Energy {
        mu.require_negative("the bosonic energy weight")?;
    }
    if t < 1e-8 {
        return Ok(0.0);
    }
    let form = if t < WEIGHT_SWITCH {
        WeightForm::SmallT
    } else {
        WeightForm::LargeT
    };
    let m = mu.value();
    weight_form(stat, qty, t, m * m, form, ctl)
}

/// The profile f(t) = 2t·f̃(t) of the bosonic entropy, where f̃ is the
/// bosonic entropy weight with the opposite sign convention. f tends to -1
/// as t → ∞ and vanishes faster than any power as t → 0⁺.
pub fn bose_entropy_profile(t: f64, ctl: &SeriesControl) -> Result<f64> {
    let w = laplace_weight(Statistics::Bose, Quantity::Entropy, ChemicalPotential(0.0), t, ctl)?;
    Ok(-2.0 * t * w)
}

/// Evaluates ∫₀^∞ e^{-t·arg} w_μ(t) dt numerically; a test oracle for
/// [`kernel_value`].
///
/// SqrtShift kernels use arg = x². LinearShift kernels use arg = y² - μ² with
/// y = ε(x), which reproduces kernel(y) with the same μ-weight and so never
/// needs the bosonic energy weight at μ = 0.
pub fn laplace_reconstruct(
    stat: Statistics,
    qty: Quantity,
    var: Variant,
    mu: ChemicalPotential,
    x: f64,
    qctl: &QuadratureControl,
    sctl: &SeriesControl,
) -> Result<f64> {
    if var == Variant::LinearShift {
        mu.require_negative("LinearShift reconstruction")?;
    }
    if stat == Statistics::Bose && qty == Quantity::Energy {
        mu.require_negative("the bosonic energy weight")?;
    }
    let y = mode_energy(var, stat, mu, x);
    if stat == Statistics::Bose && !(y > 0.0) {
        return Err(Error::domain(format!(
            "bosonic kernel needs a positive one-particle energy, got {y} at x = {x}"
        )));
    }
    let m = mu.value();
    let arg = match var {
        Variant::SqrtShift => x * x,
        Variant::LinearShift => ((y - m) * (y + m)).max(0.0),
    };
    let r = integrate_against_weight(stat, qty, mu, |t| (-t * arg).exp(), qctl, sctl)?;
    Ok(r.value)
}

/// ∫₀^∞ g(t) w_μ(t) dt for the Laplace weight of (stat, qty), split at t = 1
/// with t = 1/w beyond it. Weight failures abort the integral.
pub fn integrate_against_weight<G: Fn(f64) -> f64>(
    stat: Statistics,
    qty: Quantity,
    mu: ChemicalPotential,
    g: G,
    qctl: &QuadratureControl,
    sctl: &SeriesControl,
) -> Result<QuadResult> {
    let failure = RefCell::new(None);
    let integrand = |t: f64| {
        if t < 1e-8 {
            return 0.0;
        }
        match laplace_weight(stat, qty, mu, t, sctl) {
            Ok(w) => {
                if w == 0.0 {
                    0.0
                } else {
                    g(t) * w
                }
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let ctl = QuadratureControl {
        domain_split: 1.0,
        ..*qctl
    };
    let r = integrate_to_infinity(integrand, 0.0, &ctl);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    r
}
