use std::f64::consts::{LN_2, PI};

use super::{ln_limit_coeff, near_half_integer_at_most, CoeffKind, CoeffResult, Representation};
use crate::error::{Error, Result};
use crate::kernels::{integrate_against_weight, ChemicalPotential, Quantity, Statistics};
use crate::specfun::{
    bessel_k_scaled, gamma_fn, hurwitz_zeta, ln_gamma, riemann_zeta, QuadratureControl, SeriesControl,
};

const EPS: f64 = f64::EPSILON;

fn alternating(kind: CoeffKind) -> bool {
    kind.statistics() == Statistics::Fermi
}

fn bessel_prefactor(kind: CoeffKind, a: f64, m: f64) -> f64 {
    let p = if kind.is_energy() { 0.5 - a } else { 1.5 - a };
    2f64.powf(0.5 - a) * m.powf(p) / PI.sqrt()
}

// n-th summand of the Bessel series without the prefactor, with its
// relative error from the K quadratures
fn bessel_summand(kind: CoeffKind, a: f64, m: f64, n: usize, qctl: &QuadratureControl) -> Result<(f64, f64)> {
    let nf = n as f64;
    let z = nf * m;
    let sign = if alternating(kind) && n.is_multiple_of(2) {
        -1.0
    } else {
        1.0
    };
    let decay = (-z).exp();
    if decay == 0.0 {
        return Ok((0.0, 0.0));
    }
    if kind.is_energy() {
        let k1 = bessel_k_scaled(-a - 0.5, z, qctl)?;
        let k2 = bessel_k_scaled(0.5 - a, z, qctl)?;
        let p1 = nf.powf(a + 0.5) * m * k1.value;
        let p2 = 2.0 * a * nf.powf(a - 0.5) * k2.value;
        let err = (nf.powf(a + 0.5) * m * k1.est_error + (2.0 * a * nf.powf(a - 0.5)).abs() * k2.est_error) * decay;
        Ok((
            sign * (p1 - p2) * decay,
            err + 4.0 * EPS * (p1.abs() + p2.abs()) * decay,
        ))
    } else {
        let k = bessel_k_scaled(1.5 - a, z, qctl)?;
        let w = nf.powf(a + 0.5);
        Ok((sign * w * k.value * decay, w * k.est_error * decay))
    }
}

/// The first `count` summands of the Bessel series for C_μ(a), prefactor
/// included. The fermionic and bosonic series differ only by (-1)^{n+1}.
pub fn bessel_series_terms(
    kind: CoeffKind,
    a: f64,
    mu: ChemicalPotential,
    count: usize,
    qctl: &QuadratureControl,
) -> Result<Vec<f64>> {
    mu.require_negative("the Bessel series")?;
    let m = mu.value().abs();
    let pref = bessel_prefactor(kind, a, m);
    (1..=count)
        .map(|n| Ok(pref * bessel_summand(kind, a, m, n, qctl)?.0))
        .collect()
}

pub(super) fn bessel(
    kind: CoeffKind,
    a: f64,
    m: f64,
    sctl: &SeriesControl,
    qctl: &QuadratureControl,
) -> Result<CoeffResult> {
    let pref = bessel_prefactor(kind, a, m);
    let growth = a.abs() + 2.0;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut kerr = 0.0;
    for n in 1..=sctl.max_terms {
        let (t, e) = bessel_summand(kind, a, m, n, qctl)?;
        sum += t;
        abs_sum += t.abs();
        kerr += e;
        let nf = n as f64;
        // terms behave like n^p e^{-nm}; once past the peak the tail is
        // bounded by a geometric series with this ratio
        let q = (-m).exp() * (1.0 + 1.0 / nf).powf(growth);
        let past_peak = nf * m > growth;
        let tail = if t == 0.0 {
            0.0
        } else if past_peak && q < 1.0 {
            t.abs() * q / (1.0 - q)
        } else {
            f64::INFINITY
        };
        if (pref * tail).abs() <= sctl.target(pref * sum) {
            let est = pref.abs() * (tail + kerr + 4.0 * EPS * abs_sum * (n as f64).sqrt());
            return Ok(CoeffResult {
                value: pref * sum,
                rep: Representation::BesselSeries,
                est_error: est,
                terms_used: n,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "Bessel coefficient series",
        limit: sctl.max_terms,
        residual: f64::NAN,
    })
}

/// Which integers m enter the lattice sum Σ_m (m²π² + μ²)^{-s}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// all odd m (fermions)
    Odd,
    /// all even m, including m = 0 (bosons)
    Even,
}

/// Analytically continued lattice sum S(s) = Σ_m (m²π² + μ²)^{-s} over the
/// integers of the given parity, both signs included.
///
/// Terms with |m| ≤ M are summed directly. Beyond M the summand is expanded
/// binomially in μ²/(mπ)², and each power of m is summed by a Hurwitz ζ
/// value. This continues S to every s with poles only at s = 1/2 - j.
/// Returns the value and an error estimate.
pub fn lattice_sum(s: f64, m: f64, parity: Parity) -> Result<(f64, f64)> {
    if m == 0.0 && parity == Parity::Even {
        return Err(Error::domain("the even lattice sum needs mu != 0"));
    }
    let pi2 = PI * PI;
    let mu2 = m * m;
    let first = match parity {
        Parity::Odd => 1,
        Parity::Even => 2,
    };
    // the binomial expansion of the tail converges geometrically with ratio
    // (μ/nπ)² ≤ 1/4; keeping the direct part short avoids cancellation
    // against the continued tail when s < 0
    let mut next = first;
    while (next as f64) * PI < 2.0 * m {
        next += 2;
    }
    let mut direct = 0.0;
    let mut abs_direct = 0.0;
    for k in (first..next).step_by(2).rev() {
        let v = 2.0 * ((k * k) as f64 * pi2 + mu2).powf(-s);
        direct += v;
        abs_direct += v.abs();
    }
    if parity == Parity::Even {
        let v = mu2.powf(-s);
        direct += v;
        abs_direct += v.abs();
    }
    let mut tail = 0.0;
    let mut tail_err = 0.0;
    let mut abs_tail = 0.0;
    let mut binom = 1.0;
    let mut mu_pow = 1.0;
    for j in 0..400 {
        let jf = j as f64;
        if j > 0 {
            binom *= (-s - jf + 1.0) / jf;
            mu_pow *= mu2;
        }
        if binom == 0.0 || (j > 0 && mu_pow == 0.0) {
            break;
        }
        let p = 2.0 * s + 2.0 * jf;
        let (hz, hz_err) = parity_power_tail(p, next, parity)?;
        let scale = binom * mu_pow * PI.powf(-p);
        let term = 2.0 * scale * hz;
        tail += term;
        abs_tail += term.abs();
        tail_err += 2.0 * (scale * hz_err).abs();
        // for p ≤ 1 the ζ factor may vanish or change sign, so only judge
        // convergence once the terms are monotone
        if p > 1.0 && term.abs() <= 1e-17 * (abs_direct + abs_tail).max(1e-300) {
            tail_err += term.abs();
            break;
        }
        if j == 399 {
            return Err(Error::NoConvergence {
                what: "lattice tail expansion",
                limit: 400,
                residual: term.abs(),
            });
        }
    }
    let value = direct + tail;
    let err = tail_err + 4.0 * EPS * (abs_direct + abs_tail);
    Ok((value, err))
}

// Σ n^{-p} over n ≥ next of the given parity
fn parity_power_tail(p: f64, next: usize, parity: Parity) -> Result<(f64, f64)> {
    if p > 0.0 {
        // n = 2(i + next/2)
        let (z, e) = hurwitz_zeta(p, next as f64 / 2.0)?;
        let scale = 2f64.powf(-p);
        return Ok((scale * z, scale * e));
    }
    // the shifted Euler-Maclaurin sum cancels badly for p < 0, so go
    // through the continued Riemann ζ and subtract the few head terms
    let zeta = riemann_zeta(p, &SeriesControl::default())?;
    let full = match parity {
        Parity::Odd => -(-p * LN_2).exp_m1() * zeta,
        Parity::Even => 2f64.powf(-p) * zeta,
    };
    let first = match parity {
        Parity::Odd => 1,
        Parity::Even => 2,
    };
    let mut head = 0.0;
    let mut abs_head = 0.0;
    for n in (first..next).step_by(2) {
        let v = (n as f64).powf(-p);
        head += v;
        abs_head += v;
    }
    let value = full - head;
    Ok((value, 8.0 * EPS * (full.abs() + abs_head)))
}

pub(super) fn poisson_is_singular(a: f64) -> bool {
    near_half_integer_at_most(a, 0.5, 0.5)
}

pub(super) fn xi_is_singular(kind: CoeffKind, a: f64) -> bool {
    match kind {
        CoeffKind::GammaFermiEntropy => false,
        CoeffKind::ChiBoseEntropy => near_half_integer_at_most(a, 0.0, 1.0),
        CoeffKind::OmegaFermiEnergy | CoeffKind::KappaBoseEnergy => near_half_integer_at_most(a, 0.5, 1.0),
    }
}

// ±|μ|^{1-2a} Γ(a-1/2)/(4√π), the non-lattice piece of ω_μ and κ_μ
fn energy_offset(a: f64, m: f64) -> Result<f64> {
    if m == 0.0 {
        if a < 0.5 {
            return Ok(0.0);
        }
        return Err(Error::domain(format!(
            "the energy coefficient diverges at mu = 0 for a >= 1/2 (a = {a})"
        )));
    }
    Ok(m.powf(1.0 - 2.0 * a) * gamma_fn(a - 0.5)? / (4.0 * PI.sqrt()))
}

pub(super) fn poisson(kind: CoeffKind, a: f64, m: f64, _sctl: &SeriesControl) -> Result<CoeffResult> {
    let parity = match kind.statistics() {
        Statistics::Fermi => Parity::Odd,
        Statistics::Bose => Parity::Even,
    };
    let mu2 = m * m;
    let (s0, e0) = lattice_sum(a, m, parity)?;
    let (s1, e1) = if mu2 == 0.0 {
        (0.0, 0.0)
    } else {
        lattice_sum(a + 1.0, m, parity)?
    };
    let sign = if alternating(kind) { 1.0 } else { -1.0 };
    let (value, pieces, trunc) = if kind.is_energy() {
        let g = gamma_fn(a + 1.0)?;
        let off = energy_offset(a, m)?;
        let p1 = g * s0;
        let p2 = g * mu2 * s1;
        let v = sign * (p1 - p2 - off);
        (v, p1.abs() + p2.abs() + off.abs(), g.abs() * (e0 + mu2 * e1))
    } else {
        let g = 0.5 * gamma_fn(a)?;
        let p1 = g * (2.0 * a - 1.0) * s0;
        let p2 = g * 2.0 * a * mu2 * s1;
        let v = sign * (p1 - p2);
        (
            v,
            p1.abs() + p2.abs(),
            g.abs() * ((2.0 * a - 1.0).abs() * e0 + (2.0 * a * mu2).abs() * e1),
        )
    };
    Ok(CoeffResult {
        value,
        rep: Representation::PoissonSeries,
        est_error: trunc + 8.0 * EPS * pieces,
        terms_used: 0,
    })
}

pub(super) fn xi_series(kind: CoeffKind, a: f64, m: f64, sctl: &SeriesControl) -> Result<CoeffResult> {
    let offset = match kind {
        CoeffKind::GammaFermiEntropy => 0.0,
        CoeffKind::OmegaFermiEnergy => -energy_offset(a, m)?,
        CoeffKind::KappaBoseEnergy => energy_offset(a, m)?,
        CoeffKind::ChiBoseEntropy => 0.5 * gamma_fn(a)? * m.powf(-2.0 * a),
    };
    // γ, ω carry (-1)^k; χ, κ carry (-1)^{k+1}
    let lead = if alternating(kind) { 1.0 } else { -1.0 };
    let ln_m2 = 2.0 * m.ln();
    let mut sum = 0.0;
    let mut abs_sum = offset.abs();
    let mut prev = f64::INFINITY;
    let mut settled = 0;
    for k in 0..sctl.max_terms {
        let kf = k as f64;
        let (lc, sc) = ln_limit_coeff(kind, a + kf)?;
        let sign = lead * sc * if k % 2 == 0 { 1.0 } else { -1.0 };
        let term = if k == 0 {
            sign * lc.exp()
        } else {
            sign * (lc + kf * ln_m2 - ln_gamma(kf + 1.0)?.0).exp()
        };
        sum += term;
        abs_sum += term.abs();
        let mag = term.abs();
        // individual terms can vanish where the limit function has a zero,
        // so ask for two quiet terms in a row past the peak
        if m == 0.0 || (kf >= m * m && mag <= prev.max(mag) && sctl.converged(mag, sum + offset)) {
            settled += 1;
        } else {
            settled = 0;
        }
        if m == 0.0 || settled == 2 {
            return Ok(CoeffResult {
                value: sum + offset,
                rep: Representation::XiSeries,
                est_error: 2.0 * (mag + prev.min(mag.max(prev))) + 8.0 * EPS * abs_sum,
                terms_used: k + 1,
            });
        }
        prev = mag;
    }
    Err(Error::NoConvergence {
        what: "xi coefficient series",
        limit: sctl.max_terms,
        residual: prev,
    })
}

pub(super) fn weight_quadrature(
    kind: CoeffKind,
    a: f64,
    mu: ChemicalPotential,
    sctl: &SeriesControl,
    qctl: &QuadratureControl,
) -> Result<CoeffResult> {
    if mu.value() == 0.0 && kind == CoeffKind::OmegaFermiEnergy && a >= 0.5 {
        return Err(Error::domain(format!(
            "weight integral for omega at mu = 0 diverges for a >= 1/2 (a = {a})"
        )));
    }
    let stat = kind.statistics();
    let qty: Quantity = kind.quantity();
    let r = integrate_against_weight(stat, qty, mu, |t| t.powf(a), qctl, sctl)?;
    Ok(CoeffResult {
        value: r.value,
        rep: Representation::Quadrature,
        est_error: r.est_error,
        terms_used: r.intervals,
    })
}
