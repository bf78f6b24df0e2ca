use super::quad::{integrate_panels, QuadResult, QuadratureControl};
use crate::error::{Error, Result};

/// e^z K_ν(z) for real ν and z > 0.
///
/// Integrates e^{-z(cosh t - 1)} cosh(νt) over [0, T], where T is placed past
/// the integrand's peak at t* = asinh(|ν|/z) far enough that the log of the
/// integrand has dropped by ln(1/rel_tol) plus a safety margin.
pub fn bessel_k_scaled(nu: f64, z: f64, ctl: &QuadratureControl) -> Result<QuadResult> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("bessel_k needs z > 0, got {z}")));
    }
    if !nu.is_finite() {
        return Err(Error::domain("bessel_k needs a finite order"));
    }
    let nu = nu.abs();
    // φ(t) = νt - z(cosh t - 1), with cosh t - 1 = 2 sinh²(t/2)
    let phi = |t: f64| {
        let s = (0.5 * t).sinh();
        nu * t - 2.0 * z * s * s
    };
    let t_peak = (nu / z).asinh();
    let phi_max = phi(t_peak);
    let drop = (1.0 / ctl.rel_tol.max(1e-17)).ln() + 12.0;
    let level = phi_max - drop;
    let mut hi = t_peak + 1.0;
    while phi(hi) > level {
        hi = t_peak + 2.0 * (hi - t_peak);
    }
    let mut lo = t_peak;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let cutoff = hi;

    let integrand = |t: f64| {
        let s = (0.5 * t).sinh();
        let base = -2.0 * z * s * s - phi_max;
        0.5 * ((nu * t + base).exp() + (-nu * t + base).exp())
    };
    let mut breaks: Vec<f64> = (0..=12).map(|i| cutoff * i as f64 / 12.0).collect();
    if t_peak > 0.0 && t_peak < cutoff {
        breaks.push(t_peak);
        breaks.sort_by(f64::total_cmp);
    }
    let inner = QuadratureControl {
        abs_tol: 1e-300,
        ..*ctl
    };
    let r = integrate_panels(integrand, &breaks, &inner)?;
    let scale = phi_max.exp();
    Ok(QuadResult {
        value: r.value * scale,
        est_error: r.est_error * scale,
        intervals: r.intervals,
    })
}

/// Modified Bessel function of the second kind K_ν(z) for real ν, z > 0.
pub fn bessel_k(nu: f64, z: f64, ctl: &QuadratureControl) -> Result<f64> {
    Ok(bessel_k_scaled(nu, z, ctl)?.value * (-z).exp())
}
