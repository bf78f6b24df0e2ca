use std::f64::consts::PI;

use super::SeriesControl;
use crate::error::{Error, Result};

// θ(t) and θ'(t) from the direct series, intended for t ≥ 1
fn direct(t: f64, ctl: &SeriesControl) -> Result<(f64, f64)> {
    let mut sum = 0.0;
    let mut dsum = 0.0;
    for n in 1..=ctl.max_terms {
        let n2 = (n * n) as f64;
        let e = (-PI * n2 * t).exp();
        sum += e;
        dsum += n2 * e;
        if e == 0.0 || (ctl.converged(e, 1.0 + 2.0 * sum) && ctl.converged(n2 * e, dsum)) {
            return Ok((1.0 + 2.0 * sum, -2.0 * PI * dsum));
        }
    }
    Err(Error::NoConvergence {
        what: "theta series",
        limit: ctl.max_terms,
        residual: (-PI * (ctl.max_terms as f64).powi(2) * t).exp(),
    })
}

fn both(t: f64, ctl: &SeriesControl) -> Result<(f64, f64)> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("theta needs t > 0, got {t}")));
    }
    if t >= 1.0 {
        return direct(t, ctl);
    }
    // Jacobi inversion θ(t) = t^{-1/2} θ(1/t), differentiated term by term
    let u = 1.0 / t;
    let (th, dth) = direct(u, ctl)?;
    let value = u.sqrt() * th;
    let deriv = -0.5 * u * u.sqrt() * th - u * u * u.sqrt() * dth;
    Ok((value, deriv))
}

/// Jacobi theta function θ(t) = Σ_{n∈Z} e^{-πn²t}.
pub fn theta(t: f64, ctl: &SeriesControl) -> Result<f64> {
    Ok(both(t, ctl)?.0)
}

/// dθ/dt, computed from the same series as [`theta`].
pub fn theta_prime(t: f64, ctl: &SeriesControl) -> Result<f64> {
    Ok(both(t, ctl)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn large_t_limit() {
        assert!((theta(1e6, &SeriesControl::default()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inversion_residual() {
        let c = SeriesControl::default();
        for t in [0.1, 0.5, 2.0, 10.0] {
            let lhs = theta(t, &c).unwrap();
            let rhs = theta(1.0 / t, &c).unwrap() / t.sqrt();
            assert!((lhs - rhs).abs() < 1e-12 * lhs);
        }
        assert_relative_eq!(
            theta(0.25, &c).unwrap(),
            2.0 * theta(4.0, &c).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn partial_sums_at_one() {
        let c = SeriesControl::default();
        let expect = 1.0 + 2.0 * ((-PI).exp() + (-4.0 * PI).exp() + (-9.0 * PI).exp());
        assert_relative_eq!(theta(1.0, &c).unwrap(), expect, max_relative = 1e-15);
    }

    #[test]
    fn derivative_against_difference_quotient() {
        let c = SeriesControl::default();
        for t in [0.05, 0.3, 0.999, 1.0, 3.0] {
            let h = 1e-5 * t;
            let fd = (theta(t + h, &c).unwrap() - theta(t - h, &c).unwrap()) / (2.0 * h);
            let d = theta_prime(t, &c).unwrap();
            assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()), "t={t}: {fd} vs {d}");
        }
    }
}
