use std::f64::consts::{LN_2, PI};

use super::gamma::{ln_gamma, sin_pi};
use super::SeriesControl;
use crate::error::{Error, Result};

const BORWEIN_RATE: f64 = 5.828_427_124_746_19; // 3 + √8

/// Dirichlet eta function η(s) = Σ (-1)^{k} (k+1)^{-s} for s > 0, via
/// Borwein's accelerated alternating series. The error after n terms is at
/// most 3 / (3+√8)^n.
pub fn eta(s: f64, ctl: &SeriesControl) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain(format!("eta series needs s > 0, got {s}")));
    }
    // |η(s)| ≥ 1/2 for s > 0, so a relative target maps to an absolute one
    let target = ctl.abs_tol.max(0.5 * ctl.rel_tol).max(1e-17);
    let n = ((3.0 / target).ln() / BORWEIN_RATE.ln()).ceil().max(1.0) as usize;
    if n > ctl.max_terms {
        return Err(Error::NoConvergence {
            what: "eta series",
            limit: ctl.max_terms,
            residual: 3.0 / BORWEIN_RATE.powi(ctl.max_terms as i32),
        });
    }
    Ok(borwein_eta(s, n))
}

fn borwein_eta(s: f64, n: usize) -> f64 {
    let nf = n as f64;
    let mut d = Vec::with_capacity(n + 1);
    let mut term = 1.0;
    let mut acc = 1.0;
    d.push(acc);
    for i in 1..=n {
        let fi = i as f64;
        term *= 4.0 * (nf + fi - 1.0) * (nf - fi + 1.0) / ((2.0 * fi) * (2.0 * fi - 1.0));
        acc += term;
        d.push(acc);
    }
    let dn = d[n];
    let mut sum = 0.0;
    for k in (0..n).rev() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (d[k] - dn) / ((k + 1) as f64).powf(s);
    }
    -sum / dn
}

/// Riemann ζ(s) for real s ≠ 1.
///
/// Positive s uses the accelerated eta series, negative s the functional
/// equation. Arguments within 1e-6 of the pole are rejected.
pub fn riemann_zeta(s: f64, ctl: &SeriesControl) -> Result<f64> {
    if s.is_nan() {
        return Err(Error::domain("zeta of NaN"));
    }
    if (s - 1.0).abs() < 1e-6 {
        return Err(Error::Pole {
            func: "riemann_zeta",
            at: s,
        });
    }
    if s == 0.0 {
        return Ok(-0.5);
    }
    if s > 0.0 {
        let denom = -((1.0 - s) * LN_2).exp_m1();
        return Ok(eta(s, ctl)? / denom);
    }
    if s == s.trunc() && (s as i64) % 2 == 0 {
        return Ok(0.0);
    }
    // ζ(s) = 2^s π^{s-1} sin(πs/2) Γ(1-s) ζ(1-s)
    let reflected = riemann_zeta(1.0 - s, ctl)?;
    let (lg, sg) = ln_gamma(1.0 - s)?;
    let sn = sin_pi(0.5 * s);
    let log_mag = s * LN_2 + (s - 1.0) * PI.ln() + sn.abs().ln() + lg + reflected.ln();
    Ok(sn.signum() * sg * log_mag.exp())
}

/// The entire function (s-1)ζ(s), evaluated for s > 0 without forming the
/// pole explicitly.
pub fn xi_s_minus_one_zeta(s: f64, ctl: &SeriesControl) -> Result<f64> {
    let d = (1.0 - s) * LN_2;
    let ratio = if d == 0.0 { 1.0 } else { d / d.exp_m1() };
    Ok(eta(s, ctl)? * ratio / LN_2)
}

/// Riemann ξ(s) = s(s-1)/2 · π^{-s/2} Γ(s/2) ζ(s).
///
/// The removable singularities at s = 0, 1 and at the trivial zeros are
/// cancelled analytically: for s ≥ 1/2 we use π^{-s/2} Γ(s/2+1) (s-1)ζ(s),
/// and below 1/2 the symmetry ξ(s) = ξ(1-s).
pub fn riemann_xi(s: f64) -> f64 {
    if s < 0.5 {
        return riemann_xi(1.0 - s);
    }
    let ctl = SeriesControl::default();
    let szeta = xi_s_minus_one_zeta(s, &ctl).expect("eta series converges for s >= 1/2");
    let (lg, _) = ln_gamma(0.5 * s + 1.0).expect("no gamma pole for s >= 1/2");
    (lg - 0.5 * s * PI.ln()).exp() * szeta
}

/// ln ξ(s); ξ is positive on the whole real line.
pub fn ln_riemann_xi(s: f64) -> f64 {
    if s < 0.5 {
        return ln_riemann_xi(1.0 - s);
    }
    let ctl = SeriesControl::default();
    let szeta = xi_s_minus_one_zeta(s, &ctl).expect("eta series converges for s >= 1/2");
    let (lg, _) = ln_gamma(0.5 * s + 1.0).expect("no gamma pole for s >= 1/2");
    lg - 0.5 * s * PI.ln() + szeta.ln()
}

// B_{2j} for j = 1..=15
const BERNOULLI_EVEN: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// Hurwitz ζ(p, q) = Σ_{k≥0} (q+k)^{-p} for q > 0 and real p ≠ 1, including
/// its analytic continuation to p < 1, via Euler–Maclaurin summation.
///
/// Returns the value together with the magnitude of the last correction
/// term, which bounds the truncation error.
pub fn hurwitz_zeta(p: f64, q: f64) -> Result<(f64, f64)> {
    if !(q > 0.0) {
        return Err(Error::domain(format!("hurwitz zeta needs q > 0, got {q}")));
    }
    if p == 1.0 {
        return Err(Error::Pole {
            func: "hurwitz_zeta",
            at: p,
        });
    }
    let shift = (15.0_f64.max(p.abs() + 15.0) - q).ceil().max(0.0) as usize;
    let mut sum = 0.0;
    for k in (0..shift).rev() {
        sum += (q + k as f64).powf(-p);
    }
    let big_q = q + shift as f64;
    let q_pow = big_q.powf(-p);
    sum += big_q * q_pow / (p - 1.0) + 0.5 * q_pow;
    // Σ B_{2j}/(2j)! · p(p+1)…(p+2j-2) · Q^{1-p-2j}
    let inv_q2 = 1.0 / (big_q * big_q);
    let mut rising = p;
    let mut qp = q_pow / big_q;
    let mut fact = 2.0;
    let mut last = 0.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * qp;
        sum += term;
        last = term.abs();
        if rising == 0.0 || last <= 1e-18 * sum.abs() {
            break;
        }
        let jj = (j + 1) as f64;
        rising *= (p + 2.0 * jj - 1.0) * (p + 2.0 * jj);
        qp *= inv_q2;
        fact *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
    }
    Ok((sum, last + 4.0 * f64::EPSILON * sum.abs()))
}
