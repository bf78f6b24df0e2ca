//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance policy for adaptive integration.
///
/// Improper integrals over `[a, ∞)` are split at `domain_split`; the part
/// beyond it is mapped onto a finite interval with `t = 1/w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub domain_split: f64,
}

impl QuadratureControl {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize, domain_split: f64) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions must be at least 1"));
        }
        if !(domain_split > 0.0) || !domain_split.is_finite() {
            return Err(Error::domain("domain_split must be positive and finite"));
        }
        Ok(Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
            domain_split,
        })
    }
}

impl Default for QuadratureControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 1e-300,
            max_subdivisions: 4000,
            domain_split: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub est_error: f64,
    pub intervals: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    // the estimate is the rounding floor, so bisection cannot improve it
    at_floor: bool,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    // largest error first, ties broken by position so the order is total
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * h;
    if !value.is_finite() {
        return Err(Error::domain(format!("non-finite integrand on [{a:e}, {b:e}]")));
    }
    let roundoff = 50.0 * f64::EPSILON * abs_sum * h.abs();
    let diff = ((kron - gauss) * h).abs();
    Ok(Segment {
        a,
        b,
        value,
        error: diff.max(roundoff),
        at_floor: diff <= roundoff,
    })
}

/// Integrates `f` over `[a, b]`, starting from the panels given by
/// `breakpoints` (which must include both endpoints, in increasing order).
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], ctl: &QuadratureControl) -> Result<QuadResult> {
    if breakpoints.len() < 2 {
        return Err(Error::domain("need at least two breakpoints"));
    }
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&f, w[0], w[1])?);
        }
    }
    let mut count = heap.len();
    let (mut value, mut error) = totals(&heap);
    loop {
        if error <= ctl.abs_tol.max(ctl.rel_tol * value.abs()) {
            // re-sum in position order so the value is independent of history
            let (value, error) = totals(&heap);
            return Ok(QuadResult {
                value,
                est_error: error,
                intervals: count,
            });
        }
        if count >= ctl.max_subdivisions {
            return Err(Error::NoConvergence {
                what: "adaptive quadrature",
                limit: ctl.max_subdivisions,
                residual: error,
            });
        }
        if heap.peek().is_some_and(|w| w.at_floor) {
            // every remaining segment is limited by rounding in the
            // integrand, which happens when the integral cancels
            let (value, error) = totals(&heap);
            return Ok(QuadResult {
                value,
                est_error: error,
                intervals: count,
            });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::NoConvergence {
                what: "adaptive quadrature (interval underflow)",
                limit: count,
                residual: error,
            });
        }
        let left = gk15(&f, worst.a, mid)?;
        let right = gk15(&f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error = (error + left.error + right.error - worst.error).max(0.0);
        heap.push(left);
        heap.push(right);
        count += 1;
        if count % 64 == 0 {
            // refresh to stop the running totals from drifting
            (value, error) = totals(&heap);
        }
    }
}

fn totals(heap: &BinaryHeap<Segment>) -> (f64, f64) {
    // sum in position order so the result does not depend on heap layout
    let mut segs: Vec<&Segment> = heap.iter().collect();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    segs.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, ctl: &QuadratureControl) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            est_error: 0.0,
            intervals: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, ctl)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    integrate_panels(f, &[a, b], ctl)
}

/// Integrates `f` over `[a, ∞)` with `a ≥ 0`.
///
/// The piece `[a, split]` is integrated directly and `[split, ∞)` after the
/// change of variables `t = 1/w`, so `f` is never evaluated at infinity.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, ctl: &QuadratureControl) -> Result<QuadResult> {
    let split = ctl.domain_split.max(a);
    let head = integrate(&f, a, split, ctl)?;
    let mapped = |w: f64| {
        let t = 1.0 / w;
        let v = f(t);
        if v == 0.0 {
            0.0
        } else {
            v * t * t
        }
    };
    let tail = integrate(mapped, 0.0, 1.0 / split, ctl)?;
    Ok(QuadResult {
        value: head.value + tail.value,
        est_error: head.est_error + tail.est_error,
        intervals: head.intervals + tail.intervals,
    })
}

/// Integrates `f(x) x^p` over `(0, 1]` for `p > -1`, using `x = u^{1/(p+1)}`
/// so that the integrable endpoint singularity disappears.
pub fn integrate_power_head<F: Fn(f64) -> f64>(f: F, p: f64, ctl: &QuadratureControl) -> Result<QuadResult> {
    if !(p > -1.0) {
        return Err(Error::domain(format!("x^{p} is not integrable at 0")));
    }
    let q = 1.0 / (p + 1.0);
    let r = integrate(|u: f64| f(u.powf(q)), 0.0, 1.0, ctl)?;
    Ok(QuadResult {
        value: r.value * q,
        est_error: r.est_error * q,
        intervals: r.intervals,
    })
}

/// Integrates `f(x) x^p` over `(0, ∞)` for `p > -1`; `f` must decay fast
/// enough at infinity.
pub fn integrate_power_weighted<F: Fn(f64) -> f64>(f: F, p: f64, ctl: &QuadratureControl) -> Result<QuadResult> {
    let head = integrate_power_head(&f, p, ctl)?;
    let tail_ctl = QuadratureControl {
        domain_split: 1.0,
        ..*ctl
    };
    let tail = integrate_to_infinity(|x: f64| f(x) * x.powf(p), 1.0, &tail_ctl)?;
    Ok(QuadResult {
        value: head.value + tail.value,
        est_error: head.est_error + tail.est_error,
        intervals: head.intervals + tail.intervals,
    })
}
