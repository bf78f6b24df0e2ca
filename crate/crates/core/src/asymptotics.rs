//! Small-β expansions of the entropy and energy built from heat-expansion
//! data and the coefficient functions, and their comparison with exact
//! mode sums.
//!
//! SqrtShift Hamiltonians give the unprimed expansion
//! Σ_l Σ_{z∈X_l} a_z β^{-2z} C_{βμ}(-z). LinearShift Hamiltonians expand
//! e^{2tβμx} in powers of μ and give the primed double series over (l, k).

use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{coeff_auto, limit_coeff, CoeffKind};
use crate::error::{Error, Result};
use crate::gibbs::{thermo, TailPolicy, ThermoParams};
use crate::kernels::{ChemicalPotential, Quantity, Statistics, Variant};
use crate::specfun::{QuadratureControl, SeriesControl};
use crate::spectra::{rho_terms, HeatExpansion, HeatOperator, Spectrum};

/// Anything that can supply C_μ(a).
pub trait CoeffSource: Sync {
    fn coeff(&self, kind: CoeffKind, a: f64, mu: ChemicalPotential) -> Result<f64>;
}

/// The library coefficients with automatic representation choice.
#[derive(Debug, Clone, Copy, Default)]
pub struct AutoCoeffs {
    pub sctl: SeriesControl,
    pub qctl: QuadratureControl,
}

impl CoeffSource for AutoCoeffs {
    fn coeff(&self, kind: CoeffKind, a: f64, mu: ChemicalPotential) -> Result<f64> {
        coeff_auto(kind, a, mu, &self.sctl, &self.qctl).map(|r| r.value)
    }
}

/// The μ → 0⁻ limits of the coefficients; the potential is ignored.
#[derive(Debug, Clone, Copy, Default)]
pub struct LimitCoeffs;

impl CoeffSource for LimitCoeffs {
    fn coeff(&self, kind: CoeffKind, a: f64, _mu: ChemicalPotential) -> Result<f64> {
        limit_coeff(kind, a)
    }
}

/// One logged coefficient call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffCall {
    pub kind: CoeffKind,
    pub a: f64,
    pub mu: f64,
}

/// Wraps a source and logs every call, so tests can check which potential
/// the expansions actually pass down.
#[derive(Debug, Default)]
pub struct Recording<S> {
    inner: S,
    calls: Mutex<Vec<CoeffCall>>,
}

impl<S: CoeffSource> Recording<S> {
    pub fn new(inner: S) -> Self {
        Recording {
            inner,
            calls: Mutex::new(Vec::new()),
        }
    }

    pub fn calls(&self) -> Vec<CoeffCall> {
        self.calls.lock().expect("log lock").clone()
    }
}

impl<S: CoeffSource> CoeffSource for Recording<S> {
    fn coeff(&self, kind: CoeffKind, a: f64, mu: ChemicalPotential) -> Result<f64> {
        self.calls.lock().expect("log lock").push(CoeffCall {
            kind,
            a,
            mu: mu.value(),
        });
        self.inner.coeff(kind, a, mu)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionRequest {
    pub h: HeatExpansion,
    pub p: ThermoParams,
    pub qty: Quantity,
    /// highest group index l
    pub l_max: usize,
    /// highest order in 2μ, used by the primed series only
    pub k_max: u32,
}

/// One ψ term. `beta_power` is the explicit power of β in front of the
/// coefficient, taken from the largest exponent of the group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub l: usize,
    pub k: u32,
    pub beta_power: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionResult {
    pub terms: Vec<ExpansionTerm>,
    /// running sums of `terms` in order
    pub partial_sums: Vec<f64>,
    pub total: f64,
}

impl ExpansionResult {
    fn from_terms(terms: Vec<ExpansionTerm>) -> Self {
        let partial_sums: Vec<f64> = terms
            .iter()
            .scan(0.0, |acc, t| {
                *acc += t.value;
                Some(*acc)
            })
            .collect();
        let total = partial_sums.last().copied().unwrap_or(0.0);
        ExpansionResult {
            terms,
            partial_sums,
            total,
        }
    }
}

fn scaled_mu(p: &ThermoParams) -> Result<ChemicalPotential> {
    ChemicalPotential::new(p.beta * p.mu.value())
}

fn energy_factor(qty: Quantity, beta: f64) -> (f64, f64) {
    match qty {
        Quantity::Entropy => (1.0, 0.0),
        Quantity::Energy => (1.0 / beta, -1.0),
    }
}

fn group_count(h: &HeatExpansion, l_max: usize) -> usize {
    h.groups.len().min(l_max.saturating_add(1))
}

/// ψ_0, …, ψ_L for a SqrtShift Hamiltonian.
pub fn expand_unprimed(req: &ExpansionRequest) -> Result<ExpansionResult> {
    expand_unprimed_with(req, &AutoCoeffs::default())
}

pub fn expand_unprimed_with(req: &ExpansionRequest, src: &dyn CoeffSource) -> Result<ExpansionResult> {
    let p = &req.p;
    if p.variant != Variant::SqrtShift {
        return Err(Error::domain("the unprimed expansion is for the SqrtShift Hamiltonian"));
    }
    let kind = CoeffKind::of(p.stat, req.qty);
    let mu = scaled_mu(p)?;
    let (factor, shift) = energy_factor(req.qty, p.beta);
    let mut terms = Vec::new();
    for l in 0..group_count(&req.h, req.l_max) {
        let group = &req.h.groups[l];
        let mut value = 0.0;
        for t in group {
            let c = src
                .coeff(kind, -t.z, mu)
                .map_err(|e| e.context(format!("group {l}, z = {}", t.z)))?;
            value += t.a_z * p.beta.powf(-2.0 * t.z) * c;
        }
        let zmax = group.iter().map(|t| t.z).fold(f64::NEG_INFINITY, f64::max);
        terms.push(ExpansionTerm {
            l,
            k: 0,
            beta_power: -2.0 * zmax + shift,
            value: factor * value,
        });
    }
    Ok(ExpansionResult::from_terms(terms))
}

/// The (l, k) pairs kept by the triangular truncation, ordered by their
/// scale r_l + k/2 (Fermi) or r_l + k (Bose) and then by (l, k). With this
/// order a larger `k_max` only appends terms.
pub fn primed_index_set(h: &HeatExpansion, stat: Statistics, l_max: usize, k_max: u32) -> Vec<(usize, u32)> {
    let step = match stat {
        Statistics::Fermi => 0.5,
        Statistics::Bose => 1.0,
    };
    let Some(r0) = h.r(0) else {
        return Vec::new();
    };
    let bound = r0 + step * k_max as f64;
    let mut set: Vec<(f64, usize, u32)> = Vec::new();
    for l in 0..group_count(h, l_max) {
        let Some(rl) = h.r(l) else { continue };
        for k in 0..=k_max {
            let scale = rl + step * k as f64;
            if scale <= bound + 1e-12 {
                set.push((scale, l, k));
            }
        }
    }
    set.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    set.into_iter().map(|(_, l, k)| (l, k)).collect()
}

/// (2μ)^k/k!·ψ_{l,k} for a LinearShift Hamiltonian, over the triangular set.
pub fn expand_primed(req: &ExpansionRequest) -> Result<ExpansionResult> {
    expand_primed_with(req, &AutoCoeffs::default())
}

pub fn expand_primed_with(req: &ExpansionRequest, src: &dyn CoeffSource) -> Result<ExpansionResult> {
    let p = &req.p;
    if p.variant != Variant::LinearShift {
        return Err(Error::domain("the primed expansion is for the LinearShift Hamiltonian"));
    }
    let kind = CoeffKind::of(p.stat, req.qty);
    let mu = scaled_mu(p)?;
    let op = match p.stat {
        Statistics::Fermi => HeatOperator::Square,
        Statistics::Bose => HeatOperator::Quartic,
    };
    let (factor, shift) = energy_factor(req.qty, p.beta);
    let mut terms = Vec::new();
    for (l, k) in primed_index_set(&req.h, p.stat, req.l_max, req.k_max) {
        let kf = k as f64;
        let prefactor = (2.0 * p.mu.value()).powi(k as i32) / factorial(k);
        let mut value = 0.0;
        let mut beta_power = f64::NEG_INFINITY;
        for rt in rho_terms(&req.h, l, k, op).map_err(|e| e.context(format!("term (l, k) = ({l}, {k})")))? {
            let a = kf - rt.power;
            beta_power = beta_power.max(2.0 * a);
            if rt.weight == 0.0 {
                continue;
            }
            let c = src
                .coeff(kind, a, mu)
                .map_err(|e| e.context(format!("term (l, k) = ({l}, {k}), z = {}", rt.z)))?;
            value += rt.weight * c * p.beta.powf(2.0 * a);
        }
        terms.push(ExpansionTerm {
            l,
            k,
            beta_power: beta_power + shift,
            value: factor * prefactor * value,
        });
    }
    Ok(ExpansionResult::from_terms(terms))
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |p, j| p * j as f64)
}

/// The expansion matching the Hamiltonian variant of the request.
pub fn expand(req: &ExpansionRequest) -> Result<ExpansionResult> {
    expand_with(req, &AutoCoeffs::default())
}

pub fn expand_with(req: &ExpansionRequest, src: &dyn CoeffSource) -> Result<ExpansionResult> {
    match req.p.variant {
        Variant::SqrtShift => expand_unprimed_with(req, src),
        Variant::LinearShift => expand_primed_with(req, src),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub beta: f64,
    pub exact: f64,
    pub expansion: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    /// least-squares slope of log abs_err against log β, NaN with fewer
    /// than two nonzero errors
    pub slope: f64,
    /// explicit β power of the last term of the expansion
    pub last_term_power: f64,
}

/// Exact thermodynamics of `s` against the expansion, over a β grid.
///
/// The spectrum must belong to the geometry described by `req.h`; nothing
/// here can check that.
pub fn compare_exact(req: &ExpansionRequest, s: &Spectrum, beta_grid: &[f64]) -> Result<Comparison> {
    compare_exact_with(req, s, beta_grid, &AutoCoeffs::default())
}

pub fn compare_exact_with(
    req: &ExpansionRequest,
    s: &Spectrum,
    beta_grid: &[f64],
    src: &dyn CoeffSource,
) -> Result<Comparison> {
    let rows = beta_grid
        .par_iter()
        .map(|&beta| {
            let p = req.p.with_beta(beta)?;
            let r = ExpansionRequest { p, ..req.clone() };
            let series = expand_with(&r, src).map_err(|e| e.context(format!("expansion at beta = {beta}")))?;
            let report = thermo(s, &p, &TailPolicy::default())?;
            let exact = match req.qty {
                Quantity::Entropy => report.entropy,
                Quantity::Energy => report.energy,
            };
            let abs_err = (exact - series.total).abs();
            Ok((
                CompareRow {
                    beta,
                    exact,
                    expansion: series.total,
                    abs_err,
                    rel_err: abs_err / exact.abs(),
                },
                series.terms.last().map_or(0.0, |t| t.beta_power),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let last_term_power = rows.first().map_or(0.0, |r| r.1);
    let rows: Vec<CompareRow> = rows.into_iter().map(|r| r.0).collect();
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.abs_err > 0.0)
        .map(|r| (r.beta.ln(), r.abs_err.ln()))
        .collect();
    Ok(Comparison {
        slope: fit_slope(&points),
        last_term_power,
        rows,
    })
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return f64::NAN;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::circle_spectrum;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn request(
        h: HeatExpansion,
        beta: f64,
        mu: f64,
        stat: Statistics,
        variant: Variant,
        qty: Quantity,
    ) -> ExpansionRequest {
        ExpansionRequest {
            h,
            p: ThermoParams::new(beta, ChemicalPotential::new(mu).unwrap(), stat, variant).unwrap(),
            qty,
            l_max: 1,
            k_max: 1,
        }
    }

    const GRID: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

    #[test]
    fn circle_fermi_terms() {
        let beta = 0.05;
        let req = request(
            HeatExpansion::circle(),
            beta,
            -1.0,
            Statistics::Fermi,
            Variant::SqrtShift,
            Quantity::Entropy,
        );
        let r = expand_unprimed(&req).unwrap();
        let mu = ChemicalPotential::new(-beta).unwrap();
        let src = AutoCoeffs::default();
        let g = |a| src.coeff(CoeffKind::GammaFermiEntropy, a, mu).unwrap();
        assert_relative_eq!(r.terms[0].value, PI.sqrt() / beta * g(-0.5), max_relative = 1e-14);
        assert_relative_eq!(r.terms[1].value, -g(0.0), max_relative = 1e-14);
        assert_eq!(
            r.partial_sums,
            vec![r.terms[0].value, r.terms[0].value + r.terms[1].value]
        );
        assert_eq!((r.terms[0].beta_power, r.terms[1].beta_power), (-1.0, 0.0));
    }

    #[test]
    fn leading_term_small_mu_limit() {
        // as βμ → 0 the leading term tends to √π γ(-1/2)/β
        let beta = 0.01;
        let req = request(
            HeatExpansion::circle(),
            beta,
            -1e-9,
            Statistics::Fermi,
            Variant::SqrtShift,
            Quantity::Entropy,
        );
        let r = expand_unprimed(&req).unwrap();
        let lim = limit_coeff(CoeffKind::GammaFermiEntropy, -0.5).unwrap();
        assert_relative_eq!(r.terms[0].value, PI.sqrt() / beta * lim, max_relative = 1e-8);
    }

    #[test]
    fn empty_expansion_is_zero() {
        for variant in Variant::ALL {
            let req = request(
                HeatExpansion::empty(),
                0.1,
                -1.0,
                Statistics::Fermi,
                *variant,
                Quantity::Entropy,
            );
            let r = expand(&req).unwrap();
            assert_eq!(r.total, 0.0);
            assert!(r.terms.is_empty());
        }
    }

    #[test]
    fn wrong_variant_is_rejected() {
        let req = request(
            HeatExpansion::circle(),
            0.1,
            -1.0,
            Statistics::Fermi,
            Variant::LinearShift,
            Quantity::Entropy,
        );
        assert!(expand_unprimed(&req).is_err());
        let req = request(
            HeatExpansion::circle(),
            0.1,
            -1.0,
            Statistics::Fermi,
            Variant::SqrtShift,
            Quantity::Entropy,
        );
        assert!(expand_primed(&req).is_err());
    }

    #[test]
    fn coefficients_see_scaled_potential() {
        for stat in Statistics::ALL {
            for variant in Variant::ALL {
                for qty in Quantity::ALL {
                    let req = request(HeatExpansion::torus(2).unwrap(), 0.3, -2.0, *stat, *variant, *qty);
                    let rec = Recording::new(AutoCoeffs::default());
                    match variant {
                        Variant::SqrtShift => expand_unprimed_with(&req, &rec).unwrap(),
                        Variant::LinearShift => expand_primed_with(&req, &rec).unwrap(),
                    };
                    let calls = rec.calls();
                    assert!(!calls.is_empty());
                    assert!(calls.iter().all(|c| c.mu == 0.3 * -2.0), "{calls:?}");
                }
            }
        }
    }

    #[test]
    fn triangular_index_set() {
        let h = HeatExpansion::circle();
        assert_eq!(primed_index_set(&h, Statistics::Fermi, 1, 0), vec![(0, 0)]);
        assert_eq!(
            primed_index_set(&h, Statistics::Fermi, 1, 1),
            vec![(0, 0), (0, 1), (1, 0)]
        );
        assert_eq!(
            primed_index_set(&h, Statistics::Bose, 1, 1),
            vec![(0, 0), (1, 0), (0, 1)]
        );
        assert_eq!(
            primed_index_set(&h, Statistics::Fermi, 1, 2),
            vec![(0, 0), (0, 1), (1, 0), (0, 2), (1, 1)]
        );
        assert_eq!(
            primed_index_set(&h, Statistics::Fermi, 0, 2),
            vec![(0, 0), (0, 1), (0, 2)]
        );
        assert!(primed_index_set(&HeatExpansion::empty(), Statistics::Bose, 3, 3).is_empty());
    }

    #[test]
    fn raising_k_appends_terms() {
        for stat in Statistics::ALL {
            let mut req = request(
                HeatExpansion::circle(),
                0.1,
                -1.0,
                *stat,
                Variant::LinearShift,
                Quantity::Entropy,
            );
            let mut prev = expand_primed(&req).unwrap();
            for k in 2..=4 {
                req.k_max = k;
                let next = expand_primed(&req).unwrap();
                assert_eq!(&next.terms[..prev.terms.len()], &prev.terms[..]);
                prev = next;
            }
        }
    }

    #[test]
    fn primed_k0_column_matches_unprimed() {
        for stat in Statistics::ALL {
            for qty in Quantity::ALL {
                let unprimed = request(HeatExpansion::circle(), 0.1, -1.0, *stat, Variant::SqrtShift, *qty);
                let primed = ExpansionRequest {
                    p: ThermoParams {
                        variant: Variant::LinearShift,
                        ..unprimed.p
                    },
                    ..unprimed.clone()
                };
                let a = expand_unprimed(&unprimed).unwrap();
                let b = expand_primed(&primed).unwrap();
                let column: Vec<_> = b.terms.iter().filter(|t| t.k == 0).collect();
                assert_eq!(column.len(), 2);
                // the bosonic column comes from the quartic trace and differs
                if *stat == Statistics::Fermi {
                    for (x, y) in a.terms.iter().zip(column) {
                        assert_eq!(x.l, y.l);
                        assert_relative_eq!(x.value, y.value, max_relative = 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn fermi_entropy_tracks_exact_values() {
        let s = circle_spectrum(2000).unwrap();
        let req = request(
            HeatExpansion::circle(),
            0.2,
            -1.0,
            Statistics::Fermi,
            Variant::SqrtShift,
            Quantity::Entropy,
        );
        let c = compare_exact(&req, &s, &GRID).unwrap();
        for row in &c.rows {
            assert!(row.rel_err < 1e-13, "{row:?}");
        }
    }

    #[test]
    fn bose_entropy_misses_a_constant() {
        let s = circle_spectrum(2000).unwrap();
        let req = request(
            HeatExpansion::circle(),
            0.2,
            -1.0,
            Statistics::Bose,
            Variant::SqrtShift,
            Quantity::Entropy,
        );
        let c = compare_exact(&req, &s, &GRID).unwrap();
        for w in c.rows.windows(2) {
            assert!(w[1].rel_err < w[0].rel_err);
        }
        for row in &c.rows {
            assert!(
                (row.exact - row.expansion - 0.0018691885767350771).abs() < 1e-10,
                "{row:?}"
            );
        }
        assert!(c.slope.abs() < 1e-6);
    }

    #[test]
    fn primed_fermi_error_decreases() {
        let s = circle_spectrum(2000).unwrap();
        let req = request(
            HeatExpansion::circle(),
            0.2,
            -1.0,
            Statistics::Fermi,
            Variant::LinearShift,
            Quantity::Entropy,
        );
        let c = compare_exact(&req, &s, &GRID).unwrap();
        let expected = [6.6e-3, 1.6e-3, 3.9e-4, 9.6e-5];
        for (row, e) in c.rows.iter().zip(expected) {
            assert_relative_eq!(row.rel_err, e, max_relative = 0.05);
        }
        assert!(c.slope > 0.9, "{}", c.slope);
    }

    #[test]
    fn energy_expansions_track_exact_values() {
        let s = circle_spectrum(4000).unwrap();
        for stat in Statistics::ALL {
            let req = request(
                HeatExpansion::circle(),
                0.1,
                -10.0,
                *stat,
                Variant::SqrtShift,
                Quantity::Energy,
            );
            let c = compare_exact(&req, &s, &[0.02, 0.01]).unwrap();
            assert!(c.rows[1].rel_err < 1e-3, "{stat:?}: {:?}", c.rows);
        }
    }

    #[test]
    fn primed_bose_tracks_exact_values() {
        let s = circle_spectrum(3000).unwrap();
        let req = request(
            HeatExpansion::circle(),
            0.2,
            -1.0,
            Statistics::Bose,
            Variant::LinearShift,
            Quantity::Entropy,
        );
        let c = compare_exact(&req, &s, &[1e-2, 1e-3, 1e-4]).unwrap();
        assert!(c.rows[2].rel_err < c.rows[0].rel_err, "{:?}", c.rows);
    }

    #[test]
    fn far_outside_the_regime_still_reports() {
        let s = circle_spectrum(50).unwrap();
        let req = request(
            HeatExpansion::circle(),
            10.0,
            -1.0,
            Statistics::Fermi,
            Variant::SqrtShift,
            Quantity::Entropy,
        );
        let c = compare_exact(&req, &s, &[10.0]).unwrap();
        assert!(c.rows[0].rel_err > 0.1);
    }

    #[test]
    fn terms_decrease_in_magnitude() {
        for h in [
            HeatExpansion::circle(),
            HeatExpansion::torus(2).unwrap(),
            HeatExpansion::torus(3).unwrap(),
        ] {
            for stat in Statistics::ALL {
                let req = request(h.clone(), 0.02, -1.0, *stat, Variant::SqrtShift, Quantity::Entropy);
                let r = expand_unprimed(&req).unwrap();
                assert!(r.terms[1].value.abs() < r.terms[0].value.abs());
            }
        }
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0]
            .iter()
            .map(|b| (b.ln(), 3.0 * b.ln() + 1.0))
            .collect();
        assert_relative_eq!(fit_slope(&pts), 3.0, max_relative = 1e-14);
        assert!(fit_slope(&pts[..1]).is_nan());
    }
}
