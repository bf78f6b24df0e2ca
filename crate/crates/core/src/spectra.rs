//! One-particle spectra, exact heat traces and small-t heat-expansion data.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{mode_energy, ChemicalPotential, Statistics, Variant};
use crate::specfun::{gamma_fn, riemann_zeta, SeriesControl};
use crate::sum::par_sum_map;

/// An eigenvalue of D together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub lambda: f64,
    pub multiplicity: u64,
}

/// Generator of a truncated model spectrum, kept so that the dropped part
/// can be bounded and the truncation redone at a different size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    Circle { n_max: usize },
    Torus { d: usize, n_max: usize },
}

impl Geometry {
    pub fn n_max(self) -> usize {
        match self {
            Geometry::Circle { n_max } | Geometry::Torus { n_max, .. } => n_max,
        }
    }

    pub fn with_n_max(self, n_max: usize) -> Self {
        match self {
            Geometry::Circle { .. } => Geometry::Circle { n_max },
            Geometry::Torus { d, .. } => Geometry::Torus { d, n_max },
        }
    }

    fn dim(self) -> usize {
        match self {
            Geometry::Circle { .. } => 1,
            Geometry::Torus { d, .. } => d,
        }
    }

    pub fn spinor_dim(self) -> u64 {
        1 << (self.dim() / 2)
    }

    pub fn build(self) -> Result<Spectrum> {
        match self {
            Geometry::Circle { n_max } => circle_spectrum(n_max),
            Geometry::Torus { d, n_max } => torus_spectrum(d, n_max),
        }
    }

    pub fn heat_expansion(self) -> HeatExpansion {
        match self {
            Geometry::Circle { .. } => HeatExpansion::circle(),
            Geometry::Torus { d, .. } => HeatExpansion::torus(d).expect("dimension validated at construction"),
        }
    }

    /// Number of eigenvalues (with multiplicity) on the cube shell of
    /// max-norm r, all of which satisfy |λ| ≥ r.
    fn shell_count(self, r: usize) -> f64 {
        let d = self.dim() as i32;
        let r = r as f64;
        ((2.0 * r + 1.0).powi(d) - (2.0 * r - 1.0).powi(d)) * self.spinor_dim() as f64
    }

    /// Upper bound on Σ k(βε) over the modes dropped by the truncation,
    /// where k is the bosonic entropy per mode. The same sum bounds the
    /// dropped parts of log Z, entropy and β·energy for either statistics.
    pub fn tail_bound(self, beta: f64, mu: ChemicalPotential, stat: Statistics, variant: Variant) -> f64 {
        let mut total = 0.0;
        let mut r = self.n_max() + 1;
        loop {
            let y = beta * mode_energy(variant, stat, mu, r as f64);
            let k = bose_mass(y);
            let term = self.shell_count(r) * k;
            total += term;
            if term == 0.0 || term <= 1e-18 * total && y > 1.0 || r > self.n_max() + 1_000_000 {
                return total;
            }
            r += 1;
        }
    }
}

// y/(e^y - 1) - log(1 - e^{-y}), decreasing in y
fn bose_mass(y: f64) -> f64 {
    if y <= 0.0 {
        return f64::INFINITY;
    }
    y / y.exp_m1() - (-(-y).exp_m1()).ln()
}

/// A finite one-particle spectrum of D with ker D = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    modes: Vec<Mode>,
    label: String,
    // generators of the truncated pieces, one per direct summand
    tails: Vec<Geometry>,
    // set only when the whole spectrum came from one generator
    generator: Option<Geometry>,
}

impl Spectrum {
    /// Builds a spectrum from (λ, multiplicity) pairs, merging equal λ.
    pub fn new(pairs: impl IntoIterator<Item = (f64, u64)>, label: impl Into<String>) -> Result<Self> {
        let mut merged: BTreeMap<u64, Mode> = BTreeMap::new();
        for (lambda, multiplicity) in pairs {
            check_mode(lambda, multiplicity)?;
            merged
                .entry(order_key(lambda))
                .and_modify(|m| m.multiplicity += multiplicity)
                .or_insert(Mode { lambda, multiplicity });
        }
        Ok(Spectrum {
            modes: merged.into_values().collect(),
            label: label.into(),
            tails: Vec::new(),
            generator: None,
        })
    }

    /// The empty spectrum (Fock vacuum).
    pub fn empty() -> Self {
        Spectrum {
            modes: Vec::new(),
            label: "empty".into(),
            tails: Vec::new(),
            generator: None,
        }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn tails(&self) -> &[Geometry] {
        &self.tails
    }

    /// The geometry this spectrum is a truncation of, if it is exactly one.
    pub fn generator(&self) -> Option<Geometry> {
        self.generator
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.modes.iter().map(|m| m.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

fn check_mode(lambda: f64, multiplicity: u64) -> Result<()> {
    if !lambda.is_finite() {
        return Err(Error::domain(format!("eigenvalue must be finite, got {lambda}")));
    }
    if lambda == 0.0 {
        return Err(Error::domain("zero eigenvalue: D must have trivial kernel"));
    }
    if multiplicity == 0 {
        return Err(Error::domain(format!("multiplicity of {lambda} must be positive")));
    }
    Ok(())
}

// monotone map from finite f64 to u64, so BTreeMap keys sort like the values
fn order_key(x: f64) -> u64 {
    let bits = x.to_bits();
    if x.is_sign_negative() {
        !bits
    } else {
        bits | (1 << 63)
    }
}

/// Eigenvalues ±1, …, ±n_max with multiplicity one.
pub fn circle_spectrum(n_max: usize) -> Result<Spectrum> {
    if n_max == 0 {
        return Err(Error::domain("circle spectrum needs n_max >= 1"));
    }
    let pairs = (1..=n_max).flat_map(|n| [(-(n as f64), 1), (n as f64, 1)]);
    let mut s = Spectrum::new(pairs, format!("circle:{n_max}"))?;
    s.tails.push(Geometry::Circle { n_max });
    s.generator = Some(Geometry::Circle { n_max });
    Ok(s)
}

/// Flat d-torus: ±|k| over nonzero k ∈ Z^d with max-norm ≤ n_max. Vectors whose
/// first nonzero coordinate is positive give +|k|, the others -|k|, and each
/// carries the spinor dimension 2^{⌊d/2⌋}.
pub fn torus_spectrum(d: usize, n_max: usize) -> Result<Spectrum> {
    if !(1..=3).contains(&d) {
        return Err(Error::domain(format!("torus dimension must be 1, 2 or 3, got {d}")));
    }
    if n_max == 0 {
        return Err(Error::domain("torus spectrum needs n_max >= 1"));
    }
    let geometry = Geometry::Torus { d, n_max };
    let n = n_max as i64;
    // count lattice vectors by |k|² through repeated convolution of the
    // one-dimensional square counts
    let side: BTreeMap<u64, u64> = (-n..=n).fold(BTreeMap::new(), |mut m, i| {
        *m.entry((i * i) as u64).or_insert(0) += 1;
        m
    });
    let mut counts = side.clone();
    for _ in 1..d {
        let mut next = BTreeMap::new();
        for (&a, &ca) in &counts {
            for (&b, &cb) in &side {
                *next.entry(a + b).or_insert(0u64) += ca * cb;
            }
        }
        counts = next;
    }
    counts.remove(&0);
    let spin = geometry.spinor_dim();
    let pairs = counts.into_iter().flat_map(|(norm2, count)| {
        let lambda = (norm2 as f64).sqrt();
        let half = count / 2 * spin;
        [(-lambda, half), (lambda, half)]
    });
    let mut s = Spectrum::new(pairs, format!("torus:{d}:{n_max}"))?;
    s.tails.push(geometry);
    s.generator = Some(geometry);
    Ok(s)
}

/// Parses "lambda,multiplicity" lines; blank lines and '#' comments are skipped.
pub fn parse_spectrum(text: &str, label: impl Into<String>) -> Result<Spectrum> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: line_no, msg };
        let mut fields = line.split(',').map(str::trim);
        let (Some(l), Some(m), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(parse_err(format!("expected 'lambda,multiplicity', got '{line}'")));
        };
        // accept the unicode minus as well as '-'
        let lambda: f64 = l
            .replace('\u{2212}', "-")
            .parse()
            .map_err(|_| parse_err(format!("bad eigenvalue '{l}'")))?;
        let mult: u64 = m.parse().map_err(|_| parse_err(format!("bad multiplicity '{m}'")))?;
        check_mode(lambda, mult).map_err(|e| parse_err(e.to_string()))?;
        pairs.push((lambda, mult));
    }
    Spectrum::new(pairs, label)
}

pub fn spectrum_from_file(path: impl AsRef<Path>) -> Result<Spectrum> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_spectrum(&text, format!("file:{}", path.display()))
        .map_err(|e| e.context(format!("reading {}", path.display())))
}

/// Spectrum of D₁ ⊕ D₂: modes are pooled and equal eigenvalues merged.
pub fn direct_sum(s1: &Spectrum, s2: &Spectrum) -> Spectrum {
    let pairs = s1.modes.iter().chain(&s2.modes).map(|m| (m.lambda, m.multiplicity));
    let mut s = Spectrum::new(pairs, format!("{}+{}", s1.label, s2.label)).expect("inputs already validated");
    s.tails = s1.tails.iter().chain(&s2.tails).copied().collect();
    s
}

/// Tr(|D|^k e^{-tD²}) = Σ m |λ|^k e^{-tλ²} over the stored modes.
pub fn heat_trace_k(s: &Spectrum, k: u32, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("heat trace needs t > 0, got {t}")));
    }
    let [v] = par_sum_map(&s.modes, |m| {
        let a = m.lambda.abs();
        [m.multiplicity as f64 * a.powi(k as i32) * (-t * a * a).exp()]
    });
    Ok(v)
}

pub fn heat_trace(s: &Spectrum, t: f64) -> Result<f64> {
    heat_trace_k(s, 0, t)
}

/// One term a_z t^{-z} of the small-t heat expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatTerm {
    pub z: f64,
    pub a_z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaResidue {
    pub pole: f64,
    pub residue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaValue {
    pub point: f64,
    pub value: f64,
}

/// Closed-form ζ_{D²} for the built-in geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ZetaModel {
    /// ζ_{D²}(s) = 2ζ(2s)
    Circle,
    /// spinor dimension times the Epstein ζ of Z^d, known at s = 0 (-1)
    /// and at the trivial zeros s = -1, -2, ...
    Torus { d: usize },
}

impl ZetaModel {
    // both models have a single simple pole, at d/2
    fn residue(self, z: f64) -> Option<f64> {
        let d = match self {
            ZetaModel::Circle => 1,
            ZetaModel::Torus { d } => d,
        };
        let half = d as f64 / 2.0;
        if z != half {
            return Some(0.0);
        }
        let spin = (1u64 << (d / 2)) as f64;
        gamma_fn(half).ok().map(|g| spin * PI.powf(half) / g)
    }

    fn value(self, s: f64) -> Option<f64> {
        match self {
            ZetaModel::Circle => riemann_zeta(2.0 * s, &SeriesControl::default()).ok().map(|z| 2.0 * z),
            ZetaModel::Torus { d } => {
                let spin = (1u64 << (d / 2)) as f64;
                if s == 0.0 {
                    Some(-spin)
                } else if s < 0.0 && s == s.trunc() {
                    Some(0.0)
                } else {
                    None
                }
            }
        }
    }
}

/// Small-t data of Tr e^{-tD²} ~ Σ_l Σ_{z∈X_l} a_z t^{-z}, with the
/// residues and regular values of ζ_{D²}(s) = Tr|D|^{-2s}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatExpansion {
    pub groups: Vec<Vec<HeatTerm>>,
    #[serde(default)]
    pub zeta_residues: Vec<ZetaResidue>,
    #[serde(default)]
    pub zeta_values: Vec<ZetaValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<ZetaModel>,
}

const POINT_MATCH: f64 = 1e-12;

impl HeatExpansion {
    /// X_0 = {(1/2, √π)}, X_1 = {(0, -1)}; ζ_{D²} = 2ζ(2s) has residue 1 at 1/2.
    pub fn circle() -> Self {
        HeatExpansion {
            groups: vec![
                vec![HeatTerm { z: 0.5, a_z: PI.sqrt() }],
                vec![HeatTerm { z: 0.0, a_z: -1.0 }],
            ],
            zeta_residues: vec![ZetaResidue {
                pole: 0.5,
                residue: 1.0,
            }],
            zeta_values: vec![ZetaValue {
                point: 0.0,
                value: -1.0,
            }],
            builtin: Some(ZetaModel::Circle),
        }
    }

    /// X_0 = {(d/2, s π^{d/2})}, X_1 = {(0, -s)} with s = 2^{⌊d/2⌋}.
    pub fn torus(d: usize) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::domain(format!("torus dimension must be 1, 2 or 3, got {d}")));
        }
        let spin = (1u64 << (d / 2)) as f64;
        let half = d as f64 / 2.0;
        let lead = spin * PI.powf(half);
        Ok(HeatExpansion {
            groups: vec![
                vec![HeatTerm { z: half, a_z: lead }],
                vec![HeatTerm { z: 0.0, a_z: -spin }],
            ],
            zeta_residues: vec![ZetaResidue {
                pole: half,
                residue: lead / gamma_fn(half)?,
            }],
            zeta_values: vec![ZetaValue {
                point: 0.0,
                value: -spin,
            }],
            builtin: Some(ZetaModel::Torus { d }),
        })
    }

    /// No groups at all; every expansion built on it is zero.
    pub fn empty() -> Self {
        HeatExpansion {
            groups: Vec::new(),
            zeta_residues: Vec::new(),
            zeta_values: Vec::new(),
            builtin: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let h: HeatExpansion = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        for term in h.groups.iter().flatten() {
            if !term.z.is_finite() || !term.a_z.is_finite() {
                return Err(Error::domain("heat expansion terms must be finite"));
            }
        }
        Ok(h)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| e.context(format!("reading {}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// r_l, taken as minus the largest exponent in group l.
    pub fn r(&self, l: usize) -> Option<f64> {
        self.groups
            .get(l)
            .and_then(|g| g.iter().map(|t| t.z).reduce(f64::max))
            .map(|z| -z)
    }

    /// Res(ζ_{D²}, z); zero at the non-positive integers, where ζ_{D²} is regular.
    pub fn residue(&self, z: f64) -> Result<f64> {
        if let Some(r) = self.zeta_residues.iter().find(|r| (r.pole - z).abs() < POINT_MATCH) {
            return Ok(r.residue);
        }
        if z <= 0.0 && z == z.trunc() {
            return Ok(0.0);
        }
        self.builtin
            .and_then(|m| m.residue(z))
            .ok_or(Error::MissingZeta { point: z })
    }

    /// ζ_{D²}(s) at a regular point.
    pub fn zeta_value(&self, s: f64) -> Result<f64> {
        if let Some(v) = self.zeta_values.iter().find(|v| (v.point - s).abs() < POINT_MATCH) {
            return Ok(v.value);
        }
        self.builtin
            .and_then(|m| m.value(s))
            .ok_or(Error::MissingZeta { point: s })
    }

    /// Largest |a_z - Res(Γ(s)ζ_{D²}(s), z)| over all stored terms.
    pub fn residue_consistency(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for t in self.groups.iter().flatten() {
            let expected = if t.z <= 0.0 && t.z == t.z.trunc() {
                signed_inv_factorial(-t.z) * self.zeta_value(t.z)?
            } else {
                gamma_fn(t.z)? * self.residue(t.z)?
            };
            worst = worst.max((expected - t.a_z).abs());
        }
        Ok(worst)
    }
}

// (-1)^n / n! for a non-negative integer n
fn signed_inv_factorial(n: f64) -> f64 {
    let n = n as u64;
    let fact = (1..=n).fold(1.0, |p, k| p * k as f64);
    if n.is_multiple_of(2) {
        1.0 / fact
    } else {
        -1.0 / fact
    }
}

/// Which trace a residue expansion describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatOperator {
    /// Tr(|D|^k e^{-tD²})
    Square,
    /// Tr(|D|^{2k} e^{-tD⁴})
    Quartic,
}

/// One summand `weight · t^{-power}` of ρ_{l,k}(t), coming from z ∈ X_l.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoTerm {
    pub z: f64,
    pub weight: f64,
    pub power: f64,
}

/// The summands of ρ_{l,k} for the given trace. Where the Γ factor has a
/// pole the term is (-1)^n/n!·ζ_{D²}(z) instead of Γ·Res.
pub fn rho_terms(h: &HeatExpansion, l: usize, k: u32, op: HeatOperator) -> Result<Vec<RhoTerm>> {
    let group = h
        .groups
        .get(l)
        .ok_or_else(|| Error::domain(format!("heat expansion has no group {l}")))?;
    let kf = k as f64;
    group
        .iter()
        .map(|t| {
            let (power, half) = match op {
                HeatOperator::Square => (t.z + 0.5 * kf, 1.0),
                HeatOperator::Quartic => (0.5 * (t.z + kf), 0.5),
            };
            let weight = if power <= 0.0 && power == power.trunc() {
                signed_inv_factorial(-power) * h.zeta_value(t.z)?
            } else {
                let res = h.residue(t.z)?;
                if res == 0.0 {
                    0.0
                } else {
                    half * gamma_fn(power)? * res
                }
            };
            Ok(RhoTerm { z: t.z, weight, power })
        })
        .collect()
}

/// ρ_{l,k}(t) for Tr(|D|^k e^{-tD²}).
pub fn rho_lk(h: &HeatExpansion, l: usize, k: u32, t: f64) -> Result<f64> {
    eval_rho(rho_terms(h, l, k, HeatOperator::Square)?, t)
}

/// ρ̃_{l,k}(t) for Tr(|D|^{2k} e^{-tD⁴}).
pub fn rho_tilde_lk(h: &HeatExpansion, l: usize, k: u32, t: f64) -> Result<f64> {
    eval_rho(rho_terms(h, l, k, HeatOperator::Quartic)?, t)
}

fn eval_rho(terms: Vec<RhoTerm>, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("rho needs t > 0, got {t}")));
    }
    Ok(terms.iter().map(|r| r.weight * t.powf(-r.power)).sum())
}
