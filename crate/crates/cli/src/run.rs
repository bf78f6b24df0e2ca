//! Executes one parsed command and renders its table.

use rayon::prelude::*;
use specact::asymptotics::{compare_exact_with, expand_with, AutoCoeffs, ExpansionRequest};
use specact::coeffs::{coeff, coeff_auto};
use specact::gibbs::{thermo, CutoffRule, TailPolicy, ThermoParams};
use specact::kernels::ChemicalPotential;
use specact::specfun::{QuadratureControl, SeriesControl};
use specact::spectra::{circle_spectrum, spectrum_from_file, torus_spectrum, HeatExpansion, Spectrum};
use specact::verify::{run_check, CHECK_COUNT};

use crate::args::{
    CoeffArgs, Command, CompareArgs, Cutoff, ExpandArgs, GeometrySource, SeriesArgs, SpectrumSource, ThermoArgs,
    Tolerances, VerifyArgs,
};
use crate::table::{Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    /// bad or inconsistent input, reported against the flag at fault
    #[error("invalid value for {flag}: {msg}")]
    Config { flag: &'static str, msg: String },
    #[error("{context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: specact::Error,
    },
    #[error("{0}")]
    Output(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config { .. } => 2,
            Failure::Numeric { .. } | Failure::Output(_) => 1,
        }
    }
}

fn config(flag: &'static str) -> impl Fn(specact::Error) -> Failure {
    move |e| Failure::Config {
        flag,
        msg: e.to_string(),
    }
}

fn numeric(context: impl Into<String>) -> impl FnOnce(specact::Error) -> Failure {
    let context = context.into();
    move |source| Failure::Numeric { context, source }
}

/// What a command produced: the table and whether every requested piece of
/// work succeeded.
pub struct Outcome {
    pub table: Table,
    pub success: bool,
}

pub fn run(cmd: &Command) -> Result<Outcome, Failure> {
    let ok = |table| Ok(Outcome { table, success: true });
    match cmd {
        Command::Thermo(a) => ok(run_thermo(a)?),
        Command::Coeff(a) => ok(run_coeff(a)?),
        Command::Expand(a) => ok(run_expand(a)?),
        Command::Compare(a) => ok(run_compare(a)?),
        Command::Verify(a) => run_verify(a),
    }
}

fn controls(t: &Tolerances) -> Result<(SeriesControl, QuadratureControl), Failure> {
    let max_terms = usize::try_from(t.max_terms).map_err(|_| Failure::Config {
        flag: "--max-terms",
        msg: "too large".into(),
    })?;
    let s = SeriesControl::new(t.rel_tol, t.abs_tol, max_terms).map_err(config("--rel-tol"))?;
    let d = QuadratureControl::default();
    let q = QuadratureControl::new(t.rel_tol, t.abs_tol, d.max_subdivisions, d.domain_split)
        .map_err(config("--rel-tol"))?;
    Ok((s, q))
}

fn potential(mu: f64) -> Result<ChemicalPotential, Failure> {
    ChemicalPotential::new(mu).map_err(config("--mu"))
}

fn load_spectrum(src: &SpectrumSource) -> Result<Spectrum, Failure> {
    match src {
        SpectrumSource::Circle(n) => circle_spectrum(*n),
        SpectrumSource::Torus(d, n) => torus_spectrum(*d, *n),
        SpectrumSource::File(p) => spectrum_from_file(p),
    }
    .map_err(config("--spectrum"))
}

fn load_heat(src: &GeometrySource) -> Result<HeatExpansion, Failure> {
    match src {
        GeometrySource::Circle => Ok(HeatExpansion::circle()),
        GeometrySource::Torus(d) => HeatExpansion::torus(*d),
        GeometrySource::File(p) => HeatExpansion::from_file(p),
    }
    .map_err(config("--geometry"))
}

fn check_betas(grid: &[f64]) -> Result<(), Failure> {
    match grid.iter().find(|b| !(**b > 0.0)) {
        Some(b) => Err(Failure::Config {
            flag: "--beta",
            msg: format!("inverse temperature must be positive, got {b}"),
        }),
        None => Ok(()),
    }
}

fn run_thermo(a: &ThermoArgs) -> Result<Table, Failure> {
    check_betas(&a.beta.0)?;
    let mu = potential(a.mu)?;
    let spectrum = load_spectrum(&a.spectrum)?;
    let policy = TailPolicy {
        cutoff_rule: match a.cutoff {
            Cutoff::Fixed => CutoffRule::AsConstructed,
            Cutoff::Auto => CutoffRule::Auto,
        },
        guard_factor: a.guard,
    };
    if policy.cutoff_rule == CutoffRule::Auto && spectrum.generator().is_none() {
        return Err(Failure::Config {
            flag: "--cutoff",
            msg: "auto needs a circle or torus spectrum".into(),
        });
    }
    let reports = a
        .beta
        .0
        .par_iter()
        .map(|&beta| {
            let p = ThermoParams::new(beta, mu, a.stat, a.variant).map_err(config("--beta"))?;
            thermo(&spectrum, &p, &policy).map_err(numeric(format!("gibbs at beta = {beta}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(vec!["beta", "log_z", "entropy", "energy", "tail_bound"]).single_object(true);
    for (beta, r) in a.beta.0.iter().zip(&reports) {
        if !r.reliable {
            eprintln!(
                "warning: beta = {beta}: truncation may matter (tail bound {:e}, edge factor {:e})",
                r.tail_bound, r.cutoff_factor
            );
        }
        t.push(vec![
            (*beta).into(),
            r.log_z.into(),
            r.entropy.into(),
            r.energy.into(),
            r.tail_bound.into(),
        ]);
    }
    Ok(t)
}

fn run_coeff(a: &CoeffArgs) -> Result<Table, Failure> {
    let (sctl, qctl) = controls(&a.tol)?;
    let mut points = Vec::new();
    for &m in &a.mu.0 {
        let mu = potential(m)?;
        for &order in &a.a.0 {
            for &rep in &a.rep.0 {
                points.push((order, mu, rep));
            }
        }
    }
    let results = points
        .par_iter()
        .map(|&(order, mu, rep)| {
            match rep {
                Some(r) => coeff(a.kind, order, mu, r, &sctl, &qctl),
                None => coeff_auto(a.kind, order, mu, &sctl, &qctl),
            }
            .map_err(numeric(format!(
                "coeffs: {} at a = {order}, mu = {}",
                a.kind,
                mu.value()
            )))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(vec!["a", "mu", "rep", "value", "est_error", "terms"]);
    for ((order, mu, _), r) in points.iter().zip(&results) {
        t.push(vec![
            (*order).into(),
            mu.value().into(),
            r.rep.name().into(),
            r.value.into(),
            r.est_error.into(),
            r.terms_used.into(),
        ]);
    }
    Ok(t)
}

fn request(s: &SeriesArgs, beta: f64) -> Result<(ExpansionRequest, AutoCoeffs), Failure> {
    let (sctl, qctl) = controls(&s.tol)?;
    let p = ThermoParams::new(beta, potential(s.mu)?, s.stat, s.variant).map_err(config("--beta"))?;
    let req = ExpansionRequest {
        h: load_heat(&s.geometry)?,
        p,
        qty: s.qty,
        l_max: s.l_max,
        k_max: s.k_max,
    };
    Ok((req, AutoCoeffs { sctl, qctl }))
}

fn run_expand(a: &ExpandArgs) -> Result<Table, Failure> {
    let (req, src) = request(&a.series, a.beta)?;
    let r = expand_with(&req, &src).map_err(numeric("asymptotics"))?;
    let mut t = Table::new(vec!["l", "k", "beta_power", "value", "partial_sum"]);
    for (term, partial) in r.terms.iter().zip(&r.partial_sums) {
        t.push(vec![
            term.l.into(),
            term.k.into(),
            term.beta_power.into(),
            term.value.into(),
            (*partial).into(),
        ]);
    }
    Ok(t)
}

fn run_compare(a: &CompareArgs) -> Result<Table, Failure> {
    check_betas(&a.beta.0)?;
    let (req, src) = request(&a.series, a.beta.0[0])?;
    let spectrum = load_spectrum(&a.spectrum)?;
    let c = compare_exact_with(&req, &spectrum, &a.beta.0, &src).map_err(numeric("asymptotics"))?;
    let mut t = Table::new(vec![
        "beta",
        "exact",
        "expansion",
        "abs_err",
        "rel_err",
        "slope",
        "last_term_power",
    ]);
    for r in &c.rows {
        t.push(vec![
            r.beta.into(),
            r.exact.into(),
            r.expansion.into(),
            r.abs_err.into(),
            r.rel_err.into(),
            c.slope.into(),
            c.last_term_power.into(),
        ]);
    }
    Ok(t)
}

fn run_verify(a: &VerifyArgs) -> Result<Outcome, Failure> {
    let ids: Vec<u8> = if a.only.is_empty() {
        (1..=CHECK_COUNT).collect()
    } else {
        a.only.clone()
    };
    let reports = ids
        .par_iter()
        .map(|&id| run_check(id).map_err(config("--only")))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(vec!["check", "title", "item", "value", "limit", "pass"]);
    for r in &reports {
        for m in &r.items {
            t.push(vec![
                r.id.into(),
                r.title.into(),
                Cell::Text(m.label.clone()),
                m.value.into(),
                m.limit.into(),
                m.passed.into(),
            ]);
        }
        eprintln!(
            "check {}: {} ({})",
            r.id,
            if r.passed() { "PASS" } else { "FAIL" },
            r.title
        );
    }
    Ok(Outcome {
        success: reports.iter().all(|r| r.passed()),
        table: t,
    })
}
