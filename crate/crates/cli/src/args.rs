//! Command-line grammar and the small value languages it accepts.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use specact::coeffs::{CoeffKind, Representation};
use specact::kernels::{Quantity, Statistics, Variant};

#[derive(Debug, Parser)]
#[command(
    name = "specact",
    version,
    about = "Entropy and energy of second-quantized Gibbs states, their spectral-action coefficients and small-beta expansions",
    after_help = "Set SPECACT_THREADS to cap the number of worker threads."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact log Z, entropy and energy from mode sums
    Thermo(ThermoArgs),
    /// Coefficient functions on a grid of orders
    Coeff(CoeffArgs),
    /// Terms of the small-beta expansion at one beta
    Expand(ExpandArgs),
    /// Expansion against exact values over a beta grid
    Compare(CompareArgs),
    /// Run the verification suite
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Cutoff {
    /// keep the cutoff given in the spectrum source
    Fixed,
    /// grow the cutoff until dropped modes are negligible
    Auto,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// write to this file instead of standard output
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Tolerances {
    #[arg(long, default_value_t = 1e-10, value_parser = positive)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-12, value_parser = positive)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_terms: u64,
}

#[derive(Debug, Args)]
pub struct ThermoArgs {
    #[arg(long, value_parser = parse_tag::<Statistics>)]
    pub stat: Statistics,
    #[arg(long, value_parser = parse_tag::<Variant>, default_value = "sqrt")]
    pub variant: Variant,
    /// circle:N, torus:D:N or file:PATH
    #[arg(long, value_parser = parse_source)]
    pub spectrum: SpectrumSource,
    /// a value, a list a,b,c or a range start:stop:step
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub beta: Grid,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, value_enum, default_value = "fixed")]
    pub cutoff: Cutoff,
    /// loosens (>1) or tightens (<1) the negligible-tail threshold
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub guard: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CoeffArgs {
    #[arg(long, value_parser = parse_tag::<CoeffKind>)]
    pub kind: CoeffKind,
    /// orders a: a value, a list or start:stop:step
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub a: Grid,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub mu: Grid,
    /// comma list of auto, bessel, poisson, xi, quadrature
    #[arg(long, default_value = "auto", value_parser = parse_reps)]
    pub rep: RepList,
    #[command(flatten)]
    pub tol: Tolerances,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long, value_parser = parse_tag::<Statistics>)]
    pub stat: Statistics,
    #[arg(long, value_parser = parse_tag::<Variant>, default_value = "sqrt")]
    pub variant: Variant,
    #[arg(long, value_parser = parse_tag::<Quantity>, default_value = "entropy")]
    pub qty: Quantity,
    /// heat-expansion data: circle, torus:D or file:PATH (JSON)
    #[arg(long, default_value = "circle", value_parser = parse_geometry)]
    pub geometry: GeometrySource,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: f64,
    /// highest group index
    #[arg(long, default_value_t = 1)]
    pub l_max: usize,
    /// highest order in 2 mu (LinearShift only)
    #[arg(long, default_value_t = 1)]
    pub k_max: u32,
    #[command(flatten)]
    pub tol: Tolerances,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(long, value_parser = positive)]
    pub beta: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub beta: Grid,
    /// the spectrum the heat data describes
    #[arg(long, default_value = "circle:2000", value_parser = parse_source)]
    pub spectrum: SpectrumSource,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// run only these checks, e.g. 1,4,6
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=9))]
    pub only: Vec<u8>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSource {
    Circle(usize),
    Torus(usize, usize),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySource {
    Circle,
    Torus(usize),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

/// `None` stands for automatic choice.
#[derive(Debug, Clone, PartialEq)]
pub struct RepList(pub Vec<Option<Representation>>);

fn parse_tag<T: std::str::FromStr<Err = String>>(s: &str) -> Result<T, String> {
    s.parse()
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .replace('\u{2212}', "-")
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn count(s: &str, what: &str) -> Result<usize, String> {
    s.parse::<usize>()
        .map_err(|_| format!("{what} must be a non-negative integer, got '{s}'"))
}

/// A single value, a comma list, or an inclusive range start:stop:step.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').map(number).collect::<Result<_, _>>().map(Grid),
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if step == 0.0 || (stop - start) * step < 0.0 {
                return Err(format!("step {step} does not lead from {start} to {stop}"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if n > 1_000_000 {
                return Err(format!("range has {n} points, more than 1000000"));
            }
            // computed from the index, so no rounding drift accumulates
            Ok(Grid((0..n).map(|i| start + i as f64 * step).collect()))
        }
        _ => Err(format!("expected a value, a list or start:stop:step, got '{s}'")),
    }
}

pub fn parse_source(s: &str) -> Result<SpectrumSource, String> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| format!("expected circle:N, torus:D:N or file:PATH, got '{s}'"))?;
    match kind {
        "circle" => Ok(SpectrumSource::Circle(count(rest, "N")?)),
        "torus" => {
            let (d, n) = rest
                .split_once(':')
                .ok_or_else(|| format!("expected torus:D:N, got '{s}'"))?;
            Ok(SpectrumSource::Torus(count(d, "D")?, count(n, "N")?))
        }
        "file" if !rest.is_empty() => Ok(SpectrumSource::File(PathBuf::from(rest))),
        _ => Err(format!("expected circle:N, torus:D:N or file:PATH, got '{s}'")),
    }
}

pub fn parse_geometry(s: &str) -> Result<GeometrySource, String> {
    match s.split_once(':') {
        None if s == "circle" => Ok(GeometrySource::Circle),
        Some(("torus", d)) => Ok(GeometrySource::Torus(count(d, "D")?)),
        Some(("file", p)) if !p.is_empty() => Ok(GeometrySource::File(PathBuf::from(p))),
        _ => Err(format!("expected circle, torus:D or file:PATH, got '{s}'")),
    }
}

pub fn parse_reps(s: &str) -> Result<RepList, String> {
    s.split(',')
        .map(|r| match r.trim() {
            "auto" => Ok(None),
            other => other.parse().map(Some),
        })
        .collect::<Result<_, _>>()
        .map(RepList)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.5").unwrap().0, vec![0.5]);
        assert_eq!(parse_grid("0.2,0.1").unwrap().0, vec![0.2, 0.1]);
        assert_eq!(parse_grid("-1:3:0.5").unwrap().0.len(), 9);
        assert_eq!(parse_grid("0.2:0.05:-0.05").unwrap().0.len(), 4);
        assert_eq!(parse_grid("−1").unwrap().0, vec![-1.0]);
        assert!(parse_grid("1:0:0.5").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert!(parse_grid("a").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn sources() {
        assert_eq!(parse_source("circle:500").unwrap(), SpectrumSource::Circle(500));
        assert_eq!(parse_source("torus:2:30").unwrap(), SpectrumSource::Torus(2, 30));
        assert_eq!(
            parse_source("file:a.txt").unwrap(),
            SpectrumSource::File("a.txt".into())
        );
        assert!(parse_source("circle").is_err());
        assert!(parse_source("sphere:3").is_err());
        assert!(parse_source("torus:2").is_err());
        assert_eq!(parse_geometry("torus:3").unwrap(), GeometrySource::Torus(3));
        assert!(parse_geometry("circle:3").is_err());
    }

    #[test]
    fn representations() {
        let r = parse_reps("bessel,auto,xi").unwrap().0;
        assert_eq!(
            r,
            vec![Some(Representation::BesselSeries), None, Some(Representation::XiSeries)]
        );
        assert!(parse_reps("bessel,fourier").is_err());
    }

    #[test]
    fn command_line_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
