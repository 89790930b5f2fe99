//! Command-line surface: flag definitions, validation and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use fibspec_core::approximant::{band_spectrum_with, merge_tol, sturmian_band_spectrum, EdgeMethod};
use fibspec_core::bounds::{bound_curve, transport_lower, BOUND_NAMES};
use fibspec_core::ids::{gap_labels, gap_width_scaling, holder_scan, DirichletSection, GapKind};
use fibspec_core::interval::{denseness, dim_estimate, thickness, union, GapRatio, IntervalSet};
use fibspec_core::sumset::{cubic_spectrum, square_spectrum, thickness_threshold, transition_scan_with};
use fibspec_core::sumset::{count_components, ThresholdSearch, TransitionScan};
use fibspec_core::trace::{
    escape_index, fricke, sturmian_trace_seq, trace_derivative_seq, ContinuedFraction, TransferParams,
};
use fibspec_core::word::fibonacci;
use fibspec_core::{Error, PrecisionContext, Real};

use crate::error::CliError;
use crate::format::{Cell, Format, Table};
use crate::mp::Mpf;
use crate::sweep::{linspace, par_map, ParCounter};

/// Spectra, fractal metrics and sum-set spectra of Fibonacci and Sturmian
/// Schrödinger operators.
#[derive(Debug, Parser, Serialize)]
#[command(name = "fibspec", version)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Significand bits of the working precision; 53 selects f64.
    #[arg(long, global = true, env = "FIBSPEC_PRECISION_BITS", default_value_t = 53)]
    pub precision_bits: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Data file; a metadata sidecar is written next to it. Stdout if absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for sweeps; output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Counting,
    Dense,
}

impl From<Method> for EdgeMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Counting => EdgeMethod::Counting,
            Method::Dense => EdgeMethod::Dense,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    /// `sigma_k union sigma_{k+1}`
    Cover,
    /// `sigma_k` alone
    Bands,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

/// A single coupling or a grid of couplings.
#[derive(Debug, Clone, Args, Serialize)]
pub struct LambdaSpec {
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Sweep range `LO,HI`, used with `--lambda-grid`.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub lambda_range: Option<(f64, f64)>,
    /// Number of sweep points, endpoints included.
    #[arg(long)]
    pub lambda_grid: Option<usize>,
}

enum Lambdas {
    One(f64),
    Grid(Vec<f64>),
}

impl LambdaSpec {
    fn resolve(&self) -> Result<Lambdas, CliError> {
        match (self.lambda, self.lambda_range, self.lambda_grid) {
            (Some(l), None, None) => {
                finite("lambda", l)?;
                Ok(Lambdas::One(l))
            }
            (None, Some(r), Some(n)) => {
                check_range("lambda-range", r)?;
                Ok(Lambdas::Grid(linspace(r, n)))
            }
            (None, Some(_), None) => Err(CliError::BadFlags("--lambda-range needs --lambda-grid".into())),
            _ => Err(CliError::BadFlags("give either --lambda or --lambda-range with --lambda-grid".into())),
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Half-traces and their energy derivatives up to level k.
    Trace(TraceArgs),
    /// Band edges of the Fibonacci approximants.
    Spectrum(SpectrumArgs),
    /// Bands or traces of Sturmian approximants.
    Sturmian(SturmianArgs),
    /// Square or cubic spectra as Minkowski sums.
    Sumset(SumsetArgs),
    /// Integrated density of states of a finite section.
    Ids(IdsArgs),
    /// Hölder exponent scan of the finite-section eigenvalues.
    Holder(HolderArgs),
    /// Box-counting estimates for the level-k cover.
    Dims(DimsArgs),
    /// Thickness and denseness, or the coupling where thickness is one.
    Thickness(ThicknessArgs),
    /// Couplings where the sum-set spectrum first splits past m components.
    Transitions(TransitionsArgs),
    /// Gap labels of the level-k bands, or gap-width scaling.
    Labels(LabelsArgs),
    /// Closed-form reference bounds sampled on a grid.
    Bounds(BoundsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Trace(_) => "trace",
            Command::Spectrum(_) => "spectrum",
            Command::Sturmian(_) => "sturmian",
            Command::Sumset(_) => "sumset",
            Command::Ids(_) => "ids",
            Command::Holder(_) => "holder",
            Command::Dims(_) => "dims",
            Command::Thickness(_) => "thickness",
            Command::Transitions(_) => "transitions",
            Command::Labels(_) => "labels",
            Command::Bounds(_) => "bounds",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TraceArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub energy: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub lambda: LambdaSpec,
    #[arg(long, value_enum, default_value_t = SetKind::Cover)]
    pub set: SetKind,
    #[arg(long, value_enum, default_value_t = Method::Counting)]
    pub method: Method,
}

#[derive(Debug, Args, Serialize)]
pub struct SturmianArgs {
    /// Partial quotients `a_1,...,a_K`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub cf: Vec<u64>,
    /// Approximant level; defaults to the number of quotients.
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub lambda: f64,
    /// Emit the trace recursion at this energy instead of bands.
    #[arg(long, allow_hyphen_values = true)]
    pub energy: Option<f64>,
    #[arg(long, value_enum, default_value_t = Method::Counting)]
    pub method: Method,
}

#[derive(Debug, Args, Serialize)]
pub struct SumsetArgs {
    #[arg(long)]
    pub dim: u32,
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub lambda: LambdaSpec,
    /// Second coupling of a square sum; defaults to `--lambda`.
    #[arg(long)]
    pub lambda2: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct IdsArgs {
    /// Section size.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub energy_range: (f64, f64),
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct HolderArgs {
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[command(flatten)]
    pub lambda: LambdaSpec,
    #[arg(long, default_value_t = 0.025)]
    pub delta: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct DimsArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub lambda: f64,
    /// Box sizes; defaults to `2^-1, ..., 2^-20`.
    #[arg(long, value_delimiter = ',')]
    pub eps_grid: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ThicknessArgs {
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub lambda: LambdaSpec,
    /// Bisect for thickness one on `--lambda-range` instead of sampling.
    #[arg(long)]
    pub threshold: bool,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct TransitionsArgs {
    #[arg(long)]
    pub dim: u32,
    #[arg(long)]
    pub k: usize,
    /// Last level of a table; defaults to `--k`.
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Component-count thresholds.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub m: Vec<usize>,
    #[arg(long, value_parser = parse_range, default_value = "0,4")]
    pub lambda_range: (f64, f64),
    #[arg(long, default_value_t = 1e-3)]
    pub scan_step: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// Emit the `(lambda, count)` scan instead of the transition table.
    #[arg(long)]
    pub scan_trace: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct LabelsArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Largest `|m|` considered; defaults to `F_k`.
    #[arg(long)]
    pub m_cap: Option<u64>,
    /// Report `|U_m| / lambda` for this label over `--lambda-list`.
    #[arg(long, allow_hyphen_values = true)]
    pub width_scaling: Option<i64>,
    #[arg(long, value_delimiter = ',')]
    pub lambda_list: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    /// Bound names; all of them when omitted.
    #[arg(long)]
    pub name: Vec<String>,
    #[arg(long, value_parser = parse_range)]
    pub lambda_range: (f64, f64),
    #[arg(long, default_value_t = 100)]
    pub lambda_grid: usize,
    /// Moment order for `transport_lower`.
    #[arg(long)]
    pub p: Option<f64>,
    /// Universal constant for `transport_lower`.
    #[arg(long = "D")]
    pub d: Option<f64>,
}

/// Result of a run before serialisation.
#[derive(Debug)]
pub struct Report {
    pub table: Table,
    /// Command-specific metadata.
    pub extra: Map<String, Value>,
    /// Set when part of the request had no answer; the table is still
    /// written.
    pub not_found: Option<String>,
}

impl Report {
    fn new(table: Table) -> Self {
        Report { table, extra: Map::new(), not_found: None }
    }
}

fn finite(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Precondition(format!("--{name} must be finite")))
    }
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Precondition(format!("--{name} must be positive")))
    }
}

fn check_range(name: &str, r: (f64, f64)) -> Result<(), CliError> {
    if r.0.is_finite() && r.1.is_finite() && r.0 <= r.1 {
        Ok(())
    } else {
        Err(CliError::Precondition(format!("--{name} needs finite LO <= HI")))
    }
}

fn level(name: &str, k: usize, min: usize) -> Result<(), CliError> {
    if k < min {
        return Err(CliError::Precondition(format!("--{name} must be at least {min}")));
    }
    fibonacci(k + 1).map_err(|_| CliError::Precondition(format!("--{name} too large")))?;
    Ok(())
}

/// Bits the run actually uses: `transitions` and `thickness` move to at
/// least 128 bits past level 12.
pub fn effective_bits(cli: &Cli) -> u32 {
    let requested = cli.common.precision_bits;
    let deep = match &cli.command {
        Command::Transitions(a) => a.k_max.unwrap_or(a.k).max(a.k) > 12,
        Command::Thickness(a) => a.k > 12,
        _ => false,
    };
    if deep {
        requested.max(128)
    } else {
        requested
    }
}

/// Checks every flag against the preconditions of the operation it feeds.
pub fn validate(cli: &Cli) -> Result<(), CliError> {
    if cli.common.precision_bits < PrecisionContext::MIN_BITS {
        return Err(CliError::Precondition("--precision-bits must be at least 53".into()));
    }
    if cli.common.threads == Some(0) {
        return Err(CliError::Precondition("--threads must be at least 1".into()));
    }
    match &cli.command {
        Command::Trace(a) => {
            level("k", a.k, 1)?;
            finite("lambda", a.lambda)?;
            finite("energy", a.energy)?;
        }
        Command::Spectrum(a) => {
            level("k", a.k, 1)?;
            a.lambda.resolve()?;
            if a.method == Method::Dense && fibonacci(a.k + 1).unwrap_or(u64::MAX) > 1597 {
                return Err(CliError::Precondition("--method dense supports periods up to 1597".into()));
            }
        }
        Command::Sturmian(a) => {
            ContinuedFraction::new(a.cf.clone())?;
            let lv = a.level.unwrap_or(a.cf.len());
            if lv == 0 || lv > a.cf.len() {
                return Err(CliError::Precondition("--level must be in 1..=number of quotients".into()));
            }
            finite("lambda", a.lambda)?;
            if let Some(e) = a.energy {
                finite("energy", e)?;
            }
        }
        Command::Sumset(a) => {
            if !(a.dim == 2 || a.dim == 3) {
                return Err(CliError::Precondition("--dim must be 2 or 3".into()));
            }
            level("k", a.k, 1)?;
            a.lambda.resolve()?;
            if let Some(l2) = a.lambda2 {
                finite("lambda2", l2)?;
                if a.dim == 3 || a.lambda.lambda.is_none() {
                    return Err(CliError::BadFlags("--lambda2 needs --dim 2 and a single --lambda".into()));
                }
            }
        }
        Command::Ids(a) => {
            DirichletSection::new(a.n, a.lambda).map_err(CliError::from)?;
            finite("lambda", a.lambda)?;
            check_range("energy-range", a.energy_range)?;
        }
        Command::Holder(a) => {
            if a.n < 2 {
                return Err(CliError::Precondition("--n must be at least 2".into()));
            }
            positive("delta", a.delta)?;
            a.lambda.resolve()?;
        }
        Command::Dims(a) => {
            level("k", a.k, 1)?;
            finite("lambda", a.lambda)?;
            for &e in &a.eps_grid {
                positive("eps-grid", e)?;
            }
        }
        Command::Thickness(a) => {
            level("k", a.k, 1)?;
            if a.threshold {
                positive("tol", a.tol)?;
                let r = a.lambda.lambda_range.ok_or(CliError::BadFlags("--threshold needs --lambda-range".into()))?;
                check_range("lambda-range", r)?;
                if !(r.0 < r.1) {
                    return Err(CliError::Precondition("--lambda-range needs LO < HI".into()));
                }
            } else {
                a.lambda.resolve()?;
            }
        }
        Command::Transitions(a) => {
            if !(a.dim == 2 || a.dim == 3) {
                return Err(CliError::Precondition("--dim must be 2 or 3".into()));
            }
            level("k", a.k, 1)?;
            if let Some(km) = a.k_max {
                level("k-max", km, a.k)?;
            }
            positive("scan-step", a.scan_step)?;
            positive("tol", a.tol)?;
            check_range("lambda-range", a.lambda_range)?;
            if a.m.is_empty() {
                return Err(CliError::BadFlags("--m needs at least one value".into()));
            }
        }
        Command::Labels(a) => {
            level("k", a.k, 2)?;
            let period = fibonacci(a.k).map_err(CliError::from)?;
            if a.m_cap.is_some_and(|c| c < period) {
                return Err(CliError::Precondition("--m-cap must be at least F_k".into()));
            }
            match a.width_scaling {
                Some(m) => {
                    if m == 0 {
                        return Err(CliError::Precondition("--width-scaling label must be nonzero".into()));
                    }
                    for &l in &a.lambda_list {
                        positive("lambda-list", l)?;
                    }
                }
                None => positive("lambda", a.lambda.ok_or(CliError::BadFlags("--lambda is required".into()))?)?,
            }
        }
        Command::Bounds(a) => {
            check_range("lambda-range", a.lambda_range)?;
            for n in &a.name {
                if n == "transport_lower" {
                    positive("p", a.p.ok_or(CliError::BadFlags("transport_lower needs --p".into()))?)?;
                    positive("D", a.d.ok_or(CliError::BadFlags("transport_lower needs --D".into()))?)?;
                } else if !BOUND_NAMES.contains(&n.as_str()) {
                    return Err(CliError::BadFlags(format!("unknown bound {n}")));
                }
            }
        }
    }
    Ok(())
}

/// Validates, then runs the command at the effective precision.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    validate(cli)?;
    let ctx = PrecisionContext::new(effective_bits(cli))?;
    if ctx.bits == 53 {
        execute_in::<f64>(&cli.command, &ctx)
    } else {
        execute_in::<Mpf>(&cli.command, &ctx)
    }
}

fn execute_in<R: Real + Send + Sync>(cmd: &Command, ctx: &PrecisionContext) -> Result<Report, CliError> {
    let digits = ctx.decimal_digits();
    let num = |x: f64| Cell::real(&x, digits);
    match cmd {
        Command::Trace(a) => trace::<R>(a, ctx),
        Command::Spectrum(a) => spectrum::<R>(a, ctx),
        Command::Sturmian(a) => sturmian::<R>(a, ctx),
        Command::Sumset(a) => sumset::<R>(a, ctx),
        Command::Ids(a) => {
            let section = DirichletSection::new(a.n, a.lambda)?;
            let grid = linspace(a.energy_range, a.points);
            let counts = par_map(&grid, |e| Ok::<_, CliError>(fibspec_core::ids::eig_count_below(&section, e)));
            let mut t = Table::new(&["E", "N"]);
            let mut perturbed = 0;
            for (e, c) in grid.iter().zip(counts) {
                let c = c?;
                perturbed += c.perturbed;
                t.push(vec![num(*e), num(c.below as f64 / a.n as f64)]);
            }
            let mut r = Report::new(t);
            r.extra.insert("perturbed_pivots".into(), json!(perturbed));
            Ok(r)
        }
        Command::Holder(a) => {
            let grid = match a.lambda.resolve()? {
                Lambdas::One(l) => vec![l],
                Lambdas::Grid(g) => g,
            };
            let scans = par_map(&grid, |l| holder_scan(a.n, l, a.delta));
            let mut t = Table::new(&["lambda", "exponent", "status"]);
            let mut excl = Vec::new();
            for (l, s) in grid.iter().zip(scans) {
                match s {
                    Ok(s) => {
                        excl.push(json!({"lambda": l, "exclusion": s.exclusion}));
                        t.push(vec![num(*l), num(s.exponent), Cell::Text("ok".into())]);
                    }
                    Err(e) => t.push(vec![num(*l), Cell::Text(String::new()), Cell::Text(e.to_string())]),
                }
            }
            let mut r = Report::new(t);
            r.extra.insert("exclusion_threshold".into(), Value::Array(excl));
            Ok(r)
        }
        Command::Dims(a) => {
            let eps: Vec<f64> =
                if a.eps_grid.is_empty() { (1..=20).map(|j| 2f64.powi(-j)).collect() } else { a.eps_grid.clone() };
            let cover = cover_set::<R>(a.k, a.lambda, ctx, EdgeMethod::Counting)?;
            let d = dim_estimate(&cover, &eps)?;
            let mut t = Table::new(&["eps", "count", "estimate"]);
            for i in 0..d.eps.len() {
                t.push(vec![num(d.eps[i]), Cell::Int(d.counts[i] as i128), num(d.estimates[i])]);
            }
            let mut r = Report::new(t);
            r.extra.insert("infimum".into(), json!(d.infimum));
            r.extra.insert("components".into(), json!(cover.len()));
            Ok(r)
        }
        Command::Thickness(a) => thickness_cmd::<R>(a, ctx),
        Command::Transitions(a) => transitions::<R>(a, ctx),
        Command::Labels(a) => labels::<R>(a, ctx),
        Command::Bounds(a) => {
            let grid = linspace(a.lambda_range, a.lambda_grid);
            let names: Vec<String> = if a.name.is_empty() {
                BOUND_NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                a.name.clone()
            };
            let mut t = Table::new(&["bound", "lambda", "value"]);
            for n in &names {
                if n == "transport_lower" {
                    let (p, d) = (a.p.unwrap_or(f64::NAN), a.d.unwrap_or(f64::NAN));
                    for &l in &grid {
                        if let Ok(v) = transport_lower(l, p, d) {
                            t.push(vec![Cell::Text(n.clone()), num(l), num(v)]);
                        }
                    }
                } else {
                    for (l, v) in bound_curve(n, &grid)?.values {
                        t.push(vec![Cell::Text(n.clone()), num(l), num(v)]);
                    }
                }
            }
            Ok(Report::new(t))
        }
    }
}

fn trace<R: Real>(a: &TraceArgs, ctx: &PrecisionContext) -> Result<Report, CliError> {
    let digits = ctx.decimal_digits();
    let p = TransferParams::new(R::from_f64(a.energy, ctx), R::from_f64(a.lambda, ctx));
    let (seq, overflow) = match trace_derivative_seq(&p, a.k) {
        Ok(s) => (s, None),
        // keep the finite prefix and report where the orbit left the type
        Err(Error::Overflow { index }) => {
            let last = usize::try_from(index - 1).unwrap_or(0);
            (trace_derivative_seq(&p, last)?, Some(index))
        }
        Err(e) => return Err(e.into()),
    };
    let mut t = Table::new(&["k", "x", "dx_dE"]);
    for (i, (x, d)) in seq.iter().enumerate() {
        t.push(vec![Cell::Int(i as i128 - 1), Cell::real(x, digits), Cell::real(d, digits)]);
    }
    let mut r = Report::new(t);
    let n = seq.len();
    if n >= 3 {
        let g = fricke(&seq[n - 1].0, &seq[n - 2].0, &seq[n - 3].0);
        r.extra.insert("fricke_last".into(), json!(g.to_sci_string(digits)));
    }
    r.extra.insert("fricke_expected".into(), json!(a.lambda * a.lambda / 4.0));
    r.extra.insert("escape_index".into(), json!(escape_index(&p, a.k)));
    r.extra.insert("overflow_index".into(), json!(overflow));
    Ok(r)
}

/// `Sigma_k` with the worst edge residual of its two levels.
fn cover_with_residual<R: Real>(
    k: usize,
    lambda: f64,
    ctx: &PrecisionContext,
    method: EdgeMethod,
) -> fibspec_core::Result<(IntervalSet<R>, f64)> {
    let a = band_spectrum_with::<R>(k, lambda, ctx, method)?;
    let b = band_spectrum_with::<R>(k + 1, lambda, ctx, method)?;
    let tol: R = merge_tol(lambda.abs() + 4.0, ctx);
    Ok((union(&a.bands, &b.bands, &tol), a.max_residual.max(b.max_residual)))
}

fn cover_set<R: Real>(k: usize, lambda: f64, ctx: &PrecisionContext, m: EdgeMethod) -> fibspec_core::Result<IntervalSet<R>> {
    Ok(cover_with_residual::<R>(k, lambda, ctx, m)?.0)
}

fn level_set<R: Real>(
    k: usize,
    lambda: f64,
    set: SetKind,
    ctx: &PrecisionContext,
    m: EdgeMethod,
) -> fibspec_core::Result<(IntervalSet<R>, f64)> {
    match set {
        SetKind::Cover => cover_with_residual(k, lambda, ctx, m),
        SetKind::Bands => {
            let b = band_spectrum_with::<R>(k, lambda, ctx, m)?;
            Ok((b.bands, b.max_residual))
        }
    }
}

fn residual_meta(r: &mut Report, k: usize, lambda: f64, residual: f64, ctx: &PrecisionContext) {
    r.extra.insert("k".into(), json!(k));
    r.extra.insert("lambda".into(), json!(lambda));
    r.extra.insert("max_edge_residual".into(), json!(residual));
    r.extra.insert("residual_bound".into(), json!(ctx.ulp_scaled(30)));
}

fn spectrum<R: Real + Send + Sync>(a: &SpectrumArgs, ctx: &PrecisionContext) -> Result<Report, CliError> {
    let digits = ctx.decimal_digits();
    let method = EdgeMethod::from(a.method);
    match a.lambda.resolve()? {
        Lambdas::One(l) => {
            let (s, res) = level_set::<R>(a.k, l, a.set, ctx, method)?;
            let mut t = Table::new(&["lo", "hi"]);
            for (lo, hi) in s.intervals() {
                t.push(vec![Cell::real(lo, digits), Cell::real(hi, digits)]);
            }
            let mut r = Report::new(t);
            residual_meta(&mut r, a.k, l, res, ctx);
            Ok(r)
        }
        Lambdas::Grid(grid) => {
            let sets = par_map(&grid, |l| level_set::<R>(a.k, l, a.set, ctx, method));
            let mut t = Table::new(&["lambda", "lo", "hi", "status"]);
            let mut worst = 0.0f64;
            for (l, s) in grid.iter().zip(sets) {
                match s {
                    Ok((s, res)) => {
                        worst = worst.max(res);
                        for (lo, hi) in s.intervals() {
                            t.push(vec![Cell::real(l, digits), Cell::real(lo, digits), Cell::real(hi, digits), ok()]);
                        }
                    }
                    Err(e) => t.push(failed_row(Cell::real(l, digits), 2, &e)),
                }
            }
            let mut r = Report::new(t);
            r.extra.insert("max_edge_residual".into(), json!(worst));
            Ok(r)
        }
    }
}

fn ok() -> Cell {
    Cell::Text("ok".into())
}

fn failed_row(key: Cell, blanks: usize, e: &dyn std::fmt::Display) -> Vec<Cell> {
    let mut row = vec![key];
    row.extend((0..blanks).map(|_| Cell::Text(String::new())));
    row.push(Cell::Text(e.to_string()));
    row
}

fn sturmian<R: Real>(a: &SturmianArgs, ctx: &PrecisionContext) -> Result<Report, CliError> {
    let digits = ctx.decimal_digits();
    let cf = ContinuedFraction::new(a.cf.clone())?;
    let level = a.level.unwrap_or(cf.levels());
    if let Some(e) = a.energy {
        let truncated = ContinuedFraction::new(cf.quotients()[..level].to_vec())?;
        let p = TransferParams::new(R::from_f64(e, ctx), R::from_f64(a.lambda, ctx));
        let (triples, overflow) = match sturmian_trace_seq(&p, &truncated) {
            Ok(t) => (t, None),
            Err(Error::Overflow { index }) => {
                let keep = usize::try_from(index - 1).unwrap_or(0).max(1);
                let shorter = ContinuedFraction::new(cf.quotients()[..keep].to_vec())?;
                (sturmian_trace_seq(&p, &shorter)?, Some(index))
            }
            Err(e) => return Err(e.into()),
        };
        let mut t = Table::new(&["k", "x_prev", "x_cur", "x_mixed", "fricke"]);
        for (k, tr) in triples.iter().enumerate() {
            let g = fricke(&tr.x_mixed, &tr.x_cur, &tr.x_prev);
            t.push(vec![
                Cell::Int(k as i128),
                Cell::real(&tr.x_prev, digits),
                Cell::real(&tr.x_cur, digits),
                Cell::real(&tr.x_mixed, digits),
                Cell::real(&g, digits),
            ]);
        }
        let mut r = Report::new(t);
        r.extra.insert("overflow_index".into(), json!(overflow));
        return Ok(r);
    }
    let b = sturmian_band_spectrum::<R>(&cf, level, a.lambda, ctx, a.method.into())?;
    let mut t = Table::new(&["lo", "hi"]);
    for (lo, hi) in b.bands.intervals() {
        t.push(vec![Cell::real(lo, digits), Cell::real(hi, digits)]);
    }
    let mut r = Report::new(t);
    residual_meta(&mut r, level, a.lambda, b.max_residual, ctx);
    r.extra.insert("period".into(), json!(b.period.to_string()));
    Ok(r)
}

fn sumset<R: Real + Send + Sync>(a: &SumsetArgs, ctx: &PrecisionContext) -> Result<Report, CliError> {
    let digits = ctx.decimal_digits();
    match a.lambda.resolve()? {
        Lambdas::One(l) => {
            let s = if a.dim == 2 {
                square_spectrum::<R>(a.k, l, a.lambda2.unwrap_or(l), ctx)?
            } else {
                cubic_spectrum::<R>(a.k, l, ctx)?
            };
            let mut t = Table::new(&["lo", "hi"]);
            for (lo, hi) in s.intervals() {
                t.push(vec![Cell::real(lo, digits), Cell::real(hi, digits)]);
            }
            Ok(Report::new(t))
        }
        Lambdas::Grid(grid) => {
            let counts = par_map(&grid, |l| count_components::<R>(a.k, a.dim, l, ctx));
            let mut t = Table::new(&["lambda", "count", "status"]);
            for (l, c) in grid.iter().zip(counts) {
                match c {
                    Ok(c) => t.push(vec![Cell::real(l, digits), Cell::Int(c as i128), ok()]),
                    Err(e) => t.push(failed_row(Cell::real(l, digits), 1, &e)),
                }
            }
            Ok(Report::new(t))
        }
    }
}

fn ratio_cell<R: Real>(g: &GapRatio<R>, digits: usize) -> Cell {
    match g {
        GapRatio::Infinite => Cell::Num("inf".into()),
        GapRatio::Finite(x) => Cell::real(x, digits),
    }
}

fn thickness_cmd<R: Real + Send + Sync>(a: &ThicknessArgs, ctx: &PrecisionContext) -> Result<Report, CliError> {
    let digits = ctx.decimal_digits();
    if a.threshold {
        let range = a.lambda.lambda_range.expect("validated");
        let mut t = Table::new(&["k", "lambda_star", "bracket_lo", "bracket_hi"]);
        let mut r = match thickness_threshold::<R>(a.k, range, a.tol, ctx)? {
            ThresholdSearch::Found { lambda_star, bracket } => {
                t.push(vec![
                    Cell::Int(a.k as i128),
                    Cell::real(&lambda_star, digits),
                    Cell::real(&bracket.0, digits),
                    Cell::real(&bracket.1, digits),
                ]);
                Report::new(t)
            }
            ThresholdSearch::NotFound { ends } => {
                let mut r = Report::new(t);
                r.extra.insert("thickness_minus_one_at_ends".into(), json!([ends.0, ends.1]));
                r.not_found = Some("thickness minus one does not change sign on the range".into());
                r
            }
        };
        r.extra.insert("note".into(), json!("denseness is a finite-level estimate"));
        return Ok(r);
    }
    let grid = match a.lambda.resolve()? {
        Lambdas::One(l) => vec![l],
        Lambdas::Grid(g) => g,
    };
    let rows = par_map(&grid, |l| {
        let s = cover_set::<R>(a.k, l, ctx, EdgeMethod::Counting)?;
        Ok::<_, Error>((thickness(&s), denseness(&s)))
    });
    let mut t = Table::new(&["lambda", "thickness", "denseness", "status"]);
    for (l, row) in grid.iter().zip(rows) {
        match row {
            Ok((tau, theta)) => t.push(vec![Cell::real(l, digits), ratio_cell(&tau, digits), ratio_cell(&theta, digits), ok()]),
            Err(e) => t.push(failed_row(Cell::real(l, digits), 2, &e)),
        }
    }
    let mut r = Report::new(t);
    r.extra.insert("note".into(), json!("denseness is a finite-level estimate"));
    Ok(r)
}

fn transitions<R: Real + Send + Sync>(a: &TransitionsArgs, ctx: &PrecisionContext) -> Result<Report, CliError> {
    let digits = ctx.decimal_digits();
    let k_max = a.k_max.unwrap_or(a.k);
    let mut table = Table::new(&["k", "m", "lambda_star", "bracket_lo", "bracket_hi", "count_left", "count_right", "status"]);
    let mut trace = Table::new(&["k", "m", "lambda", "count"]);
    let mut missing = Vec::new();
    for k in a.k..=k_max {
        let counter = ParCounter::<R>::new(k, a.dim, ctx);
        for &m in &a.m {
            let scan = transition_scan_with(&counter, (k, a.dim, m), a.lambda_range, a.scan_step, a.tol)?;
            let (tr, row) = match scan {
                TransitionScan::Found(res) => {
                    let row = vec![
                        Cell::Int(k as i128),
                        Cell::Int(m as i128),
                        Cell::real(&res.lambda_star, digits),
                        Cell::real(&res.bracket.0, digits),
                        Cell::real(&res.bracket.1, digits),
                        Cell::Int(res.count_left as i128),
                        Cell::Int(res.count_right as i128),
                        ok(),
                    ];
                    (res.trace, row)
                }
                TransitionScan::NotFound { trace } => {
                    missing.push(format!("k={k} m={m}"));
                    let mut row = vec![Cell::Int(k as i128), Cell::Int(m as i128)];
                    row.extend((0..5).map(|_| Cell::Text(String::new())));
                    row.push(Cell::Text("not_found".into()));
                    (trace, row)
                }
            };
            table.push(row);
            for (l, c) in tr {
                trace.push(vec![Cell::Int(k as i128), Cell::Int(m as i128), Cell::real(&l, digits), Cell::Int(c as i128)]);
            }
        }
    }
    let mut r = Report::new(if a.scan_trace { trace } else { table });
    if !missing.is_empty() {
        r.not_found = Some(format!("no transition in range for {}", missing.join(", ")));
    }
    Ok(r)
}

fn labels<R: Real + Send + Sync>(a: &LabelsArgs, ctx: &PrecisionContext) -> Result<Report, CliError> {
    let digits = ctx.decimal_digits();
    if let Some(m) = a.width_scaling {
        let pts = gap_width_scaling::<R>(m, a.k, &a.lambda_list, ctx)?;
        let mut t = Table::new(&["lambda", "width_over_lambda", "status"]);
        for (l, v) in pts {
            match v {
                Some(v) => t.push(vec![Cell::real(&l, digits), Cell::real(&v, digits), ok()]),
                None => t.push(vec![Cell::real(&l, digits), Cell::Text(String::new()), Cell::Text("unresolved".into())]),
            }
        }
        return Ok(Report::new(t));
    }
    let lambda = a.lambda.expect("validated");
    let cap = a.m_cap.unwrap_or(fibonacci(a.k)?);
    let labels = gap_labels::<R>(a.k, lambda, cap, ctx)?;
    let mut t = Table::new(&["gap_lo", "gap_hi", "N", "m", "residual", "kind"]);
    for g in &labels {
        let kind = match g.kind {
            GapKind::Interior => "interior",
            GapKind::Above => "above",
        };
        t.push(vec![
            Cell::real(&g.gap.0, digits),
            Cell::real(&g.gap.1, digits),
            Cell::real(&g.ids_value, digits),
            Cell::Int(g.m as i128),
            Cell::real(&g.residual, digits),
            Cell::Text(kind.into()),
        ]);
    }
    let mut r = Report::new(t);
    r.extra.insert("m_cap".into(), json!(cap));
    Ok(r)
}
