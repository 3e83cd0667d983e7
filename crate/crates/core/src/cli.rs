//! Command-line front end. [`run`] is pure: it returns the exit code and the
//! text to print, so the binary only parses arguments and writes output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::gradedness::{self, classify_gradedness, Direction, GradednessReport};
use crate::norms::{self, NormSpec, DEFAULT_TOL};
use crate::properties::{self, CheckConfig, PropertyReport, Verdict, DEFAULT_MARGIN, DEFAULT_SEED, DEFAULT_TRIALS};
use crate::suite::{self, SuiteConfig};
use crate::topk::{self, KSupportMethod, NormSequenceReport, Stationarity};
use crate::vectors::{l0, IndexSet, Vector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSIFIED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "GRADED_NORMS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "graded-norms",
    version,
    about = "Generalized top-k and k-support norms, monotonicity checks and l0 recovery"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Source norm: lp:2, lp:inf, wlp:1:[1,2,3], atomic:@atoms.json, atomic:[[2,1],[1,2]] or a JSON spec
    #[arg(long, global = true)]
    pub source: Option<String>,
    /// Inline vector as a JSON array
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// File of vectors: a JSON array (or array of arrays) or CSV with one vector per row
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Dimension for property checks when no vector fixes it
    #[arg(long, global = true)]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evaluate the source norm
    Eval,
    /// Evaluate the dual norm
    Dual,
    /// Evaluate the generalized top-k norm (requires --k)
    Topk,
    /// Evaluate the generalized k-support norm (requires --k)
    Ksupport {
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Top-k and k-support sequences with stationarity indices
    Sequence,
    /// Recover l0 from the top-k sequence
    L0,
    /// Run a property checker
    Check {
        #[arg(value_enum)]
        property: PropertyArg,
        /// Index set K (1-based JSON list) for the Birkhoff check
        #[arg(long = "set")]
        set: Option<String>,
        /// Strict variant of the Birkhoff or gradedness check
        #[arg(long)]
        strict: bool,
        /// Direction for the gradedness check
        #[arg(long, value_enum, default_value_t = DirectionArg::Increasing)]
        direction: DirectionArg,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
    },
    /// Run the acceptance matrix and emit a JSON bundle
    Suite {
        /// Reduced trial counts
        #[arg(long)]
        quick: bool,
        /// Only criteria whose id, name or area matches
        #[arg(long)]
        filter: Option<String>,
        /// Write the bundle to a file instead of standard output
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Analytic,
    DualOpt,
    GaugeDecomp,
}

impl From<MethodArg> for KSupportMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Analytic => KSupportMethod::Analytic,
            MethodArg::DualOpt => KSupportMethod::DualOpt,
            MethodArg::GaugeDecomp => KSupportMethod::GaugeDecomp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PropertyArg {
    Monotonic,
    #[value(alias = "orthant-monotonic")]
    Om,
    #[value(alias = "orthant-strictly-monotonic")]
    Osm,
    Birkhoff,
    DualPairSupport,
    RestrictionDuality,
    OmRotundOsm,
    SphereIdentity,
    Gradedness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Increasing,
    Decreasing,
}

/// Validated run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub source: Option<NormSpec>,
    pub vectors: Vec<Vector>,
    /// Whether vectors came from a file (reports become lists).
    pub batch: bool,
    pub k: Option<usize>,
    pub tol: f64,
    pub trials: usize,
    pub seed: u64,
    pub format: Format,
    pub dim: Option<usize>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let c = cli.common;
        if !(c.tol > 0.0 && c.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("--tol must be positive, got {}", c.tol)));
        }
        if c.trials == 0 {
            return Err(Error::InvalidArgument("--trials must be at least 1".into()));
        }
        let source = c.source.as_deref().map(parse_source).transpose()?;
        let (vectors, batch) = match (&c.x, &c.input) {
            (Some(_), Some(_)) => return Err(Error::InvalidArgument("use either --x or --input, not both".into())),
            (Some(x), None) => (vec![parse_vector(x)?], false),
            (None, Some(path)) => (read_vectors(path)?, true),
            (None, None) => (Vec::new(), false),
        };
        Ok(RunConfig {
            command: cli.command,
            source,
            vectors,
            batch,
            k: c.k,
            tol: c.tol,
            trials: c.trials,
            seed: c.seed,
            format: c.format,
            dim: c.dim,
        })
    }
}

/// Exit code and the text for standard output and standard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
        _ => EXIT_USAGE,
    }
}

/// Parses a compact norm string or a JSON specification.
///
/// ```
/// use graded_norms::cli::parse_source;
/// assert_eq!(parse_source("lp:inf").unwrap().to_string(), "lp:inf");
/// assert!(parse_source("wlp:1:[1,2,3]").is_ok());
/// assert!(parse_source("atomic:[[2,1],[1,2]]").is_ok());
/// assert!(parse_source("hexagon").is_err());
/// ```
pub fn parse_source(s: &str) -> Result<NormSpec> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| Error::Parse(format!("norm specification: {e}")));
    }
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "lp" => parse_exponent(rest).and_then(spec_from_exponent),
        "wlp" => {
            let (p, w) = rest
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected wlp:<p>:[w1,..], got '{s}'")))?;
            let w = parse_vector(w)?;
            match parse_exponent(p)? {
                None => NormSpec::weighted_lp(f64::INFINITY, w),
                Some(p) => NormSpec::weighted_lp(p, w),
            }
        }
        "atomic" => {
            let text = match rest.strip_prefix('@') {
                Some(path) => std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("cannot read atoms file '{path}': {e}")))?,
                None => rest.to_string(),
            };
            parse_atoms(&text)
        }
        other => Err(Error::Parse(format!("unknown norm kind '{other}' (expected lp, wlp or atomic)"))),
    }
}

fn parse_exponent(p: &str) -> Result<Option<f64>> {
    match p.trim() {
        "inf" | "infinity" | "∞" => Ok(None),
        other => other
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Error::Parse(format!("invalid exponent '{other}'"))),
    }
}

fn spec_from_exponent(p: Option<f64>) -> Result<NormSpec> {
    match p {
        None => Ok(NormSpec::lp_inf()),
        Some(p) => NormSpec::lp(p),
    }
}

/// Atoms as a JSON array of arrays, or a full atomic specification.
fn parse_atoms(text: &str) -> Result<NormSpec> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("atoms: {e}")))?;
    if value.is_object() {
        return serde_json::from_value(value).map_err(|e| Error::Parse(format!("norm specification: {e}")));
    }
    let rows: Vec<Vec<f64>> = serde_json::from_value(value).map_err(|e| Error::Parse(format!("atoms: {e}")))?;
    NormSpec::atomic(rows.into_iter().map(Vector::new).collect::<Result<_>>()?)
}

/// Parses a JSON array such as `[0,3,0,-1]`.
pub fn parse_vector(s: &str) -> Result<Vector> {
    let xs: Vec<f64> =
        serde_json::from_str(s.trim()).map_err(|e| Error::Parse(format!("vector '{}': {e}", s.trim())))?;
    Vector::new(xs)
}

/// Reads vectors from a JSON file (one array or an array of arrays) or a CSV
/// file with one vector per row.
pub fn read_vectors(path: &Path) -> Result<Vec<Vector>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read '{}': {e}", path.display())))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        let value: Value = serde_json::from_str(trimmed).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let nested = value.as_array().is_some_and(|a| a.first().is_some_and(Value::is_array));
        let rows: Vec<Vec<f64>> = if nested {
            serde_json::from_value(value)
        } else {
            serde_json::from_value(value).map(|v| vec![v])
        }
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        return rows.into_iter().map(Vector::new).collect();
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let xs = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("{} row {}: '{f}' is not a number", path.display(), line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(Vector::new(xs)?);
    }
    if out.is_empty() {
        return Err(Error::Parse(format!("{} contains no vectors", path.display())));
    }
    Ok(out)
}

/// Dispatches a validated configuration.
pub fn run(config: &RunConfig) -> RunOutput {
    match dispatch(config) {
        Ok((code, stdout)) => RunOutput {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(e) => RunOutput {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn dispatch(config: &RunConfig) -> Result<(i32, String)> {
    match &config.command {
        Command::Suite { quick, filter, output } => run_suite(config, *quick, filter.as_deref(), output.as_deref()),
        Command::Check {
            property,
            set,
            strict,
            direction,
            margin,
        } => run_check(config, *property, set.as_deref(), *strict, *direction, *margin),
        command => {
            let source = config
                .source
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("--source is required".into()))?;
            if config.vectors.is_empty() {
                return Err(Error::InvalidArgument("a vector is required (--x or --input)".into()));
            }
            let records = config
                .vectors
                .iter()
                .map(|x| evaluate(command, source, x, config))
                .collect::<Result<Vec<_>>>()?;
            Ok((EXIT_OK, render_records(&records, config)))
        }
    }
}

/// Report of the single-value commands.
#[derive(Debug, Clone, Serialize)]
pub struct ValueReport {
    pub command: &'static str,
    pub source: NormSpec,
    pub x: Vector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub value: f64,
}

/// One evaluated vector.
#[derive(Serialize)]
#[serde(untagged)]
enum Record {
    Value(ValueReport),
    Sequence(SequenceReport),
    L0(L0Report),
}

/// Report of the `sequence` command.
#[derive(Debug, Clone, Serialize)]
pub struct SequenceReport {
    pub x: Vector,
    pub source: NormSpec,
    pub topk: Vec<f64>,
    pub ksupport: Vec<f64>,
    /// Stationarity index of the top-k sequence.
    pub stationary_from: usize,
    pub ksupport_stationary_from: usize,
    pub l0: usize,
    pub topk_monotone: bool,
    pub ksupport_monotone: bool,
    #[serde(skip)]
    topk_tolerance: Stationarity,
    #[serde(skip)]
    ksupport_tolerance: Stationarity,
}

/// Report of the `l0` command.
#[derive(Debug, Clone, Serialize)]
pub struct L0Report {
    pub source: NormSpec,
    pub x: Vector,
    pub l0: usize,
    pub l0_topk: usize,
    /// `None` when the k-support sequence never reaches the dual norm.
    pub l0_ksupport: Option<usize>,
    /// Level-set membership `l0 <= k` through the difference of norms, for `k = 1..d`.
    pub dc: Vec<bool>,
    pub verdict: L0Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct L0Verdict {
    pub topk_exact: bool,
    pub ksupport_exact: bool,
    pub dc_consistent: bool,
}

pub fn sequence_report(source: &NormSpec, x: &Vector, tol: f64) -> Result<SequenceReport> {
    let top = topk::topk_sequence(source, x, tol)?;
    let ks = topk::ksupport_sequence(source, x, tol)?;
    Ok(SequenceReport {
        x: x.clone(),
        source: source.clone(),
        stationary_from: top.stationary_from,
        ksupport_stationary_from: ks.stationary_from,
        l0: l0(x),
        topk_monotone: top.monotone_ok,
        ksupport_monotone: ks.monotone_ok,
        topk_tolerance: top.tolerance,
        ksupport_tolerance: ks.tolerance,
        topk: top.values,
        ksupport: ks.values,
    })
}

pub fn l0_report(source: &NormSpec, x: &Vector, tol: f64) -> Result<L0Report> {
    let l0_true = l0(x);
    let l0_topk = gradedness::l0_from_topk(source, x, tol)?;
    let l0_ksupport = match gradedness::l0_from_ksupport(source, x, tol) {
        Ok(k) => Some(k),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let dc = (1..=x.dim())
        .map(|k| gradedness::dc_level_membership(source, x, k, tol))
        .collect::<Result<Vec<_>>>()?;
    let dc_consistent = dc.iter().enumerate().all(|(i, &m)| m == (l0_topk <= i + 1));
    Ok(L0Report {
        source: source.clone(),
        x: x.clone(),
        l0: l0_true,
        l0_topk,
        l0_ksupport,
        dc,
        verdict: L0Verdict {
            topk_exact: l0_topk == l0_true,
            ksupport_exact: l0_ksupport == Some(l0_true),
            dc_consistent,
        },
    })
}

fn require_k(config: &RunConfig) -> Result<usize> {
    config
        .k
        .ok_or_else(|| Error::InvalidArgument("--k is required for this command".into()))
}

fn evaluate(command: &Command, source: &NormSpec, x: &Vector, config: &RunConfig) -> Result<Record> {
    let value = |command: &'static str, k: Option<usize>, value: f64| {
        Record::Value(ValueReport {
            command,
            source: source.clone(),
            x: x.clone(),
            k,
            value,
        })
    };
    Ok(match command {
        Command::Eval => value("eval", None, norms::eval(source, x)?),
        Command::Dual => value("dual", None, norms::dual_eval(source, x)?),
        Command::Topk => {
            let k = require_k(config)?;
            value("topk", Some(k), topk::topk_eval(source, k, x)?)
        }
        Command::Ksupport { method } => {
            let k = require_k(config)?;
            let method = method.map_or_else(|| topk::default_method(source), KSupportMethod::from);
            value("ksupport", Some(k), topk::ksupport_eval_with(source, k, x, config.tol, method)?)
        }
        Command::Sequence => Record::Sequence(sequence_report(source, x, config.tol)?),
        Command::L0 => Record::L0(l0_report(source, x, config.tol)?),
        Command::Check { .. } | Command::Suite { .. } => unreachable!("handled by dispatch"),
    })
}

fn vector_json(x: &Vector) -> String {
    serde_json::to_string(x).expect("vectors serialize")
}

fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn render_records(records: &[Record], config: &RunConfig) -> String {
    match config.format {
        Format::Json => {
            if config.batch {
                json_string(&records)
            } else {
                json_string(&records[0])
            }
        }
        Format::Csv => render_csv(records),
        Format::Human => records.iter().map(render_human).collect(),
    }
}

fn render_csv(records: &[Record]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: &[&str] = match &records[0] {
        Record::Value(_) => &["x", "k", "value"],
        Record::Sequence(_) => &["x", "k", "topk", "ksupport"],
        Record::L0(_) => &["x", "l0", "l0_topk", "l0_ksupport"],
    };
    w.write_record(header).expect("in-memory writes succeed");
    for r in records {
        let rows: Vec<Vec<String>> = match r {
            Record::Value(ValueReport { x, k, value, .. }) => {
                vec![vec![vector_json(x), k.map_or(String::new(), |k| k.to_string()), value.to_string()]]
            }
            Record::Sequence(s) => (0..s.topk.len())
                .map(|i| vec![vector_json(&s.x), (i + 1).to_string(), s.topk[i].to_string(), s.ksupport[i].to_string()])
                .collect(),
            Record::L0(l) => vec![vec![
                vector_json(&l.x),
                l.l0.to_string(),
                l.l0_topk.to_string(),
                l.l0_ksupport.map_or(String::new(), |k| k.to_string()),
            ]],
        };
        for row in rows {
            w.write_record(&row).expect("in-memory writes succeed");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory writer flushes")).expect("csv output is utf-8")
}

/// Chain of values with `=` (exact tie), `≤`/`≥` (tie within the
/// stationarity tolerance) and `<`/`>` (strict step) between neighbours.
pub fn render_chain(values: &[f64], tolerance: &Stationarity, increasing: bool) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            let prev = values[i - 1];
            let marker = if prev == *v {
                "="
            } else if tolerance.equal(prev, *v) {
                if increasing {
                    "≤"
                } else {
                    "≥"
                }
            } else if increasing {
                "<"
            } else {
                ">"
            };
            let _ = write!(out, " {marker} ");
        }
        let _ = write!(out, "{v}");
    }
    out
}

fn render_human(r: &Record) -> String {
    match r {
        Record::Value(v) => format!("{}\n", v.value),
        Record::Sequence(s) => {
            let top = NormSequenceReport {
                values: s.topk.clone(),
                stationary_from: s.stationary_from,
                monotone_ok: s.topk_monotone,
                tolerance: s.topk_tolerance,
            };
            format!(
                "x = {}\nsource = {}\nl0 = {}\ntop-k:     {}   (stationary from k = {})\nk-support: {}   (stationary from k = {})\n",
                s.x,
                s.source,
                s.l0,
                render_chain(&top.values, &top.tolerance, true),
                s.stationary_from,
                render_chain(&s.ksupport, &s.ksupport_tolerance, false),
                s.ksupport_stationary_from,
            )
        }
        Record::L0(l) => format!("{}\n", l.l0_topk),
    }
}

fn check_dim(config: &RunConfig) -> Result<usize> {
    let from_source = config.source.as_ref().and_then(NormSpec::fixed_dim);
    let from_vector = config.vectors.first().map(Vector::dim);
    let dim = config.dim.or(from_source).or(from_vector).unwrap_or(3);
    if let Some(d) = from_source {
        crate::vectors::check_same_dim(d, dim)?;
    }
    Ok(dim)
}

enum CheckOutcome {
    Property(PropertyReport),
    Gradedness(GradednessReport),
}

fn run_check(
    config: &RunConfig,
    property: PropertyArg,
    set: Option<&str>,
    strict: bool,
    direction: DirectionArg,
    margin: f64,
) -> Result<(i32, String)> {
    let source = config
        .source
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--source is required".into()))?;
    let dim = check_dim(config)?;
    let cfg = CheckConfig::new(dim)
        .trials(config.trials)
        .seed(config.seed)
        .tol(config.tol)
        .margin(margin);
    let outcome = match property {
        PropertyArg::Monotonic => CheckOutcome::Property(properties::check_monotonic(source, &cfg)?),
        PropertyArg::Om => CheckOutcome::Property(properties::check_orthant_monotonic(source, &cfg)?),
        PropertyArg::Osm => CheckOutcome::Property(properties::check_orthant_strictly_monotonic(source, &cfg)?),
        PropertyArg::Birkhoff => {
            let members: Vec<usize> = match set {
                Some(s) => serde_json::from_str(s).map_err(|e| Error::Parse(format!("--set: {e}")))?,
                None => vec![1],
            };
            let k = IndexSet::from_one_based(&members, dim)?;
            CheckOutcome::Property(properties::check_birkhoff(source, &k, strict, &cfg)?)
        }
        PropertyArg::DualPairSupport => CheckOutcome::Property(properties::check_dual_pair_support(source, &cfg)?),
        PropertyArg::RestrictionDuality => {
            CheckOutcome::Property(properties::check_restriction_duality(source, &cfg)?)
        }
        PropertyArg::OmRotundOsm => CheckOutcome::Property(properties::check_om_rotund_implies_osm(source, &cfg)?),
        PropertyArg::SphereIdentity => {
            let k = require_k(config)?;
            CheckOutcome::Property(properties::check_level_set_sphere_identity(source, k, &cfg)?)
        }
        PropertyArg::Gradedness => {
            let direction = match direction {
                DirectionArg::Increasing => Direction::Increasing,
                DirectionArg::Decreasing => Direction::Decreasing,
            };
            CheckOutcome::Gradedness(classify_gradedness(source, direction, strict, &cfg)?)
        }
    };
    let (verdict, text) = match &outcome {
        CheckOutcome::Property(r) => (r.verdict, render_property(r, config.format)),
        CheckOutcome::Gradedness(r) => (r.verdict, render_gradedness(r, config.format)),
    };
    let code = if verdict == Verdict::Falsified { EXIT_FALSIFIED } else { EXIT_OK };
    Ok((code, text))
}

fn render_property(r: &PropertyReport, format: Format) -> String {
    match format {
        Format::Json => json_string(r),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["property", "norm", "verdict", "trials", "seed", "dim", "margin", "witness"])
                .expect("in-memory writes succeed");
            let margin = r.margin.map_or(String::new(), |m| m.to_string());
            let witness = r
                .witness
                .as_ref()
                .map_or(String::new(), |w| serde_json::to_string(w).expect("witnesses serialize"));
            w.write_record([
                r.property.as_str(),
                r.norm.as_str(),
                &r.verdict.to_string(),
                &r.trials.to_string(),
                &r.seed.to_string(),
                &r.dim.to_string(),
                &margin,
                &witness,
            ])
            .expect("in-memory writes succeed");
            String::from_utf8(w.into_inner().expect("in-memory writer flushes")).expect("csv output is utf-8")
        }
        Format::Human => {
            let mut out = format!(
                "{}: {} for {} ({} trials, seed {}, dim {})\n",
                r.property, r.verdict, r.norm, r.trials, r.seed, r.dim
            );
            if let Some(m) = r.margin {
                let _ = writeln!(out, "smallest margin: {m}");
            }
            if let Some(note) = &r.note {
                let _ = writeln!(out, "note: {note}");
            }
            if let Some(w) = &r.witness {
                let _ = writeln!(out, "witness (trial {}, {}):", w.trial, w.subtest);
                for (name, v) in &w.inputs {
                    let _ = writeln!(out, "  {name} = {v}");
                }
                for (name, k) in &w.index_sets {
                    let _ = writeln!(out, "  {name} = {k}");
                }
                if let Some(k) = w.k {
                    let _ = writeln!(out, "  k = {k}");
                }
                let _ = writeln!(out, "  lhs = {}, rhs = {}, margin = {}", w.lhs, w.rhs, w.margin);
            }
            out
        }
    }
}

fn render_gradedness(r: &GradednessReport, format: Format) -> String {
    match format {
        Format::Json => json_string(r),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["source", "direction", "strict", "verdict", "trials", "seed", "dim", "forms_consistent"])
                .expect("in-memory writes succeed");
            w.write_record([
                r.source.to_string(),
                format!("{:?}", r.direction).to_lowercase(),
                r.strict.to_string(),
                r.verdict.to_string(),
                r.trials.to_string(),
                r.seed.to_string(),
                r.dim.to_string(),
                r.forms_consistent.to_string(),
            ])
            .expect("in-memory writes succeed");
            String::from_utf8(w.into_inner().expect("in-memory writer flushes")).expect("csv output is utf-8")
        }
        Format::Human => {
            let kind = if r.strict { "strictly " } else { "" };
            let dir = match r.direction {
                Direction::Increasing => "increasingly",
                Direction::Decreasing => "decreasingly",
            };
            let mut out = format!(
                "{kind}{dir} graded: {} for {} ({} trials, seed {}, dim {})\n",
                r.verdict, r.source, r.trials, r.seed, r.dim
            );
            if let Some(w) = &r.witness {
                let _ = writeln!(
                    out,
                    "witness x = {}: l0 = {}, recovered {}\n  {}",
                    w.x,
                    w.l0_true,
                    w.l0_recovered,
                    render_chain(&w.sequence.values, &w.sequence.tolerance, r.direction == Direction::Increasing)
                );
            }
            if !r.forms_consistent {
                out.push_str("the three forms disagree on at least one vector\n");
            }
            out
        }
    }
}

fn run_suite(config: &RunConfig, quick: bool, filter: Option<&str>, output: Option<&Path>) -> Result<(i32, String)> {
    let suite_config = SuiteConfig {
        quick,
        seed: config.seed,
        filter: filter.map(str::to_string),
    };
    let bundle = suite::run_suite(&suite_config)?;
    let text = json_string(&bundle);
    let code = if bundle.passed { EXIT_OK } else { EXIT_FALSIFIED };
    match output {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| Error::InvalidArgument(format!("cannot write '{}': {e}", path.display())))?;
            let summary = bundle
                .criteria
                .iter()
                .map(|c| format!("{:>2} {:<28} {}\n", c.id, c.name, if c.passed { "PASS" } else { "FAIL" }))
                .collect();
            Ok((code, summary))
        }
        None => Ok((code, text)),
    }
}

/// Parses arguments, runs, and returns the process exit code. Usage errors
/// from argument parsing exit with code 2.
pub fn main_with_args<I, T>(args: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                RunOutput {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                RunOutput {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    match RunConfig::from_cli(cli) {
        Ok(config) => run(&config),
        Err(e) => RunOutput {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}
