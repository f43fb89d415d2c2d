//! The `dq` command line: `nulldist`, `pi0`, `qvalue`, `analyze` and
//! `simulate`.
//!
//! Exit codes: 0 on success, 1 for I/O and data errors, 2 for usage errors.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::exact::{binomial, JiConfig, TestEngine, TestKind};
use crate::io::{check_on_support, fmt_decimal, fmt_fraction, parse_support, read_config, read_matrix, read_pvalues};
use crate::pi0::{estimate_pi0, ChenParams, Correction, Method, Pi0Estimate, Pi0Options, RandParams};
use crate::qvalue::{qvalues, reject};
use crate::sim::{run_monte_carlo_with_threads, McReport};
use crate::support::{PValueSample, Support};

/// A mistake in how the command was invoked; exits with code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

#[derive(Debug, Parser)]
#[command(name = "dq", version, about = "Exact P-values, pi0 estimation and q-values for discrete tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the support of a test's exact null P-value distribution.
    Nulldist(NulldistArgs),
    /// Estimate pi0 from a file of P-values.
    Pi0(Pi0Args),
    /// q-values and rejections for a file of P-values.
    Qvalue(QvalueArgs),
    /// Test every row of a data matrix, then estimate pi0 and q-values.
    Analyze(AnalyzeArgs),
    /// Run a Monte Carlo study from a JSON config.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn parse_test(s: &str) -> Result<TestKind, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(a) if a > 0.0 && a < 1.0 => Ok(a),
        _ => Err(format!("'{s}' is not a level in (0, 1)")),
    }
}

fn parse_correction(s: &str) -> Result<Correction, String> {
    match s {
        "pseudo-count" | "pseudo_count" => Ok(Correction::PseudoCount),
        "omitted" => Ok(Correction::Omitted),
        _ => Err(format!("'{s}' is not one of pseudo-count, omitted")),
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct NulldistArgs {
    #[arg(long, value_parser = parse_test)]
    pub test: TestKind,
    #[arg(long)]
    pub n1: usize,
    /// Second group size; ignored by one-sample tests.
    #[arg(long, default_value_t = 0)]
    pub n2: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Where the support of discrete P-values comes from.
#[derive(Debug, Args)]
pub struct SupportArgs {
    /// Support points as fractions (`1/35,8/35,27/35,1`) or a test null (`ks:4:4`).
    #[arg(long)]
    pub support: Option<String>,
    /// Take the support from this test's null, with --n1 and --n2.
    #[arg(long, value_parser = parse_test, conflicts_with = "support")]
    pub test: Option<TestKind>,
    #[arg(long, requires = "test")]
    pub n1: Option<usize>,
    #[arg(long, requires = "test")]
    pub n2: Option<usize>,
}

impl SupportArgs {
    fn resolve(&self) -> anyhow::Result<Option<Support>> {
        if let Some(spec) = &self.support {
            return match parse_support(spec) {
                Ok(s) => Ok(Some(s)),
                Err(e) => usage(format!("invalid --support: {e:#}")),
            };
        }
        let Some(test) = self.test else {
            return Ok(None);
        };
        let Some(n1) = self.n1 else {
            return usage("--test needs --n1");
        };
        let n2 = match (test.is_one_sample(), self.n2) {
            (true, _) => 0,
            (false, Some(n2)) => n2,
            (false, None) => return usage(format!("two-sample test {test} needs --n2")),
        };
        match test.support(n1, n2)? {
            Some(s) => Ok(Some(s)),
            None => usage(format!("test {test} has continuous P-values and no support")),
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    /// pi0 methods, comma separated (SS, ST, Liang, Chen, Rand). Defaults to
    /// every method that applies.
    #[arg(long = "methods", visible_alias = "method", value_delimiter = ',', value_parser = parse_method)]
    pub methods: Vec<Method>,
    /// Seed of the randomized estimator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Finite-sample terms of the tail-count estimators.
    #[arg(long, value_parser = parse_correction, default_value = "pseudo-count")]
    pub pi0_correction: Correction,
}

impl EstimatorArgs {
    fn options(&self) -> Pi0Options {
        Pi0Options {
            chen: ChenParams::default(),
            rand: RandParams {
                seed: self.seed,
                ..RandParams::default()
            },
            correction: self.pi0_correction,
        }
    }

    /// Requested methods, or the applicable defaults; ST is left out of the
    /// defaults below 10 P-values.
    fn resolve(&self, discrete: bool, m: usize) -> anyhow::Result<Vec<Method>> {
        if self.methods.is_empty() {
            let all = Method::ESTIMATORS.iter().copied();
            return Ok(all
                .filter(|mt| discrete || !mt.needs_support())
                .filter(|mt| *mt != Method::St || m >= 10)
                .collect());
        }
        let mut out: Vec<Method> = Vec::new();
        for &mt in &self.methods {
            if mt == Method::Real {
                return usage("method Real needs the true pi0 and is only available in simulations");
            }
            if mt.needs_support() && !discrete {
                return usage(format!("method {mt} needs discrete P-values; pass --support or --test"));
            }
            if !out.contains(&mt) {
                out.push(mt);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Args)]
pub struct Pi0Args {
    /// One P-value per line, or CSV with a `pvalue` column.
    pub file: PathBuf,
    #[command(flatten)]
    pub support: SupportArgs,
    #[command(flatten)]
    pub estimators: EstimatorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LevelArgs {
    #[arg(long, value_parser = parse_alpha, default_value = "0.05")]
    pub alpha: f64,
    /// Extra levels for a rejection-count sweep, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_alpha)]
    pub alpha_grid: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct QvalueArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub support: SupportArgs,
    #[command(flatten)]
    pub estimators: EstimatorArgs,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// CSV matrix: one row per variable, the n1 first-group samples then the
    /// second group. Optional header row and label column.
    pub matrix: PathBuf,
    #[arg(long, value_parser = parse_test)]
    pub test: TestKind,
    #[arg(long)]
    pub n1: usize,
    /// Defaults to the remaining columns.
    #[arg(long)]
    pub n2: Option<usize>,
    #[command(flatten)]
    pub estimators: EstimatorArgs,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON scenario config.
    pub config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output prefix: writes PREFIX.csv and PREFIX.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Format of the report on stdout when --out is absent.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub fraction: String,
    /// The point over the common denominator of the support, e.g. `35/35`.
    pub common: String,
    pub value: f64,
    /// Null probability `t_j - t_{j-1}`.
    pub mass: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistReport {
    pub test: TestKind,
    pub n1: usize,
    pub n2: usize,
    pub points: Vec<SupportPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: Method,
    pub pi0: Pi0Estimate,
    pub rejections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableRow {
    pub variable: String,
    pub pvalue: Option<f64>,
    /// Exact fraction for discrete tests.
    pub pvalue_exact: Option<String>,
    /// One entry per method, `None` for variables that failed.
    pub qvalues: Vec<Option<f64>>,
    pub rejected: Vec<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub method: Method,
    pub rejections: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QReport {
    pub alpha: f64,
    pub methods: Vec<MethodRow>,
    pub variables: Vec<VariableRow>,
    pub sweep: Vec<SweepRow>,
}

fn opt_decimal(x: Option<f64>) -> String {
    x.map(fmt_decimal).unwrap_or_default()
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| anyhow!("{e}"))
}

fn json_bytes<T: Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn write_to(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            Ok(out.flush()?)
        }
    }
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn nulldist(args: &NulldistArgs) -> anyhow::Result<()> {
    let n2 = if args.test.is_one_sample() { 0 } else { args.n2 };
    let Some(support) = args.test.support(args.n1, n2)? else {
        return usage(format!("test {} has continuous P-values and no support", args.test));
    };
    // distinct assignments (halved when swapping groups or signs leaves the
    // folded statistic unchanged), when every point is a multiple of it
    let lcm = support.points().iter().fold(1i64, |l, p| {
        let d = *p.denom();
        l / gcd(l, d) * d
    });
    let assignments = if args.test == TestKind::SignedRank {
        1u128.checked_shl(args.n1 as u32).unwrap_or(0)
    } else {
        binomial(args.n1 + n2, args.n1)
    };
    let symmetric = args.test == TestKind::SignedRank || args.n1 == n2;
    let assignments = if symmetric { assignments / 2 } else { assignments };
    let lcm = match i64::try_from(assignments) {
        Ok(a) if a > 0 && a % lcm == 0 => a,
        _ => lcm,
    };
    let report = NullDistReport {
        test: args.test,
        n1: args.n1,
        n2,
        points: (0..support.len())
            .map(|i| SupportPoint {
                fraction: fmt_fraction(&support.point(i)),
                common: {
                    let p = support.point(i);
                    format!("{}/{lcm}", p.numer() * (lcm / p.denom()))
                },
                value: support.point_f64(i),
                mass: fmt_fraction(&support.jump(i)),
            })
            .collect(),
    };
    let bytes = match args.output.format {
        Format::Json => json_bytes(&report)?,
        Format::Csv => csv_bytes(
            &header(&["index", "fraction", "common", "decimal", "mass"]),
            report
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    vec![
                        (i + 1).to_string(),
                        p.fraction.clone(),
                        p.common.clone(),
                        fmt_decimal(p.value),
                        p.mass.clone(),
                    ]
                }),
        )?,
    };
    write_to(args.output.out.as_deref(), &bytes)
}

fn load_sample(file: &Path, support: &SupportArgs) -> anyhow::Result<(PValueSample, Vec<u64>)> {
    let support = support.resolve()?;
    let data = read_pvalues(file)?;
    let sample = match support {
        Some(s) => {
            check_on_support(&data, &s)?;
            PValueSample::with_support(&data.values, s)?
        }
        None => PValueSample::new(data.values.clone())?,
    };
    Ok((sample, data.lines))
}

fn estimates(methods: &[Method], sample: &PValueSample, options: &Pi0Options) -> anyhow::Result<Vec<Pi0Estimate>> {
    methods
        .iter()
        .map(|&mt| estimate_pi0(mt, sample, options).with_context(|| format!("method {mt}")))
        .collect()
}

fn pi0(args: &Pi0Args) -> anyhow::Result<()> {
    let (sample, _) = load_sample(&args.file, &args.support)?;
    let methods = args.estimators.resolve(sample.support().is_some(), sample.m())?;
    let est = estimates(&methods, &sample, &args.estimators.options())?;
    for e in &est {
        if let Some(w) = &e.warning {
            eprintln!("warning: {}: {w}", e.method);
        }
    }
    let bytes = match args.output.format {
        Format::Json => json_bytes(&est)?,
        Format::Csv => csv_bytes(
            &header(&["method", "value", "raw", "lambda_chosen"]),
            est.iter().map(|e| {
                vec![
                    e.method.to_string(),
                    fmt_decimal(e.value),
                    fmt_decimal(e.raw),
                    opt_decimal(e.lambda_chosen),
                ]
            }),
        )?,
    };
    write_to(args.output.out.as_deref(), &bytes)
}

/// Variable outcomes before multiple testing: a P-value (with its exact
/// fraction) or an error message.
struct Tested {
    label: String,
    outcome: Result<(f64, Option<String>), String>,
}

fn q_report(
    tested: Vec<Tested>,
    sample: &PValueSample,
    est: Vec<Pi0Estimate>,
    levels: &LevelArgs,
) -> anyhow::Result<QReport> {
    let qs: Vec<_> = est.iter().map(|e| qvalues(sample, e)).collect();
    let methods = est
        .iter()
        .zip(&qs)
        .map(|(e, q)| {
            Ok(MethodRow {
                method: e.method,
                pi0: e.clone(),
                rejections: reject(q, levels.alpha)?.r,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut k = 0;
    let variables = tested
        .into_iter()
        .map(|t| match t.outcome {
            Ok((p, exact)) => {
                let q: Vec<f64> = qs.iter().map(|q| q.qvalues[k]).collect();
                k += 1;
                VariableRow {
                    variable: t.label,
                    pvalue: Some(p),
                    pvalue_exact: exact,
                    rejected: q.iter().map(|&v| v <= levels.alpha).collect(),
                    qvalues: q.into_iter().map(Some).collect(),
                    error: None,
                }
            }
            Err(e) => VariableRow {
                variable: t.label,
                pvalue: None,
                pvalue_exact: None,
                qvalues: vec![None; qs.len()],
                rejected: vec![false; qs.len()],
                error: Some(e),
            },
        })
        .collect();
    let mut grid = levels.alpha_grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut sweep = Vec::new();
    for &alpha in &grid {
        for q in &qs {
            sweep.push(SweepRow {
                alpha,
                method: q.method,
                rejections: reject(q, alpha)?.r,
            });
        }
    }
    Ok(QReport {
        alpha: levels.alpha,
        methods,
        variables,
        sweep,
    })
}

/// `dir/stem.ext` becomes `dir/stem.suffix.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn emit_q_report(report: &QReport, output: &OutputArgs) -> anyhow::Result<()> {
    if output.format == Format::Json {
        return write_to(output.out.as_deref(), &json_bytes(report)?);
    }
    let mut cols = header(&["variable", "pvalue", "pvalue_exact"]);
    for m in &report.methods {
        cols.push(format!("q_{}", m.method));
        cols.push(format!("rejected_{}", m.method));
    }
    cols.push("error".into());
    let rows = report.variables.iter().map(|v| {
        let mut row = vec![v.variable.clone(), opt_decimal(v.pvalue), v.pvalue_exact.clone().unwrap_or_default()];
        for (q, r) in v.qvalues.iter().zip(&v.rejected) {
            row.push(opt_decimal(*q));
            row.push(if v.error.is_some() { String::new() } else { r.to_string() });
        }
        row.push(v.error.clone().unwrap_or_default());
        row
    });
    let variables = csv_bytes(&cols, rows)?;
    let summary = csv_bytes(
        &header(&["method", "pi0", "pi0_raw", "lambda_chosen", "alpha", "rejections"]),
        report.methods.iter().map(|m| {
            vec![
                m.method.to_string(),
                fmt_decimal(m.pi0.value),
                fmt_decimal(m.pi0.raw),
                opt_decimal(m.pi0.lambda_chosen),
                fmt_decimal(report.alpha),
                m.rejections.to_string(),
            ]
        }),
    )?;
    let sweep = csv_bytes(
        &header(&["alpha", "method", "rejections"]),
        report
            .sweep
            .iter()
            .map(|s| vec![fmt_decimal(s.alpha), s.method.to_string(), s.rejections.to_string()]),
    )?;
    match &output.out {
        Some(path) => {
            write_to(Some(path), &variables)?;
            write_to(Some(&sibling(path, "summary")), &summary)?;
            if !report.sweep.is_empty() {
                write_to(Some(&sibling(path, "sweep")), &sweep)?;
            }
        }
        None => {
            write_to(None, &variables)?;
            let mut err = std::io::stderr().lock();
            err.write_all(&summary)?;
            if !report.sweep.is_empty() {
                err.write_all(&sweep)?;
            }
        }
    }
    Ok(())
}

fn qvalue(args: &QvalueArgs) -> anyhow::Result<()> {
    let (sample, lines) = load_sample(&args.file, &args.support)?;
    let methods = args.estimators.resolve(sample.support().is_some(), sample.m())?;
    let est = estimates(&methods, &sample, &args.estimators.options())?;
    let tested = lines
        .iter()
        .enumerate()
        .map(|(i, line)| Tested {
            label: line.to_string(),
            outcome: Ok((
                sample.values()[i],
                sample
                    .support()
                    .zip(sample.levels())
                    .map(|(s, l)| fmt_fraction(&s.point(l[i]))),
            )),
        })
        .collect();
    let report = q_report(tested, &sample, est, &args.levels)?;
    emit_q_report(&report, &args.output)
}

fn analyze(args: &AnalyzeArgs) -> anyhow::Result<()> {
    let matrix = read_matrix(&args.matrix)?;
    let width = matrix.rows[0].len();
    let one_sample = args.test.is_one_sample();
    let n2 = match args.n2 {
        _ if one_sample => 0,
        Some(n2) => n2,
        None if width > args.n1 => width - args.n1,
        None => return usage(format!("--n1 {} leaves no columns for the second group", args.n1)),
    };
    if args.n1 + n2 != width {
        return usage(format!(
            "matrix has {width} sample columns but n1 + n2 = {}",
            args.n1 + n2
        ));
    }
    let engine = match TestEngine::new(args.test, args.n1, n2, JiConfig::default()) {
        Ok(e) => e,
        Err(e @ crate::Error::SampleSize(_)) => return usage(e.to_string()),
        Err(e) => return Err(e.into()),
    };
    let mut pvalues = Vec::new();
    let tested: Vec<Tested> = matrix
        .labels
        .iter()
        .zip(&matrix.rows)
        .map(|(label, row)| {
            let (x, y) = row.split_at(args.n1);
            let outcome = engine
                .pvalue(x, y)
                .map(|p| {
                    pvalues.push(p);
                    (p.value, engine.exact(&p).map(|r| fmt_fraction(&r)))
                })
                .map_err(|e| e.to_string());
            Tested {
                label: label.clone(),
                outcome,
            }
        })
        .collect();
    let failed = tested.iter().filter(|t| t.outcome.is_err()).count();
    if pvalues.is_empty() {
        let (label, first) = tested
            .iter()
            .find_map(|t| t.outcome.as_ref().err().map(|e| (&t.label, e)))
            .expect("every variable failed");
        bail!("none of the {failed} variables could be tested; first failure, {label}: {first}");
    }
    if failed > 0 {
        eprintln!("warning: {failed} variable(s) could not be tested and are excluded");
    }
    let sample = engine.sample(&pvalues)?;
    let methods = args.estimators.resolve(engine.support().is_some(), sample.m())?;
    let est = estimates(&methods, &sample, &args.estimators.options())?;
    let report = q_report(tested, &sample, est, &args.levels)?;
    emit_q_report(&report, &args.output)
}

/// One CSV row per method; power and sd are empty when undefined.
pub fn mc_csv(report: &McReport) -> anyhow::Result<Vec<u8>> {
    csv_bytes(
        &header(&["method", "fdr", "power", "pi0_mean", "pi0_bias", "pi0_sd"]),
        report.methods.iter().map(|m| {
            vec![
                m.method.to_string(),
                fmt_decimal(m.fdr),
                opt_decimal(m.power),
                fmt_decimal(m.pi0_mean),
                fmt_decimal(m.pi0_bias),
                opt_decimal(m.pi0_sd),
            ]
        }),
    )
}

fn threads() -> anyhow::Result<Option<usize>> {
    match std::env::var("DQ_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => usage(format!("DQ_THREADS must be a positive integer, got '{v}'")),
        },
    }
}

fn simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let threads = threads()?;
    let mut config = read_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let resolved = json_bytes(&config)?;
    let report = run_monte_carlo_with_threads(&config, threads)?;
    match &args.out {
        Some(prefix) => {
            let with_ext = |ext: &str| {
                let mut p = prefix.clone().into_os_string();
                p.push(ext);
                PathBuf::from(p)
            };
            write_to(Some(&with_ext(".csv")), &mc_csv(&report)?)?;
            write_to(Some(&with_ext(".json")), &json_bytes(&report)?)?;
            write_to(None, &resolved)
        }
        None => {
            std::io::stderr().lock().write_all(&resolved)?;
            let bytes = match args.format {
                Format::Csv => mc_csv(&report)?,
                Format::Json => json_bytes(&report)?,
            };
            write_to(None, &bytes)
        }
    }
}

pub fn execute(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Nulldist(a) => nulldist(a),
        Command::Pi0(a) => pi0(a),
        Command::Qvalue(a) => qvalue(a),
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
    }
}

/// Parses `args`, runs the command and maps failures to exit codes.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_subcommand() {
        let ok = |args: &[&str]| Cli::try_parse_from(args).unwrap();
        ok(&["dq", "nulldist", "--test", "ks", "--n1", "4", "--n2", "4"]);
        ok(&["dq", "pi0", "p.txt", "--support", "1/2,1", "--methods", "SS,Liang"]);
        ok(&["dq", "qvalue", "p.txt", "--method", "SS", "--alpha-grid", "0.01,0.1"]);
        ok(&["dq", "analyze", "m.csv", "--test", "wilcoxon", "--n1", "4", "--format", "json"]);
        ok(&["dq", "simulate", "c.json", "--out", "r", "--seed", "3"]);
        assert!(Cli::try_parse_from(["dq", "nulldist", "--test", "nope", "--n1", "4"]).is_err());
        assert!(Cli::try_parse_from(["dq", "qvalue", "p.txt", "--alpha", "1.5"]).is_err());
    }

    #[test]
    fn default_methods() {
        let cli = Cli::try_parse_from(["dq", "pi0", "p.txt"]).unwrap();
        let Command::Pi0(a) = cli.command else { unreachable!() };
        assert_eq!(a.estimators.resolve(false, 50).unwrap(), vec![Method::Ss, Method::St]);
        assert_eq!(a.estimators.resolve(true, 5).unwrap().len(), 4);
        let cli = Cli::try_parse_from(["dq", "pi0", "p.txt", "--methods", "Chen,Real"]).unwrap();
        let Command::Pi0(a) = cli.command else { unreachable!() };
        assert!(a.estimators.resolve(true, 50).unwrap_err().downcast_ref::<UsageError>().is_some());
    }

    #[test]
    fn siblings() {
        assert_eq!(sibling(Path::new("out/res.csv"), "summary"), PathBuf::from("out/res.summary.csv"));
    }
}
