//! Batch driver behind the `nclp` binary: configuration, dispatch of checks
//! and constructions, and versioned reports.
//!
//! Every command is deterministic in `(config, seed)`: random inputs come
//! from labelled substreams and parallel sweeps are collected in order, so
//! the thread count never changes a report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::Parser;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gns::{gns_construct, verify_representation, GnsSource};
use crate::inequalities::{
    check_cs_lp, check_cs_normal, check_re_im, default_grid, ratio_case, ratio_sampler, tol_report, uncertainty_check,
    CsConstant, InequalityReport, PositiveMap, RatioProfile, Status,
};
use crate::io::{AlgebraSpec, MatrixFile};
use crate::kernel_examples::{Kernel, KernelMap};
use crate::linalg::{self, ONE, ZERO};
use crate::radius_norms::{
    check_cs_operator_valued, check_cs_triple, numerical_radius_element, numerical_radius_witness, triple_norm,
    Budget, NormStatus, OperatorValuedMap, TargetNorm,
};
use crate::rng;
use crate::sesquilinear::{LinearMap, MapKind};
use crate::star_domain::{AlgebraVector, Builtin, StarAlgebra};
use crate::traced_algebra::{
    holder_check, rho_product, schatten_norm, spectral_tail_projection, AlgebraElement, PExponent, TracedAlgebra,
};

/// Schema version of [`RunReport`].
pub const REPORT_VERSION: &str = "1.0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Norms,
    CheckCsLp,
    CheckCsNormal,
    CheckReIm,
    CheckUncertainty,
    CheckCsOpvalued,
    TripleNorm,
    NumericalRadius,
    Gns,
    KernelDemo,
    SampleRatios,
    CheckAll,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Command line flags. A `--config` JSON file may set the same fields
/// (kebab-case keys); flags given on the command line win.
#[derive(Clone, Debug, Default, Parser, Deserialize)]
#[command(name = "nclp", version, about = "Noncommutative L^p inequality checks on traced matrix algebras")]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct CliArgs {
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON file with default values for any of the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Schatten exponent, at least 1 (`inf` allowed).
    #[arg(long)]
    pub p: Option<String>,
    /// Cauchy–Schwarz constant: `2`, `sqrt2`, `1` or a number.
    #[arg(long)]
    pub constant: Option<String>,
    /// Target block sizes.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Trace weights, one per block (default all 1).
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    #[arg(long)]
    pub domain_dim: Option<usize>,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Search starts of the nonconvex norm maximisations.
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Target norm of operator-valued checks: `nr`, `triple2` or `schatten:<p>`.
    #[arg(long)]
    pub norm: Option<String>,
    /// Kernel: `affine[:a,b]`, `constant[:c]` or `exponential[:rate]`.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Random map family: `kraus` or `mixed`.
    #[arg(long)]
    pub map_kind: Option<String>,
    /// Absolute report tolerance overriding `1e-8·(1 + rhs)`.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Validated configuration of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub p: PExponent,
    pub constant: CsConstant,
    pub dims: Vec<usize>,
    pub weights: Vec<f64>,
    pub domain_dim: usize,
    pub rank: usize,
    pub trials: usize,
    pub budget: Budget,
    pub norm: TargetNorm,
    pub kernel: Kernel,
    pub map_kind: MapKind,
    pub tol: Option<f64>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Defaults for `command` with seed 0.
    pub fn new(command: Command) -> Self {
        Self {
            command,
            seed: 0,
            p: PExponent::Finite(2.0),
            constant: CsConstant::Sqrt2,
            dims: vec![2],
            weights: vec![1.0],
            domain_dim: 3,
            rank: 2,
            trials: 100,
            budget: Budget::default(),
            norm: TargetNorm::NumericalRadius,
            kernel: Kernel::affine(),
            map_kind: MapKind::Mixed,
            tol: None,
            input: None,
            output: None,
            format: Format::Json,
            threads: None,
        }
    }

    /// Target algebra built from `dims` and `weights`.
    pub fn target(&self) -> Result<Arc<TracedAlgebra>> {
        TracedAlgebra::new(self.dims.clone(), self.weights.clone())
    }
}

fn parse_constant(s: &str) -> Result<CsConstant> {
    match s.trim() {
        "2" | "two" => Ok(CsConstant::Two),
        "sqrt2" | "√2" => Ok(CsConstant::Sqrt2),
        "1" | "one" => Ok(CsConstant::One),
        t => {
            let c: f64 = t.parse().map_err(|_| Error::Parse(format!("bad constant {t:?}")))?;
            if c.is_finite() && c > 0.0 {
                Ok(CsConstant::Custom(c))
            } else {
                Err(Error::Domain(format!("constant must be positive, got {c}")))
            }
        }
    }
}

fn parse_map_kind(s: &str) -> Result<MapKind> {
    match s.trim() {
        "kraus" => Ok(MapKind::Kraus),
        "mixed" => Ok(MapKind::Mixed),
        t => Err(Error::Parse(format!("unknown map kind {t:?}"))),
    }
}

/// Fills unset fields of `args` from `base`.
fn merge(args: CliArgs, base: CliArgs) -> CliArgs {
    CliArgs {
        command: args.command.or(base.command),
        config: args.config,
        seed: args.seed.or(base.seed),
        p: args.p.or(base.p),
        constant: args.constant.or(base.constant),
        dims: args.dims.or(base.dims),
        weights: args.weights.or(base.weights),
        domain_dim: args.domain_dim.or(base.domain_dim),
        rank: args.rank.or(base.rank),
        trials: args.trials.or(base.trials),
        starts: args.starts.or(base.starts),
        iters: args.iters.or(base.iters),
        norm: args.norm.or(base.norm),
        kernel: args.kernel.or(base.kernel),
        map_kind: args.map_kind.or(base.map_kind),
        tol: args.tol.or(base.tol),
        input: args.input.or(base.input),
        output: args.output.or(base.output),
        format: args.format.or(base.format),
        threads: args.threads.or(base.threads),
    }
}

/// Parses argv (program name first), merges an optional config file and
/// validates. Problems with individual fields are collected into one
/// [`Error::Config`]; an exponent below 1 is a domain error.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = CliArgs::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    let cli = match &cli.config {
        Some(path) => {
            let text = crate::io::read_text(path)?;
            let base: CliArgs = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            merge(cli, base)
        }
        None => cli,
    };
    config_from_args(cli)
}

/// Validates merged arguments.
pub fn config_from_args(a: CliArgs) -> Result<RunConfig> {
    let command = a.command.ok_or_else(|| Error::Config("missing required field `command`".into()))?;
    let mut c = RunConfig::new(command);
    let mut problems: Vec<String> = Vec::new();
    if let Some(p) = &a.p {
        c.p = p.parse::<PExponent>()?;
    } else if command == Command::CheckCsNormal {
        c.p = PExponent::Finite(2.0);
    }
    c.constant = match &a.constant {
        Some(s) => parse_constant(s)?,
        None if c.p == PExponent::Finite(1.0) => CsConstant::One,
        None => CsConstant::default_for(c.p),
    };
    c.seed = a.seed.unwrap_or(0);
    if let Some(d) = a.dims {
        c.dims = d;
    }
    c.weights = a.weights.unwrap_or_else(|| vec![1.0; c.dims.len()]);
    if c.dims.is_empty() || c.dims.contains(&0) {
        problems.push("`dims` must be a nonempty list of positive sizes".into());
    }
    if c.weights.len() != c.dims.len() {
        problems.push(format!("`weights` has {} entries for {} blocks", c.weights.len(), c.dims.len()));
    }
    if let Some(d) = a.domain_dim {
        c.domain_dim = d;
    }
    if c.domain_dim == 0 {
        problems.push("`domain-dim` must be positive".into());
    }
    if let Some(r) = a.rank {
        c.rank = r;
    }
    if c.rank == 0 {
        problems.push("`rank` must be positive".into());
    }
    if let Some(t) = a.trials {
        c.trials = t;
    }
    if c.trials == 0 {
        problems.push("`trials` must be positive".into());
    }
    c.budget = Budget {
        starts: a.starts.unwrap_or(c.budget.starts),
        iters: a.iters.unwrap_or(c.budget.iters),
        seed: c.seed,
    };
    if c.budget.starts == 0 {
        problems.push("`starts` must be positive".into());
    }
    if let Some(n) = &a.norm {
        c.norm = n.parse()?;
    }
    if let Some(k) = &a.kernel {
        c.kernel = k.parse()?;
    }
    if let Some(k) = &a.map_kind {
        c.map_kind = parse_map_kind(k)?;
    }
    if let Some(t) = a.tol {
        if !(t.is_finite() && t >= 0.0) {
            problems.push(format!("`tol` must be a nonnegative number, got {t}"));
        }
        c.tol = Some(t);
    }
    c.input = a.input;
    c.output = a.output;
    c.format = a.format.unwrap_or_default();
    c.threads = a.threads;
    if c.threads == Some(0) {
        problems.push("`threads` must be positive".into());
    }
    if command == Command::Gns && c.input.is_none() {
        problems.push("missing required field `input` for gns".into());
    }
    if command == Command::CheckCsNormal && c.p == PExponent::Finite(1.0) {
        return Err(Error::Domain("check-cs-normal needs p > 1".into()));
    }
    if command == Command::CheckReIm && c.p != PExponent::Finite(2.0) {
        problems.push("check-re-im is stated for p = 2".into());
    }
    if !problems.is_empty() {
        return Err(Error::Config(problems.join("; ")));
    }
    Ok(c)
}

/// One entry of `results[]`.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub status: Status,
    /// Headline number: largest ratio of a sweep, or the computed value.
    #[serde(with = "crate::io::extended_f64")]
    pub value: f64,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub status: Status,
    pub checks: usize,
    pub holds: usize,
    pub holds_within_tol: usize,
    pub violated: usize,
    pub inconclusive: usize,
}

impl Summary {
    fn of(results: &[CheckResult]) -> Self {
        let count = |s: Status| results.iter().filter(|r| r.status == s).count();
        Self {
            status: results.iter().fold(Status::Holds, |acc, r| acc.worst(r.status)),
            checks: results.len(),
            holds: count(Status::Holds),
            holds_within_tol: count(Status::HoldsWithinTol),
            violated: count(Status::Violated),
            inconclusive: count(Status::Inconclusive),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub version: String,
    pub config: RunConfig,
    pub wall_time_s: f64,
    pub results: Vec<CheckResult>,
    pub summary: Summary,
    /// Ratio table of `sample-ratios`, emitted as the CSV body.
    #[serde(skip)]
    pub ratio_csv: Option<String>,
}

impl RunReport {
    pub fn new(config: RunConfig, results: Vec<CheckResult>) -> Self {
        Self {
            version: REPORT_VERSION.into(),
            summary: Summary::of(&results),
            config,
            wall_time_s: 0.0,
            results,
            ratio_csv: None,
        }
    }

    /// JSON document; without wall time it is a pure function of the config.
    pub fn to_json(&self, with_wall_time: bool) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if !with_wall_time {
            v.as_object_mut().expect("object").remove("wall_time_s");
        }
        let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
        s.push('\n');
        s
    }

    /// The `sample-ratios` table, or one `check,status,value` line per result.
    pub fn to_csv(&self) -> String {
        if let Some(csv) = &self.ratio_csv {
            return csv.clone();
        }
        let mut out = String::from("check,status,value\n");
        for r in &self.results {
            let status = serde_json::to_value(r.status).expect("status serializes");
            let _ = writeln!(out, "{},{},{:?}", r.check, status.as_str().unwrap_or(""), r.value);
        }
        out
    }

    /// 0 when every result holds (within tolerance), 1 on a violation,
    /// 3 when something is inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.summary.status {
            Status::Holds | Status::HoldsWithinTol => 0,
            Status::Violated => 1,
            Status::Inconclusive => 3,
        }
    }
}

/// Writes the report in `format` to `path`, or to stdout without a path.
pub fn emit_report(report: &RunReport, format: Format, path: Option<&Path>) -> Result<()> {
    let text = match format {
        Format::Json => report.to_json(true),
        Format::Csv => report.to_csv(),
    };
    match path {
        Some(p) => crate::io::write_text(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs the configured command, on a dedicated pool when `threads` is set.
pub fn execute(config: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut report = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| dispatch(config))?,
        None => dispatch(config)?,
    };
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

fn dispatch(c: &RunConfig) -> Result<RunReport> {
    let mut csv = None;
    let results = match c.command {
        Command::Norms => cmd_norms(c)?,
        Command::CheckCsLp => vec![sweep_cs_lp(c, c.p, c.constant, c.trials, true)?],
        Command::CheckCsNormal => vec![sweep_cs_normal(c, c.p, c.trials, true)?],
        Command::CheckReIm => sweep_re_im(c, c.trials, true)?,
        Command::CheckUncertainty => vec![cmd_uncertainty(c)?],
        Command::CheckCsOpvalued => vec![sweep_opvalued(c, c.trials, c.budget, true)?],
        Command::TripleNorm => cmd_triple(c)?,
        Command::NumericalRadius => cmd_radius(c)?,
        Command::Gns => cmd_gns(c)?,
        Command::KernelDemo => cmd_kernel(c)?,
        Command::SampleRatios => {
            let (r, table) = cmd_ratios(c)?;
            csv = Some(table);
            vec![r]
        }
        Command::CheckAll => check_all(c)?,
    };
    let mut report = RunReport::new(c.clone(), results);
    report.ratio_csv = csv;
    Ok(report)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn retol(r: InequalityReport, tol: Option<f64>) -> InequalityReport {
    match tol {
        Some(t) => {
            let mut out = InequalityReport::new(r.check.clone(), r.lhs, r.rhs, t);
            out.constant = r.constant;
            out.normality_residual = r.normality_residual;
            out.witness = r.witness;
            out
        }
        None => r,
    }
}

/// One result summarising a list of reports: worst status, largest ratio and
/// the report that attained it.
fn sweep_result(check: &str, reports: &[InequalityReport], extra: Value, all: bool) -> CheckResult {
    let status = reports.iter().fold(Status::Holds, |acc, r| acc.worst(r.status));
    let worst = reports
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |acc, (i, r)| match acc {
            Some((_, m)) if !(r.ratio > m) => acc,
            _ => Some((i, r.ratio)),
        });
    let mut detail = json!({
        "trials": reports.len(),
        "violations": reports.iter().filter(|r| r.status == Status::Violated).count(),
        "worst": worst.map(|(i, _)| to_value(&reports[i])),
        "params": extra,
    });
    if all {
        detail["reports"] = to_value(&reports);
    }
    CheckResult { check: check.into(), status, value: worst.map_or(0.0, |w| w.1), detail }
}

fn ratio_profile(c: &RunConfig, p: PExponent, targets: Vec<Arc<TracedAlgebra>>, trials: usize, label: u64) -> RatioProfile {
    RatioProfile {
        p,
        targets,
        dims: vec![c.domain_dim],
        max_rank: c.rank,
        kind: c.map_kind,
        trials,
        seed: c.seed.wrapping_add(label),
    }
}

/// A certified map with its argument pair.
type PositiveCase = (PositiveMap, Vec<Complex64>, Vec<Complex64>);

/// Certified-positive trials of a profile, in trial order.
fn positive_cases(profile: &RatioProfile) -> Result<Vec<PositiveCase>> {
    (0..profile.trials)
        .into_par_iter()
        .map(|t| {
            let case = ratio_case(profile, t)?;
            let pm = PositiveMap::certify(case.map, 64, case.map_seed)?;
            Ok((pm, case.x, case.y))
        })
        .collect()
}

fn sweep_cs_lp(c: &RunConfig, p: PExponent, constant: CsConstant, trials: usize, all: bool) -> Result<CheckResult> {
    let profile = ratio_profile(c, p, vec![c.target()?], trials, 0);
    let reports = positive_cases(&profile)?
        .par_iter()
        .map(|(pm, x, y)| check_cs_lp(pm, x, y, p, constant).map(|r| retol(r, c.tol)))
        .collect::<Result<Vec<_>>>()?;
    let c_used = if p == PExponent::Finite(1.0) { 1.0 } else { constant.value() };
    Ok(sweep_result("cs_lp", &reports, json!({"p": p, "constant": c_used}), all))
}

/// Commutative target with the configured total dimension.
fn commutative_target(c: &RunConfig) -> Result<Arc<TracedAlgebra>> {
    let n: usize = c.dims.iter().sum();
    let weights: Vec<f64> = c
        .dims
        .iter()
        .zip(&c.weights)
        .flat_map(|(&d, &w)| std::iter::repeat_n(w, d))
        .collect();
    TracedAlgebra::new(vec![1; n], weights)
}

fn sweep_cs_normal(c: &RunConfig, p: PExponent, trials: usize, all: bool) -> Result<CheckResult> {
    let profile = ratio_profile(c, p, vec![commutative_target(c)?], trials, 1);
    let reports = positive_cases(&profile)?
        .par_iter()
        .map(|(pm, x, y)| check_cs_normal(pm, x, y, p).map(|r| retol(r, c.tol)))
        .collect::<Result<Vec<_>>>()?;
    Ok(sweep_result("cs_normal", &reports, json!({"p": p}), all))
}

fn sweep_re_im(c: &RunConfig, trials: usize, all: bool) -> Result<Vec<CheckResult>> {
    let two = PExponent::Finite(2.0);
    let profile = ratio_profile(c, two, vec![c.target()?], trials, 2);
    let pairs = positive_cases(&profile)?
        .par_iter()
        .map(|(pm, x, y)| check_re_im(pm, x, y).map(|(a, b)| (retol(a, c.tol), retol(b, c.tol))))
        .collect::<Result<Vec<_>>>()?;
    let (re, im): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok(vec![
        sweep_result("re_estimate", &re, json!({"p": two}), all),
        sweep_result("im_estimate", &im, json!({"p": two}), all),
    ])
}

fn sweep_opvalued(c: &RunConfig, trials: usize, budget: Budget, all: bool) -> Result<CheckResult> {
    let alg = c.target()?;
    let d = c.domain_dim;
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::labelled(c.seed, "cli_opvalued", t as u64);
            let map_seed: u64 = rand::Rng::random(&mut r);
            let map = OperatorValuedMap::random_generator(&alg, &alg, d, c.rank, map_seed)?;
            let (x, y) = (rng::complex_vector(&mut r, d), rng::complex_vector(&mut r, d));
            check_cs_operator_valued(&map, &x, &y, c.norm, Budget { seed: map_seed, ..budget })
        })
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<InequalityReport> = rows.iter().map(|r| retol(r.report.clone(), c.tol)).collect();
    let escalations = rows.iter().filter(|r| r.escalated).count();
    let mut res = sweep_result(
        "cs_opvalued",
        &reports,
        json!({"norm": c.norm, "starts": budget.starts, "escalations": escalations}),
        false,
    );
    if all {
        res.detail["reports"] = to_value(&rows);
    }
    Ok(res)
}

/// Elements from `--input`, or `count` random ones on the target algebra.
fn input_elements(c: &RunConfig, label: &str, count: usize) -> Result<Vec<(String, AlgebraElement)>> {
    if let Some(path) = &c.input {
        return MatrixFile::read(path)?.elements();
    }
    let alg = c.target()?;
    Ok((0..count)
        .map(|i| {
            let mut r = rng::labelled(c.seed, label, i as u64);
            (format!("random{i}"), AlgebraElement::random(&alg, &mut r))
        })
        .collect())
}

fn status_of(reports: &[InequalityReport]) -> Status {
    reports.iter().fold(Status::Holds, |acc, r| acc.worst(r.status))
}

fn radius_result(name: &str, x: &AlgebraElement) -> CheckResult {
    let (k, wit) = x
        .blocks()
        .iter()
        .map(numerical_radius_witness)
        .enumerate()
        .fold((0, None), |acc: (usize, Option<crate::radius_norms::RadiusWitness>), (k, w)| match &acc.1 {
            Some(b) if b.value >= w.value => acc,
            _ => (k, Some(w)),
        });
    let wit = wit.expect("elements have blocks");
    let norm = schatten_norm(x, PExponent::Infinity);
    let checks = [
        InequalityReport::new("nr_upper", wit.value, norm, tol_report(norm)),
        InequalityReport::new("nr_lower", 0.5 * norm, wit.value, tol_report(wit.value)),
    ];
    CheckResult {
        check: format!("numerical_radius:{name}"),
        status: status_of(&checks),
        value: wit.value,
        detail: json!({"block": k, "witness": wit, "operator_norm": norm, "checks": checks}),
    }
}

fn cmd_radius(c: &RunConfig) -> Result<Vec<CheckResult>> {
    Ok(input_elements(c, "cli_radius", c.trials.min(10))?
        .iter()
        .map(|(n, x)| radius_result(n, x))
        .collect())
}

fn triple_result(name: &str, x: &AlgebraElement, budget: Budget) -> CheckResult {
    let r = triple_norm(x, budget);
    let w = numerical_radius_element(x);
    let checks = [
        InequalityReport::new("triple_lower", w, r.value, 1e-6),
        InequalityReport::new("triple_upper", r.value, r.upper_bound, 1e-9),
    ];
    CheckResult {
        check: format!("triple_norm:{name}"),
        status: status_of(&checks),
        value: r.value,
        detail: json!({"result": r, "numerical_radius": w, "checks": checks}),
    }
}

fn cmd_triple(c: &RunConfig) -> Result<Vec<CheckResult>> {
    Ok(input_elements(c, "cli_triple", c.trials.min(10))?
        .iter()
        .map(|(n, x)| triple_result(n, x, c.budget))
        .collect())
}

fn cmd_norms(c: &RunConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (name, x) in input_elements(c, "cli_norms", 1)? {
        let mut sch = serde_json::Map::new();
        let mut ps = vec![PExponent::Finite(1.0), PExponent::Finite(2.0), PExponent::Infinity];
        if !ps.contains(&c.p) {
            ps.push(c.p);
        }
        for p in ps {
            sch.insert(p.to_string(), json!(schatten_norm(&x, p)));
        }
        let t = triple_result(&name, &x, c.budget);
        out.push(CheckResult {
            check: format!("norms:{name}"),
            status: t.status,
            value: schatten_norm(&x, c.p),
            detail: json!({
                "schatten": sch,
                "numerical_radius": numerical_radius_element(&x),
                "triple_norm": t.detail["result"],
                "normality_residual": x.normality_residual(),
                "is_psd": x.is_psd(),
            }),
        });
    }
    Ok(out)
}

fn pauli(dom: &Arc<StarAlgebra>) -> Result<(AlgebraVector, AlgebraVector)> {
    let i = Complex64::new(0.0, 1.0);
    Ok((
        AlgebraVector::new(dom, vec![ZERO, ONE, ONE, ZERO])?,
        AlgebraVector::new(dom, vec![ZERO, -i, i, ZERO])?,
    ))
}

/// The default uncertainty instance: `W = diag(1, 2)`, `T = I` on `M₂`.
fn default_kernel_map(c: &RunConfig) -> Result<KernelMap> {
    let m2 = TracedAlgebra::full(2);
    KernelMap::new(AlgebraElement::diag(&m2, &[1.0, 2.0])?, c.kernel.clone(), AlgebraElement::identity(&m2))
}

fn uncertainty_result(km: &KernelMap, a: &AlgebraVector, b: &AlgebraVector) -> Result<CheckResult> {
    let map = km.sesquilinear_map()?;
    let sweep = uncertainty_check(&map, a, b, &default_grid(), &default_grid())?;
    let at0 = sweep
        .reports
        .iter()
        .find(|r| r.lambda == 0.0 && r.mu == 0.0)
        .map(|r| r.delta_a * r.delta_b);
    let mut detail = to_value(&sweep);
    let obj = detail.as_object_mut().expect("object");
    obj.remove("reports");
    obj.insert("grid_points".into(), json!(sweep.reports.len()));
    obj.insert("product_at_zero".into(), json!(at0));
    Ok(CheckResult { check: "uncertainty".into(), status: sweep.status(), value: sweep.min_product, detail })
}

fn cmd_uncertainty(c: &RunConfig) -> Result<CheckResult> {
    match &c.input {
        None => {
            let km = default_kernel_map(c)?;
            let dom = StarAlgebra::from_traced(km.algebra());
            let (a, b) = pauli(&dom)?;
            uncertainty_result(&km, &a, &b)
        }
        Some(path) => {
            let f = MatrixFile::read(path)?;
            let alg = f.algebra()?;
            let get = |n: &str, default: AlgebraElement| f.element(n).or(Ok::<_, Error>(default));
            let w = get("W", AlgebraElement::identity(&alg))?;
            let t = get("T", AlgebraElement::identity(&alg))?;
            let km = KernelMap::new(w, c.kernel.clone(), t)?;
            let dom = StarAlgebra::from_traced(&alg);
            let a = AlgebraVector::new(&dom, f.element("a")?.coords())?;
            let b = AlgebraVector::new(&dom, f.element("b")?.coords())?;
            uncertainty_result(&km, &a, &b)
        }
    }
}

/// Domain of a GNS input: a builtin family or the block algebra of a traced
/// algebra.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum DomainSpec {
    Builtin(Builtin),
    Traced(AlgebraSpec),
}

/// `gns --input` document: a domain plus either the coefficients of a
/// scalar functional `ω(e_i)` or a matrix file whose `gram` section is `Φ`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnsInput {
    pub domain: DomainSpec,
    #[serde(default)]
    pub omega: Option<Vec<Complex64>>,
    #[serde(default)]
    pub map: Option<MatrixFile>,
}

impl GnsInput {
    pub fn source(&self) -> Result<GnsSource> {
        let dom = match &self.domain {
            DomainSpec::Builtin(b) => StarAlgebra::builtin(*b)?,
            DomainSpec::Traced(s) => StarAlgebra::from_traced(&*s.build()?),
        };
        match (&self.omega, &self.map) {
            (Some(w), None) => Ok(GnsSource::Functional(LinearMap::functional(&dom, w)?)),
            (None, Some(m)) => Ok(GnsSource::Map(m.to_gram()?.with_domain(&dom)?)),
            _ => Err(Error::Config("gns input needs exactly one of `omega` and `map`".into())),
        }
    }
}

fn gns_result(name: &str, source: GnsSource, p: PExponent, seed: u64, trials: usize) -> Result<CheckResult> {
    let rep = gns_construct(source, p, seed)?;
    let ver = verify_representation(&rep, trials, seed);
    let tol = 1e-9 * (1.0 + rep.scale);
    let ok = ver.passes && rep.residuals.max() <= tol;
    Ok(CheckResult {
        check: format!("gns:{name}"),
        status: if ok { Status::Holds } else { Status::Violated },
        value: rep.quotient_dim as f64,
        detail: json!({"representation": rep, "verification": ver}),
    })
}

fn cmd_gns(c: &RunConfig) -> Result<Vec<CheckResult>> {
    let path = c.input.as_ref().ok_or_else(|| Error::Config("missing required field `input` for gns".into()))?;
    let text = crate::io::read_text(path)?;
    let input: GnsInput = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(vec![gns_result("input", input.source()?, c.p, c.seed, c.trials.min(64))?])
}

fn kernel_results(km: &KernelMap, c: &RunConfig, trials: usize) -> Result<Vec<CheckResult>> {
    let alg = km.algebra();
    let id = AlgebraElement::identity(alg);
    let m = km.radius();
    let grid: Vec<f64> = (0..11).map(|i| m * i as f64 / 10.0).collect();
    let f = km.phi_function(&id, &id, &grid)?;
    let op = km.phi_operator(&id, &id, &id)?;
    let bounds = km.bound_checks(trials, c.seed)?;
    let mut out = vec![
        CheckResult {
            check: "kernel_phi_samples".into(),
            status: if f.values.iter().all(|v| v.re >= -1e-12) { Status::Holds } else { Status::Violated },
            value: f.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min),
            detail: json!({"x": "I", "y": "I", "samples": f}),
        },
        CheckResult {
            check: "kernel_phi_operator".into(),
            status: if op.min_eigenvalue() >= -op.psd_tol() { Status::Holds } else { Status::Violated },
            value: numerical_radius_element(&op),
            detail: json!({"x": "I", "y": "I", "s": "I", "value": op}),
        },
        CheckResult {
            check: "kernel_bounds".into(),
            status: if bounds.passes { Status::Holds } else { Status::Violated },
            value: bounds.max_nr_ratio.max(bounds.max_triple_ratio),
            detail: to_value(&bounds),
        },
    ];
    if alg.block_sizes() == [2] {
        let dom = StarAlgebra::from_traced(alg);
        let (a, b) = pauli(&dom)?;
        out.push(uncertainty_result(km, &a, &b)?);
    }
    let opv = km.operator_valued_map()?;
    let d = opv.domain_dim();
    let mut r = rng::labelled(c.seed, "cli_kernel_cs", 0);
    let (x, y) = (rng::complex_vector(&mut r, d), rng::complex_vector(&mut r, d));
    let cs = check_cs_operator_valued(&opv, &x, &y, c.norm, c.budget)?;
    out.push(CheckResult {
        check: "kernel_cs_opvalued".into(),
        status: cs.report.status,
        value: cs.report.ratio,
        detail: to_value(&cs),
    });
    Ok(out)
}

fn cmd_kernel(c: &RunConfig) -> Result<Vec<CheckResult>> {
    let km = match &c.input {
        Some(path) => {
            let f = MatrixFile::read(path)?;
            let alg = f.algebra()?;
            let t = f.element("T").unwrap_or_else(|_| AlgebraElement::identity(&alg));
            KernelMap::new(f.element("W")?, c.kernel.clone(), t)?
        }
        None if c.dims == [2] && c.weights == [1.0] => default_kernel_map(c)?,
        None => {
            let alg = c.target()?;
            let mut r = rng::labelled(c.seed, "cli_kernel", 0);
            KernelMap::new(AlgebraElement::random_psd(&alg, &mut r), c.kernel.clone(), AlgebraElement::identity(&alg))?
        }
    };
    kernel_results(&km, c, c.trials)
}

fn cmd_ratios(c: &RunConfig) -> Result<(CheckResult, String)> {
    let profile = ratio_profile(c, c.p, vec![c.target()?], c.trials, 0);
    let table = ratio_sampler(&profile)?;
    let bound = if c.p == PExponent::Finite(1.0) { 1.0 } else { c.constant.value() };
    let max = table.summary.max_ratio;
    let tol = c.tol.unwrap_or(1e-8);
    let status = if max <= bound {
        Status::Holds
    } else if max <= bound + tol {
        Status::HoldsWithinTol
    } else {
        Status::Violated
    };
    let csv = table.to_csv(c.seed);
    let result = CheckResult {
        check: "sample_ratios".into(),
        status,
        value: max,
        detail: json!({"constant": bound, "table": table}),
    };
    Ok((result, csv))
}

/// Reduced trial counts of the full acceptance matrix.
fn check_all(c: &RunConfig) -> Result<Vec<CheckResult>> {
    let trials = c.trials.min(100);
    let mut out = Vec::new();
    let mut cfg = c.clone();
    cfg.dims = vec![2, 1];
    cfg.weights = vec![1.0, 0.5];
    for p in [1.25, 1.5, 2.0, 3.0, 4.0] {
        let p = PExponent::Finite(p);
        out.push(sweep_cs_lp(&cfg, p, CsConstant::Two, trials, false)?);
        if p == PExponent::Finite(2.0) {
            out.push(sweep_cs_lp(&cfg, p, CsConstant::Sqrt2, trials, false)?);
        }
    }
    let mut comm = c.clone();
    comm.dims = vec![3];
    comm.weights = vec![1.0];
    for p in [1.5, 2.0, 3.0] {
        out.push(sweep_cs_normal(&comm, PExponent::Finite(p), trials, false)?);
    }
    out.extend(sweep_re_im(&cfg, trials, false)?);

    let km = default_kernel_map(&RunConfig { kernel: Kernel::affine(), ..c.clone() })?;
    let dom = StarAlgebra::from_traced(km.algebra());
    let (a, b) = pauli(&dom)?;
    out.push(uncertainty_result(&km, &a, &b)?);

    out.push(lemma_rho_and_holder(c.seed, trials));
    out.push(projector_monotonicity(c.seed, trials.min(20)));
    out.push(radius_sweep(c.seed, trials));
    out.push(triple_sweep(c, trials.min(20)));
    out.push(triple_cs_sweep(c, trials.min(20))?);

    let mut op = c.clone();
    op.dims = vec![2];
    op.weights = vec![1.0];
    op.domain_dim = 2;
    op.rank = 2;
    out.push(sweep_opvalued(&op, trials.min(10), Budget { starts: 8, iters: 20, seed: c.seed }, false)?);

    for (name, dom) in [
        ("matrix_algebra(2)", StarAlgebra::matrix_algebra(2)),
        ("matrix_algebra(3)", StarAlgebra::matrix_algebra(3)),
        ("cyclic_group_algebra(4)", StarAlgebra::cyclic_group_algebra(4)),
    ] {
        let m1 = TracedAlgebra::full(1);
        for i in 0..3u64 {
            let mut r = rng::labelled(c.seed, "cli_gns", i);
            let w = LinearMap::random_positive(&dom, &m1, 1 + i as usize, &mut r)?;
            out.push(gns_result(&format!("{name}#{i}"), GnsSource::Functional(w), PExponent::Finite(2.0), c.seed, 16)?);
        }
    }
    let mut kb = c.clone();
    kb.kernel = Kernel::affine();
    let kernel = kernel_results(&km, &kb, trials.min(50))?;
    out.extend(kernel.into_iter().filter(|r| r.check != "uncertainty"));
    Ok(out)
}

fn lemma_rho_and_holder(seed: u64, trials: usize) -> CheckResult {
    let alg = TracedAlgebra::new(vec![2, 3], vec![1.0, 0.25]).expect("valid algebra");
    let ps = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];
    let rows: Vec<(f64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::labelled(seed, "cli_holder", t as u64);
            let a = AlgebraElement::random_psd(&alg, &mut r);
            let b = AlgebraElement::random_psd(&alg, &mut r);
            let v = rho_product(&a, &b);
            let x = AlgebraElement::random(&alg, &mut r);
            let y = AlgebraElement::random(&alg, &mut r);
            let excess = ps
                .iter()
                .map(|&p| {
                    let h = holder_check(&x, &y, PExponent::new(p).expect("valid exponent")).expect("same algebra");
                    h.lhs - h.rhs
                })
                .fold(f64::NEG_INFINITY, f64::max);
            (v.re, v.im.abs(), excess)
        })
        .collect();
    let min_re = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let max_im = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let holder = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let ok = min_re >= -1e-10 && max_im <= 1e-10 && holder <= 1e-9;
    CheckResult {
        check: "rho_positivity_and_holder".into(),
        status: if ok { Status::Holds } else { Status::Violated },
        value: holder,
        detail: json!({"trials": trials, "min_re_rho_ab": min_re, "max_abs_im_rho_ab": max_im, "max_holder_excess": holder}),
    }
}

fn projector_monotonicity(seed: u64, trials: usize) -> CheckResult {
    let alg = TracedAlgebra::full(4);
    let rows: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::labelled(seed, "cli_projectors", t as u64);
            let w = AlgebraElement::random_psd(&alg, &mut r);
            let least = linalg::hermitian_eigenvalues(w.block(0))
                .into_iter()
                .filter(|&l| l > w.psd_tol())
                .fold(f64::INFINITY, f64::min);
            [1.5, 2.0, 3.0].iter().all(|&p| {
                let p = PExponent::Finite(p);
                let mut last = f64::INFINITY;
                (1..=200).all(|n| {
                    let inv = 1.0 / n as f64;
                    let proj = spectral_tail_projection(&w, inv).expect("psd input");
                    let v = schatten_norm(&(&w * &(&AlgebraElement::identity(&alg) - &proj)), p);
                    let ok = v <= last * (1.0 + 1e-12) + 1e-15 && (inv >= least || v <= 1e-12);
                    last = v;
                    ok
                })
            })
        })
        .collect();
    let failures = rows.iter().filter(|ok| !**ok).count();
    CheckResult {
        check: "projector_tails".into(),
        status: if failures == 0 { Status::Holds } else { Status::Violated },
        value: failures as f64,
        detail: json!({"trials": trials, "failures": failures}),
    }
}

fn radius_sweep(seed: u64, trials: usize) -> CheckResult {
    let m2 = TracedAlgebra::full(2);
    let nil = AlgebraElement::from_real_rows(&m2, &[&[0.0, 1.0], &[0.0, 0.0]]).expect("2x2 rows");
    let w0 = numerical_radius_element(&nil);
    let worst: f64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::labelled(seed, "cli_radius_sweep", t as u64);
            let n = 2 + t % 3;
            let x = rng::ginibre(&mut r, n, n);
            let h = linalg::random_hermitian(&mut r, n);
            let w = crate::radius_norms::numerical_radius(&x);
            let norm = linalg::operator_norm(&x);
            let herm = (crate::radius_norms::numerical_radius(&h) - linalg::operator_norm(&h)).abs();
            (0.5 * norm - w).max(w - norm).max(herm - 1e-10)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let ok = (w0 - 0.5).abs() <= 1e-8 && worst <= 1e-12;
    CheckResult {
        check: "numerical_radius".into(),
        status: if ok { Status::Holds } else { Status::Violated },
        value: w0,
        detail: json!({"nilpotent": w0, "trials": trials, "max_excess": worst}),
    }
}

fn triple_sweep(c: &RunConfig, trials: usize) -> CheckResult {
    let m2 = TracedAlgebra::full(2);
    let p = AlgebraElement::diag(&m2, &[1.0, 0.0]).expect("diagonal");
    let exact = [triple_norm(&p, c.budget).value, triple_norm(&AlgebraElement::identity(&m2), c.budget).value];
    let budget = Budget { starts: 4, iters: 100, seed: c.seed };
    let worst: f64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::labelled(c.seed, "cli_triple_sweep", t as u64);
            let f = AlgebraElement::random(&TracedAlgebra::full(2 + t % 3), &mut r);
            let v = triple_norm(&f, budget);
            (numerical_radius_element(&f) - 1e-6 - v.value).max(v.value - v.upper_bound - 1e-9)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let ok = exact.iter().all(|v| (v - 1.0).abs() <= 1e-6) && worst <= 0.0;
    CheckResult {
        check: "triple_norm".into(),
        status: if ok { Status::Holds } else { Status::Violated },
        value: worst,
        detail: json!({"diag_1_0": exact[0], "identity": exact[1], "trials": trials, "max_sandwich_excess": worst}),
    }
}

fn triple_cs_sweep(c: &RunConfig, trials: usize) -> Result<CheckResult> {
    let mut cfg = c.clone();
    cfg.dims = vec![2];
    cfg.weights = vec![1.0];
    let profile = ratio_profile(&cfg, PExponent::Finite(2.0), vec![cfg.target()?], trials, 3);
    let budget = Budget { starts: 4, iters: 100, seed: c.seed };
    let rows = positive_cases(&profile)?
        .par_iter()
        .map(|(pm, x, y)| check_cs_triple(pm, x, y, budget))
        .collect::<Result<Vec<_>>>()?;
    let exact = rows.iter().filter(|r| r.rhs_status == NormStatus::Exact).count();
    let reports: Vec<InequalityReport> = rows.into_iter().map(|r| r.report).collect();
    Ok(sweep_result("cs_triple", &reports, json!({"exact_rhs": exact}), false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig> {
        parse_config(std::iter::once("nclp").chain(args.iter().copied()))
    }

    #[test]
    fn parses_flags_and_defaults() {
        let c = parse(&["check-cs-lp", "--p", "2", "--trials", "100", "--seed", "7"]).unwrap();
        assert_eq!((c.command, c.trials, c.seed), (Command::CheckCsLp, 100, 7));
        assert_eq!(c.constant, CsConstant::Sqrt2);
        assert_eq!(parse(&["check-cs-lp", "--p", "3"]).unwrap().constant, CsConstant::Two);
        assert_eq!(parse(&["check-cs-lp", "--p", "1"]).unwrap().constant, CsConstant::One);
        let d = parse(&["norms"]).unwrap();
        assert_eq!((d.seed, d.dims.clone()), (0, vec![2]));
        assert_eq!(parse(&["sample-ratios", "--dims", "2,1", "--weights", "1,0.5"]).unwrap().dims, vec![2, 1]);
    }

    #[test]
    fn rejects_bad_configs() {
        match parse(&["gns"]) {
            Err(Error::Config(m)) => assert!(m.contains("input")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse(&["check-cs-lp", "--p", "0.5"]), Err(Error::Domain(_))));
        assert!(matches!(parse(&["frobnicate"]), Err(Error::Config(_))));
        assert!(parse(&["norms", "--trials", "x"]).is_err());
        match parse(&["norms", "--trials", "0", "--dims", "2,0"]) {
            Err(Error::Config(m)) => assert!(m.contains("trials") && m.contains("dims")),
            other => panic!("{other:?}"),
        }
        assert!(parse(&[]).is_err());
    }

    #[test]
    fn config_file_mirrors_flags() {
        let dir = std::env::temp_dir().join(format!("nclp-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.json");
        std::fs::write(&path, r#"{"command":"sample-ratios","trials":5,"p":"3","seed":11}"#).unwrap();
        let c = parse(&["--config", path.to_str().unwrap(), "--seed", "12"]).unwrap();
        assert_eq!((c.command, c.trials, c.seed), (Command::SampleRatios, 5, 12));
        assert_eq!(c.p, PExponent::Finite(3.0));
        std::fs::write(&path, r#"{"command":"norms","bogus":1}"#).unwrap();
        assert!(parse(&["--config", path.to_str().unwrap()]).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn sample_ratios_csv_has_a_row_per_trial() {
        let c = parse(&["sample-ratios", "--p", "2", "--trials", "10"]).unwrap();
        let r = execute(&c).unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 12);
        assert_eq!(lines[0], crate::inequalities::RATIO_CSV_HEADER);
        assert!(lines[11].starts_with("summary,"));
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn empty_report_is_valid() {
        let r = RunReport::new(RunConfig::new(Command::Norms), vec![]);
        let v: Value = serde_json::from_str(&r.to_json(true)).unwrap();
        assert_eq!(v["summary"]["checks"], 0);
        assert_eq!(v["summary"]["status"], "holds");
        assert_eq!(v["version"], REPORT_VERSION);
        assert_eq!(r.to_csv(), "check,status,value\n");
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn violations_set_the_exit_code() {
        let bad = CheckResult { check: "x".into(), status: Status::Violated, value: 2.0, detail: Value::Null };
        let good = CheckResult { check: "y".into(), status: Status::HoldsWithinTol, value: 1.0, detail: Value::Null };
        let r = RunReport::new(RunConfig::new(Command::Norms), vec![good.clone(), bad]);
        assert_eq!((r.summary.status, r.exit_code()), (Status::Violated, 1));
        let r = RunReport::new(RunConfig::new(Command::Norms), vec![good]);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn tight_tolerance_override_is_applied() {
        let c = parse(&["check-cs-lp", "--trials", "5", "--constant", "0.1", "--tol", "0"]).unwrap();
        let r = execute(&c).unwrap();
        assert_eq!(r.summary.status, Status::Violated);
    }

    #[test]
    fn uncertainty_defaults_reproduce_the_kernel_instance() {
        let r = execute(&parse(&["check-uncertainty"]).unwrap()).unwrap();
        let d = &r.results[0].detail;
        assert!((d["gamma"].as_f64().unwrap() - 20f64.sqrt()).abs() < 1e-9);
        assert!((d["product_at_zero"].as_f64().unwrap() - 89f64.sqrt()).abs() < 1e-9);
        assert_eq!(r.exit_code(), 0);
    }
}
