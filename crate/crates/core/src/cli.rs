//! Command-line front end: argument parsing, observable and spectrum
//! sources, report assembly and JSON/CSV output.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::closedforms::{self, published, CoefficientVector, GeneralDim, LowDim};
use crate::exact::MomentPoint;
use crate::functionals::{self, omega_vector, Observable};
use crate::montecarlo::{self, CompareRow, ConcentrationReport};
use crate::sampling::{self, SeededStream};
use crate::twirl::{self, Spectrum};
use crate::{Error, VERSION};

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "HAARMOMENT_SEED";

pub const DEFAULT_SEED: u64 = 1;

/// Smallest sample count accepted by `mc`.
pub const MIN_MC_SAMPLES: u64 = 100;

/// Hermiticity tolerance for observables loaded from files.
pub const FILE_HERMITIAN_TOLERANCE: f64 = 1e-10;

pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const STATISTICAL: i32 = 3;
    pub const CONSISTENCY: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "haarmoment", version, about = "Exact and sampled ensemble averages of uncertainty products")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form coefficient vectors, assembled averages and cross-identity checks.
    Exact(RunArgs),
    /// Monte-Carlo estimates compared with the closed forms.
    Mc(RunArgs),
    /// Trace inequalities and Ω sign facts over random observable pairs.
    Scan(RunArgs),
    /// Concentration-of-measure tail experiments.
    Concentration(RunArgs),
    /// Compact run of the invariant suite.
    Selftest(RunArgs),
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// Dimension, or an inclusive range such as `2..6`.
    #[arg(long, default_value = "2")]
    pub d: DimRange,
    /// Sample count (default depends on the command).
    #[arg(long)]
    pub n: Option<u64>,
    /// Seed; overrides HAARMOMENT_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: available cores). Never changes results.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Observable pair: pauli-xy, pauli-xz, pauli-yz, gell-mann:I,J, identity,
    /// seeded:N, or file:A.json,B.json. Defaults to pauli-xy (d = 2),
    /// gell-mann:1,2 (d = 3) and seeded:<seed> otherwise.
    #[arg(long)]
    pub pair: Option<String>,
    /// Spectrum for the isospectral ensemble: uniform, pure, random-simplex or file:PATH.
    #[arg(long, default_value = "random-simplex")]
    pub spectrum: String,
    /// Ensemble for `concentration`.
    #[arg(long, value_enum, default_value_t = EnsembleKind::Iso)]
    pub ensemble: EnsembleKind,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// With a single `--d D`, run every dimension in `2..D`; `concentration`
    /// also summarizes tails across dimensions.
    #[arg(long)]
    pub sweep: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Iso,
    Pure,
    Hs,
}

/// Inclusive dimension range parsed from `D` or `LO..HI`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimRange {
    pub lo: usize,
    pub hi: usize,
}

impl FromStr for DimRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("invalid dimension `{t}`"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let d = parse(s)?;
                (d, d)
            }
        };
        if lo < 2 || hi < lo {
            return Err(format!("dimension range `{s}` must satisfy 2 ≤ lo ≤ hi"));
        }
        Ok(DimRange { lo, hi })
    }
}

impl fmt::Display for DimRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lo == self.hi {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "{}..{}", self.lo, self.hi)
        }
    }
}

/// Fully resolved configuration, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub d: Vec<usize>,
    pub seed: u64,
    pub seed_source: String,
    pub n: u64,
    pub threads: usize,
    pub pair: Option<String>,
    pub spectrum: String,
    pub ensemble: EnsembleKind,
    pub format: Format,
    pub out: Option<String>,
    pub sweep: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// One CSV row: `quantity, exact, mc_mean, mc_se, z, pass`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub quantity: String,
    pub exact: Option<f64>,
    pub mc_mean: Option<f64>,
    pub mc_se: Option<f64>,
    pub z: Option<f64>,
    pub pass: Option<bool>,
}

impl Row {
    pub fn exact(quantity: impl Into<String>, value: f64) -> Self {
        Row { quantity: quantity.into(), exact: Some(value), mc_mean: None, mc_se: None, z: None, pass: None }
    }

    pub fn checked(quantity: impl Into<String>, value: f64, pass: bool) -> Self {
        Row { pass: Some(pass), ..Row::exact(quantity, value) }
    }

    pub fn estimate(quantity: impl Into<String>, e: &montecarlo::EstimateResult) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        Row {
            quantity: quantity.into(),
            exact: e.target,
            mc_mean: Some(e.mean),
            mc_se: finite(e.std_error),
            z: e.z.and_then(finite),
            pass: e.target.map(|_| e.passes()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub rows: Vec<Row>,
    pub data: Value,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Report {
            tool: "haarmoment".into(),
            version: VERSION.into(),
            config,
            checks: Vec::new(),
            rows: Vec::new(),
            data: Value::Null,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn all_rows_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_csv(&self) -> Result<String, Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["quantity", "exact", "mc_mean", "mc_se", "z", "pass"]).map_err(|e| Error::Io(e.to_string()))?;
        let num = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        for r in &self.rows {
            let pass = r.pass.map(|p| p.to_string()).unwrap_or_default();
            w.write_record([r.quantity.clone(), num(r.exact), num(r.mc_mean), num(r.mc_se), num(r.z), pass])
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Failure categories mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Consistency(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Consistency(_) | Error::Evaluation { .. } => CliError::Consistency(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Consistency(m) => write!(f, "internal consistency failure: {m}"),
        }
    }
}

/// Observable file contents: `{"d": D, "re": [[..]], "im": [[..]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableFile {
    pub d: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl ObservableFile {
    pub fn from_observable(o: &Observable) -> Self {
        let m = o.matrix();
        let d = o.dimension();
        ObservableFile {
            d,
            re: (0..d).map(|i| (0..d).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }

    pub fn to_observable(&self) -> Result<Observable, Error> {
        let d = self.d;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if d == 0 || !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::InvalidArgument(format!("observable file arrays must be {d}×{d}")));
        }
        let re: Vec<f64> = self.re.iter().flatten().copied().collect();
        let im: Vec<f64> = self.im.iter().flatten().copied().collect();
        Observable::from_real_imag(d, &re, &im, FILE_HERMITIAN_TOLERANCE)
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

pub fn load_observable(path: &Path) -> Result<Observable, CliError> {
    let file: ObservableFile = serde_json::from_str(&read_file(path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(file.to_observable()?)
}

/// Random Hermitian pair for `seeded:N`: two GUE draws scaled to unit operator norm.
pub fn seeded_pair(d: usize, seed: u64) -> (Observable, Observable) {
    let mut s = SeededStream::new(seed, 0);
    let mut draw = || {
        let g = sampling::gue(d, &mut s);
        let norm = g.operator_norm();
        Observable::new(g.matrix() / num_complex::Complex64::new(norm, 0.0)).expect("scaled GUE draw is Hermitian")
    };
    let a = draw();
    let b = draw();
    (a, b)
}

pub fn default_pair_name(d: usize, seed: u64) -> String {
    match d {
        2 => "pauli-xy".into(),
        3 => "gell-mann:1,2".into(),
        _ => format!("seeded:{seed}"),
    }
}

/// Resolves a pair specification for dimension `d`.
pub fn resolve_pair(spec: &str, d: usize) -> Result<(Observable, Observable), CliError> {
    let pair = match spec {
        "pauli-xy" => (Observable::pauli_x(), Observable::pauli_y()),
        "pauli-xz" => (Observable::pauli_x(), Observable::pauli_z()),
        "pauli-yz" => (Observable::pauli_y(), Observable::pauli_z()),
        "identity" => (Observable::identity(d), Observable::identity(d)),
        _ => {
            if let Some(rest) = spec.strip_prefix("gell-mann:") {
                let (i, j) = rest
                    .split_once(',')
                    .and_then(|(i, j)| Some((i.trim().parse().ok()?, j.trim().parse().ok()?)))
                    .ok_or_else(|| CliError::Config(format!("expected gell-mann:I,J, got `{spec}`")))?;
                (Observable::gell_mann(i)?, Observable::gell_mann(j)?)
            } else if let Some(rest) = spec.strip_prefix("seeded:") {
                let seed = rest.parse().map_err(|_| CliError::Config(format!("invalid pair seed in `{spec}`")))?;
                seeded_pair(d, seed)
            } else if let Some(rest) = spec.strip_prefix("file:") {
                let (a, b) = rest
                    .split_once(',')
                    .ok_or_else(|| CliError::Config(format!("expected file:A.json,B.json, got `{spec}`")))?;
                (load_observable(Path::new(a))?, load_observable(Path::new(b))?)
            } else {
                return Err(CliError::Config(format!("unknown pair `{spec}`")));
            }
        }
    };
    if pair.0.dimension() != d || pair.1.dimension() != d {
        return Err(CliError::Config(format!(
            "pair `{spec}` has dimension {}, but --d is {d}",
            pair.0.dimension()
        )));
    }
    Ok(pair)
}

/// Resolves a spectrum source for dimension `d`.
pub fn resolve_spectrum(spec: &str, d: usize, seed: u64) -> Result<Spectrum, CliError> {
    let spectrum = match spec {
        "uniform" => Spectrum::uniform(d)?,
        "pure" => Spectrum::pure(d)?,
        "random-simplex" => sampling::random_spectrum(d, &mut SeededStream::new(seed, 1 << 48)),
        _ => match spec.strip_prefix("file:") {
            Some(path) => {
                let values: Vec<f64> = serde_json::from_str(&read_file(Path::new(path))?)
                    .map_err(|e| CliError::Config(format!("{path}: expected a JSON array of numbers ({e})")))?;
                Spectrum::new(values)?
            }
            None => return Err(CliError::Config(format!("unknown spectrum source `{spec}`"))),
        },
    };
    if spectrum.dimension() != d {
        return Err(CliError::Config(format!("spectrum has dimension {}, but --d is {d}", spectrum.dimension())));
    }
    Ok(spectrum)
}

fn resolve_seed(flag: Option<u64>, env: Option<String>) -> Result<(u64, String), CliError> {
    if let Some(seed) = flag {
        return Ok((seed, "flag".into()));
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map(|s| (s, "env".into()))
            .map_err(|_| CliError::Config(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        None => Ok((DEFAULT_SEED, "default".into())),
    }
}

fn default_n(command: &str) -> u64 {
    match command {
        "mc" => 100_000,
        "scan" => 10_000,
        "concentration" => 20_000,
        "selftest" => 20_000,
        _ => 0,
    }
}

fn resolve_config(command: &str, args: &RunArgs, env_seed: Option<String>) -> Result<RunConfig, CliError> {
    let (seed, seed_source) = resolve_seed(args.seed, env_seed)?;
    let threads = match args.threads {
        Some(0) => return Err(CliError::Config("--threads must be positive".into())),
        Some(t) => t,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let lo = if args.sweep { 2 } else { args.d.lo };
    let n = args.n.unwrap_or_else(|| default_n(command));
    if command == "mc" && n < MIN_MC_SAMPLES {
        return Err(CliError::Config(format!("mc needs --n ≥ {MIN_MC_SAMPLES}, got {n}")));
    }
    Ok(RunConfig {
        command: command.into(),
        d: (lo..=args.d.hi).collect(),
        seed,
        seed_source,
        n,
        threads,
        pair: args.pair.clone(),
        spectrum: args.spectrum.clone(),
        ensemble: args.ensemble,
        format: args.format,
        out: args.out.as_ref().map(|p| p.display().to_string()),
        sweep: args.sweep,
    })
}

fn label(name: &str, d: usize, multi: bool) -> String {
    if multi {
        format!("{name}@d={d}")
    } else {
        name.to_string()
    }
}

fn pair_name(config: &RunConfig, d: usize) -> String {
    config.pair.clone().unwrap_or_else(|| default_pair_name(d, config.seed))
}

fn coefficient_json(c: &CoefficientVector) -> Value {
    json!({ "family": c.family, "d": c.d, "values": c.values, "exact": c.exact_strings() })
}

/// Closed-form families, assembled averages and cross-identities for one dimension.
fn exact_for_dimension(config: &RunConfig, d: usize, report: &mut Report) -> Result<Value, CliError> {
    let multi = config.d.len() > 1;
    let pair_spec = pair_name(config, d);
    let (a, b) = resolve_pair(&pair_spec, d)?;
    let spectrum = resolve_spectrum(&config.spectrum, d, config.seed)?;
    let omega = omega_vector(&a, &b)?;
    let mut families: Vec<(&str, CoefficientVector)> = Vec::new();
    let (u, l) = closedforms::pure_coefficients(d)?;
    families.push(("pure_product", u.clone()));
    families.push(("pure_l0", l.clone()));
    match LowDim::new(d) {
        Ok(low) => {
            let (p, bound) = closedforms::lowdim_coefficients(low);
            families.push(("hs_product", p));
            families.push(("hs_l0", bound));
        }
        Err(_) => {
            let dim = GeneralDim::new(d)?;
            let (beta, beta_prime) = closedforms::lower_bound_coefficients(dim)?;
            families.push(("hs_product", closedforms::omega_bar(dim)?));
            families.push(("hs_covariance", beta));
            families.push(("hs_l0", beta_prime));
        }
    }
    families.push(("iso_product", closedforms::omega_iso(&spectrum)?));
    for (name, c) in &families {
        report.rows.push(Row::exact(label(name, d, multi), closedforms::assemble_average(c, &omega)?));
    }

    // Cross-identities, all in exact arithmetic.
    let omega_pure = closedforms::omega_at(d, &MomentPoint::pure())?;
    report.check(label("omega_pure_equals_u", d, multi), Some(&omega_pure) == u.exact.as_ref(), "ω_j(pure) = u_j");
    let by_moments = closedforms::omega_bar_by_moments(d)?;
    let hs_product = closedforms::hs_product_coefficients(d)?;
    report.check(
        label("hs_product_by_moments", d, multi),
        Some(&by_moments) == hs_product.exact.as_ref(),
        "HS product vector equals Δ-forms at HS moments",
    );
    if let Ok(dim) = GeneralDim::new(d) {
        report.check(
            label("delta_vs_polynomial", d, multi),
            closedforms::omega_polynomial_forms(dim) == closedforms::omega_delta_forms(d)?,
            "Δ-form and N_d polynomial ω_j agree exactly",
        );
        let (beta, beta_prime) = closedforms::lower_bound_coefficients(dim)?;
        let same = beta.exact.as_ref().zip(beta_prime.exact.as_ref()).is_some_and(|(x, y)| x[..6] == y[..6]);
        report.check(label("beta_prime_equals_beta_1_6", d, multi), same, "β′_j = β_j for j ≤ 6");
    }
    let gap = functionals::pure_difference(&a, &b)?;
    let combination = closedforms::pure_gap_combination(&omega);
    report.check(
        label("pure_gap_identity", d, multi),
        (gap.value - combination).abs() <= 1e-12 * (1.0 + combination.abs()),
        format!("Σ(u−l)Ω = {:.6e}, closed combination = {combination:.6e}", gap.value),
    );
    let deltas = (1..=4)
        .map(|k| twirl::delta_coefficients(&spectrum, k).map_err(CliError::from))
        .collect::<Result<Vec<_>, _>>()?;

    let discrepancies = published::discrepancies(d)?;
    Ok(json!({
        "d": d,
        "pair": pair_spec,
        "spectrum": spectrum.values(),
        "omega": omega.values,
        "omega_signs": omega.sign_report(),
        "coefficients": families.iter().map(|(name, c)| json!({"name": name, "vector": coefficient_json(c)})).collect::<Vec<_>>(),
        "hs_moments": {
            "exact": closedforms::hs_moments(d).map(|m| [m.t2.to_string(), m.t3.to_string(), m.t4.to_string(), m.t2_sq.to_string()])?,
            "values": closedforms::hs_moments(d)?.to_f64(),
            "order": ["t2", "t3", "t4", "t2_sq"],
        },
        "deltas": deltas,
        "printed_table_discrepancies": discrepancies,
    }))
}

fn cmd_exact(config: &RunConfig) -> Result<(Report, i32), CliError> {
    let mut report = Report::new(config.clone());
    let mut per_d = Vec::new();
    for &d in &config.d {
        per_d.push(exact_for_dimension(config, d, &mut report)?);
    }
    report.data = json!({ "dimensions": per_d });
    let code = if report.all_checks_pass() { exit::OK } else { exit::CONSISTENCY };
    Ok((report, code))
}

fn cmd_mc(config: &RunConfig) -> Result<(Report, i32), CliError> {
    let mut report = Report::new(config.clone());
    let multi = config.d.len() > 1;
    let mut per_d = Vec::new();
    for &d in &config.d {
        let pair_spec = pair_name(config, d);
        let (a, b) = resolve_pair(&pair_spec, d)?;
        let spectrum = resolve_spectrum(&config.spectrum, d, config.seed)?;
        let stream = SeededStream::new(config.seed, (d as u64) << 50);
        let rows: Vec<CompareRow> = montecarlo::compare_all(&a, &b, &spectrum, config.n, &stream, config.threads)?;
        for r in &rows {
            report.rows.push(Row::estimate(label(&r.quantity, d, multi), &r.estimate));
        }
        per_d.push(json!({ "d": d, "pair": pair_spec, "spectrum": spectrum.values() }));
    }
    let passed = report.all_rows_pass();
    report.check("all_within_5_se", passed, "every |z| ≤ 5");
    report.data = json!({ "dimensions": per_d });
    Ok((report, if passed { exit::OK } else { exit::STATISTICAL }))
}

#[derive(Debug, Clone, Default, Serialize)]
struct ScanTally {
    violations: u64,
    worst: Option<f64>,
}

impl ScanTally {
    fn record(&mut self, margin: f64, tol: f64) {
        if margin < -tol {
            self.violations += 1;
        }
        self.worst = Some(self.worst.map_or(margin, |w| w.min(margin)));
    }
}

fn cmd_scan(config: &RunConfig) -> Result<(Report, i32), CliError> {
    let mut report = Report::new(config.clone());
    let multi = config.d.len() > 1;
    let mut per_d = Vec::new();
    let mut consistent = true;
    for &d in &config.d {
        let mut s = SeededStream::new(config.seed, ((d as u64) << 50) | (3 << 40));
        let names = [
            "pure_gap",
            "mixed_difference",
            "printed_pure_trace_inequality",
            "omega_nonnegative",
            "omega7_ge_omega8",
            "omega7_plus_omega8",
            "omega8_nonnegative",
        ];
        let mut tallies: Vec<ScanTally> = vec![ScanTally::default(); names.len()];
        let gaps = functionals::GapCoefficients::new(d)?;
        for _ in 0..config.n {
            let a = sampling::gue(d, &mut s);
            let b = sampling::gue(d, &mut s);
            let o = omega_vector(&a, &b)?;
            let scale = o.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let tol = 1e-9 * scale;
            let t = functionals::trace_inequality_pure(&a, &b)?;
            let margins = [
                gaps.pure_difference(&o)?.value,
                gaps.mixed_difference(&o)?.value,
                t.lhs - t.rhs,
                [1, 2, 4, 5, 7].iter().map(|&j| o.get(j)).fold(f64::INFINITY, f64::min),
                o.get(7) - o.get(8),
                o.get(7) + o.get(8),
                o.get(8),
            ];
            for (tally, m) in tallies.iter_mut().zip(margins) {
                tally.record(m, tol);
            }
        }
        // The first two are averages of nonnegative functions and the sign
        // facts follow from Tr(X†X) ≥ 0; the last two are reported only.
        for (i, (name, tally)) in names.iter().zip(&tallies).enumerate() {
            let proven = !matches!(i, 2 | 6);
            let ok = tally.violations == 0;
            if proven {
                consistent &= ok;
            }
            let mut row = Row::exact(label(&format!("{name}_worst_margin"), d, multi), tally.worst.unwrap_or(0.0));
            if proven {
                row.pass = Some(ok);
            }
            report.rows.push(row);
            report.rows.push(Row::exact(label(&format!("{name}_violations"), d, multi), tally.violations as f64));
            if proven {
                report.check(label(name, d, multi), ok, format!("{} violations in {} pairs", tally.violations, config.n));
            }
        }

        // The selected pair, evaluated on its own.
        let pair_spec = pair_name(config, d);
        let (a, b) = resolve_pair(&pair_spec, d)?;
        let t = functionals::trace_inequality_pure(&a, &b)?;
        let pair_values = json!({
            "pair": pair_spec,
            "pure_gap": functionals::pure_difference(&a, &b)?,
            "mixed_difference": functionals::mixed_difference(&a, &b)?,
            "printed_pure_trace_inequality": t,
            "omega_signs": omega_vector(&a, &b)?.sign_report(),
        });
        per_d.push(json!({
            "d": d,
            "pairs_scanned": config.n,
            "tallies": names.iter().zip(&tallies).map(|(n, t)| json!({"name": n, "violations": t.violations, "worst_margin": t.worst})).collect::<Vec<_>>(),
            "selected_pair": pair_values,
        }));
    }
    report.data = json!({ "dimensions": per_d });
    Ok((report, if consistent { exit::OK } else { exit::CONSISTENCY }))
}

fn concentration_for(config: &RunConfig, d: usize) -> Result<ConcentrationReport, CliError> {
    let (a, b) = resolve_pair(&pair_name(config, d), d)?;
    let eps = montecarlo::default_epsilons(&a, &b);
    let stream = SeededStream::new(config.seed, ((d as u64) << 50) | (4 << 40));
    Ok(match config.ensemble {
        EnsembleKind::Iso => {
            let spectrum = resolve_spectrum(&config.spectrum, d, config.seed)?;
            montecarlo::concentration_iso(&spectrum, &a, &b, config.n, &eps, &stream, config.threads)?
        }
        EnsembleKind::Pure => montecarlo::concentration_pure(&a, &b, config.n, &eps, &stream, config.threads)?,
        EnsembleKind::Hs => montecarlo::concentration_hs(&a, &b, config.n, &eps, &stream, config.threads)?,
    })
}

fn cmd_concentration(config: &RunConfig) -> Result<(Report, i32), CliError> {
    let mut report = Report::new(config.clone());
    let multi = config.d.len() > 1;
    let mut reports = Vec::new();
    for &d in &config.d {
        let r = concentration_for(config, d)?;
        for (i, p) in r.points.iter().enumerate() {
            let mut row = Row::checked(label(&format!("tail_{i}"), d, multi), p.bound, p.holds);
            row.mc_mean = Some(p.two_sided);
            row.mc_se = Some(p.binomial_se);
            report.rows.push(row);
        }
        report.check(label("tails_within_bound", d, multi), r.holds(), format!("{} ε values", r.points.len()));
        reports.push(r);
    }
    let mut data = json!({ "reports": reports });
    if config.sweep && reports.len() > 1 {
        // Two-sided tail at each grid position, across dimensions.
        let by_eps: Vec<Vec<f64>> =
            (0..montecarlo::EPSILON_GRID.len()).map(|i| reports.iter().map(|r| r.points[i].two_sided).collect()).collect();
        let nonincreasing: Vec<bool> = by_eps.iter().map(|v| v.windows(2).all(|w| w[1] <= w[0])).collect();
        data["sweep"] = json!({ "dimensions": config.d, "two_sided_by_epsilon": by_eps, "nonincreasing_in_d": nonincreasing });
    }
    report.data = data;
    let passed = report.all_checks_pass();
    Ok((report, if passed { exit::OK } else { exit::STATISTICAL }))
}

fn cmd_selftest(config: &RunConfig) -> Result<(Report, i32), CliError> {
    let mut report = Report::new(config.clone());
    let outcome = crate::selftest::run(config.seed, config.n, config.threads)?;
    report.checks = outcome.checks;
    report.rows = outcome.rows;
    let exact_ok = report.all_checks_pass();
    let stat_ok = report.all_rows_pass();
    report.data = json!({ "exact_checks_pass": exact_ok, "statistical_rows_pass": stat_ok });
    let code = if !exact_ok {
        exit::CONSISTENCY
    } else if !stat_ok {
        exit::STATISTICAL
    } else {
        exit::OK
    };
    Ok((report, code))
}

fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let text = match format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv()?,
    };
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Config(e.to_string()))
        }
    }
}

/// Runs one command and returns its report with the exit code it implies.
pub fn execute(command: &Command, env_seed: Option<String>) -> Result<(Report, i32), CliError> {
    let (name, args) = match command {
        Command::Exact(a) => ("exact", a),
        Command::Mc(a) => ("mc", a),
        Command::Scan(a) => ("scan", a),
        Command::Concentration(a) => ("concentration", a),
        Command::Selftest(a) => ("selftest", a),
    };
    let config = resolve_config(name, args, env_seed)?;
    match name {
        "exact" => cmd_exact(&config),
        "mc" => cmd_mc(&config),
        "scan" => cmd_scan(&config),
        "concentration" => cmd_concentration(&config),
        _ => cmd_selftest(&config),
    }
}

/// Parses arguments, runs the command, writes the report and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    let args = match &cli.command {
        Command::Exact(a) | Command::Mc(a) | Command::Scan(a) | Command::Concentration(a) | Command::Selftest(a) => a,
    };
    match execute(&cli.command, std::env::var(SEED_ENV).ok()) {
        Ok((report, code)) => match emit(&report, args.format, args.out.as_deref()) {
            Ok(()) => code,
            Err(e) => {
                eprintln!("haarmoment: {e}");
                exit::CONFIG
            }
        },
        Err(e) => {
            eprintln!("haarmoment: {e}");
            match e {
                CliError::Config(_) => exit::CONFIG,
                CliError::Consistency(_) => exit::CONSISTENCY,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_ranges() {
        assert_eq!("4".parse::<DimRange>().unwrap(), DimRange { lo: 4, hi: 4 });
        assert_eq!("2..6".parse::<DimRange>().unwrap(), DimRange { lo: 2, hi: 6 });
        assert_eq!("2..=3".parse::<DimRange>().unwrap(), DimRange { lo: 2, hi: 3 });
        assert!("1".parse::<DimRange>().is_err());
        assert!("5..3".parse::<DimRange>().is_err());
    }

    #[test]
    fn seed_resolution() {
        assert_eq!(resolve_seed(Some(5), Some("9".into())).unwrap().0, 5);
        assert_eq!(resolve_seed(None, Some("9".into())).unwrap(), (9, "env".into()));
        assert_eq!(resolve_seed(None, None).unwrap().0, DEFAULT_SEED);
        assert!(resolve_seed(None, Some("x".into())).is_err());
    }

    #[test]
    fn pair_sources() {
        assert!(resolve_pair("pauli-xy", 2).is_ok());
        assert!(matches!(resolve_pair("pauli-xy", 3), Err(CliError::Config(_))));
        assert!(resolve_pair("gell-mann:1,8", 3).is_ok());
        assert!(resolve_pair("gell-mann:1,9", 3).is_err());
        let (a, _) = resolve_pair("seeded:7", 5).unwrap();
        assert!((a.operator_norm() - 1.0).abs() < 1e-12);
        assert!(resolve_pair("nonsense", 2).is_err());
    }

    #[test]
    fn observable_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        let file = ObservableFile::from_observable(&Observable::gell_mann(5).unwrap());
        std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(load_observable(&path).unwrap(), Observable::gell_mann(5).unwrap());
        let bad = ObservableFile { d: 2, re: vec![vec![0.0, 1.0], vec![0.0, 0.0]], im: vec![vec![0.0; 2]; 2] };
        assert!(bad.to_observable().is_err());
    }

    #[test]
    fn spectrum_sources() {
        assert!(resolve_spectrum("uniform", 3, 1).unwrap().values().iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(resolve_spectrum("random-simplex", 4, 1).unwrap(), resolve_spectrum("random-simplex", 4, 1).unwrap());
        assert!(resolve_spectrum("bogus", 2, 1).is_err());
    }
}
