//! Argument parsing, dispatch and output for the `sqfree-lab` binary.
//!
//! Every result is wrapped with a manifest (configuration echo, version, the
//! constant `C` in use, timings). JSON is the canonical format; the table-like
//! results also come as CSV with the manifest in a leading comment line.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use sqfree_lab::ap_variance::ap_variance;
use sqfree_lab::constants::{constant_c, six_over_pi2, zeta_real, DEFAULT_TRUNCATION};
use sqfree_lab::diophantine::{
    cf_expand, convergent_in_range, count_form_box, count_near_multiples, lat2_bound, lat_bound, pell_classes,
};
use sqfree_lab::interval::{geometric_sweep, interval_variance_sweep};
use sqfree_lab::main_term::sinc_main_term;
use sqfree_lab::sieve::mobius_segment;
use sqfree_lab::stochastic::{hurst_estimate, path_sample, write_path_csv, Sampling, SeriesKind};
use sqfree_lab::verify::run_checks;
use sqfree_lab::{LabError, Workers};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "sqfree-lab",
    version,
    about = "Numerical laboratory for squarefree integers in short intervals and progressions"
)]
pub struct Cli {
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Omit wall-clock timings so that identical runs give identical bytes.
    #[arg(long, global = true)]
    pub no_timestamps: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// The constants C, 6/pi^2 and zeta(3/2).
    #[command(long_about = "The variance constant C = zeta(3/2)/pi * prod_p (1 - 3/p^2 + 2/p^3), \
        truncated at primes <= --truncation with a rigorous tail bound, together with 6/pi^2 and zeta(3/2).")]
    Constants(ConstantsArgs),
    /// Variance of squarefree counts in (x, x + H] over x in [X, 2X).
    #[command(long_about = "Mean square of #{x < n <= x + H : n squarefree} - 6H/pi^2 over x in [X, 2X), \
        compared with the asymptotic C sqrt(H), expected for H <= X^{6/11} (and H <= X^{2/3} under the \
        Lindelof hypothesis).")]
    IntervalVariance(IntervalArgs),
    /// Variance of squarefree counts n <= x, n = a mod q over reduced classes a.
    #[command(long_about = "(1/phi(q)) sum over (a, q) = 1 of (#{n <= x squarefree, n = a mod q} - m)^2 with \
        m = (6/pi^2)(x/q) prod_{p | q} (1 - 1/p^2)^{-1}, compared with C prod_{p | q} (1 + 2/p)^{-1} sqrt(x/q), \
        expected for x^{5/11} <= q <= x^{1 - epsilon}. q must be prime.")]
    ApVariance(ApArgs),
    /// The weighted sinc double sum that produces the main term.
    #[command(long_about = "2H^2 sum_{d1, d2 <= sqrt z} mu(d1) mu(d2) / (d1 d2)^2 sum_{lambda >= 1} \
        S(lambda H / [d1^2, d2^2])^2 with S(x) = sin(pi x)/(pi x), grouped by gcd(d1, d2), compared with C sqrt(H).")]
    MainTerm(MainTermArgs),
    /// Continued fraction of sqrt(b/a) and a convergent with denominator in [R, 3 sqrt(ab) R].
    #[command(long_about = "Periodic continued fraction of sqrt(b/a); partial quotients are at most 2 sqrt(ab). \
        With --R, the first convergent r/q with q >= R, which satisfies |sqrt(b/a) - r/q| <= 1/q^2.")]
    Cf(CfArgs),
    /// Count m in [M, 2M) with ||m sqrt(b/a)|| <= eta.
    #[command(long_about = "Exact count of M <= m < 2M with ||m sqrt(b/a)|| <= eta, against the bound shape \
        eta M + sqrt(eta M) (ab)^{1/4} + 1.")]
    CountNear(CountNearArgs),
    /// Count pairs with |a m1^2 - b m2^2| <= b M2^2 / T.
    #[command(long_about = "Exact count of m1 in [M1, 2M1), m2 in [M2, 2M2) with |a m1^2 - b m2^2| <= b M2^2 / T, \
        against the bound shape M1 M2 / T + (sqrt(M1 M2) (ab)^{1/4} / sqrt(T) + 1) 1{M2 < T}.")]
    CountForm(CountFormArgs),
    /// Solutions of n1 x^2 - n2 y^2 = rhs grouped by unit classes.
    #[command(long_about = "Enumerates n1 x^2 - n2 y^2 = rhs with |x|, |y| <= box and assigns each solution to \
        T_m^+ or T_m^- by eps^{2m-2} <= |(sqrt(n1) x + sqrt(n2) y)/(sqrt(n1) x - sqrt(n2) y)| < eps^{2m} and the sign \
        of sqrt(n1) x - sqrt(n2) y, where eps = x0/2 + y0 sqrt(n1 n2) and x0^2 - 4 n1 n2 y0^2 = 4. #T_m^+ does not depend on m.")]
    Pell(PellArgs),
    /// Normalized partial-sum path t -> sum_{x < n <= x + tH} (a_n - mean).
    #[command(long_about = "H^{-1/4} sum_{x < n <= x + tH} (mu^2(n) - 6/pi^2) for squarefree (fractional Brownian \
        motion with Hurst parameter 1/4), H^{-1/2} sum_{x < p <= x + tH} log p minus tH for primes (Brownian motion), \
        or H^{-1/2} times a sum of independent signs for the synthetic series.")]
    Path(PathArgs),
    /// Variance scaling of window sums and the implied Hurst exponent.
    #[command(
        long_about = "Mean-centered variance of the window sum over (n, n + H] for sampled n in [X, 2X), fitted \
        as log variance against log H; the implied Hurst exponent is half the slope (1/4 for squarefree, \
        1/2 for primes)."
    )]
    Hurst(HurstArgs),
    /// Small-scale self-check against brute-force and closed-form oracles.
    #[command(long_about = "Sieve counts, short-interval and progression variances against brute force, character \
        orthogonality, the Parseval identity sum_lambda S(lambda/g)^2 = g, int S(y)^2 sqrt(y) dy = 1/pi, \
        partial quotients <= 2 sqrt(ab), Pell class equality, and worker determinism.")]
    Verify(VerifyArgs),
    /// Möbius values on [lo, hi) as CSV (n, mu).
    #[command(long_about = "mu(n) for lo <= n < hi from the segmented sieve.")]
    Mobius(MobiusArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ConstantsArgs {
    /// Largest prime in the truncated Euler product.
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    pub truncation: u64,
}

/// `lo:hi:factor` for a geometric sweep of window lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sweep {
    pub lo: u64,
    pub hi: u64,
    pub factor: u64,
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, factor] = parts[..] else {
            return Err(format!("expected lo:hi:factor, got {s:?}"));
        };
        let num = |v: &str| v.trim().parse::<u64>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Sweep { lo: num(lo)?, hi: num(hi)?, factor: num(factor)? })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct IntervalArgs {
    #[arg(long = "X")]
    #[serde(rename = "X")]
    pub x: u64,
    #[arg(long = "H", required_unless_present = "h_sweep", conflicts_with = "h_sweep")]
    #[serde(rename = "H")]
    pub h: Option<u64>,
    #[arg(long = "H-sweep", value_name = "LO:HI:FACTOR")]
    #[serde(rename = "H_sweep")]
    pub h_sweep: Option<Sweep>,
}

#[derive(Debug, Args, Serialize)]
pub struct ApArgs {
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub q: u64,
    /// Also write the per-class counts as CSV (a, count).
    #[arg(long, value_name = "FILE")]
    pub dump_classes: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MainTermArgs {
    #[arg(long = "H")]
    #[serde(rename = "H")]
    pub h: f64,
    #[arg(long)]
    pub z: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CfArgs {
    #[arg(long)]
    pub a: u64,
    #[arg(long)]
    pub b: u64,
    /// Lower end of the convergent-denominator range.
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub r: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    pub max_terms: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CountNearArgs {
    #[arg(long)]
    pub a: u64,
    #[arg(long)]
    pub b: u64,
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: u64,
    #[arg(long)]
    pub eta: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CountFormArgs {
    #[arg(long)]
    pub a: u64,
    #[arg(long)]
    pub b: u64,
    #[arg(long = "M1")]
    #[serde(rename = "M1")]
    pub m1: u64,
    #[arg(long = "M2")]
    #[serde(rename = "M2")]
    pub m2: u64,
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct PellArgs {
    #[arg(long)]
    pub n1: u64,
    #[arg(long)]
    pub n2: u64,
    #[arg(long, allow_hyphen_values = true)]
    pub rhs: i64,
    #[arg(long = "box")]
    #[serde(rename = "box")]
    pub box_size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Squarefree,
    Prime,
    Synthetic,
}

fn series_kind(kind: KindArg, seed: Option<u64>) -> Result<SeriesKind, LabError> {
    Ok(match kind {
        KindArg::Squarefree => SeriesKind::Squarefree,
        KindArg::Prime => SeriesKind::Prime,
        KindArg::Synthetic => SeriesKind::Synthetic {
            seed: seed.ok_or_else(|| LabError::Argument("the synthetic series needs --series-seed".into()))?,
        },
    })
}

#[derive(Debug, Args, Serialize)]
pub struct PathArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub x: u64,
    #[arg(long = "H")]
    #[serde(rename = "H")]
    pub h: u64,
    #[arg(long, default_value_t = 10.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: u64,
    /// Seed of the synthetic sign sequence.
    #[arg(long)]
    pub series_seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct HurstArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long = "X")]
    #[serde(rename = "X")]
    pub x: u64,
    /// Window lengths, comma separated.
    #[arg(long = "H", value_delimiter = ',', required_unless_present = "h_sweep", conflicts_with = "h_sweep")]
    #[serde(rename = "H")]
    pub h: Vec<u64>,
    #[arg(long = "H-sweep", value_name = "LO:HI:FACTOR")]
    #[serde(rename = "H_sweep")]
    pub h_sweep: Option<Sweep>,
    #[arg(long, default_value_t = 2000)]
    pub trials: u64,
    /// Seed for the window positions.
    #[arg(long)]
    pub seed: u64,
    /// Use every start in [X, 2X) instead of random ones.
    #[arg(long)]
    pub exhaustive: bool,
    /// Seed of the synthetic sign sequence.
    #[arg(long)]
    pub series_seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {}

#[derive(Debug, Args, Serialize)]
pub struct MobiusArgs {
    #[arg(long)]
    pub lo: u64,
    #[arg(long)]
    pub hi: u64,
}

#[derive(Debug)]
enum Failure {
    Lab(LabError),
    Usage(String),
    Io(io::Error),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Io(e) => Failure::Io(e),
            other => Failure::Lab(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

/// What a subcommand produced: a JSON value and, for tabular results, CSV text.
struct Outcome {
    result: Value,
    csv: Option<String>,
    all_passed: bool,
}

impl Outcome {
    fn json(result: Value) -> Self {
        Outcome { result, csv: None, all_passed: true }
    }
}

struct Phases {
    entries: Vec<(&'static str, f64)>,
    last: Instant,
}

impl Phases {
    fn new() -> Self {
        Phases { entries: Vec::new(), last: Instant::now() }
    }

    fn mark(&mut self, name: &'static str) {
        let now = Instant::now();
        self.entries.push((name, (now - self.last).as_secs_f64()));
        self.last = now;
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize to JSON")
}

fn sweep_values(h: Option<u64>, sweep: Option<Sweep>) -> Result<Vec<u64>, LabError> {
    match (h, sweep) {
        (Some(h), _) => Ok(vec![h]),
        (None, Some(s)) => geometric_sweep(s.lo, s.hi, s.factor),
        (None, None) => Err(LabError::Argument("give --H or --H-sweep".into())),
    }
}

fn execute(cli: &Cli, workers: Workers, phases: &mut Phases) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Constants(a) => {
            let c = constant_c(a.truncation)?;
            phases.mark("compute");
            Ok(Outcome::json(json!({
                "C": c.value,
                "tail_bound": c.tail_bound,
                "truncation_prime": c.truncation_prime,
                "six_over_pi2": six_over_pi2(),
                "zeta_3_2": zeta_real(1.5)?,
            })))
        }
        Command::IntervalVariance(a) => {
            let hs = sweep_values(a.h, a.h_sweep)?;
            let reports = interval_variance_sweep(a.x, &hs, workers)?;
            phases.mark("compute");
            let mut csv = String::from("X,H,variance,predicted,ratio\n");
            for r in &reports {
                writeln!(csv, "{},{},{},{},{}", r.x, r.h, r.variance, r.predicted, r.ratio).unwrap();
            }
            let result = if reports.len() == 1 { to_value(&reports[0]) } else { json!({ "reports": reports }) };
            Ok(Outcome { result, csv: Some(csv), all_passed: true })
        }
        Command::ApVariance(a) => {
            let r = ap_variance(a.x, a.q, workers)?;
            phases.mark("compute");
            let mut csv = String::from("a,count\n");
            for (i, c) in r.class_counts.iter().enumerate() {
                writeln!(csv, "{},{c}", i + 1).unwrap();
            }
            if let Some(path) = &a.dump_classes {
                std::fs::write(path, &csv)?;
            }
            let mut result = to_value(&r);
            // the per-class list belongs to --dump-classes; the JSON keeps the summary
            result.as_object_mut().unwrap().remove("class_counts");
            Ok(Outcome { result, csv: Some(csv), all_passed: true })
        }
        Command::MainTerm(a) => {
            let r = sinc_main_term(a.h, a.z, a.rel_tol, workers)?;
            phases.mark("compute");
            Ok(Outcome::json(to_value(&r)))
        }
        Command::Cf(a) => {
            let irr = cf_expand(a.a, a.b, a.max_terms)?;
            let mut result = to_value(&irr);
            let bound_ok = (irr.max_partial_quotient() as u128).pow(2) <= 4 * a.a as u128 * a.b as u128;
            let obj = result.as_object_mut().unwrap();
            obj.insert("max_partial_quotient".into(), json!(irr.max_partial_quotient()));
            obj.insert("within_2_sqrt_ab".into(), json!(bound_ok));
            if let Some(r) = a.r {
                let (num, den) = convergent_in_range(a.a, a.b, r)?;
                obj.insert("convergent".into(), json!({ "r": num.to_string(), "q": den.to_string() }));
            }
            phases.mark("compute");
            Ok(Outcome::json(result))
        }
        Command::CountNear(a) => {
            let count = count_near_multiples(a.a, a.b, a.m, a.eta)?;
            phases.mark("compute");
            let bound = lat_bound(a.a, a.b, a.m, a.eta);
            Ok(Outcome::json(json!({ "count": count, "bound_shape": bound, "ratio": count as f64 / bound })))
        }
        Command::CountForm(a) => {
            let count = count_form_box(a.a, a.b, a.m1, a.m2, a.t)?;
            phases.mark("compute");
            let bound = lat2_bound(a.a, a.b, a.m1, a.m2, a.t);
            Ok(Outcome::json(json!({ "count": count, "bound_shape": bound, "ratio": count as f64 / bound })))
        }
        Command::Pell(a) => {
            let r = pell_classes(a.n1, a.n2, a.rhs, a.box_size)?;
            phases.mark("compute");
            Ok(Outcome::json(to_value(&r)))
        }
        Command::Path(a) => {
            let kind = series_kind(a.kind, a.series_seed)?;
            let path = path_sample(kind, a.x, a.h, a.t_max, a.steps)?;
            phases.mark("compute");
            let mut buf = Vec::new();
            write_path_csv(&path, &mut buf)?;
            Ok(Outcome { result: to_value(&path), csv: Some(String::from_utf8(buf).unwrap()), all_passed: true })
        }
        Command::Hurst(a) => {
            let kind = series_kind(a.kind, a.series_seed)?;
            let hs = if a.h.is_empty() { sweep_values(None, a.h_sweep)? } else { a.h.clone() };
            let sampling =
                if a.exhaustive { Sampling::Exhaustive } else { Sampling::Random { trials: a.trials, seed: a.seed } };
            let est = hurst_estimate(kind, a.x, &hs, sampling, workers)?;
            phases.mark("compute");
            let mut csv = String::from("H,variance\n");
            for (h, v) in est.h_values.iter().zip(&est.variances) {
                writeln!(csv, "{h},{v}").unwrap();
            }
            Ok(Outcome { result: to_value(&est), csv: Some(csv), all_passed: true })
        }
        Command::Verify(_) => {
            let checks = run_checks(workers)?;
            phases.mark("compute");
            let all_passed = checks.iter().all(|c| c.passed);
            let mut csv = String::from("check,status,detail\n");
            for c in &checks {
                let status = if c.passed { "pass" } else { "FAIL" };
                writeln!(csv, "{},{status},\"{}\"", c.name, c.detail.replace('"', "'")).unwrap();
            }
            Ok(Outcome { result: json!({ "all_passed": all_passed, "checks": checks }), csv: Some(csv), all_passed })
        }
        Command::Mobius(a) => {
            let seg = mobius_segment(a.lo, a.hi)?;
            phases.mark("compute");
            let mut csv = String::from("n,mu\n");
            for (n, mu) in seg.iter() {
                writeln!(csv, "{n},{mu}").unwrap();
            }
            let values: Vec<i8> = seg.mu.clone();
            Ok(Outcome { result: json!({ "lo": a.lo, "hi": a.hi, "mu": values }), csv: Some(csv), all_passed: true })
        }
    }
}

fn manifest(cli: &Cli, workers: Workers, phases: &Phases, started: Instant) -> Result<Value, Failure> {
    let c = constant_c(DEFAULT_TRUNCATION)?;
    let mut m = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cli.command,
        "workers": workers.get(),
        "format": cli.format,
        "constant": { "C": c.value, "truncation_prime": c.truncation_prime, "tail_bound": c.tail_bound },
    });
    if !cli.no_timestamps {
        let obj = m.as_object_mut().unwrap();
        obj.insert("wall_time_s".into(), json!(started.elapsed().as_secs_f64()));
        let phases: serde_json::Map<String, Value> =
            phases.entries.iter().map(|&(name, secs)| (name.to_string(), json!(secs))).collect();
        obj.insert("phases_s".into(), Value::Object(phases));
    }
    Ok(m)
}

fn render(cli: &Cli, manifest: Value, outcome: Outcome) -> Result<String, Failure> {
    match cli.format {
        Format::Json => {
            let doc = json!({ "manifest": manifest, "result": outcome.result });
            Ok(serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n")
        }
        Format::Csv => {
            let csv = outcome
                .csv
                .ok_or_else(|| Failure::Usage("this subcommand has no CSV form; use --format json".into()))?;
            Ok(format!("# manifest: {manifest}\n{csv}"))
        }
    }
}

fn run_parsed(cli: &Cli, out: &mut dyn Write) -> Result<bool, Failure> {
    let started = Instant::now();
    let workers = match cli.workers {
        Some(n) => Workers::new(n)?,
        None => Workers::available(),
    };
    if cli.format == Format::Csv
        && matches!(
            cli.command,
            Command::Constants(_)
                | Command::MainTerm(_)
                | Command::Cf(_)
                | Command::CountNear(_)
                | Command::CountForm(_)
                | Command::Pell(_)
        )
    {
        return Err(Failure::Usage("this subcommand has no CSV form; use --format json".into()));
    }
    let mut phases = Phases::new();
    let outcome = execute(cli, workers, &mut phases)?;
    let all_passed = outcome.all_passed;
    let manifest = manifest(cli, workers, &phases, started)?;
    let text = render(cli, manifest, outcome)?;
    match &cli.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(all_passed)
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match run_parsed(&cli, out) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Lab(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_PRECONDITION
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_IO
        }
    }
}
