//! Command-line front end.
//!
//! Exit codes: 0 when the queried relation holds or every property
//! passes, 1 when it does not, 2 on usage or input errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use minusorder::conic::{self, svg::Scene, Conic2, Point2};
use minusorder::linalg::{
    moore_penrose, penrose_residuals, read_matrix_file, write_matrix_text, MatrixJson, TolerancePolicy,
};
use minusorder::order::suites::{congruence_invariance, order_axioms, predicate_agreement, rank_one_equivalence};
use minusorder::order::{minus_leq_image_verdict, minus_leq_inner, minus_leq_rank_verdict, OrderVerdict};
use minusorder::random::{random_invertible, SeedStream, DEFAULT_SEED};
use minusorder::reconstruction::{rigidity_suite, run_pipeline, test_bimonotone, CongruenceMap, Fault, FaultyMap};
use minusorder::report::PropertyReport;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Stream for the map behind the bi-monotonicity check and fault runs.
const STREAM_VERIFY_MAP: u64 = 41;

#[derive(Debug, Parser)]
#[command(
    name = "minusorder",
    version,
    about = "Minus order queries, conic solvers and congruence recovery checks"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Relative singular value cutoff for rank decisions.
    #[arg(long, global = true, value_name = "TOL")]
    tol_rank: Option<f64>,
    /// Entrywise tolerance for symmetry and equality checks.
    #[arg(long, global = true, value_name = "TOL")]
    tol_sym: Option<f64>,
    /// Eigenvalues down to minus this are treated as zero.
    #[arg(long, global = true, value_name = "TOL")]
    tol_psd: Option<f64>,
    /// Root seed (decimal or 0x-prefixed hex).
    #[arg(long, global = true, env = "MINUSORDER_SEED", value_parser = parse_seed, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    Projector,
    Rank,
    Zero,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Self {
        match f {
            FaultArg::Projector => Fault::Projector,
            FaultArg::Rank => Fault::Rank,
            FaultArg::Zero => Fault::Zero,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide A <=- B with all three predicates; exit 0 iff it holds.
    CheckOrder { a: PathBuf, b: PathBuf },
    /// Moore-Penrose inverse of a matrix file.
    Pinv { path: PathBuf },
    /// Ellipse at angle PHI touching the unit circle and a x^2 + b y^2 = 1.
    #[command(allow_negative_numbers = true)]
    Touching { a: f64, b: f64, phi: f64 },
    /// Apply the planar rigidity map (or its inverse) to a point.
    #[command(allow_negative_numbers = true)]
    PhiHat {
        a0: f64,
        gamma: f64,
        x: f64,
        y: f64,
        #[arg(long)]
        inverse: bool,
    },
    /// Run the recovery and order property suites.
    Verify {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Run the pipeline on a congruence map with this fault injected.
        #[arg(long, value_enum)]
        fault: Option<FaultArg>,
    },
    /// Render a JSON scene of conics and points as SVG.
    Svg { scene: PathBuf },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] minusorder::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Rendered report plus exit code.
struct Outcome {
    body: String,
    code: u8,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self { body, code: EXIT_OK }
    }

    fn verdict(body: String, holds: bool) -> Self {
        Self {
            body,
            code: if holds { EXIT_OK } else { EXIT_NEGATIVE },
        }
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli).and_then(|out| emit(&cli.global, out)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn emit(opts: &GlobalOpts, out: Outcome) -> CliResult<u8> {
    let mut body = out.body;
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match &opts.output {
        Some(path) => std::fs::write(path, body).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => print!("{body}"),
    }
    Ok(out.code)
}

fn policy(opts: &GlobalOpts) -> CliResult<TolerancePolicy> {
    let d = TolerancePolicy::default();
    Ok(TolerancePolicy::new(
        opts.tol_rank.unwrap_or(d.rank_rel_tol),
        opts.tol_sym.unwrap_or(d.sym_abs_tol),
        opts.tol_psd.unwrap_or(d.psd_eig_tol),
    )?)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn execute(cli: &Cli) -> CliResult<Outcome> {
    let opts = &cli.global;
    let policy = policy(opts)?;
    match &cli.command {
        Command::CheckOrder { a, b } => check_order(a, b, opts.format, &policy),
        Command::Pinv { path } => pinv(path, opts.format, &policy),
        Command::Touching { a, b, phi } => touching(*a, *b, *phi, opts.format),
        Command::PhiHat {
            a0,
            gamma,
            x,
            y,
            inverse,
        } => phi_hat(*a0, *gamma, [*x, *y], *inverse, opts.format),
        Command::Verify { n, trials, fault } => {
            if *n < 3 {
                return Err(CliError::Usage(format!("verify needs n >= 3, got {n}")));
            }
            match fault {
                Some(f) => verify_fault(*n, opts.seed, (*f).into(), opts.format, &policy),
                None => verify(*n, *trials, opts.seed, opts.format, &policy),
            }
        }
        Command::Svg { scene } => svg(scene),
    }
}

#[derive(Serialize)]
struct Verdicts {
    rank: OrderVerdict,
    image: OrderVerdict,
    inner: OrderVerdict,
}

#[derive(Serialize)]
struct OrderReport {
    a: String,
    b: String,
    holds: bool,
    agree: bool,
    verdicts: Verdicts,
}

fn check_order(pa: &Path, pb: &Path, format: Format, policy: &TolerancePolicy) -> CliResult<Outcome> {
    let (a, b) = (read_matrix_file(pa)?, read_matrix_file(pb)?);
    let verdicts = Verdicts {
        rank: minus_leq_rank_verdict(&a, &b, policy)?,
        image: minus_leq_image_verdict(&a, &b, policy)?,
        inner: minus_leq_inner(&a, &b, policy)?,
    };
    let holds = verdicts.rank.holds;
    let report = OrderReport {
        a: pa.display().to_string(),
        b: pb.display().to_string(),
        holds,
        agree: verdicts.image.holds == holds && verdicts.inner.holds == holds,
        verdicts,
    };
    let body = match format {
        Format::Json => to_json(&report),
        Format::Text => {
            let word = |h: bool| if h { "holds" } else { "fails" };
            let v = &report.verdicts;
            let mut s = String::new();
            let _ = writeln!(s, "rank subtractivity: {}", word(v.rank.holds));
            let _ = writeln!(s, "image direct sum:   {}", word(v.image.holds));
            let _ = writeln!(
                s,
                "inner inverse:      {} (residual {:.3e})",
                word(v.inner.holds),
                v.inner.residual
            );
            let _ = writeln!(s, "agree: {}", report.agree);
            s
        }
    };
    Ok(Outcome::verdict(body, holds))
}

#[derive(Serialize)]
struct PinvReport {
    rows: Vec<Vec<f64>>,
    penrose_residuals: [f64; 4],
}

/// In text mode stdout carries only the matrix, so it can be read back;
/// the residuals go to stderr.
fn pinv(path: &Path, format: Format, policy: &TolerancePolicy) -> CliResult<Outcome> {
    let a = read_matrix_file(path)?;
    let x = moore_penrose(&a, policy);
    let residuals = penrose_residuals(&a, &x);
    let body = match format {
        Format::Json => to_json(&PinvReport {
            rows: MatrixJson::from(&x).rows,
            penrose_residuals: residuals,
        }),
        Format::Text => {
            eprintln!(
                "penrose residuals: {:.3e} {:.3e} {:.3e} {:.3e}",
                residuals[0], residuals[1], residuals[2], residuals[3]
            );
            write_matrix_text(&x)
        }
    };
    Ok(Outcome::ok(body))
}

#[derive(Serialize)]
struct TouchingReport {
    a: f64,
    b: f64,
    phi: f64,
    r_closed_form: f64,
    r_root: f64,
    discrepancy: f64,
    conic: Conic2,
    touch_point: Point2,
}

fn touching(a: f64, b: f64, phi: f64, format: Format) -> CliResult<Outcome> {
    let r_closed_form = conic::touching_r_closed_form(a, b, phi)?;
    let sol = conic::touching_ellipse(&Conic2::new(a, 0.0, b)?, phi)?;
    let report = TouchingReport {
        a,
        b,
        phi,
        r_closed_form,
        r_root: sol.r,
        discrepancy: (r_closed_form - sol.r).abs(),
        conic: conic::touching_conic_matrix(a, b, phi)?,
        touch_point: sol.touch_point,
    };
    let body = match format {
        Format::Json => to_json(&report),
        Format::Text => {
            let c = &report.conic;
            format!(
                "r (closed form): {}\nr (determinant root): {}\ndiscrepancy: {:.3e}\nconic: q11 = {}, q12 = {}, q22 = {}\ntouch point: ({}, {})\n",
                report.r_closed_form,
                report.r_root,
                report.discrepancy,
                c.q11,
                c.q12,
                c.q22,
                report.touch_point[0],
                report.touch_point[1]
            )
        }
    };
    Ok(Outcome::ok(body))
}

#[derive(Serialize)]
struct PhiHatReport {
    a0: f64,
    gamma: f64,
    inverse: bool,
    input: Point2,
    output: Point2,
}

fn phi_hat(a0: f64, gamma: f64, p: Point2, inverse: bool, format: Format) -> CliResult<Outcome> {
    let output = if inverse {
        conic::phi_hat_inverse(a0, gamma, p)?
    } else {
        conic::phi_hat(a0, gamma, p)?
    };
    let report = PhiHatReport {
        a0,
        gamma,
        inverse,
        input: p,
        output,
    };
    let body = match format {
        Format::Json => to_json(&report),
        Format::Text => format!("{} {}\n", output[0], output[1]),
    };
    Ok(Outcome::ok(body))
}

#[derive(Serialize)]
struct VerifyReport {
    n: usize,
    trials: usize,
    seed: u64,
    passed: bool,
    properties: Vec<PropertyReport>,
}

fn verify(n: usize, trials: usize, seed: u64, format: Format, policy: &TolerancePolicy) -> CliResult<Outcome> {
    let seeds = SeedStream::new(seed);
    let mut properties = vec![rigidity_suite(n, trials, seed, policy)?];
    properties.push(predicate_agreement(n, trials, seeds, policy));
    properties.push(order_axioms(n, trials, seeds, policy));
    properties.push(congruence_invariance(n, trials, seeds, policy));
    properties.push(rank_one_equivalence(n, trials, seeds, policy));

    let s = random_invertible(&mut seeds.rng(STREAM_VERIFY_MAP, 0), n);
    let map = CongruenceMap::new(s, policy)?;
    let mono = test_bimonotone(&map, trials, n, seeds.derive(STREAM_VERIFY_MAP, 1), policy);
    properties.push(PropertyReport {
        property: format!("congruence bi-monotone (n = {n})"),
        trials: mono.trials,
        failures: mono.violations.len(),
        max_residual: 0.0,
        first_failure: mono.violations.first().map(|v| format!("{:?} violation", v.direction)),
    });

    let passed = properties.iter().all(PropertyReport::passed);
    let report = VerifyReport {
        n,
        trials,
        seed,
        passed,
        properties,
    };
    let body = match format {
        Format::Json => to_json(&report),
        Format::Text => {
            let mut s = String::new();
            for p in &report.properties {
                let tag = if p.passed() { "PASS" } else { "FAIL" };
                let _ = writeln!(
                    s,
                    "[{tag}] {}: {} trials, {} failures, max residual {:.3e}",
                    p.property, p.trials, p.failures, p.max_residual
                );
                if let Some(f) = &p.first_failure {
                    let _ = writeln!(s, "       first failure: {f}");
                }
            }
            let _ = writeln!(
                s,
                "seed {:#x}: {}",
                seed,
                if passed { "all properties hold" } else { "FAILED" }
            );
            s
        }
    };
    Ok(Outcome::verdict(body, passed))
}

#[derive(Serialize)]
struct FaultReport {
    n: usize,
    seed: u64,
    fault: Fault,
    expected_stage: &'static str,
    /// Stage that rejected the map, if any did.
    stage: Option<&'static str>,
    error: Option<String>,
}

/// A faulty map must be rejected; exit 1 reports the rejecting stage.
fn verify_fault(n: usize, seed: u64, fault: Fault, format: Format, policy: &TolerancePolicy) -> CliResult<Outcome> {
    let seeds = SeedStream::new(seed);
    let s = random_invertible(&mut seeds.rng(STREAM_VERIFY_MAP, 0), n);
    let map = FaultyMap::new(CongruenceMap::new(s, policy)?, fault, policy);
    let outcome = run_pipeline(&map, seeds.derive(STREAM_VERIFY_MAP, 2), policy);
    let report = FaultReport {
        n,
        seed,
        fault,
        expected_stage: fault.expected_stage().label(),
        stage: outcome.as_ref().err().and_then(minusorder::Error::stage),
        error: outcome.as_ref().err().map(ToString::to_string),
    };
    let body = match format {
        Format::Json => to_json(&report),
        Format::Text => match (&report.stage, &report.error) {
            (_, None) => "pipeline passed: fault not detected\n".to_string(),
            (stage, Some(e)) => format!("failed at stage {}: {e}\n", stage.unwrap_or("unknown")),
        },
    };
    Ok(Outcome::verdict(body, outcome.is_ok()))
}

fn svg(path: &Path) -> CliResult<Outcome> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: origin.clone(),
        source,
    })?;
    let scene: Scene = serde_json::from_str(&text).map_err(|e| minusorder::Error::Parse {
        path: origin,
        line: e.line(),
        message: e.to_string(),
    })?;
    Ok(Outcome::ok(conic::svg::render(&scene)))
}
