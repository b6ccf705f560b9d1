// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdirac::spectrum::{Parity, SpectrumResult};
use qdirac::trig::trig_qw;
use qdirac::verify::{self, PropertyCheck, Suite, DEFAULT_SEED};
use qdirac::{
    find_eigenvalues_with, picard_solve_with, residual, trig_zero_report, Error, HahnParams, PicardForm, PicardOptions,
    SpectrumOptions, TrigKind,
};
use serde::Serialize;

use config::{parse_real, PotentialSpec, PotentialsConfig, ProblemConfig, Real, Tolerances};
use output::{write_json, Cell, Format, Table};

const EXIT_PROPERTY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_PRECISION: u8 = 3;
const EXIT_BUDGET: u8 = 4;
const EXIT_MISSED_ROOT: u8 = 5;

#[derive(Parser)]
#[command(
    name = "qdirac",
    version,
    about = "Hahn calculus, q,omega-trigonometric functions and q,omega-Dirac spectra"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    #[arg(long, global = true, default_value_t = 0.5, value_parser = parse_real)]
    q: f64,
    #[arg(long, global = true, default_value_t = 0.5, value_parser = parse_real)]
    omega: f64,
    #[arg(long, global = true, default_value_t = config::DEFAULT_TOL_SERIES)]
    tol_series: f64,
    #[arg(long, global = true, default_value_t = config::DEFAULT_TOL_PICARD)]
    tol_picard: f64,
    #[arg(long, global = true, default_value_t = config::DEFAULT_TOL_ROOT)]
    tol_root: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output format; spectrum defaults to json, everything else to csv.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

impl Global {
    fn params(&self) -> Result<HahnParams, Failure> {
        Ok(HahnParams::new(self.q, self.omega)?)
    }

    fn tolerances(&self) -> Result<Tolerances, Failure> {
        for (name, v) in [
            ("--tol-series", self.tol_series),
            ("--tol-picard", self.tol_picard),
            ("--tol-root", self.tol_root),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::input(format!("{name} must be a positive number, got {v}")));
            }
        }
        Ok(Tolerances {
            series: self.tol_series,
            picard: self.tol_picard,
            root: self.tol_root,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the q,omega-cosine or sine.
    Trig(TrigArgs),
    /// Locate the first n positive zeros of the q,omega-cosine or sine.
    Zeros(ZerosArgs),
    /// Solve the q,omega-Dirac system for given lambda, potentials and initial data.
    Solve(SolveArgs),
    /// Compute eigenvalues of a built-in example or a JSON problem.
    Spectrum(SpectrumArgs),
    /// Run the randomized property suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Cos,
    Sin,
}

impl From<KindArg> for TrigKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Cos => TrigKind::Cosine,
            KindArg::Sin => TrigKind::Sine,
        }
    }
}

#[derive(Args)]
struct TrigArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, value_parser = parse_real, conflicts_with = "t_range", required_unless_present = "t_range")]
    t: Option<f64>,
    /// `start:end:step`, both ends included.
    #[arg(long, value_parser = parse_range)]
    t_range: Option<Range>,
}

#[derive(Args)]
struct ZerosArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    n: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormArg {
    Volterra,
    VariationOfConstants,
}

#[derive(Args)]
struct SolveArgs {
    /// Anchor of the lattice; `pi` is accepted.
    #[arg(long, value_parser = parse_real)]
    a: f64,
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    c1: f64,
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    c2: f64,
    /// Constant or comma-separated ascending coefficients.
    #[arg(long, default_value = "0", value_parser = PotentialSpec::parse, allow_hyphen_values = true)]
    p: PotentialSpec,
    #[arg(long, default_value = "0", value_parser = PotentialSpec::parse, allow_hyphen_values = true)]
    r: PotentialSpec,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = qdirac::solver::DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, value_enum, default_value = "volterra")]
    form: FormArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExampleArg {
    #[value(name = "3.2")]
    Cosine,
    #[value(name = "3.3")]
    Sine,
}

impl ExampleArg {
    fn label(self) -> &'static str {
        match self {
            ExampleArg::Cosine => "3.2",
            ExampleArg::Sine => "3.3",
        }
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long, value_enum, conflicts_with = "config", required_unless_present = "config")]
    example: Option<ExampleArg>,
    /// JSON problem description.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Right endpoint for the built-in examples.
    #[arg(long, value_parser = parse_real, default_value = "pi")]
    a: f64,
    #[arg(long)]
    n_max: Option<usize>,
    /// Also scan negative lambda.
    #[arg(long)]
    negative: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Calculus,
    Trig,
    Solver,
    Spectral,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum, default_value = "all")]
    suite: SuiteArg,
}

/// An error with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParameter(_) => EXIT_INPUT,
            Error::PrecisionLoss { .. } => EXIT_PRECISION,
            Error::PrecisionBudgetExceeded { .. } => EXIT_BUDGET,
            Error::MissedRootSuspected { .. } => EXIT_MISSED_ROOT,
            _ => EXIT_PROPERTY,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self {
            code: EXIT_PROPERTY,
            message: format!("output error: {e}"),
        }
    }
}

/// Sample points of a `start:end:step` range.
#[derive(Debug, Clone)]
struct Range(Vec<f64>);

fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<f64> = s.split(':').map(parse_real).collect::<Result<_, _>>()?;
    let [start, end, step] = parts[..] else {
        return Err(format!("expected start:end:step, got `{s}`"));
    };
    if !(step > 0.0) || !(end >= start) {
        return Err(format!("range `{s}` needs step > 0 and end >= start"));
    }
    // tolerate rounding in (end - start) / step
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok(Range((0..=n).map(|i| start + i as f64 * step).collect()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match &cli.command {
        Command::Trig(a) => cmd_trig(&cli.global, a, &mut out),
        Command::Zeros(a) => cmd_zeros(&cli.global, a, &mut out),
        Command::Solve(a) => cmd_solve(&cli.global, a, &mut out),
        Command::Spectrum(a) => cmd_spectrum(&cli.global, a, &mut out),
        Command::Verify(a) => cmd_verify(&cli.global, a, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_trig(g: &Global, args: &TrigArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let params = g.params()?;
    let tol = g.tolerances()?.series;
    let ts = match (&args.t, &args.t_range) {
        (Some(t), _) => vec![*t],
        (None, Some(r)) => r.0.clone(),
        (None, None) => return Err(Failure::input("one of --t or --t-range is required")),
    };
    let mut table = Table::new(&["t", "value", "terms_used", "cancellation", "est_abs_error", "status"]);
    let mut code = 0;
    for t in ts {
        match trig_qw(args.kind.into(), t, args.mu, &params, tol) {
            Ok(e) => table.push(vec![
                t.into(),
                e.value.into(),
                e.terms_used.into(),
                e.cancellation.into(),
                e.est_abs_error.into(),
                "ok".into(),
            ]),
            Err(Error::PrecisionLoss { cancellation, .. }) => {
                code = EXIT_PRECISION;
                table.push(vec![
                    t.into(),
                    Cell::Empty,
                    Cell::Empty,
                    cancellation.into(),
                    Cell::Empty,
                    "precision_loss".into(),
                ]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    table.write(out, g.format.unwrap_or(Format::Csv))?;
    if code != 0 {
        eprintln!("warning: some rows lost all significant digits to cancellation");
    }
    Ok(code)
}

fn cmd_zeros(g: &Global, args: &ZerosArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let params = g.params()?;
    let tol = g.tolerances()?.root;
    if args.n == 0 {
        return Err(Failure::input("--n must be >= 1"));
    }
    let mut table = Table::new(&[
        "n",
        "location",
        "offset",
        "combined_argument",
        "residual",
        "bracket_lo",
        "bracket_hi",
        "matched_family",
        "rel_dev",
    ]);
    for n in 1..=args.n {
        let r = trig_zero_report(n, args.kind.into(), &params, tol)?;
        let family = match r.matched {
            qdirac::trig::ZeroFamily::IntegerPower => "q^-n",
            qdirac::trig::ZeroFamily::HalfPower => "q^(-n+1/2)",
        };
        table.push(vec![
            n.into(),
            r.t.into(),
            (r.t - params.omega0()).into(),
            r.z.into(),
            r.residual.into(),
            r.bracket_t.0.into(),
            r.bracket_t.1.into(),
            family.into(),
            r.rel_dev.into(),
        ]);
    }
    table.write(out, g.format.unwrap_or(Format::Csv))?;
    Ok(0)
}

fn cmd_solve(g: &Global, args: &SolveArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let params = g.params()?;
    let tols = g.tolerances()?;
    let pot = PotentialsConfig {
        p: args.p.clone(),
        r: args.r.clone(),
    }
    .build(&params)
    .map_err(Failure::input)?;
    let opts = PicardOptions {
        tol: tols.picard,
        max_iter: args.max_iter,
        depth: args.depth,
        form: match args.form {
            FormArg::Volterra => PicardForm::Volterra,
            FormArg::VariationOfConstants => PicardForm::VariationOfConstants,
        },
        series_tol: tols.series,
    };
    let sol = picard_solve_with(&pot, args.c1, args.c2, args.lambda, args.a, &params, &opts)?;

    let mut table = Table::new(&["k", "t", "y1", "y2", "residual1", "residual2"]);
    table.push(vec![
        Cell::Empty,
        params.omega0().into(),
        args.c1.into(),
        args.c2.into(),
        Cell::Empty,
        Cell::Empty,
    ]);
    let last = sol.len() - 1;
    for k in (0..=last).rev() {
        let t = sol.points()[k];
        let (r1, r2) = if k > 0 && k < last {
            let (a, b) = residual(&sol, &pot, t, &params)?;
            (Cell::Real(a), Cell::Real(b))
        } else {
            (Cell::Empty, Cell::Empty)
        };
        table.push(vec![k.into(), t.into(), sol.y1(k).into(), sol.y2(k).into(), r1, r2]);
    }
    table.write(out, g.format.unwrap_or(Format::Csv))?;
    Ok(0)
}

#[derive(Serialize)]
struct ParamsReport {
    q: f64,
    omega: f64,
    omega0: f64,
    a: f64,
    k11: f64,
    k12: f64,
    k21: f64,
    k22: f64,
    example: Option<&'static str>,
    potentials: PotentialsConfig,
    tolerances: Tolerances,
    n_max: usize,
}

#[derive(Serialize)]
struct EigenvalueReport {
    n: usize,
    lambda: f64,
    bracket: [f64; 2],
    delta_residual: f64,
    derivative: f64,
    noise_floor: f64,
    simple: bool,
    asym_seed: Option<f64>,
    rel_dev_from_asym: Option<f64>,
    norm_identity_defect: Option<f64>,
}

#[derive(Serialize)]
struct PairReport {
    i: usize,
    j: usize,
    defect: f64,
}

#[derive(Serialize)]
struct SpectrumReport {
    status: &'static str,
    params: ParamsReport,
    eigenvalues: Vec<EigenvalueReport>,
    negative_eigenvalues: Vec<EigenvalueReport>,
    trivial_root: Option<f64>,
    symmetry: Option<&'static str>,
    pair_orthogonality: Vec<PairReport>,
    warnings: Vec<String>,
}

fn eigen_reports(list: &[qdirac::spectrum::Eigenpair]) -> Vec<EigenvalueReport> {
    list.iter()
        .map(|e| EigenvalueReport {
            n: e.n,
            lambda: e.lambda,
            bracket: [e.bracket.0, e.bracket.1],
            delta_residual: e.delta_residual,
            derivative: e.derivative,
            noise_floor: e.noise_floor,
            simple: e.simple,
            asym_seed: e.asym_seed,
            rel_dev_from_asym: e.rel_dev_from_asym,
            norm_identity_defect: e.norm_identity_defect,
        })
        .collect()
}

fn spectrum_report(status: &'static str, params: ParamsReport, r: &SpectrumResult) -> SpectrumReport {
    SpectrumReport {
        status,
        params,
        eigenvalues: eigen_reports(&r.eigenvalues),
        negative_eigenvalues: eigen_reports(&r.negative_eigenvalues),
        trivial_root: r.trivial_root,
        symmetry: r.symmetry.map(|p| match p {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }),
        pair_orthogonality: r
            .pair_orthogonality
            .iter()
            .map(|p| PairReport {
                i: p.i,
                j: p.j,
                defect: p.defect,
            })
            .collect(),
        warnings: r.warnings.clone(),
    }
}

fn cmd_spectrum(g: &Global, args: &SpectrumArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let config = match (&args.example, &args.config) {
        (Some(ex), _) => {
            let [k11, k12, k21, k22] = match ex {
                ExampleArg::Cosine => [1.0, 0.0, 0.0, 1.0],
                ExampleArg::Sine => [0.0, 1.0, 0.0, 1.0],
            };
            ProblemConfig {
                q: g.q,
                omega: g.omega,
                a: Real(args.a),
                bc: [k11, k12, k21, k22],
                potentials: PotentialsConfig::default(),
                tolerances: g.tolerances()?,
                n_max: args.n_max.unwrap_or(config::DEFAULT_N_MAX),
            }
        }
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
            let mut cfg = ProblemConfig::from_json(&text).map_err(Failure::input)?;
            if let Some(n) = args.n_max {
                cfg.n_max = n;
            }
            cfg
        }
        (None, None) => return Err(Failure::input("one of --example or --config is required")),
    };
    let problem = config.build().map_err(Failure::input)?;
    let opts = SpectrumOptions {
        series_tol: config.tolerances.series,
        picard_tol: config.tolerances.picard,
        root_tol: config.tolerances.root,
        scan_negative: args.negative,
        ..SpectrumOptions::default()
    };
    let params_report = ParamsReport {
        q: problem.params.q(),
        omega: problem.params.omega(),
        omega0: problem.params.omega0(),
        a: config.a.0,
        k11: problem.bc.k11,
        k12: problem.bc.k12,
        k21: problem.bc.k21,
        k22: problem.bc.k22,
        example: args.example.map(ExampleArg::label),
        potentials: config.potentials.clone(),
        tolerances: config.tolerances,
        n_max: config.n_max,
    };
    let format = g.format.unwrap_or(Format::Json);
    match find_eigenvalues_with(config.n_max, &problem.bc, &problem.potentials, &problem.params, &opts) {
        Ok(result) => {
            emit_spectrum(out, format, &spectrum_report("ok", params_report, &result))?;
            Ok(0)
        }
        Err(Error::MissedRootSuspected { near, partial }) => {
            let mut report = spectrum_report("missed_root_suspected", params_report, &partial);
            let warning = format!(
                "characteristic function dips below its noise floor near lambda = {near} without a sign change"
            );
            report.warnings.push(warning.clone());
            emit_spectrum(out, format, &report)?;
            eprintln!("warning: {warning}");
            Ok(EXIT_MISSED_ROOT)
        }
        Err(e) => Err(e.into()),
    }
}

fn emit_spectrum(out: &mut impl Write, format: Format, report: &SpectrumReport) -> Result<(), Failure> {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match format {
        Format::Json => write_json(out, report)?,
        Format::Csv => {
            let mut table = Table::new(&[
                "n",
                "lambda",
                "bracket_lo",
                "bracket_hi",
                "delta_residual",
                "simple",
                "asym_seed",
                "rel_dev_from_asym",
                "norm_identity_defect",
            ]);
            for e in &report.eigenvalues {
                table.push(vec![
                    e.n.into(),
                    e.lambda.into(),
                    e.bracket[0].into(),
                    e.bracket[1].into(),
                    e.delta_residual.into(),
                    if e.simple { "true" } else { "false" }.into(),
                    e.asym_seed.into(),
                    e.rel_dev_from_asym.into(),
                    e.norm_identity_defect.into(),
                ]);
            }
            table.write(out, Format::Csv)?;
        }
    }
    Ok(())
}

fn cmd_verify(g: &Global, args: &VerifyArgs, out: &mut impl Write) -> Result<u8, Failure> {
    let checks: Vec<PropertyCheck> = match args.suite {
        SuiteArg::All => verify::run_all(g.seed),
        SuiteArg::Calculus => verify::run_suite(Suite::Calculus, g.seed),
        SuiteArg::Trig => verify::run_suite(Suite::Trig, g.seed),
        SuiteArg::Solver => verify::run_suite(Suite::Solver, g.seed),
        SuiteArg::Spectral => verify::run_suite(Suite::Spectral, g.seed),
    };
    match g.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(&mut *out, &checks)?,
        Format::Csv => {
            let mut table = Table::new(&[
                "suite",
                "property",
                "cases",
                "worst_defect",
                "tolerance",
                "status",
                "error",
            ]);
            for c in &checks {
                table.push(vec![
                    c.suite.name().into(),
                    c.property.as_str().into(),
                    c.cases.into(),
                    c.worst_defect.into(),
                    c.tolerance.into(),
                    if c.passed { "pass" } else { "fail" }.into(),
                    c.error.as_deref().map_or(Cell::Empty, Cell::from),
                ]);
            }
            table.write(&mut *out, Format::Csv)?;
        }
    }
    Ok(if checks.iter().all(|c| c.passed) {
        0
    } else {
        EXIT_PROPERTY
    })
}
