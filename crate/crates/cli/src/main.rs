use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use semispectral::analysis::{PropertyReport, Verdict};
use semispectral::io;
use semispectral::kernels::{ConvolutionKernel, KernelProfile, TailPolicy};
use semispectral::povm::{is_commutative, DiscretePovm};
use semispectral::reconstruction::{build_triplet, check_separation, interpolation_residual, ReconstructionOptions};
use semispectral::suite::{self, FamilyKind, Property, SuiteOptions};
use semispectral::Error;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_NON_COMMUTING: u8 = 2;
const EXIT_MALFORMED: u8 = 3;
const EXIT_PARSE: u8 = 4;
const EXIT_USAGE: u8 = 5;
const EXIT_NUMERICAL: u8 = 6;

#[derive(Parser)]
#[command(name = "semispectral", version, about = "Reconstruct, smear and check commutative POVMs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the von Neumann triplet of a commuting POVM.
    Reconstruct(ReconstructArgs),
    /// Smear a triplet back into a POVM, or build an unsharp position POVM.
    Smear(SmearArgs),
    /// Run property checks on a POVM file, a Dini table or a kernel profile.
    Check(CheckArgs),
    /// Write curve data and reports for a named demo.
    Demo(DemoArgs),
    /// Summarize a reports file.
    Report(ReportArgs),
}

#[derive(Args)]
struct Common {
    /// Acceptance tolerance for residuals.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Eigenvalue clustering gap; defaults to 1e-8 times the operator norm.
    #[arg(long)]
    cluster_tol: Option<f64>,
    /// Starting quantization depth per effect for Cantor labels.
    #[arg(long, default_value_t = 16)]
    bits: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ReconstructArgs {
    /// POVM JSON.
    #[arg(long = "in")]
    input: PathBuf,
    /// Triplet JSON destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SmearArgs {
    /// Triplet JSON to smear.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Profile name or JSON spec for an unsharp position observable.
    #[arg(long)]
    profile: Option<String>,
    /// Gaussian width.
    #[arg(long)]
    l: Option<f64>,
    /// Outcome grid as a,b,m.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Comma-separated spectrum points.
    #[arg(long, default_value = "0,0.25,0.5,0.75,1", allow_hyphen_values = true)]
    points: String,
    /// `absorb`, `renormalize` or `report-deficit`.
    #[arg(long, default_value = "report-deficit")]
    tail: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CheckArgs {
    /// POVM or triplet JSON, or a Dini CSV table.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    l: Option<f64>,
    /// Property names, comma-separated or repeated; `all` for every one
    /// that applies.
    #[arg(long, value_delimiter = ',', required = true)]
    property: Vec<String>,
    /// `halflines`, `shrinking` or `constant`.
    #[arg(long)]
    family: Option<String>,
    /// `unit`, `real` or `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// Discretization grid as a,b,m.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Absolute tolerance of the adaptive quadrature.
    #[arg(long, default_value_t = 1e-10)]
    quad_tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct DemoArgs {
    /// `unsharp-position-compact`, `optimal-phase-space` or `dini`.
    name: String,
    /// Directory for curve CSVs, tables and reports.json.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    l: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

enum Failure {
    Lib(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_PARSE,
            Failure::Lib(e) => match e {
                Error::NonCommuting { .. } => EXIT_NON_COMMUTING,
                Error::MalformedPovm(_) | Error::NotAnEffect { .. } | Error::NonStochastic { .. } => EXIT_MALFORMED,
                Error::Parse(_)
                | Error::Json(_)
                | Error::InvalidGrid(_)
                | Error::NotHermitian { .. }
                | Error::NotAProjection { .. }
                | Error::DimensionMismatch { .. }
                | Error::ShapeMismatch(_)
                | Error::InvalidProfile(_)
                | Error::DuplicatePoint(_)
                | Error::IndexOutOfRange { .. }
                | Error::NonBinaryDigit { .. } => EXIT_PARSE,
                Error::InvalidInput(_) => EXIT_USAGE,
                Error::EigenSolver
                | Error::RefinementFailure { .. }
                | Error::SeparationFailure(..)
                | Error::Quadrature { .. } => EXIT_NUMERICAL,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Io(m) | Failure::Usage(m) => m.clone(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Reconstruct(a) => reconstruct(a),
        Command::Smear(a) => smear(a),
        Command::Check(a) => check(a),
        Command::Demo(a) => demo(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Failure::Usage(format!("--{name} must be positive, got {v}")))
    }
}

fn reconstruction_options(c: &Common) -> Result<ReconstructionOptions, Failure> {
    Ok(ReconstructionOptions {
        tol: positive("tol", c.tol)?,
        cluster_tol: c.cluster_tol.map(|t| positive("cluster-tol", t)).transpose()?,
        bits_per_effect: c.bits,
        seed: c.seed,
        ..Default::default()
    })
}

fn reconstruct(a: ReconstructArgs) -> Outcome {
    let opts = reconstruction_options(&a.common)?;
    let f = io::parse_povm(&read(&a.input)?)?;
    let comm = is_commutative(&f, opts.tol);
    if !comm.commutative {
        let (i, j) = comm.worst_pair.unwrap_or((0, 0));
        eprintln!("worst pair: cells {i} and {j}, commutator norm {:e}", comm.max_commutator_norm);
        return Err(Error::NonCommuting {
            norm: comm.max_commutator_norm,
            pair: (i, j),
        }
        .into());
    }
    let t = build_triplet(&f, &opts)?;
    let sep = check_separation(&t.kernel, opts.tol);
    let summary = [
        format!("K = {}", t.generator.len()),
        format!(
            "labels = [{}]",
            t.generator.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ")
        ),
        format!("round-trip residual = {:e}", t.residual),
        format!("interpolation residual = {:e}", interpolation_residual(&t)),
        format!(
            "separation = {} (min row gap {:e})",
            if sep.separated { "holds" } else { "fails" },
            sep.min_gap
        ),
    ]
    .join("\n");
    let json = io::to_json_string(&io::triplet_to_json(&t))?;
    match &a.out {
        Some(p) => {
            write(p, &json)?;
            println!("{summary}");
        }
        None => {
            print!("{json}");
            eprintln!("{summary}");
        }
    }
    Ok(0)
}

fn parse_points(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Lib(Error::Parse(format!("bad point {v:?}"))))
        })
        .collect()
}

fn smear(a: SmearArgs) -> Outcome {
    let povm: DiscretePovm = match (&a.input, &a.profile) {
        (Some(path), None) => io::parse_triplet(&read(path)?)?.smear()?,
        (None, Some(p)) => {
            let k = ConvolutionKernel::new(KernelProfile::parse(p, a.l)?);
            let points = parse_points(&a.points)?;
            let policy: TailPolicy = a.tail.parse()?;
            let grid = match &a.grid {
                Some(g) => io::parse_grid_spec(g)?,
                None => return Err(Failure::Usage("--grid is required with --profile".into())),
            };
            semispectral::kernels::unsharp_position(&k, &points, &grid, policy)?.povm
        }
        _ => return Err(Failure::Usage("give exactly one of --in or --profile".into())),
    };
    let comm = is_commutative(&povm, a.common.tol);
    eprintln!(
        "cells = {}, dim = {}, commutative = {}",
        povm.cells(),
        povm.dim(),
        comm.commutative
    );
    emit(a.out.as_deref(), &io::to_json_string(&io::povm_to_json(&povm))?)?;
    Ok(0)
}

enum Target {
    Povm(DiscretePovm),
    Table(io::DiniTable),
    Kernel(ConvolutionKernel),
}

fn load_target(a: &CheckArgs) -> Result<Target, Failure> {
    match (&a.input, &a.profile) {
        (Some(path), None) => {
            let text = read(path)?;
            if path.extension().is_some_and(|e| e == "csv") {
                return Ok(Target::Table(io::parse_dini_csv(&text)?));
            }
            let v: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
            if v.get("labels").is_some() {
                Ok(Target::Povm(io::parse_triplet(&text)?.povm))
            } else {
                Ok(Target::Povm(io::parse_povm(&text)?))
            }
        }
        (None, Some(p)) => Ok(Target::Kernel(ConvolutionKernel::new(KernelProfile::parse(p, a.l)?))),
        _ => Err(Failure::Usage("give exactly one of --in or --profile".into())),
    }
}

fn properties(names: &[String], target: &Target) -> Result<Vec<Property>, Failure> {
    let mut out = Vec::new();
    for n in names {
        if n == "all" {
            out.extend(Property::ALL.into_iter().filter(|p| match target {
                Target::Povm(_) => !matches!(p, Property::WeakConvergence | Property::Dini),
                Target::Table(_) => *p == Property::Dini,
                Target::Kernel(_) => *p != Property::Dini,
            }));
        } else {
            out.push(n.parse::<Property>()?);
        }
    }
    out.dedup();
    Ok(out)
}

fn reports_csv(reports: &[PropertyReport]) -> String {
    let mut s = String::from("property,n,residual\n");
    for r in reports {
        for (n, v) in &r.residuals {
            s.push_str(&format!("{},{n},{v}\n", r.property));
        }
    }
    s
}

fn render(reports: &[PropertyReport], format: Format) -> Result<String, Failure> {
    Ok(match format {
        Format::Json => io::to_json_string(&reports)?,
        Format::Csv => reports_csv(reports),
    })
}

fn check(a: CheckArgs) -> Outcome {
    let target = load_target(&a)?;
    let props = properties(&a.property, &target)?;
    let opts = SuiteOptions {
        tol: positive("tol", a.common.tol)?,
        quad_tol: positive("quad-tol", a.quad_tol)?,
        seed: a.common.seed,
        family: a.family.as_deref().map(str::parse::<FamilyKind>).transpose()?,
        domain: a.domain.as_deref().map(suite::parse_domain).transpose()?,
        grid: a.grid.as_deref().map(io::parse_grid_spec).transpose()?,
        reconstruction: reconstruction_options(&a.common)?,
        ..Default::default()
    };
    let mut reports = Vec::new();
    for p in props {
        let mut r = match &target {
            Target::Povm(f) => suite::check_povm(f, p, &opts)?,
            Target::Kernel(k) => suite::check_kernel(k, p, &opts)?,
            Target::Table(t) if p == Property::Dini => {
                vec![semispectral::analysis::dini_check(&t.rows, t.points.as_deref(), opts.tol)?]
            }
            Target::Table(_) => return Err(Failure::Usage(format!("{p} does not apply to a table"))),
        };
        reports.append(&mut r);
    }
    for r in &reports {
        eprintln!("{}: {}", r.property, r.verdict.as_str());
    }
    emit(a.out.as_deref(), &render(&reports, a.common.format)?)?;
    Ok(if reports.iter().any(|r| r.verdict == Verdict::Fails) {
        EXIT_CHECK_FAILED
    } else {
        0
    })
}

fn demo(a: DemoArgs) -> Outcome {
    let opts = SuiteOptions {
        seed: a.common.seed,
        tol: positive("tol", a.common.tol)?,
        ..Default::default()
    };
    positive("l", a.l)?;
    let out = suite::run_demo(&a.name, a.l, &opts)?;
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
        for c in &out.curves {
            write(&dir.join(format!("{}.csv", c.name)), &io::curve_csv(&c.xs, &c.mu))?;
        }
        for (name, csv) in &out.tables {
            write(&dir.join(name), csv)?;
        }
        write(&dir.join("reports.json"), &render(&out.reports, Format::Json)?)?;
    }
    for c in &out.curves {
        println!("curve {}: delta = {}, x in [{}, {}]", c.name, c.delta, c.xs[0], c.xs[c.xs.len() - 1]);
    }
    for line in &out.summary {
        println!("{line}");
    }
    if a.out.is_none() {
        print!("{}", render(&out.reports, a.common.format)?);
    }
    Ok(0)
}

fn report(a: ReportArgs) -> Outcome {
    let reports = io::parse_reports(&read(&a.input)?)?;
    for r in &reports {
        let last = r.residuals.last().map_or(String::from("-"), |(n, v)| format!("{v:e} (n = {n})"));
        eprintln!("{:<24} {:<12} last residual {last}", r.property, r.verdict.as_str());
    }
    emit(a.out.as_deref(), &render(&reports, a.format)?)?;
    Ok(if reports.iter().any(|r| r.verdict == Verdict::Fails) {
        EXIT_CHECK_FAILED
    } else {
        0
    })
}
