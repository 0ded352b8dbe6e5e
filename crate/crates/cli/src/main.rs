//! `polyharm`: command-line front end for the polyharm library.
//!
//! Exit status: 0 success, 2 usage or invalid configuration, 3 numerical
//! verification failure, 4 unsupported configuration, 1 I/O failure.

mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::{Serialize, Serializer};

use output::{fixed, fixed_opt, Diagnostic, Format, Rat, TOOL, VERSION};

/// Environment variable that overrides the worker thread count.
const THREADS_VAR: &str = "POLYHARM_THREADS";

#[derive(Parser, Debug)]
#[command(name = "polyharm", version, about = "Proper r-harmonic isoparametric hypersurfaces of the unit sphere")]
struct Cli {
    /// Output format. CSV carries floats only; JSON also carries exact rationals.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Principal curvatures, mean curvature and |A|² along a family.
    Invariants(InvariantsArgs),
    /// Roots of the reduced polynomial of a family at order r.
    Roots(RootsArgs),
    /// All proper r-harmonic members of a family.
    Classify(ClassifyArgs),
    /// Critical orders r* and r** of a degree-4 family.
    Thresholds(ThresholdsArgs),
    /// Closed-form upper bounds for r* and r**.
    Bounds(RatioArgs),
    /// Brute-force sign scan of the criterion along a family.
    Scan(ScanArgs),
    /// Finite-difference check of the fundamental forms on an explicit chart.
    VerifyGeom(GeomArgs),
    /// Headline thresholds, critical orders and bounds in one table.
    Table,
    /// Critical orders over a list of ratios, or classification over a range of orders.
    Sweep(SweepArgs),
}

fn parse_rational(text: &str) -> Result<BigRational, String> {
    polyharm::rational::parse(text).map_err(|e| e.to_string())
}

fn rat_opt<S: Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    q.as_ref().map(Rat::from).serialize(s)
}

fn rat_vec<S: Serializer>(q: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(q.iter().map(Rat::from))
}

#[derive(Args, Debug, Clone, Serialize)]
struct FamilyArgs {
    /// Number ℓ of distinct principal curvatures: 1, 2, 3, 4 or 6.
    #[arg(long)]
    degree: u32,
    #[arg(long)]
    m1: u32,
    /// Second multiplicity; defaults to m1.
    #[arg(long)]
    m2: Option<u32>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct InvariantsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    family: FamilyArgs,
    /// Parameters s in (0, π/ℓ), comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "grid")]
    s: Vec<f64>,
    /// Number of evenly spaced interior parameters.
    #[arg(long)]
    grid: Option<usize>,
    /// Also evaluate the criterion at this order.
    #[arg(long)]
    r: Option<u64>,
    /// Curvature of the ambient space form used with --r.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    c: i64,
}

#[derive(Args, Debug, Clone, Serialize)]
struct RootsArgs {
    #[arg(long)]
    degree: u32,
    #[arg(long)]
    m1: Option<u32>,
    #[arg(long)]
    m2: Option<u32>,
    /// Multiplicity ratio m2/m1 for degree 4, e.g. `8/7`.
    #[arg(long, value_parser = parse_rational)]
    #[serde(serialize_with = "rat_opt")]
    b: Option<BigRational>,
    #[arg(long)]
    r: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    r: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
struct RatioArgs {
    /// Multiplicity ratio m2/m1, e.g. `8/7` or `10000`.
    #[arg(long, value_parser = parse_rational)]
    #[serde(serialize_with = "rat_opt")]
    b: Option<BigRational>,
    #[arg(long)]
    m1: Option<u32>,
    #[arg(long)]
    m2: Option<u32>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ThresholdsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    ratio: RatioArgs,
    /// Confirm the orders by scanning the criterion for every r up to --r-max.
    #[arg(long)]
    brute_force: bool,
    /// Largest order scanned by --brute-force; defaults to the bound for r** plus 5.
    #[arg(long, requires = "brute_force")]
    r_max: Option<u64>,
    /// Uniform grid size for --brute-force.
    #[arg(long, requires = "brute_force", default_value_t = polyharm::thresholds::BRUTE_FORCE_GRID)]
    grid: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ScanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    r: u64,
    #[arg(long, default_value_t = 100_000)]
    grid: usize,
    /// Distance kept from the focal ends of (0, π/ℓ), in radians.
    #[arg(long, default_value_t = polyharm::criterion::DEFAULT_EPS)]
    #[serde(serialize_with = "fixed")]
    eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ChartChoice {
    /// Small sphere S^m(R) ⊂ S^{m+1}.
    Sphere,
    /// Generalized Clifford torus S^{m1}(sin s) × S^{m2}(cos s).
    Clifford,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GeomArgs {
    #[arg(long, value_enum)]
    chart: ChartChoice,
    /// Dimension of the small sphere.
    #[arg(long)]
    m: Option<usize>,
    /// Small sphere of radius 1/√r; also the order checked by the criterion.
    #[arg(long)]
    r: Option<u64>,
    /// Small sphere radius in (0, 1).
    #[arg(long, conflicts_with = "r")]
    #[serde(serialize_with = "fixed_opt")]
    radius: Option<f64>,
    #[arg(long)]
    m1: Option<usize>,
    #[arg(long)]
    m2: Option<usize>,
    /// Torus parameter: radii sin s and cos s.
    #[arg(long)]
    #[serde(serialize_with = "fixed_opt")]
    s: Option<f64>,
    /// Number of sample points.
    #[arg(long, default_value_t = 8)]
    points: usize,
    /// Finite-difference step.
    #[arg(long, default_value_t = polyharm::geomlab::DEFAULT_STEP)]
    #[serde(serialize_with = "fixed")]
    h: f64,
    /// Order for the criterion check (defaults to --r).
    #[arg(long)]
    criterion_r: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SweepArgs {
    /// Comma-separated multiplicity ratios, e.g. `1,8/7,2,10`.
    #[arg(long, value_delimiter = ',', value_parser = parse_rational, conflicts_with_all = ["r_from", "r_to", "degree"])]
    #[serde(serialize_with = "rat_vec")]
    b_list: Vec<BigRational>,
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long)]
    m1: Option<u32>,
    #[arg(long)]
    m2: Option<u32>,
    /// First order of the range (inclusive).
    #[arg(long, requires = "r_to")]
    r_from: Option<u64>,
    /// Last order of the range (inclusive).
    #[arg(long, requires = "r_from")]
    r_to: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] polyharm::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn status(&self) -> u8 {
        use polyharm::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
            CliError::Lib(e) => match e {
                E::Unsupported(_) => 4,
                E::Verification(_) | E::Discretization(_) | E::Pole(_) => 3,
                E::OutOfRange { .. } | E::InvalidFamily(_) | E::Precondition(_) => 2,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self.status() {
            1 => "io",
            2 => "usage",
            3 => "verification",
            _ => "unsupported",
        }
    }
}

/// Where and how a command writes its document.
pub struct Sink {
    format: Format,
    output: Option<PathBuf>,
}

impl Sink {
    pub fn emit<R: Serialize + output::Row, S: Serialize>(&self, doc: &output::Document<R, S>) -> Result<(), CliError> {
        match &self.output {
            Some(path) => {
                let mut w = BufWriter::new(File::create(path)?);
                output::write(doc, self.format, &mut w)?;
                w.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                output::write(doc, self.format, &mut w)?;
            }
        }
        Ok(())
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {n} threads: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let sink = Sink { format: cli.format, output: cli.output };
    match cli.command {
        Command::Invariants(a) => commands::invariants(&a, &sink),
        Command::Roots(a) => commands::roots(&a, &sink),
        Command::Classify(a) => commands::classify(&a, &sink),
        Command::Thresholds(a) => commands::thresholds(&a, &sink),
        Command::Bounds(a) => commands::bounds(&a, &sink),
        Command::Scan(a) => commands::scan(&a, &sink),
        Command::VerifyGeom(a) => commands::verify_geom(&a, &sink),
        Command::Table => commands::table(&sink),
        Command::Sweep(a) => commands::sweep(&a, &sink),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            // same formatting and status as clap's own usage errors
            Cli::command().error(clap::error::ErrorKind::ArgumentConflict, msg).exit()
        }
        // a closed downstream pipe (e.g. `| head`) is not a failure
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            let status = e.status();
            let diag = Diagnostic { tool: TOOL, version: VERSION, status, kind: e.kind(), message: e.to_string() };
            eprintln!("{}", serde_json::to_string(&diag).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(status)
        }
    }
}
