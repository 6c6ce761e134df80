//! Command-line front end.
//!
//! Exit codes: 0 success, 1 example check failed, 2 usage, 3 input,
//! 4 fit, 5 geometry, 6 solver, 7 simulation.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bands::{band_critical, build_band, BandSide, BandSpec, Interval, DEFAULT_GRID};
use crate::critical::{solve_critical, CoverageQuery, CriticalValue, Method, Side};
use crate::data::{parse_dataset, Dataset, Schema, LAVELLE_CSV};
use crate::error::{Error, ErrorKind, Result};
use crate::geometry::ConeAngle;
use crate::glm::{fit, Coefficients, FitConfig, Link, ModelFit};
use crate::montecarlo::{
    alpha_sweep, design_sweep, simulate_cell, simulate_coverage, CoverageReport, Design, Generator, IntervalKind,
    SimConfig,
};
use crate::report::lavelle_example;

/// Relative `--output` paths are resolved under this directory when set.
pub const OUTPUT_DIR_ENV: &str = "GLMBANDS_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_FIT: i32 = 4;
pub const EXIT_GEOMETRY: i32 = 5;
pub const EXIT_SOLVER: i32 = 6;
pub const EXIT_SIMULATION: i32 = 7;

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Input => EXIT_INPUT,
        ErrorKind::Fit => EXIT_FIT,
        ErrorKind::Geometry => EXIT_GEOMETRY,
        ErrorKind::Solver => EXIT_SOLVER,
        ErrorKind::Simulation => EXIT_SIMULATION,
    }
}

#[derive(Debug, Parser)]
#[command(name = "glmbands", version, about = "Simultaneous confidence bands for logistic and probit regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a logistic or probit model by maximum likelihood.
    Fit(FitArgs),
    /// Solve for the simultaneous critical value.
    Critical(CriticalArgs),
    /// Evaluate a confidence band on a grid.
    Band(BandArgs),
    /// Estimate coverage error by Monte Carlo simulation.
    Simulate(SimulateArgs),
    /// Reproduce the bundled mutagenicity example against reference values.
    Example(ExampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkArg {
    Logit,
    Probit,
}

impl From<LinkArg> for Link {
    fn from(l: LinkArg) -> Self {
        match l {
            LinkArg::Logit => Link::Logit,
            LinkArg::Probit => Link::Probit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemaArg {
    Binomial,
    Bernoulli,
}

impl From<SchemaArg> for Schema {
    fn from(s: SchemaArg) -> Self {
        match s {
            SchemaArg::Binomial => Schema::Binomial,
            SchemaArg::Bernoulli => Schema::Bernoulli,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Two,
    One,
    Upper,
    Lower,
}

impl SideArg {
    fn band_side(self) -> BandSide {
        match self {
            SideArg::Two => BandSide::TwoSided,
            SideArg::One | SideArg::Upper => BandSide::Upper,
            SideArg::Lower => BandSide::Lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Supremum,
    Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    /// Equal spacing; every beta, n, interval kind and alpha in {.01,.05,.10}.
    Alpha,
    /// Endpoint- and center-concentrated designs at alpha = .05.
    Design,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV input. `lavelle.csv` falls back to the bundled copy when absent.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "binomial")]
    pub schema: SchemaArg,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[arg(long, value_enum, default_value = "logit")]
    pub link: LinkArg,
    /// Report a flagged fit instead of failing on separated data.
    #[arg(long)]
    pub allow_separation: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    /// Cone angle in radians; alternative to --data with --interval.
    #[arg(long, conflicts_with_all = ["data", "interval"])]
    pub phi: Option<f64>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "binomial")]
    pub schema: SchemaArg,
    #[arg(long, value_enum, default_value = "logit")]
    pub link: LinkArg,
    /// `a:b` or `unrestricted`.
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "two")]
    pub side: SideArg,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BandArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[arg(long, value_enum, default_value = "logit")]
    pub link: LinkArg,
    /// `a:b` or `unrestricted` (grid then spans the observed x range).
    #[arg(long, allow_hyphen_values = true)]
    pub interval: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "two")]
    pub side: SideArg,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Run every cell of a study grid instead of a single configuration.
    #[arg(long, value_enum)]
    pub sweep: Option<SweepArg>,
    /// True coefficients `b0,b1`.
    #[arg(long, allow_hyphen_values = true, default_value = "0,1.5")]
    pub beta: String,
    #[arg(long, value_enum, default_value = "logit")]
    pub link: LinkArg,
    /// `narrow`, `wide`, `unrestricted` or `a:b`.
    #[arg(long, allow_hyphen_values = true, default_value = "wide")]
    pub interval: String,
    /// `equal`, `endpoint` or `center`.
    #[arg(long, default_value = "equal")]
    pub design: String,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Defaults to 5000.
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "two")]
    pub side: SideArg,
    #[arg(long)]
    pub seed: u64,
    /// Generate responses with p(x) = 1/(1+exp(b0+b1 x)) instead of the model form.
    #[arg(long)]
    pub sign_flipped: bool,
    /// Suppress per-cell progress on stderr during a sweep.
    #[arg(long)]
    pub quiet: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Output of a subcommand: rendered text plus the exit code to use.
#[derive(Debug)]
pub struct Rendered {
    pub text: String,
    pub exit_code: i32,
    pub output: Option<PathBuf>,
}

fn ok(text: String, output: Option<PathBuf>) -> Result<Rendered> {
    Ok(Rendered { text, exit_code: EXIT_OK, output })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn load_dataset(path: &Path, schema: Schema) -> Result<Dataset> {
    match std::fs::read_to_string(path) {
        Ok(text) => parse_dataset(&text, schema),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound && path.file_name().is_some_and(|n| n == "lavelle.csv") => {
            parse_dataset(LAVELLE_CSV, schema)
        }
        Err(e) => Err(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))),
    }
}

/// Resolves `--output` against the output-directory environment variable.
pub fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn check_alpha(alpha: f64) -> Result<f64> {
    let level = 1.0 - alpha;
    if !(level > 0.5 && level < 0.9999) {
        return Err(Error::InvalidInput(format!("alpha {alpha} must lie in (0.0001, 0.5)")));
    }
    Ok(level)
}

fn fit_table(f: &ModelFit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "link        {}", f.link);
    let _ = writeln!(s, "beta0       {:.6}", f.beta_hat.beta0);
    let _ = writeln!(s, "beta1       {:.6}", f.beta_hat.beta1);
    let _ = writeln!(s, "F^-1        [[{:.6}, {:.6}],", f.info_inv.get(0, 0), f.info_inv.get(0, 1));
    let _ = writeln!(s, "             [{:.6}, {:.6}]]", f.info_inv.get(1, 0), f.info_inv.get(1, 1));
    let _ = writeln!(s, "log-lik     {:.6}", f.log_lik);
    let _ = writeln!(s, "iterations  {}", f.iterations);
    let _ = writeln!(s, "converged   {}", f.converged);
    let _ = writeln!(s, "max |score| {:e}", f.max_abs_score);
    if f.separation_flag {
        let _ = writeln!(s, "WARNING     data are separated; estimates are not finite MLEs");
    }
    if !f.saturated_rows.is_empty() {
        let _ = writeln!(s, "saturated   rows {:?} have fitted p within 1e-12 of 0 or 1", f.saturated_rows);
    }
    s
}

const FIT_CSV_HEADER: &str =
    "link,beta0,beta1,info_inv_00,info_inv_01,info_inv_11,log_lik,iterations,converged,separation_flag";

fn cmd_fit(args: FitArgs) -> Result<Rendered> {
    let data = load_dataset(&args.input.data, args.input.schema.into())?;
    let config = FitConfig { tol: args.tol, max_iter: args.max_iter, allow_separation: args.allow_separation };
    let f = fit(args.link.into(), &data, &config)?;
    let text = match args.format {
        Format::Json => to_json(&f),
        Format::Table => fit_table(&f),
        Format::Csv => format!(
            "{FIT_CSV_HEADER}\n{},{},{},{},{},{},{},{},{},{}\n",
            f.link,
            f.beta_hat.beta0,
            f.beta_hat.beta1,
            f.info_inv.get(0, 0),
            f.info_inv.get(0, 1),
            f.info_inv.get(1, 1),
            f.log_lik,
            f.iterations,
            f.converged,
            f.separation_flag
        ),
    };
    ok(text, args.output)
}

#[derive(Debug, Serialize)]
struct CriticalOutput {
    interval: Option<String>,
    u_a: Option<[f64; 2]>,
    u_b: Option<[f64; 2]>,
    #[serde(flatten)]
    critical: CriticalValue,
}

fn cmd_critical(args: CriticalArgs) -> Result<Rendered> {
    let level = check_alpha(args.alpha)?;
    let side = args.side.band_side();
    let (interval, cone, cv): (Option<Interval>, Option<ConeAngle>, CriticalValue) = match (args.phi, &args.data) {
        (Some(phi), _) => {
            let mut q = CoverageQuery::new(phi, level, side.critical_side());
            if let Some(m) = args.method {
                q = q.with_method(method(m));
            }
            (None, None, solve_critical(&q)?)
        }
        (None, Some(path)) => {
            let raw =
                args.interval.as_deref().ok_or_else(|| Error::InvalidInput("--data requires --interval".into()))?;
            let interval: Interval = raw.parse()?;
            let data = load_dataset(path, args.schema.into())?;
            let f = fit(args.link.into(), &data, &FitConfig::default())?;
            let spec = BandSpec::new(interval, side, level, args.link.into());
            let (cone, mut cv) = band_critical(&f, &spec)?;
            if let Some(m) = args.method {
                cv = solve_critical(&CoverageQuery::new(cone.phi, level, side.critical_side()).with_method(method(m)))?;
            }
            (Some(interval), Some(cone), cv)
        }
        (None, None) => {
            return Err(Error::InvalidInput("critical needs either --phi or --data with --interval".into()))
        }
    };
    let out = CriticalOutput {
        interval: interval.map(|i| i.to_string()),
        u_a: cone.and_then(|c| c.u_a),
        u_b: cone.and_then(|c| c.u_b),
        critical: cv,
    };
    let text = match args.format {
        Format::Json => to_json(&out),
        Format::Csv => format!(
            "interval,side,level,phi,w,achieved_coverage,method,quadrature_error_bound,iterations\n{},{},{},{},{},{},{},{},{}\n",
            out.interval.clone().unwrap_or_default(),
            side_label(cv.side),
            cv.level,
            cv.phi,
            cv.w,
            cv.achieved_coverage,
            method_label(cv.method),
            cv.quadrature_error_bound,
            cv.iterations
        ),
        Format::Table => {
            let mut s = String::new();
            if let Some(iv) = &out.interval {
                let _ = writeln!(s, "interval            {iv}");
            }
            if let (Some(a), Some(b)) = (out.u_a, out.u_b) {
                let _ = writeln!(s, "u_a                 ({:.4}, {:.4})", a[0], a[1]);
                let _ = writeln!(s, "u_b                 ({:.4}, {:.4})", b[0], b[1]);
            }
            let _ = writeln!(s, "side                {}", side_label(cv.side));
            let _ = writeln!(s, "level               {}", cv.level);
            let _ = writeln!(s, "phi                 {:.6}", cv.phi);
            let _ = writeln!(s, "w                   {:.6}", cv.w);
            let _ = writeln!(s, "achieved coverage   {:.12}", cv.achieved_coverage);
            let _ = writeln!(s, "method              {}", method_label(cv.method));
            let _ = writeln!(s, "quadrature error    {:e}", cv.quadrature_error_bound);
            let _ = writeln!(s, "iterations          {}", cv.iterations);
            if cv.phi_clamped {
                let _ = writeln!(s, "note                phi above pi was clamped to pi");
            }
            s
        }
    };
    ok(text, args.output)
}

fn method(m: MethodArg) -> Method {
    match m {
        MethodArg::Supremum => Method::Supremum,
        MethodArg::Region => Method::Region,
    }
}

fn method_label(m: Method) -> &'static str {
    match m {
        Method::Supremum => "supremum",
        Method::Region => "region",
    }
}

fn side_label(s: Side) -> &'static str {
    match s {
        Side::TwoSided => "two",
        Side::OneSided => "one",
    }
}

fn cmd_band(args: BandArgs) -> Result<Rendered> {
    let level = check_alpha(args.alpha)?;
    let interval: Interval = args.interval.parse()?;
    let data = load_dataset(&args.input.data, args.input.schema.into())?;
    let link: Link = args.link.into();
    let f = fit(link, &data, &FitConfig::default())?;
    let (lo, hi) = data.x_range();
    let spec = BandSpec::new(interval, args.side.band_side(), level, link).with_plot_range(lo, hi);
    let band = build_band(&f, &spec, args.grid)?;
    let text = match args.format {
        Format::Json => to_json(&band),
        Format::Csv | Format::Table => band.to_csv(),
    };
    ok(text, args.output)
}

fn parse_beta(s: &str) -> Result<Coefficients> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |t: &str| t.parse::<f64>().map_err(|_| Error::InvalidInput(format!("bad coefficient '{t}'")));
    match parts.as_slice() {
        [b0, b1] => Ok(Coefficients::new(parse(b0)?, parse(b1)?)),
        _ => Err(Error::InvalidInput(format!("--beta expects 'b0,b1', got '{s}'"))),
    }
}

fn reports_csv(reports: &[CoverageReport]) -> String {
    let mut s = String::from(CoverageReport::CSV_HEADER);
    s.push('\n');
    for r in reports {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn cmd_simulate(args: SimulateArgs) -> Result<Rendered> {
    let link: Link = args.link.into();
    let replications = args.replications.unwrap_or(5000);
    let reports = match args.sweep {
        Some(sweep) => {
            let configs = match sweep {
                SweepArg::Alpha => alpha_sweep(link, replications, args.seed),
                SweepArg::Design => design_sweep(link, replications, args.seed),
            };
            let total = configs.len();
            let mut out = Vec::with_capacity(total);
            for (i, cfg) in configs.iter().enumerate() {
                let r = simulate_cell(cfg)?;
                if !args.quiet {
                    eprintln!("[{}/{}] {}", i + 1, total, r);
                }
                out.push(r);
            }
            out
        }
        None => {
            let side = match args.side.band_side() {
                BandSide::TwoSided => Side::TwoSided,
                _ => Side::OneSided,
            };
            let cfg = SimConfig {
                beta_true: parse_beta(&args.beta)?,
                link,
                interval_kind: args.interval.parse::<IntervalKind>()?,
                design: args.design.parse::<Design>()?,
                n: args.n,
                replications,
                alpha: args.alpha,
                side,
                seed: args.seed,
                generator: if args.sign_flipped { Generator::SignFlipped } else { Generator::Model },
            };
            vec![simulate_coverage(&cfg)?]
        }
    };
    let text = match (args.format, reports.as_slice()) {
        (Format::Json, [single]) if args.sweep.is_none() => to_json(single),
        (Format::Json, all) => to_json(&all),
        (Format::Csv, all) => reports_csv(all),
        (Format::Table, all) => all.iter().map(|r| format!("{r}\n")).collect(),
    };
    ok(text, args.output)
}

fn cmd_example(args: ExampleArgs) -> Result<Rendered> {
    let report = lavelle_example()?;
    let text = match args.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("quantity,computed,reference,tolerance,pass\n");
            for c in &report.checks {
                let _ = writeln!(s, "{},{},{},{},{}", c.name, c.computed, c.reference, c.tolerance, c.pass);
            }
            s
        }
        Format::Table => {
            let mut s = fit_table(&report.fit);
            s.push('\n');
            s.push_str(&report.render_table());
            s
        }
    };
    let exit_code = if report.all_pass() { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok(Rendered { text, exit_code, output: args.output })
}

pub fn execute(cli: Cli) -> Result<Rendered> {
    match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Critical(a) => cmd_critical(a),
        Command::Band(a) => cmd_band(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Example(a) => cmd_example(a),
    }
}

/// Parses arguments, runs the subcommand, writes its output and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let rendered = match execute(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(e.kind());
        }
    };
    let written = match &rendered.output {
        Some(path) => {
            let path = resolve_output(path);
            std::fs::write(&path, rendered.text.as_bytes())
                .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
        }
        None => std::io::stdout().write_all(rendered.text.as_bytes()).map_err(Error::Io),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return exit_code(e.kind());
    }
    rendered.exit_code
}
