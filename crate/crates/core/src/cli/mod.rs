//! The `ssrchain` command line: batch jobs writing CSV or JSON.
//!
//! Exit codes: 0 success, 2 usage error, 3 solver failure.

pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::asymptotic::{critical_pair, trace_contour};
use crate::charfn::CharFn;
use crate::error::SsrError;
use crate::params::{ChainParams, Mode};
use crate::rootfind::{find_collective_rates, SearchWindow};
use crate::ssr::{
    fit_scaling, maximize_over_separation, scaling_sweep, separation_profile, SsrResult,
};
use output::{write_json, write_table, Cell, Format, Meta, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const JOBS_ENV: &str = "SSRCHAIN_JOBS";
pub const MAX_RESOLUTION: usize = 4096;

const UNITS_HELP: &str =
    "Units: rates, detunings and Γ columns (re_gamma, im_gamma, re_delta, ...) \
are in units of γ₀; separations (sep, separation, l_critical) in units of 1/γ₀.";

#[derive(Debug, Parser)]
#[command(name = "ssrchain", version, about = "Collective decay rates of qubit chains in a waveguide", after_help = UNITS_HELP)]
pub struct Cli {
    /// Output format (default: csv, json for `fit` and `asym --critical`).
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Output file (default: standard output).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collective poles of a chain inside a search window.
    Poles(PolesArgs),
    /// Maximum superradiant rate over the separation for one N.
    Ssr(SsrArgs),
    /// `ssr` for a range of N.
    Sweep(SweepArgs),
    /// Fit Γ_SSR = αN and L_c = βN⁻² to sweep output.
    Fit(FitArgs),
    /// Large-N asymptotic curve g(α, β) = 0 and its critical pair.
    Asym(AsymArgs),
    /// log10|f| on a grid of complex detunings.
    Fieldmap(FieldmapArgs),
    /// Decay rates against separation at finite Ω with the superradiant envelope.
    Profile(ProfileArgs),
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse::<Mode>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ChainArgs {
    /// Number of qubits N.
    #[arg(long = "n")]
    pub n: usize,
    /// Separation L [1/γ₀].
    #[arg(long)]
    pub sep: f64,
    /// Phase mode: general, sr (superradiant condition) or markovian.
    #[arg(long, default_value = "sr", value_parser = parse_mode)]
    pub mode: Mode,
    /// Qubit frequency Ω [γ₀] (general and markovian modes).
    #[arg(long, default_value_t = 50.0)]
    pub omega: f64,
    /// Integer n of the superradiant condition ΩL = nπ.
    #[arg(long, default_value_t = 1)]
    pub sr_index: i64,
}

impl ChainArgs {
    fn params(&self) -> crate::Result<ChainParams> {
        ChainParams::new(self.n, self.omega, self.sep, self.sr_index, self.mode)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PolesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    /// Search window, Re Δ lower edge [γ₀] (default -1.5N).
    #[arg(long, allow_hyphen_values = true)]
    pub re_min: Option<f64>,
    /// Search window, Re Δ upper edge [γ₀] (default 1.5N).
    #[arg(long, allow_hyphen_values = true)]
    pub re_max: Option<f64>,
    /// Search window, Im Δ lower edge [γ₀] (default -2.5N).
    #[arg(long, allow_hyphen_values = true)]
    pub im_min: Option<f64>,
    /// Search window, Im Δ upper edge [γ₀] (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub im_max: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SsrArgs {
    /// Number of qubits N (at least 2).
    #[arg(long = "n")]
    pub n: usize,
    /// Separation bracket LO,HI [1/γ₀] containing the maximum.
    #[arg(long, value_delimiter = ',')]
    pub bracket: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// Smallest N (at least 2).
    #[arg(long)]
    pub n_min: usize,
    /// Largest N, inclusive.
    #[arg(long)]
    pub n_max: usize,
    /// Step between consecutive N.
    #[arg(long, default_value_t = 1)]
    pub n_step: usize,
    /// Worker threads (overridden by SSRCHAIN_JOBS; default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// CSV written by `sweep` or `ssr`.
    #[arg(long)]
    pub input: PathBuf,
    /// Smallest N used in the fit; deviations are reported for every N.
    #[arg(long, default_value_t = 20)]
    pub n_min_fit: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(group(clap::ArgGroup::new("what").required(true).args(["critical", "contour"])))]
pub struct AsymArgs {
    /// Emit the critical pair (α_c, β_c).
    #[arg(long)]
    pub critical: bool,
    /// Emit points of the curve g(α, β) = 0.
    #[arg(long)]
    pub contour: bool,
    /// Lower end of the β range for `--contour`.
    #[arg(long, default_value_t = 0.1)]
    pub beta_min: f64,
    /// Upper end of the β range for `--contour`.
    #[arg(long, default_value_t = 2.5)]
    pub beta_max: f64,
    /// Number of β samples for `--contour`.
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FieldmapArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainArgs,
    /// Re Δ range LO,HI [γ₀].
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub re_range: Vec<f64>,
    /// Im Δ range LO,HI [γ₀].
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub im_range: Vec<f64>,
    /// Grid points per axis (2 to 4096).
    #[arg(long, default_value_t = 200)]
    pub resolution: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProfileArgs {
    /// Number of qubits N.
    #[arg(long = "n", default_value_t = 2)]
    pub n: usize,
    /// Qubit frequency Ω [γ₀].
    #[arg(long, default_value_t = 50.0)]
    pub omega: f64,
    /// Smallest separation [1/γ₀].
    #[arg(long, default_value_t = 0.005)]
    pub sep_min: f64,
    /// Largest separation [1/γ₀].
    #[arg(long, default_value_t = 2.0)]
    pub sep_max: f64,
    /// Number of separations, evenly spaced.
    #[arg(long, default_value_t = 400)]
    pub steps: usize,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver(String),
}

impl From<SsrError> for CliError {
    fn from(e: SsrError) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Solver(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Solver(format!("i/o error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parse `args` (including the program name) and run the command.
/// Output goes to `--output` or `stdout`; diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Solver(msg)) => {
            let _ = writeln!(stderr, "solver failure: {msg}");
            EXIT_SOLVER
        }
    }
}

/// Product of a command: the data to write and the exit code to return.
struct Report {
    meta: Meta,
    table: Table,
    default_format: Format,
    json_data: Option<serde_json::Value>,
    code: i32,
}

impl Report {
    fn new(meta: Meta, table: Table) -> Self {
        Report {
            meta,
            table,
            default_format: Format::Csv,
            json_data: None,
            code: EXIT_OK,
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    let report = match &cli.command {
        Command::Poles(a) => cmd_poles(a, stderr)?,
        Command::Ssr(a) => cmd_ssr(a)?,
        Command::Sweep(a) => cmd_sweep(a, stderr)?,
        Command::Fit(a) => cmd_fit(a)?,
        Command::Asym(a) => cmd_asym(a)?,
        Command::Fieldmap(a) => cmd_fieldmap(a)?,
        Command::Profile(a) => cmd_profile(a)?,
    };
    let format = cli.format.unwrap_or(report.default_format);
    let emit = |w: &mut dyn Write| -> io::Result<()> {
        match (&report.json_data, format) {
            (Some(data), Format::Json) => write_json(&mut *w, &report.meta, data.clone()),
            _ => write_table(&mut *w, format, &report.meta, &report.table),
        }
    };
    match &cli.output {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            emit(&mut w)?;
            w.flush()?;
        }
        None => match emit(stdout) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
            r => r?,
        },
    }
    Ok(report.code)
}

fn args_value<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

fn cmd_poles(a: &PolesArgs, stderr: &mut dyn Write) -> CliResult<Report> {
    let params = a.chain.params()?;
    let d = SearchWindow::default_for(params.n_qubits);
    let window = SearchWindow::new(
        a.re_min.unwrap_or(d.re_min),
        a.re_max.unwrap_or(d.re_max),
        a.im_min.unwrap_or(d.im_min),
        a.im_max.unwrap_or(d.im_max),
    )?;
    let search = find_collective_rates(&params, &window)?;
    let mut table = Table::new([
        "n_qubits",
        "separation",
        "mode",
        "re_delta",
        "im_delta",
        "re_gamma",
        "im_gamma",
        "classification",
        "residual",
        "multiplicity",
    ]);
    for p in &search.poles {
        table.push(vec![
            params.n_qubits.into(),
            params.separation.into(),
            params.mode.as_str().into(),
            p.delta.re.into(),
            p.delta.im.into(),
            p.gamma.re.into(),
            p.gamma.im.into(),
            p.classification.as_str().into(),
            p.residual.into(),
            p.multiplicity.into(),
        ]);
    }
    let mut report = Report::new(Meta::new("poles", args_value(a)), table);
    if !search.failures.is_empty() {
        for e in &search.failures {
            let _ = writeln!(stderr, "warning: {e}");
        }
        report.code = EXIT_SOLVER;
    }
    Ok(report)
}

const SSR_COLUMNS: [&str; 7] = [
    "n_qubits",
    "l_critical",
    "re_gamma_ssr",
    "im_gamma_ssr",
    "coalescence",
    "residual",
    "evaluations",
];

fn ssr_row(r: &SsrResult) -> Vec<Cell> {
    vec![
        r.n_qubits.into(),
        r.l_critical.into(),
        r.gamma_ssr.re.into(),
        r.gamma_ssr.im.into(),
        r.coalescence.into(),
        r.residual.into(),
        r.evaluations.into(),
    ]
}

fn pair(v: &[f64]) -> CliResult<(f64, f64)> {
    match v {
        [lo, hi] => Ok((*lo, *hi)),
        _ => Err(CliError::Usage(format!(
            "expected LO,HI, got {} values",
            v.len()
        ))),
    }
}

fn cmd_ssr(a: &SsrArgs) -> CliResult<Report> {
    let bracket = a.bracket.as_deref().map(pair).transpose()?;
    let r = maximize_over_separation(a.n, bracket)?;
    let mut table = Table::new(SSR_COLUMNS);
    table.push(ssr_row(&r));
    Ok(Report::new(Meta::new("ssr", args_value(a)), table))
}

/// `SSRCHAIN_JOBS` wins over `--jobs`; both default to the available cores.
pub fn resolve_jobs(flag: Option<usize>, env: Option<&str>) -> CliResult<usize> {
    if let Some(v) = env {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!(
                "{JOBS_ENV} must be a positive integer, got '{v}'"
            ))),
        };
    }
    match flag {
        Some(0) => Err(CliError::Usage("--jobs must be positive".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn cmd_sweep(a: &SweepArgs, stderr: &mut dyn Write) -> CliResult<Report> {
    if a.n_step == 0 {
        return Err(CliError::Usage("--n-step must be positive".into()));
    }
    if a.n_min > a.n_max {
        return Err(CliError::Usage(format!(
            "empty range: --n-min {} > --n-max {}",
            a.n_min, a.n_max
        )));
    }
    let env = std::env::var(JOBS_ENV).ok();
    let jobs = resolve_jobs(a.jobs, env.as_deref())?;
    let n_list: Vec<usize> = (a.n_min..=a.n_max).step_by(a.n_step).collect();
    let entries = scaling_sweep(&n_list, jobs)?;
    let mut columns: Vec<&str> = SSR_COLUMNS.to_vec();
    columns.push("status");
    let mut table = Table::new(columns);
    let mut ok = 0;
    for e in &entries {
        match &e.outcome {
            Ok(r) => {
                ok += 1;
                let mut row = ssr_row(r);
                row.push("ok".into());
                table.push(row);
            }
            Err(err) => {
                let _ = writeln!(stderr, "warning: N = {}: {err}", e.n_qubits);
                let mut row = vec![Cell::from(e.n_qubits)];
                row.extend(std::iter::repeat(Cell::Empty).take(SSR_COLUMNS.len() - 1));
                row.push(format!("error: {err}").into());
                table.push(row);
            }
        }
    }
    let mut echo = args_value(a);
    echo["jobs"] = serde_json::Value::from(jobs);
    let mut report = Report::new(Meta::new("sweep", echo), table);
    if (ok as f64) < 0.9 * entries.len() as f64 {
        report.code = EXIT_SOLVER;
    }
    Ok(report)
}

/// Read `ssr`/`sweep` CSV output; rows whose status is not `ok` are skipped.
pub fn read_ssr_csv(path: &Path) -> CliResult<Vec<SsrResult>> {
    let file = File::open(path)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file);
    let malformed =
        |line: u64, msg: String| CliError::Usage(format!("{}:{line}: {msg}", path.display()));
    let headers = reader
        .headers()
        .map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let required = ["n_qubits", "l_critical", "re_gamma_ssr"];
    let idx: Vec<usize> = required
        .iter()
        .map(|name| col(name).ok_or_else(|| malformed(1, format!("missing column '{name}'"))))
        .collect::<CliResult<_>>()?;
    let (i_im, i_coal, i_res, i_eval, i_status) = (
        col("im_gamma_ssr"),
        col("coalescence"),
        col("residual"),
        col("evaluations"),
        col("status"),
    );
    let mut out = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if let Some(i) = i_status {
            if record.get(i) != Some("ok") {
                continue;
            }
        }
        let num = |i: usize| -> CliResult<f64> {
            let field = record.get(i).unwrap_or("");
            field
                .trim()
                .parse::<f64>()
                .map_err(|_| malformed(line, format!("'{field}' is not a number")))
        };
        let n = record.get(idx[0]).unwrap_or("").trim();
        let n_qubits = n
            .parse::<usize>()
            .map_err(|_| malformed(line, format!("'{n}' is not a qubit count")))?;
        out.push(SsrResult {
            n_qubits,
            l_critical: num(idx[1])?,
            gamma_ssr: Complex64::new(num(idx[2])?, i_im.map(num).transpose()?.unwrap_or(0.0)),
            coalescence: i_coal.and_then(|i| record.get(i)) == Some("true"),
            evaluations: match i_eval {
                Some(i) => num(i)? as usize,
                None => 0,
            },
            residual: i_res.map(num).transpose()?.unwrap_or(0.0),
        });
    }
    Ok(out)
}

fn cmd_fit(a: &FitArgs) -> CliResult<Report> {
    let results = read_ssr_csv(&a.input)?;
    let fit = fit_scaling(&results, a.n_min_fit)?;
    let mut table = Table::new(["n_qubits", "gamma_deviation", "l_deviation", "in_fit"]);
    for p in &fit.points {
        table.push(vec![
            p.n_qubits.into(),
            p.gamma_deviation.into(),
            p.l_deviation.into(),
            p.in_fit.into(),
        ]);
    }
    let mut meta = Meta::new("fit", args_value(a));
    meta.results = vec![
        ("alpha", fit.alpha.into()),
        ("alpha_stderr", fit.alpha_stderr.into()),
        ("beta", fit.beta.into()),
        ("beta_stderr", fit.beta_stderr.into()),
    ];
    let num = |v: f64| Cell::from(v).to_json();
    let json = serde_json::json!({
        "alpha": num(fit.alpha),
        "alpha_stderr": num(fit.alpha_stderr),
        "beta": num(fit.beta),
        "beta_stderr": num(fit.beta_stderr),
        "n_min_fit": fit.n_min_fit,
        "points": table.to_json(),
    });
    let mut report = Report::new(meta, table);
    report.default_format = Format::Json;
    report.json_data = Some(json);
    Ok(report)
}

fn cmd_asym(a: &AsymArgs) -> CliResult<Report> {
    let meta = Meta::new("asym", args_value(a));
    if a.critical {
        let cp = critical_pair();
        let mut table = Table::new([
            "alpha_c",
            "beta_c",
            "tau_c",
            "residual",
            "alpha_beta_product",
        ]);
        table.push(vec![
            cp.alpha_c.into(),
            cp.beta_c.into(),
            cp.tau_c.into(),
            cp.residual.into(),
            (cp.alpha_c * cp.beta_c).into(),
        ]);
        let json = table.to_json()[0].clone();
        let mut report = Report::new(meta, table);
        report.default_format = Format::Json;
        report.json_data = Some(json);
        return Ok(report);
    }
    let points = trace_contour((a.beta_min, a.beta_max), a.steps)?;
    let mut table = Table::new(["beta", "alpha", "branch"]);
    for p in points {
        table.push(vec![
            p.beta.into(),
            p.alpha.into(),
            p.branch.as_str().into(),
        ]);
    }
    Ok(Report::new(meta, table))
}

fn cmd_fieldmap(a: &FieldmapArgs) -> CliResult<Report> {
    let params = a.chain.params()?;
    let (re0, re1) = pair(&a.re_range)?;
    let (im0, im1) = pair(&a.im_range)?;
    if !(re1 > re0) || !(im1 > im0) {
        return Err(CliError::Usage("field map window has zero area".into()));
    }
    if a.resolution < 2 || a.resolution > MAX_RESOLUTION {
        return Err(CliError::Usage(format!(
            "--resolution must be between 2 and {MAX_RESOLUTION}"
        )));
    }
    let f = CharFn::undeflated(params)?;
    let r = a.resolution;
    let mut table = Table::new(["re_delta", "im_delta", "log10_abs_f"]);
    for j in 0..r {
        let im = im0 + (im1 - im0) * j as f64 / (r - 1) as f64;
        for i in 0..r {
            let re = re0 + (re1 - re0) * i as f64 / (r - 1) as f64;
            let v = f.eval(Complex64::new(re, im)).norm().log10();
            table.push(vec![re.into(), im.into(), v.into()]);
        }
    }
    Ok(Report::new(Meta::new("fieldmap", args_value(a)), table))
}

fn cmd_profile(a: &ProfileArgs) -> CliResult<Report> {
    if a.steps < 2 {
        return Err(CliError::Usage("--steps must be at least 2".into()));
    }
    if !(a.sep_min > 0.0) || !(a.sep_max > a.sep_min) {
        return Err(CliError::Usage("need 0 < --sep-min < --sep-max".into()));
    }
    let ls: Vec<f64> = (0..a.steps)
        .map(|k| a.sep_min + (a.sep_max - a.sep_min) * k as f64 / (a.steps - 1) as f64)
        .collect();
    let rows = separation_profile(a.n, a.omega, &ls)?;
    let mut columns = vec!["separation".to_string(), "envelope_re_gamma".to_string()];
    for k in 1..=a.n {
        columns.push(format!("re_gamma_{k}"));
        columns.push(format!("im_gamma_{k}"));
    }
    let mut table = Table::new(columns);
    for row in rows {
        let mut cells = vec![row.separation.into(), row.envelope.into()];
        for k in 0..a.n {
            match row.branches.get(k) {
                Some(g) => cells.extend([g.re.into(), g.im.into()]),
                None => cells.extend([Cell::Empty, Cell::Empty]),
            }
        }
        table.push(cells);
    }
    Ok(Report::new(Meta::new("profile", args_value(a)), table))
}
