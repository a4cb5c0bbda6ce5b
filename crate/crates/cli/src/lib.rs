//! Command-line front end for `ergodic-mi`.
//!
//! Exit codes: 0 on success, 1 on usage, domain or I/O errors, 2 when a
//! verification check fails.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ergodic_mi::evaluator::{self, fmt_f64, snr_to_t, SnrScale};
use ergodic_mi::oracles::montecarlo::McReport;
use ergodic_mi::verify::{run_verification, VerificationReport, VerifyConfig};
use ergodic_mi::{
    cached_table, evaluate_closed_form, monte_carlo_mi, render_expression, telatar_quadrature, ChannelDims,
    EvaluationResult, QuadratureConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

/// Environment variable holding the default `--format`.
pub const FORMAT_ENV: &str = "ERGODIC_MI_FORMAT";

#[derive(Debug, Parser)]
#[command(name = "ergodic-mi", version, about = "Exact ergodic mutual information of MIMO Rayleigh channels")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, env = FORMAT_ENV, default_value_t = Format::Text)]
    format: Format,

    /// Write output to this file instead of stdout. The file is replaced
    /// atomically and left untouched on failure.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the exact rational coefficients a_k and b_k.
    Coeffs(DimsArgs),
    /// Print the closed form as a polynomial expression in t.
    Render(DimsArgs),
    /// Evaluate the mutual information at one or more SNR points.
    Eval {
        #[command(flatten)]
        dims: DimsArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = EvalMethod::ClosedForm)]
        method: EvalMethod,
        /// Relative tolerance for the quadrature method.
        #[arg(long, default_value_t = 1e-12)]
        rel_tol: f64,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Evaluate the closed form over an SNR grid.
    Sweep {
        #[command(flatten)]
        dims: DimsArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Monte Carlo estimate at a single SNR point.
    Mc {
        #[command(flatten)]
        dims: DimsArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Cross-check the closed form against quadrature, Monte Carlo and the
    /// supporting identities. Exits with status 2 if any check fails.
    Verify {
        /// Restrict to one channel size (requires -n); defaults to m <= 4, n <= m+3.
        #[arg(short, requires = "n")]
        m: Option<usize>,
        #[arg(short, requires = "m")]
        n: Option<usize>,
        /// Comma-separated inverse SNRs.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0, 10.0])]
        t: Vec<f64>,
        /// Relative tolerance of closed form against quadrature.
        #[arg(long, default_value_t = 1e-8)]
        rel_tol: f64,
        /// Allowed Monte Carlo deviation in standard errors.
        #[arg(long, default_value_t = 4.0)]
        sigmas: f64,
        /// Monte Carlo samples per point; 0 skips the Monte Carlo checks.
        #[arg(long, default_value_t = 20_000)]
        samples: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct DimsArgs {
    /// Number of transmit (or receive) antennas.
    #[arg(short)]
    m: usize,
    /// Number of receive (or transmit) antennas.
    #[arg(short)]
    n: usize,
}

impl DimsArgs {
    fn dims(&self) -> ergodic_mi::Result<ChannelDims> {
        ChannelDims::new(self.m, self.n)
    }
}

#[derive(Debug, Args)]
struct GridArgs {
    /// SNR in dB: a value, a comma list, or start:stop:step (both ends inclusive).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "t")]
    snr_db: Option<String>,
    /// Comma-separated inverse SNRs t = 1/SNR.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<f64>>,
}

impl GridArgs {
    fn ts(&self) -> Result<Vec<f64>, String> {
        let ts = match (&self.snr_db, &self.t) {
            (Some(spec), _) => parse_db_grid(spec)?
                .into_iter()
                .map(|db| snr_to_t(db, SnrScale::Decibel).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?,
            (None, Some(ts)) => ts.clone(),
            (None, None) => return Err("one of --snr-db or --t is required".into()),
        };
        if ts.is_empty() {
            return Err("SNR grid is empty".into());
        }
        Ok(ts)
    }
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Parses `x`, `x,y,...` or `start:stop:step` into dB values.
///
/// A range includes `stop` whenever `step` divides `stop - start` (up to
/// rounding).
pub fn parse_db_grid(spec: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| -> Result<f64, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("invalid number {s:?} in SNR grid"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("SNR value {s:?} is not finite"))
        }
    };
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(format!("range {spec:?} must be start:stop:step"));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step <= 0.0 {
            return Err(format!("step must be positive, got {step}"));
        }
        if stop < start {
            return Err(format!("range stop {stop} is below start {start}"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| start + i as f64 * step).collect())
    } else {
        spec.split(',').filter(|s| !s.trim().is_empty()).map(num).collect()
    }
}

struct Output {
    text: String,
    code: i32,
}

impl From<String> for Output {
    fn from(text: String) -> Self {
        Output { text, code: EXIT_OK }
    }
}

fn coeffs_output(dims: ChannelDims, format: Format) -> String {
    let table = cached_table(dims);
    match format {
        Format::Json => table.to_json() + "\n",
        Format::Csv => {
            let mut s = String::from("m,n,kind,k,value\n");
            for (kind, coeffs) in [("a", table.a()), ("b", table.b())] {
                for (k, c) in coeffs.iter().enumerate() {
                    writeln!(s, "{},{},{kind},{k},{c}", dims.m(), dims.n()).unwrap();
                }
            }
            s
        }
        Format::Text => {
            let mut s = format!("{dims}\n");
            for (kind, coeffs) in [("a", table.a()), ("b", table.b())] {
                for (k, c) in coeffs.iter().enumerate() {
                    writeln!(s, "{kind}_{k} = {c}").unwrap();
                }
            }
            s
        }
    }
}

fn render_output(dims: ChannelDims, format: Format) -> String {
    let expr = render_expression(&cached_table(dims));
    match format {
        Format::Text => expr + "\n",
        Format::Json => format!(
            "{{\"m\":{},\"n\":{},\"expression\":{}}}\n",
            dims.m(),
            dims.n(),
            serde_json::Value::String(expr)
        ),
        Format::Csv => format!("m,n,expression\n{},{},\"{expr}\"\n", dims.m(), dims.n()),
    }
}

fn results_output(results: &[EvaluationResult], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            evaluator::write_csv(results, &mut buf).expect("writing to memory");
            String::from_utf8(buf).expect("CSV is UTF-8")
        }
        Format::Json => evaluator::to_json(results) + "\n",
        Format::Text => results
            .iter()
            .map(|r| {
                format!(
                    "{} snr_db={} t={} mi_nats={} method={} err_estimate={}\n",
                    r.dims,
                    fmt_f64(r.snr_db()),
                    fmt_f64(r.t),
                    fmt_f64(r.value),
                    r.method,
                    fmt_f64(r.err_estimate)
                )
            })
            .collect(),
    }
}

fn mc_output(r: &McReport, format: Format) -> String {
    match format {
        Format::Json => r.to_json() + "\n",
        Format::Csv => format!(
            "m,n,t,samples,mean,std_error,seed,worker_count\n{},{},{},{},{},{},{},{}\n",
            r.dims.m(),
            r.dims.n(),
            fmt_f64(r.t),
            r.samples,
            fmt_f64(r.mean),
            fmt_f64(r.std_error),
            r.seed,
            r.worker_count
        ),
        Format::Text => format!(
            "{} t={} samples={} mean={} std_error={} seed={} workers={}\n",
            r.dims,
            fmt_f64(r.t),
            r.samples,
            fmt_f64(r.mean),
            fmt_f64(r.std_error),
            r.seed,
            r.worker_count
        ),
    }
}

fn verify_output(report: &VerificationReport, format: Format) -> Output {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        Format::Csv => {
            let mut s = String::from("name,passed,measured,tolerance\n");
            for c in &report.checks {
                writeln!(s, "\"{}\",{},{},{}", c.name, c.passed, fmt_f64(c.measured), fmt_f64(c.tolerance)).unwrap();
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for c in &report.checks {
                writeln!(s, "{c}").unwrap();
            }
            let failed = report.failures().count();
            writeln!(s, "{} checks, {} failed", report.checks.len(), failed).unwrap();
            s
        }
    };
    let code = if report.all_passed() { EXIT_OK } else { EXIT_VERIFY_FAILED };
    Output { text, code }
}

fn evaluate(
    dims: ChannelDims,
    ts: &[f64],
    method: EvalMethod,
    rel_tol: f64,
    mc: &McArgs,
) -> ergodic_mi::Result<Vec<EvaluationResult>> {
    let cfg = QuadratureConfig { rel_tol, ..Default::default() };
    if method == EvalMethod::Quadrature {
        cfg.validate()?;
    }
    let table = cached_table(dims);
    ts.iter()
        .map(|&t| match method {
            EvalMethod::ClosedForm => evaluate_closed_form(&table, t),
            EvalMethod::Quadrature => telatar_quadrature(dims, t, &cfg),
            EvalMethod::MonteCarlo => {
                let r = monte_carlo_mi(dims, t, mc.samples, mc.seed, mc.workers.unwrap_or_else(default_workers))?;
                Ok(EvaluationResult {
                    dims,
                    t,
                    value: r.mean,
                    method: ergodic_mi::Method::MonteCarlo,
                    err_estimate: r.std_error,
                })
            }
        })
        .collect()
}

fn execute(cli: &Cli) -> Result<Output, String> {
    let err = |e: ergodic_mi::Error| e.to_string();
    let format = cli.format;
    Ok(match &cli.command {
        Command::Coeffs(d) => coeffs_output(d.dims().map_err(err)?, format).into(),
        Command::Render(d) => render_output(d.dims().map_err(err)?, format).into(),
        Command::Eval { dims, grid, method, rel_tol, mc } => {
            let results = evaluate(dims.dims().map_err(err)?, &grid.ts()?, *method, *rel_tol, mc).map_err(err)?;
            results_output(&results, format).into()
        }
        Command::Sweep { dims, grid } => {
            let dims = dims.dims().map_err(err)?;
            let results = match &grid.snr_db {
                Some(spec) => evaluator::sweep(dims, &parse_db_grid(spec)?, SnrScale::Decibel),
                None => {
                    let table = cached_table(dims);
                    grid.ts()?.iter().map(|&t| evaluate_closed_form(&table, t)).collect()
                }
            }
            .map_err(err)?;
            results_output(&results, format).into()
        }
        Command::Mc { dims, grid, mc } => {
            let ts = grid.ts()?;
            let [t] = ts[..] else {
                return Err(format!("mc takes a single SNR point, got {}", ts.len()));
            };
            let workers = mc.workers.unwrap_or_else(default_workers);
            let report = monte_carlo_mi(dims.dims().map_err(err)?, t, mc.samples, mc.seed, workers).map_err(err)?;
            mc_output(&report, format).into()
        }
        Command::Verify { m, n, t, rel_tol, sigmas, samples, seed, workers } => {
            let mut cfg = VerifyConfig::default();
            if let (Some(m), Some(n)) = (m, n) {
                cfg.dims = vec![ChannelDims::new(*m, *n).map_err(err)?];
            }
            if t.is_empty() {
                return Err("--t list is empty".into());
            }
            for &x in t {
                if !(x.is_finite() && x > 0.0) {
                    return Err(format!("inverse SNR t must be positive and finite, got {x}"));
                }
            }
            if !(*rel_tol > 0.0 && *sigmas > 0.0) {
                return Err("--rel-tol and --sigmas must be positive".into());
            }
            if *samples != 0 && *samples < ergodic_mi::oracles::montecarlo::MIN_SAMPLES {
                return Err(format!(
                    "--samples must be 0 or at least {}",
                    ergodic_mi::oracles::montecarlo::MIN_SAMPLES
                ));
            }
            cfg.ts = t.clone();
            cfg.rel_tol = *rel_tol;
            cfg.mc_sigmas = *sigmas;
            cfg.mc_samples = *samples;
            cfg.seed = *seed;
            cfg.workers = workers.unwrap_or_else(default_workers);
            if cfg.workers == 0 {
                return Err("--workers must be positive".into());
            }
            verify_output(&run_verification(&cfg), format)
        }
    })
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let out = match execute(&cli) {
        Ok(out) => out,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_ERROR;
        }
    };
    let written = match &cli.output {
        Some(path) => write_atomic(path, out.text.as_bytes()).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(out.text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(msg) = written {
        let _ = writeln!(stderr, "error: {msg}");
        return EXIT_ERROR;
    }
    out.code
}
