//! `axial` command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 bad input, 3 numeric
//! failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::io::{read_matrix, Format};
use crate::sampler::{AxialDensity, DrawTrace, SampleBatch};
use crate::validation::{empirical_second_moment, max_abs_difference, second_moment_closed_form, validate_density};

/// Seed used when `--seed` is omitted.
pub const DEFAULT_SEED: u64 = 20_130_601;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION_FAILED: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "axial", version, about = "Exact sampling from f(x) ∝ xᵀAx on the unit sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw n unit vectors; one row per draw.
    Sample {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "10", value_parser = parse_count)]
        n: usize,
        /// Write per-draw traces as JSON lines to `<output>.trace.jsonl` (stderr without --output).
        #[arg(long)]
        trace: bool,
    },
    /// Evaluate the density at a unit vector.
    Density {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
    /// Run the statistical check suite; JSON lines, one per check.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "100000", value_parser = parse_count)]
        n: usize,
    },
    /// Closed-form E[x xᵀ], optionally against a Monte Carlo estimate.
    Moments {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_parser = parse_count)]
        empirical: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Matrix file (.csv or .json).
    #[arg(long)]
    pub input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Overrides format detection for both the matrix file and the output.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl CommonArgs {
    fn output_format(&self) -> Format {
        self.format.unwrap_or_else(|| self.output.as_deref().map_or(Format::Csv, Format::from_path))
    }
}

/// Accepts plain integers and integral scientific notation such as `1e5`.
fn parse_count(s: &str) -> Result<usize, String> {
    let n = match s.parse::<usize>() {
        Ok(n) => n,
        Err(_) => {
            let v: f64 = s.parse().map_err(|_| format!("invalid count {s:?}"))?;
            if !(v.fract() == 0.0 && v >= 0.0 && v <= usize::MAX as f64) {
                return Err(format!("invalid count {s:?}"));
            }
            v as usize
        }
    };
    if n == 0 {
        return Err("count must be at least 1".into());
    }
    Ok(n)
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonSquare { .. }
            | Error::DimensionTooSmall(_)
            | Error::NonFinite { .. }
            | Error::AsymmetryTooLarge { .. }
            | Error::NotPositiveSemiDefinite { .. }
            | Error::ZeroTrace(_)
            | Error::NotOrthogonal(_)
            | Error::DimensionMismatch { .. }
            | Error::NotOnSphere(_)
            | Error::EmptyBatch
            | Error::Parse(_) => Failure::Input(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{}", e.render()) } else { write!(stdout, "{}", e.render()) };
            return code;
        }
    };

    let pool = Workers(worker_pool());
    match execute(&cli.command, &pool, stdout, stderr) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_BAD_INPUT
        }
        Err(Failure::Numeric(msg)) => {
            let _ = writeln!(stderr, "numeric failure: {msg}");
            EXIT_NUMERIC
        }
    }
}

/// `AXIAL_THREADS` caps the worker count; output does not depend on it.
fn worker_pool() -> Option<rayon::ThreadPool> {
    let threads = std::env::var("AXIAL_THREADS").ok()?.trim().parse::<usize>().ok().filter(|&t| t > 0)?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok()
}

struct Workers(Option<rayon::ThreadPool>);

impl Workers {
    fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.0 {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }
}

fn load(common: &CommonArgs) -> Result<AxialDensity, Failure> {
    let matrix = read_matrix(&common.input, common.format)?;
    Ok(AxialDensity::from_matrix(&matrix)?)
}

fn execute(command: &Command, workers: &Workers, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Sample { common, n, trace } => cmd_sample(common, *n, *trace, workers, stdout, stderr),
        Command::Density { common, x } => cmd_density(common, x, stdout),
        Command::Validate { common, n } => cmd_validate(common, *n, workers, stdout),
        Command::Moments { common, empirical } => cmd_moments(common, *empirical, workers, stdout),
    }
}

fn with_output(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), Failure> {
    match path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            body(&mut w)?;
            w.flush()?;
        }
        None => body(stdout)?,
    }
    Ok(())
}

/// 17 significant digits.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv_rows<'a>(w: &mut dyn Write, rows: impl Iterator<Item = &'a [f64]>) -> std::io::Result<()> {
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_batch_csv(w: &mut dyn Write, batch: &SampleBatch) -> std::io::Result<()> {
    let header: Vec<String> = (1..=batch.dim).map(|i| format!("x{i}")).collect();
    writeln!(w, "{}", header.join(","))?;
    write_csv_rows(w, batch.rows())
}

pub fn write_batch_json(w: &mut dyn Write, batch: &SampleBatch) -> std::io::Result<()> {
    let samples: Vec<&[f64]> = batch.rows().collect();
    let doc = serde_json::json!({
        "seed": batch.seed,
        "dim": batch.dim,
        "matrix_fingerprint": batch.matrix_fingerprint,
        "samples": samples,
    });
    serde_json::to_writer(&mut *w, &doc)?;
    writeln!(w)
}

fn write_traces(w: &mut dyn Write, traces: &[DrawTrace]) -> std::io::Result<()> {
    for trace in traces {
        serde_json::to_writer(&mut *w, trace)?;
        writeln!(w)?;
    }
    Ok(())
}

fn cmd_sample(
    common: &CommonArgs,
    n: usize,
    trace: bool,
    workers: &Workers,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let density = load(common)?;
    let (batch, traces) = if trace {
        let (batch, traces) = workers.install(|| density.sample_with_traces(n, common.seed))?;
        (batch, Some(traces))
    } else {
        (workers.install(|| density.sample(n, common.seed))?, None)
    };

    let format = common.output_format();
    with_output(common.output.as_deref(), stdout, |w| match format {
        Format::Csv => write_batch_csv(w, &batch),
        Format::Json => write_batch_json(w, &batch),
    })?;

    if let Some(traces) = traces {
        match &common.output {
            Some(path) => {
                let mut trace_path = path.clone().into_os_string();
                trace_path.push(".trace.jsonl");
                with_output(Some(Path::new(&trace_path)), stdout, |w| write_traces(w, &traces))?;
            }
            None => write_traces(stderr, &traces)?,
        }
    }
    Ok(EXIT_OK)
}

fn cmd_density(common: &CommonArgs, x: &[f64], stdout: &mut dyn Write) -> Result<i32, Failure> {
    let density = load(common)?;
    let value = density.density_value(x)?;
    with_output(common.output.as_deref(), stdout, |w| writeln!(w, "{value:?}"))?;
    Ok(EXIT_OK)
}

fn cmd_validate(common: &CommonArgs, n: usize, workers: &Workers, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let density = load(common)?;
    let reports = workers.install(|| validate_density(&density, n, common.seed))?;
    with_output(common.output.as_deref(), stdout, |w| {
        for report in &reports {
            serde_json::to_writer(&mut *w, report)?;
            writeln!(w)?;
        }
        Ok(())
    })?;
    Ok(if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_VALIDATION_FAILED })
}

fn cmd_moments(
    common: &CommonArgs,
    empirical: Option<usize>,
    workers: &Workers,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let density = load(common)?;
    let p = density.dim();
    let closed = second_moment_closed_form(&density);
    let estimate = match empirical {
        Some(n) => {
            let batch = workers.install(|| density.sample(n, common.seed))?;
            let m = empirical_second_moment(&batch);
            let gap = max_abs_difference(&m, &closed);
            Some((n, m, gap))
        }
        None => None,
    };

    let as_rows = |m: &[f64]| -> Vec<Vec<f64>> { m.chunks(p).map(<[f64]>::to_vec).collect() };
    match common.output_format() {
        Format::Json => {
            let mut doc = serde_json::json!({ "dim": p, "closed_form": as_rows(&closed) });
            if let Some((n, m, gap)) = &estimate {
                doc["empirical"] = serde_json::json!(as_rows(m));
                doc["n"] = serde_json::json!(n);
                doc["seed"] = serde_json::json!(common.seed);
                doc["max_abs_discrepancy"] = serde_json::json!(gap);
            }
            with_output(common.output.as_deref(), stdout, |w| {
                serde_json::to_writer(&mut *w, &doc)?;
                writeln!(w)
            })?;
        }
        Format::Csv => {
            with_output(common.output.as_deref(), stdout, |w| {
                writeln!(w, "closed_form")?;
                write_csv_rows(w, closed.chunks(p))?;
                if let Some((n, m, gap)) = &estimate {
                    writeln!(w, "empirical n={n} seed={}", common.seed)?;
                    write_csv_rows(w, m.chunks(p))?;
                    writeln!(w, "max_abs_discrepancy,{}", fmt_f64(*gap))?;
                }
                Ok(())
            })?;
        }
    }
    Ok(EXIT_OK)
}
