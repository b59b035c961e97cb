//! The `tradestats` command line.
//!
//! Every subcommand reads a tape as CSV (`-` for standard input) and writes
//! JSON or CSV to standard output or `--output`. Exit status is 0 on success,
//! 1 when the data or a window is invalid, and 2 on usage errors.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::charfn::{CharFnApprox, Damping, GridSpec};
use crate::correlations::{
    adjprice_volume_sq_corr, return_price_corr, return_volume_corr, CorrelationReport,
    PairedWindows, SweepRow,
};
use crate::moments::{MomentReport, DEFAULT_ORDER_CAP};
use crate::synth::{generate, weighting_contrast, GenConfig};
use crate::tape::{
    header_has_value, ingest, ingest_inferred, LagSpec, TradeTape, ValueColumn, WindowSpec,
};
use crate::SCHEMA_VERSION;

/// Environment variable that fixes the worker thread count.
pub const THREADS_ENV: &str = "TRADESTATS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "tradestats",
    version,
    about = "Value-weighted return statistics of trade tapes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a tape and report the first bad row.
    Validate(TapeArgs),
    /// Moment report per window, sweeping the start by a stride.
    Stats(StatsArgs),
    /// Return autocorrelation against the pair shift.
    Acorr(AcorrArgs),
    /// Return-volume and return-price correlations of one pair.
    Xcorr(XcorrArgs),
    /// Moment-matched density of the window's returns.
    Density(DensityArgs),
    /// Generate a synthetic tape from a JSON config.
    Simulate(SimulateArgs),
    /// Plain mean return against the value-weighted mean return.
    Contrast(ContrastArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ValueMode {
    /// use the value column when the header has one
    Auto,
    WithValue,
    DeriveValue,
}

#[derive(Debug, Args)]
pub struct TapeArgs {
    /// Tape CSV (`time,price,volume[,value]`), or `-` for standard input.
    #[arg(long, short)]
    pub input: String,
    /// Tick spacing; inferred from the first two rows when omitted.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum, default_value_t = ValueMode::Auto)]
    pub values: ValueMode,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Ticks per window.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub window: u64,
    /// Index of the first tick in the window.
    #[arg(long)]
    pub start: usize,
    /// Return lag in ticks.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub lag: u64,
}

impl WindowArgs {
    fn spec(&self) -> WindowSpec {
        WindowSpec::new(self.start, self.window as usize)
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub tape: TapeArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Highest moment order.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    pub order: u32,
    #[arg(long, default_value_t = DEFAULT_ORDER_CAP)]
    pub order_cap: u32,
    /// Number of windows in the sweep.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub windows: u64,
    /// Ticks between consecutive window starts.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AcorrArgs {
    #[command(flatten)]
    pub tape: TapeArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Lag of the second window; defaults to `--lag`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub lag2: Option<u64>,
    /// Largest pair shift; shifts run from 0.
    #[arg(long, default_value_t = 0)]
    pub max_shift: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub shift_step: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct XcorrArgs {
    #[command(flatten)]
    pub tape: TapeArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub lag2: Option<u64>,
    /// Pair shift in ticks.
    #[arg(long, default_value_t = 0)]
    pub shift: usize,
    /// Return degree.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    /// Price degree.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub m: u32,
    #[arg(long, default_value_t = DEFAULT_ORDER_CAP)]
    pub order_cap: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Tape CSV; omit when `--moments` is given.
    #[arg(long, short, required_unless_present = "moments")]
    pub input: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum, default_value_t = ValueMode::Auto)]
    pub values: ValueMode,
    #[arg(long, requires = "input", value_parser = clap::value_parser!(u64).range(2..))]
    pub window: Option<u64>,
    #[arg(long, requires = "input")]
    pub start: Option<usize>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub lag: u64,
    /// Explicit moments `r_1,r_2,...` instead of a tape window.
    #[arg(long, value_delimiter = ',', conflicts_with = "input")]
    pub moments: Option<Vec<f64>>,
    /// Approximation order m.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    pub order: u32,
    #[arg(long, default_value_t = DEFAULT_ORDER_CAP)]
    pub order_cap: u32,
    /// Damping coefficient b; chosen automatically when omitted.
    #[arg(long)]
    pub b: Option<f64>,
    /// Damping exponent q (needs 2q > m).
    #[arg(long, requires = "b")]
    pub q: Option<u32>,
    #[arg(long)]
    pub r_min: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub r_points: Option<usize>,
    #[arg(long)]
    pub x_points: Option<usize>,
    /// CSV output; the JSON sidecar goes to `<output>.json`.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Sidecar path when writing the CSV to standard output.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Generator config JSON, or `-` for standard input.
    #[arg(long, short)]
    pub config: String,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config's tick count.
    #[arg(long)]
    pub ticks: Option<usize>,
    /// Omit the value column.
    #[arg(long)]
    pub no_value: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ContrastArgs {
    #[command(flatten)]
    pub tape: TapeArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    fn data(e: impl std::fmt::Display) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status. Reports go to `stdout` unless redirected with `--output`.
pub fn run_with<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                2
            } else {
                let _ = write!(stdout, "{e}");
                0
            };
            return code;
        }
    };
    configure_threads();
    let mut io = Streams { stdin, stdout };
    let result = match &cli.command {
        Command::Validate(a) => validate(a, &mut io),
        Command::Stats(a) => stats(a, &mut io),
        Command::Acorr(a) => acorr(a, &mut io),
        Command::Xcorr(a) => xcorr(a, &mut io),
        Command::Density(a) => density(a, &mut io),
        Command::Simulate(a) => simulate(a, &mut io),
        Command::Contrast(a) => contrast(a, &mut io),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

struct Streams<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
}

impl Streams<'_> {
    fn read_source(&mut self, source: &str) -> Result<String, Failure> {
        let mut text = String::new();
        if source == "-" {
            self.stdin
                .read_to_string(&mut text)
                .map_err(Failure::data)?;
        } else {
            File::open(source)
                .and_then(|mut f| f.read_to_string(&mut text))
                .map_err(|e| Failure::Data(format!("{source}: {e}")))?;
        }
        Ok(text)
    }

    fn emit(&mut self, output: Option<&Path>, bytes: &[u8]) -> Outcome {
        match output {
            Some(path) => std::fs::write(path, bytes)
                .map_err(|e| Failure::Data(format!("{}: {e}", path.display()))),
            None => self.stdout.write_all(bytes).map_err(Failure::data),
        }
    }

    fn load_tape(
        &mut self,
        input: &str,
        epsilon: Option<f64>,
        values: ValueMode,
    ) -> Result<TradeTape, Failure> {
        let text = self.read_source(input)?;
        let format = match values {
            ValueMode::WithValue => ValueColumn::WithValue,
            ValueMode::DeriveValue => ValueColumn::DeriveValue,
            ValueMode::Auto if header_has_value(text.lines().next().unwrap_or("")) => {
                ValueColumn::WithValue
            }
            ValueMode::Auto => ValueColumn::DeriveValue,
        };
        let tape = match epsilon {
            Some(eps) => ingest(text.as_bytes(), format, eps),
            None => ingest_inferred(text.as_bytes(), format),
        };
        tape.map_err(|e| Failure::Data(format!("{input}: {e}")))
    }
}

fn json_bytes(value: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("JSON values always serialize");
    bytes.push(b'\n');
    bytes
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports always serialize")
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(Failure::data)?;
    for row in rows {
        w.write_record(row).map_err(Failure::data)?;
    }
    w.into_inner().map_err(Failure::data)
}

fn check_order(order: u32, cap: u32, flag: &str) -> Outcome {
    if order > cap {
        return Err(Failure::Usage(format!(
            "{flag} {order} exceeds the order cap {cap}; raise it with --order-cap"
        )));
    }
    Ok(())
}

fn validate(a: &TapeArgs, io: &mut Streams<'_>) -> Outcome {
    let tape = io.load_tape(&a.input, a.epsilon, a.values)?;
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "valid": true,
        "ticks": tape.len(),
        "epsilon": tape.epsilon(),
    });
    io.emit(None, &json_bytes(&report))
}

fn stats(a: &StatsArgs, io: &mut Streams<'_>) -> Outcome {
    check_order(a.order, a.order_cap, "--order")?;
    let tape = io.load_tape(&a.tape.input, a.tape.epsilon, a.tape.values)?;
    let lag = a.window.lag as usize;
    let starts: Vec<usize> = (0..a.windows as usize)
        .map(|k| a.window.start + k * a.stride as usize)
        .collect();
    let reports: Vec<MomentReport> = starts
        .par_iter()
        .map(|&start| {
            let w = tape
                .resolve(
                    WindowSpec::new(start, a.window.window as usize),
                    LagSpec::lag(lag),
                )
                .map_err(Failure::data)?;
            MomentReport::compute(&w, a.order).map_err(Failure::data)
        })
        .collect::<Result<_, _>>()?;
    let bytes = match a.out.format {
        OutputFormat::Json => json_bytes(&json!({
            "schema_version": SCHEMA_VERSION,
            "windows": reports,
        })),
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = reports.iter().map(MomentReport::csv_row).collect();
            csv_bytes(&MomentReport::csv_header(a.order), &rows)?
        }
    };
    io.emit(a.out.output.as_deref(), &bytes)
}

fn acorr(a: &AcorrArgs, io: &mut Streams<'_>) -> Outcome {
    let tape = io.load_tape(&a.tape.input, a.tape.epsilon, a.tape.values)?;
    let (l1, l2) = (
        a.window.lag as usize,
        a.lag2.unwrap_or(a.window.lag) as usize,
    );
    let shifts: Vec<usize> = (0..=a.max_shift).step_by(a.shift_step as usize).collect();
    let results: Vec<(CorrelationReport, Vec<SweepRow>)> = shifts
        .par_iter()
        .map(|&j| {
            let pair = PairedWindows::from_shift(&tape, a.window.spec(), l1, l2, j)
                .map_err(Failure::data)?;
            let rows = SweepRow::for_pair(&pair, 1, 1).map_err(Failure::data)?;
            Ok((CorrelationReport::compute(&pair), rows))
        })
        .collect::<Result<_, Failure>>()?;
    let bytes = match a.out.format {
        OutputFormat::Json => {
            let pairs: Vec<&CorrelationReport> = results.iter().map(|(r, _)| r).collect();
            json_bytes(&json!({
                "schema_version": SCHEMA_VERSION,
                "start": a.window.start,
                "count": a.window.window,
                "pairs": pairs,
            }))
        }
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = results
                .iter()
                .flat_map(|(_, rows)| {
                    rows.iter()
                        .filter(|r| r.statistic == "corr_r")
                        .map(SweepRow::csv_record)
                })
                .collect();
            let header: Vec<String> = SweepRow::HEADER.iter().map(|s| s.to_string()).collect();
            csv_bytes(&header, &rows)?
        }
    };
    io.emit(a.out.output.as_deref(), &bytes)
}

fn xcorr(a: &XcorrArgs, io: &mut Streams<'_>) -> Outcome {
    check_order(a.n, a.order_cap, "--n")?;
    check_order(a.m, a.order_cap, "--m")?;
    let tape = io.load_tape(&a.tape.input, a.tape.epsilon, a.tape.values)?;
    let (l1, l2) = (
        a.window.lag as usize,
        a.lag2.unwrap_or(a.window.lag) as usize,
    );
    let pair = PairedWindows::from_shift(&tape, a.window.spec(), l1, l2, a.shift)
        .map_err(Failure::data)?;
    let bytes = match a.out.format {
        OutputFormat::Json => {
            let rp = return_price_corr(&pair, a.n, a.m).map_err(Failure::data)?;
            json_bytes(&json!({
                "schema_version": SCHEMA_VERSION,
                "start": a.window.start,
                "count": a.window.window,
                "j": a.shift,
                "l1": l1,
                "l2": l2,
                "n": a.n,
                "m": a.m,
                "corr_rU": return_volume_corr(&pair),
                "corr_rp": rp,
                "corr_paU2": adjprice_volume_sq_corr(pair.first()),
            }))
        }
        OutputFormat::Csv => {
            let rows: Vec<Vec<String>> = SweepRow::for_pair(&pair, a.n, a.m)
                .map_err(Failure::data)?
                .iter()
                .filter(|r| r.statistic != "corr_r")
                .map(SweepRow::csv_record)
                .collect();
            let header: Vec<String> = SweepRow::HEADER.iter().map(|s| s.to_string()).collect();
            csv_bytes(&header, &rows)?
        }
    };
    io.emit(a.out.output.as_deref(), &bytes)
}

fn density(a: &DensityArgs, io: &mut Streams<'_>) -> Outcome {
    check_order(a.order, a.order_cap, "--order")?;
    let moments: Vec<f64> = match (&a.moments, &a.input) {
        (Some(m), _) => {
            if m.len() < a.order as usize {
                return Err(Failure::Usage(format!(
                    "--moments gives {} values but --order is {}",
                    m.len(),
                    a.order
                )));
            }
            m[..a.order as usize].to_vec()
        }
        (None, Some(input)) => {
            let (Some(window), Some(start)) = (a.window, a.start) else {
                return Err(Failure::Usage(
                    "--window and --start are required with --input".into(),
                ));
            };
            let tape = io.load_tape(input, a.epsilon, a.values)?;
            let w = tape
                .resolve(
                    WindowSpec::new(start, window as usize),
                    LagSpec::lag(a.lag as usize),
                )
                .map_err(Failure::data)?;
            MomentReport::compute(&w, a.order)
                .map_err(Failure::data)?
                .return_moments
        }
        (None, None) => unreachable!("clap requires --input or --moments"),
    };
    let damping = match a.b {
        Some(b) => Damping::Fixed { b, q: a.q },
        None => Damping::Auto,
    };
    let approx = CharFnApprox::with_damping(&moments, damping).map_err(Failure::data)?;
    let custom =
        a.r_min.is_some() || a.r_max.is_some() || a.r_points.is_some() || a.x_points.is_some();
    let grid = if custom {
        let defaults = approx.default_grid();
        let spec = GridSpec {
            r_min: a.r_min.unwrap_or(defaults.r_min),
            r_max: a.r_max.unwrap_or(defaults.r_max),
            r_points: a.r_points.unwrap_or(defaults.r_points),
            x_points: a.x_points.unwrap_or(defaults.x_points),
            x_extent: None,
        };
        approx.invert(&spec)
    } else {
        approx.density()
    }
    .map_err(Failure::data)?;

    let mut csv = Vec::new();
    grid.write_csv(&mut csv).map_err(Failure::data)?;
    let sidecar = json_bytes(&to_value(&grid.sidecar()));
    io.emit(a.output.as_deref(), &csv)?;
    let sidecar_path = match (&a.sidecar, &a.output) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(out)) => {
            let mut name = out.clone().into_os_string();
            name.push(".json");
            Some(PathBuf::from(name))
        }
        (None, None) => None,
    };
    if let Some(path) = sidecar_path {
        io.emit(Some(&path), &sidecar)?;
    }
    Ok(())
}

fn simulate(a: &SimulateArgs, io: &mut Streams<'_>) -> Outcome {
    let text = io.read_source(&a.config)?;
    let mut config = GenConfig::from_json(&text).map_err(Failure::data)?;
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(ticks) = a.ticks {
        config.ticks = ticks;
    }
    let tape = generate(&config).map_err(Failure::data)?;
    let format = if a.no_value {
        ValueColumn::DeriveValue
    } else {
        ValueColumn::WithValue
    };
    let mut bytes = Vec::new();
    tape.write_csv(&mut bytes, format).map_err(Failure::data)?;
    io.emit(a.output.as_deref(), &bytes)
}

fn contrast(a: &ContrastArgs, io: &mut Streams<'_>) -> Outcome {
    let tape = io.load_tape(&a.tape.input, a.tape.epsilon, a.tape.values)?;
    let w = tape
        .resolve(a.window.spec(), LagSpec::lag(a.window.lag as usize))
        .map_err(Failure::data)?;
    let c = weighting_contrast(&w).map_err(Failure::data)?;
    let bytes = match a.out.format {
        OutputFormat::Json => json_bytes(&json!({
            "schema_version": SCHEMA_VERSION,
            "start": w.start(),
            "count": w.count(),
            "lag": w.lag(),
            "frequency_mean": c.frequency_mean,
            "vawar": c.vawar,
            "gap": c.gap,
        })),
        OutputFormat::Csv => {
            let header: Vec<String> = ["start", "count", "lag", "frequency_mean", "vawar", "gap"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let row = vec![
                w.start().to_string(),
                w.count().to_string(),
                w.lag().to_string(),
                crate::tape::fmt_f64(c.frequency_mean),
                crate::tape::fmt_f64(c.vawar),
                crate::tape::fmt_f64(c.gap),
            ];
            csv_bytes(&header, &[row])?
        }
    };
    io.emit(a.out.output.as_deref(), &bytes)
}
