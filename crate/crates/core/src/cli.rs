//! The `fracfilt` command line.
//!
//! Exit codes: 0 success, 2 usage or invalid input, 3 stability refusal,
//! 4 numeric or filter failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::boundary::BoundaryPolicy;
use crate::error::{Error, Result};
use crate::fd::{filter_fd, FdConfig};
use crate::fractional::{FractionalOrder, NonlocalMode};
use crate::io::{manifest_path, read_signal, write_columns, write_signal, FileDigest, RunManifest};
use crate::metrics::{run_ensemble, sweep_b, FilterConfig};
use crate::savgol::{filter_savgol, SavGolSpec};
use crate::signal::{add_noise, gen_attenuated_cosine, gen_ecg_like, gen_step, gen_trig, NoiseSpec, Signal};
use crate::spectral::{characteristic_frequencies, filter_fft, kernel_gain_curve, kernel_physical, FilterParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "fracfilt",
    version,
    about = "Signal denoising with a fractal conservation law"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic test signal.
    Gen(GenArgs),
    /// Filter a signal file.
    Filter {
        #[command(subcommand)]
        method: FilterMethod,
    },
    /// Write the physical kernel and its spectral gain.
    Kernel(KernelArgs),
    /// Compare filters over an ensemble of noisy realisations.
    Bench(BenchArgs),
    /// Scan the anti-diffusion coefficient at one input SNR.
    Sweep(SweepArgs),
    /// Re-run the command recorded in a manifest and check its outputs.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    Step,
    Trig,
    Attcos,
    EcgLike,
}

impl GenKind {
    fn name(self) -> &'static str {
        match self {
            GenKind::Step => "step",
            GenKind::Trig => "trig",
            GenKind::Attcos => "attcos",
            GenKind::EcgLike => "ecg-like",
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    kind: GenKind,
    /// Number of samples.
    #[arg(long)]
    n: Option<usize>,
    /// Domain length (ignored by `step`, which always covers [0, 2)).
    #[arg(long)]
    length: Option<f64>,
    /// Attenuation amplitude for `attcos`.
    #[arg(long, default_value_t = 0.02)]
    amplitude: f64,
    /// Beat period for `ecg-like`.
    #[arg(long, default_value_t = 1.0)]
    beat_period: f64,
    /// Add white Gaussian noise at this SNR (dB).
    #[arg(long, conflicts_with = "sigma")]
    snr: Option<f64>,
    /// Add white Gaussian noise with this standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[group(id = "diffusion", required = true, multiple = false)]
struct Diffusion {
    /// Diffusion coefficient `a`.
    #[arg(long, group = "diffusion")]
    a: Option<f64>,
    /// Diffusion given as 4*pi^2*a.
    #[arg(long, group = "diffusion")]
    a4pi2: Option<f64>,
}

impl Diffusion {
    fn a(&self) -> f64 {
        match (self.a, self.a4pi2) {
            (Some(a), _) => a,
            (None, Some(s)) => s / (4.0 * std::f64::consts::PI * std::f64::consts::PI),
            (None, None) => unreachable!("clap requires one of --a, --a4pi2"),
        }
    }
}

#[derive(Debug, Args)]
struct SpectralArgs {
    #[command(flatten)]
    diffusion: Diffusion,
    /// Anti-diffusion coefficient.
    #[arg(long)]
    b: f64,
    /// Fractional order in (0, 2).
    #[arg(long)]
    lambda: f64,
    /// Evolution time.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
}

impl SpectralArgs {
    fn params(&self) -> Result<FilterParams> {
        match (self.diffusion.a, self.diffusion.a4pi2) {
            (None, Some(s)) => FilterParams::from_a4pi2(s, self.b, self.lambda, self.t),
            _ => FilterParams::new(self.diffusion.a(), self.b, self.lambda, self.t),
        }
    }
}

#[derive(Debug, Args)]
struct Io {
    /// Input signal CSV.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output signal CSV; the manifest goes to `<out>.manifest.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum FilterMethod {
    /// Exact Fourier-multiplier solution (periodic).
    Fft {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        params: SpectralArgs,
    },
    /// Explicit finite-difference scheme.
    Fd(FdArgs),
    /// Savitzky-Golay smoothing.
    Savgol {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 11)]
        window: usize,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = BoundaryPolicy::ConstantExtension)]
        boundary: BoundaryPolicy,
    },
}

#[derive(Debug, Args)]
struct FdArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    diffusion: Diffusion,
    /// Anti-diffusion coefficient.
    #[arg(long)]
    b: f64,
    /// Fractional order in (0, 2); symmetric mode needs lambda > 1.
    #[arg(long)]
    lambda: f64,
    /// Time step.
    #[arg(long)]
    dt: f64,
    /// Number of time steps (default 10).
    #[arg(long, conflicts_with = "time")]
    steps: Option<usize>,
    /// Final time; steps = round(time / dt).
    #[arg(long)]
    time: Option<f64>,
    #[arg(long, default_value_t = NonlocalMode::Causal)]
    mode: NonlocalMode,
    #[arg(long, default_value_t = BoundaryPolicy::ConstantExtension)]
    boundary: BoundaryPolicy,
    /// Terms kept in the nonlocal sum.
    #[arg(long, visible_alias = "A")]
    truncation: Option<usize>,
    /// Run even if the stability conditions fail.
    #[arg(long)]
    force_unstable: bool,
    /// Take the grid spacing from the input file (the default).
    #[arg(long, conflicts_with = "dx")]
    dx_from_file: bool,
    /// Override the grid spacing of the input file.
    #[arg(long)]
    dx: Option<f64>,
}

#[derive(Debug, Args)]
struct KernelArgs {
    #[command(flatten)]
    params: SpectralArgs,
    #[arg(long, default_value_t = 4096)]
    n: usize,
    /// Width of the physical window, centred on 0.
    #[arg(long, default_value_t = 40.0)]
    extent: f64,
    /// Physical kernel CSV (`x,K`).
    #[arg(long)]
    out: PathBuf,
    /// Gain CSV (`xi,gain`); defaults to `<out>.gain.csv`.
    #[arg(long)]
    gain_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SignalSource {
    /// Clean reference signal file.
    #[arg(long, conflicts_with = "gen")]
    signal: Option<PathBuf>,
    /// Generator for the clean reference when no file is given.
    #[arg(long, value_enum, default_value_t = GenKind::Trig)]
    gen: GenKind,
    #[arg(long, default_value_t = 2048)]
    gen_n: usize,
    #[arg(long, default_value_t = 2.0)]
    gen_length: f64,
    #[arg(long, default_value_t = 0.02)]
    gen_amplitude: f64,
    #[arg(long, default_value_t = 1.0)]
    gen_beat_period: f64,
}

impl SignalSource {
    fn load(&self) -> Result<(Signal, serde_json::Value, Vec<FileDigest>)> {
        match &self.signal {
            Some(path) => Ok((read_signal(path)?, json!({ "file": path }), vec![FileDigest::of(path)?])),
            None => {
                let u = generate(
                    self.gen,
                    Some(self.gen_n),
                    Some(self.gen_length),
                    self.gen_amplitude,
                    self.gen_beat_period,
                )?;
                let desc = json!({
                    "generator": self.gen.name(),
                    "n": self.gen_n,
                    "length": self.gen_length,
                    "amplitude": self.gen_amplitude,
                    "beat_period": self.gen_beat_period,
                });
                Ok((u, desc, Vec::new()))
            }
        }
    }
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    source: SignalSource,
    /// Filter spec, repeatable: `identity`, `fft:a4pi2=..,b=..,lambda=..[,t=..]`,
    /// `savgol[:window=..,order=..,boundary=..]`,
    /// `fd:a=..,b=..,lambda=..,dt=..,steps=..[,mode=..,boundary=..,A=..]`.
    #[arg(long = "filter")]
    filters: Vec<String>,
    /// Input SNR grid in dB: `start:stop:step` or a comma list.
    #[arg(long, default_value = "0:8:1")]
    grid: String,
    /// Realisations per grid point.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON; curves go to `<out>.curves.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SignalSource,
    #[arg(long, conflicts_with = "a4pi2")]
    a: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    a4pi2: f64,
    #[arg(long, default_value_t = 1.5)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// `start:stop:step` or a comma list.
    #[arg(long, default_value = "0.01:0.06:0.005")]
    b_range: String,
    #[arg(long, default_value_t = 4.0)]
    snr: f64,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Maps a library error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Unstable(_) => EXIT_UNSTABLE,
        Error::Numeric(_) | Error::Filter { .. } => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let recorded: Vec<String> = argv.iter().skip(1).map(|s| s.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, recorded) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Unstable(_) = &e {
                eprintln!("  reduce --dt or pass --force-unstable");
            }
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, argv: Vec<String>) -> Result<i32> {
    match cmd {
        Command::Gen(args) => cmd_gen(args),
        Command::Filter { method } => cmd_filter(method, argv),
        Command::Kernel(args) => cmd_kernel(args, argv),
        Command::Bench(args) => cmd_bench(args, argv),
        Command::Sweep(args) => cmd_sweep(args, argv),
        Command::Replay { manifest } => cmd_replay(&manifest),
    }
}

fn generate(kind: GenKind, n: Option<usize>, length: Option<f64>, amplitude: f64, beat: f64) -> Result<Signal> {
    match kind {
        GenKind::Step => gen_step(n.unwrap_or(1000)),
        GenKind::Trig => gen_trig(n.unwrap_or(2048), length.unwrap_or(2.0)),
        GenKind::Attcos => gen_attenuated_cosine(n.unwrap_or(1024), length.unwrap_or(20.0), amplitude),
        GenKind::EcgLike => gen_ecg_like(n.unwrap_or(2000), length.unwrap_or(10.0), beat),
    }
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let clean = generate(args.kind, args.n, args.length, args.amplitude, args.beat_period)?;
    let (u, seed) = match (args.snr, args.sigma) {
        (Some(snr), _) => (add_noise(&clean, &NoiseSpec::snr_db(snr, args.seed))?, Some(args.seed)),
        (None, Some(sigma)) => (add_noise(&clean, &NoiseSpec::sigma(sigma, args.seed))?, Some(args.seed)),
        (None, None) => (clean, None),
    };
    write_signal(&args.out, &u, args.kind.name(), seed)?;
    Ok(EXIT_OK)
}

fn new_manifest(command: &str, argv: Vec<String>, parameters: serde_json::Value) -> RunManifest {
    let mut m = RunManifest::new(command, argv, parameters);
    m.cwd = std::env::current_dir().ok().map(|p| p.display().to_string());
    m
}

fn finish(mut manifest: RunManifest, outputs: &[&Path], anchor: &Path) -> Result<i32> {
    manifest.outputs = outputs.iter().map(|p| FileDigest::of(p)).collect::<Result<_>>()?;
    manifest.write(&manifest_path(anchor))?;
    Ok(EXIT_OK)
}

fn cmd_filter(method: FilterMethod, argv: Vec<String>) -> Result<i32> {
    match method {
        FilterMethod::Fft { io, params } => {
            let u = read_signal(&io.input)?;
            let p = params.params()?;
            let out = filter_fft(&u, &p)?;
            write_signal(&io.out, &out, "fft", None)?;
            let mut m = new_manifest(
                "filter fft",
                argv,
                json!({
                    "a": p.a(), "a4pi2": p.a4pi2(), "b": p.b(), "lambda": p.lambda(), "t": p.t(),
                    "dx": u.dx(), "n": u.len(),
                }),
            );
            m.characteristic_frequencies = match characteristic_frequencies(&p) {
                Ok(cf) => Some(cf),
                Err(Error::NoAmplification) => None,
                Err(e) => return Err(e),
            };
            m.inputs.push(FileDigest::of(&io.input)?);
            finish(m, &[&io.out], &io.out)
        }
        FilterMethod::Fd(args) => {
            let u = read_signal(&args.io.input)?;
            let u = match args.dx {
                Some(dx) => Signal::new(u.samples().to_vec(), dx, u.x0())?,
                None => u,
            };
            let a = args.diffusion.a();
            let order = FractionalOrder::new(args.lambda)?;
            let steps = match (args.steps, args.time) {
                (Some(s), _) => s,
                (None, Some(t)) => FdConfig::steps_for(t, args.dt)?,
                (None, None) => 10,
            };
            let mut cfg = FdConfig::new(args.dt, steps, order)
                .with_mode(args.mode)
                .with_boundary(args.boundary)
                .allowing_unstable(args.force_unstable);
            if let Some(t) = args.truncation {
                cfg = cfg.with_truncation(t);
            }
            let run = filter_fd(&u, a, args.b, args.lambda, &cfg)?;
            if !run.stability.satisfied {
                eprintln!("warning: running outside the stability region ({})", run.stability);
            }
            write_signal(&args.io.out, &run.signal, "fd", None)?;
            let mut m = new_manifest(
                "filter fd",
                argv,
                json!({
                    "a": a,
                    "a4pi2": a * 4.0 * std::f64::consts::PI * std::f64::consts::PI,
                    "b": args.b,
                    "effective_b": run.effective_b,
                    "lambda": args.lambda,
                    "dx": u.dx(),
                    "n": u.len(),
                    "config": cfg,
                }),
            );
            m.stability = Some(run.stability);
            m.inputs.push(FileDigest::of(&args.io.input)?);
            finish(m, &[&args.io.out], &args.io.out)
        }
        FilterMethod::Savgol {
            io,
            window,
            order,
            boundary,
        } => {
            let spec = SavGolSpec::new(window, order)?;
            let u = read_signal(&io.input)?;
            let out = filter_savgol(&u, &spec, boundary)?;
            write_signal(&io.out, &out, "savgol", None)?;
            let mut m = new_manifest(
                "filter savgol",
                argv,
                json!({ "spec": spec, "boundary": boundary, "dx": u.dx(), "n": u.len() }),
            );
            m.inputs.push(FileDigest::of(&io.input)?);
            finish(m, &[&io.out], &io.out)
        }
    }
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_kernel(args: KernelArgs, argv: Vec<String>) -> Result<i32> {
    let p = args.params.params()?;
    let k = kernel_physical(&p, args.n, args.extent)?;
    let gain_out = args
        .gain_out
        .clone()
        .unwrap_or_else(|| suffixed(&args.out, ".gain.csv"));
    write_columns(&args.out, ("x", "K"), k.xs().zip(k.samples().iter().copied()))?;
    write_columns(
        &gain_out,
        ("xi", "gain"),
        kernel_gain_curve(&p, args.n, args.extent).into_iter(),
    )?;
    let mut m = new_manifest(
        "kernel",
        argv,
        json!({
            "a": p.a(), "a4pi2": p.a4pi2(), "b": p.b(), "lambda": p.lambda(), "t": p.t(),
            "n": args.n, "extent": args.extent,
        }),
    );
    m.characteristic_frequencies = characteristic_frequencies(&p).ok();
    finish(m, &[&args.out, &gain_out], &args.out)
}

/// Parses `start:stop:step` (inclusive of `stop` up to rounding) or a comma
/// separated list.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| Error::InvalidArgument(format!("`{}` in range `{s}`: {e}", t.trim())))
    };
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "range `{s}` needs finite bounds and step > 0"
                )));
            }
            if stop < start {
                Vec::new()
            } else {
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|i| start + i as f64 * step).collect()
            }
        }
        [_] if !s.trim().is_empty() => s.split(',').map(num).collect::<Result<Vec<_>>>()?,
        [_] => Vec::new(),
        _ => return Err(Error::InvalidArgument(format!("malformed range `{s}`"))),
    };
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("range `{s}` is empty")));
    }
    Ok(values)
}

fn kv_pairs(body: &str) -> Result<Vec<(String, String)>> {
    body.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| match p.split_once('=') {
            Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
            None => Err(Error::InvalidArgument(format!("expected key=value, found `{p}`"))),
        })
        .collect()
}

/// Parses a filter spec such as `fft:a4pi2=0.01,b=0.03,lambda=1.5`.
pub fn parse_filter_spec(spec: &str) -> Result<FilterConfig> {
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    let pairs = kv_pairs(body)?;
    let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let num = |key: &str| -> Result<Option<f64>> {
        get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("{key}={v}: {e}")))
            })
            .transpose()
    };
    let req = |key: &str| -> Result<f64> {
        num(key)?.ok_or_else(|| Error::InvalidArgument(format!("filter `{spec}` is missing `{key}`")))
    };
    let check_keys = |allowed: &[&str]| -> Result<()> {
        match pairs.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            Some((k, _)) => Err(Error::InvalidArgument(format!("unknown key `{k}` in filter `{spec}`"))),
            None => Ok(()),
        }
    };
    let diffusion = || -> Result<f64> {
        match (num("a")?, num("a4pi2")?) {
            (Some(a), None) => Ok(a),
            (None, Some(s)) => Ok(s / (4.0 * std::f64::consts::PI * std::f64::consts::PI)),
            _ => Err(Error::InvalidArgument(format!(
                "filter `{spec}` needs exactly one of a, a4pi2"
            ))),
        }
    };
    match kind.trim() {
        "identity" => {
            check_keys(&[])?;
            Ok(FilterConfig::Identity)
        }
        "fft" => {
            check_keys(&["a", "a4pi2", "b", "lambda", "t"])?;
            let (b, lambda, t) = (req("b")?, req("lambda")?, num("t")?.unwrap_or(1.0));
            let params = match num("a4pi2")? {
                Some(s) if get("a").is_none() => FilterParams::from_a4pi2(s, b, lambda, t)?,
                _ => FilterParams::new(diffusion()?, b, lambda, t)?,
            };
            Ok(FilterConfig::Fft { params })
        }
        "savgol" => {
            check_keys(&["window", "order", "boundary"])?;
            let window = get("window").map(str::parse::<usize>).transpose();
            let order = get("order").map(str::parse::<usize>).transpose();
            let (Ok(window), Ok(order)) = (window, order) else {
                return Err(Error::InvalidArgument(format!("bad integer in filter `{spec}`")));
            };
            let spec = SavGolSpec::new(window.unwrap_or(11), order.unwrap_or(3))?;
            let boundary = get("boundary").map(str::parse).transpose()?.unwrap_or_default();
            Ok(FilterConfig::Savgol { spec, boundary })
        }
        "fd" => {
            check_keys(&[
                "a", "a4pi2", "b", "lambda", "dt", "steps", "time", "mode", "boundary", "A", "force",
            ])?;
            let (a, b, lambda, dt) = (diffusion()?, req("b")?, req("lambda")?, req("dt")?);
            let order = FractionalOrder::new(lambda)?;
            let steps = match (get("steps"), num("time")?) {
                (Some(s), None) => s
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidArgument(format!("steps={s}: {e}")))?,
                (None, Some(t)) => FdConfig::steps_for(t, dt)?,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "filter `{spec}` needs exactly one of steps, time"
                    )))
                }
            };
            let mut cfg = FdConfig::new(dt, steps, order);
            if let Some(m) = get("mode") {
                cfg = cfg.with_mode(m.parse()?);
            }
            if let Some(bd) = get("boundary") {
                cfg = cfg.with_boundary(bd.parse()?);
            }
            if let Some(n) = get("A") {
                let n = n
                    .parse::<usize>()
                    .map_err(|e| Error::InvalidArgument(format!("A={n}: {e}")))?;
                cfg = cfg.with_truncation(n);
            }
            cfg = cfg.allowing_unstable(matches!(get("force"), Some("true" | "1")));
            Ok(FilterConfig::Fd {
                a,
                b,
                lambda,
                config: cfg,
            })
        }
        other => Err(Error::InvalidArgument(format!("unknown filter kind `{other}`"))),
    }
}

fn cmd_bench(args: BenchArgs, argv: Vec<String>) -> Result<i32> {
    let grid = parse_range(&args.grid)?;
    let filters = if args.filters.is_empty() {
        vec![
            FilterConfig::Fft {
                params: FilterParams::from_a4pi2(0.01, 0.03, 1.5, 1.0)?,
            },
            FilterConfig::savgol_default(),
        ]
    } else {
        args.filters
            .iter()
            .map(|s| parse_filter_spec(s))
            .collect::<Result<Vec<_>>>()?
    };
    let (u0, source, inputs) = args.source.load()?;
    let report = run_ensemble(&u0, &filters, &grid, args.n, args.seed)?;
    fs::write(&args.out, serde_json::to_string_pretty(&report)? + "\n")?;

    let curves = suffixed(&args.out, ".curves.csv");
    let mut csv = String::from("filter,input_snr_db,mean_output_snr_db,mean_mse\n");
    for c in &report.filters {
        for (g, snr_in) in report.input_snr_grid.iter().enumerate() {
            csv.push_str(&format!(
                "\"{}\",{:.16e},{:.16e},{:.16e}\n",
                c.label, snr_in, c.mean_snr_db[g], c.mean_mse[g]
            ));
        }
    }
    fs::write(&curves, csv)?;

    let mut m = new_manifest(
        "bench",
        argv,
        json!({ "source": source, "grid": grid, "n": args.n, "filters": filters }),
    );
    m.seed = Some(args.seed);
    m.inputs = inputs;
    finish(m, &[&args.out, &curves], &args.out)
}

fn cmd_sweep(args: SweepArgs, argv: Vec<String>) -> Result<i32> {
    let b_grid = parse_range(&args.b_range)?;
    let a = args
        .a
        .unwrap_or(args.a4pi2 / (4.0 * std::f64::consts::PI * std::f64::consts::PI));
    let (u0, source, inputs) = args.source.load()?;
    let result = sweep_b(&u0, a, args.lambda, args.t, &b_grid, args.snr, args.n, args.seed)?;
    fs::write(&args.out, serde_json::to_string_pretty(&result)? + "\n")?;
    let mut m = new_manifest(
        "sweep",
        argv,
        json!({
            "source": source,
            "a": a,
            "a4pi2": a * 4.0 * std::f64::consts::PI * std::f64::consts::PI,
            "lambda": args.lambda,
            "t": args.t,
            "b_grid": b_grid,
            "snr_db": args.snr,
            "n": args.n,
        }),
    );
    m.seed = Some(args.seed);
    m.inputs = inputs;
    finish(m, &[&args.out], &args.out)
}

fn cmd_replay(path: &Path) -> Result<i32> {
    let manifest = RunManifest::read(path)?;
    if manifest.argv.first().map(String::as_str) == Some("replay") {
        return Err(Error::InvalidArgument("manifest records a replay".into()));
    }
    if let Some(dir) = &manifest.cwd {
        std::env::set_current_dir(dir)?;
    }
    for input in &manifest.inputs {
        let now = FileDigest::of(Path::new(&input.path))?;
        if now.sha256 != input.sha256 {
            return Err(Error::InvalidArgument(format!(
                "input `{}` changed since the recorded run",
                input.path
            )));
        }
    }
    let argv = std::iter::once("fracfilt".to_string()).chain(manifest.argv.iter().cloned());
    let code = run(argv);
    if code != EXIT_OK {
        return Ok(code);
    }
    let mut mismatched = Vec::new();
    for out in &manifest.outputs {
        if FileDigest::of(Path::new(&out.path))?.sha256 != out.sha256 {
            mismatched.push(out.path.clone());
        }
    }
    if mismatched.is_empty() {
        println!(
            "replayed `{}`: {} output(s) identical",
            manifest.command,
            manifest.outputs.len()
        );
        Ok(EXIT_OK)
    } else {
        Err(Error::Numeric(format!(
            "outputs differ from the recorded run: {}",
            mismatched.join(", ")
        )))
    }
}
