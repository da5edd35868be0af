//! Command-line interface: single realizations (`realize`), the Monte
//! Carlo experiment (`montecarlo`), and synthetic data generation
//! (`gendata`).
//!
//! Exit codes: 0 on success, 2 when the solver finds no real candidate (or
//! otherwise fails on a valid problem), 3 on usage or input errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;
use num_complex::Complex64;

use crate::baselines::{npf, tsd};
use crate::datagen::{add_noise, montecarlo, MonteCarloConfig, SgorMode, StateSpaceModel};
use crate::error::{Error, Result};
use crate::mepsolve::realize;
use crate::report::{
    summary_csv, trials_to_csv, Cplx, ProblemSpec, RunReport,
};
use crate::signalmodel::{FixedPoleSet, Signal};

#[derive(Debug, Parser)]
#[command(name = "realize", version, about = "Globally optimal least-squares realization of autonomous LTI models with a-priori fixed poles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a model from a data file and print a report.
    Realize(RealizeArgs),
    /// Run the seeded Monte Carlo comparison described by a config file.
    Montecarlo(MontecarloArgs),
    /// Generate synthetic output data from a pole specification.
    Gendata(GendataArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Globally optimal realization (eigenvalue-based).
    Gor,
    /// Naive prefilter heuristic.
    Npf,
    /// Time-series deflation heuristic.
    Tsd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct RealizeArgs {
    /// Data file: one sample per line, `#` starts a comment.
    pub data: PathBuf,
    /// Model order n.
    #[arg(long)]
    pub order: usize,
    /// A-priori fixed pole `re` or `re,im` (repeatable; a complex pole
    /// implies its conjugate).
    #[arg(long = "fixed-pole", allow_hyphen_values = true)]
    pub fixed_poles: Vec<String>,
    #[arg(long, value_enum, default_value_t = Method::Gor)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Include every real critical point in the report, not just the
    /// global minimizer.
    #[arg(long)]
    pub all_candidates: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include wall-clock timings (breaks byte-identical reruns).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct MontecarloArgs {
    /// Config file with `key = value` lines; see `montecarlo --help-config`.
    pub config: PathBuf,
    /// Write the trial CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write per-noise-level quartile summaries to this file.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Include wall-clock timings (breaks byte-identical reruns).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct GendataArgs {
    /// Model pole `re` or `re,im` (repeatable; a complex pole implies its
    /// conjugate).
    #[arg(long = "pole", allow_hyphen_values = true, required = true)]
    pub poles: Vec<String>,
    /// Output matrix C, comma-separated (defaults to all ones).
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<String>,
    /// Initial state x0, comma-separated (defaults to all ones).
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Number of samples.
    #[arg(long)]
    pub samples: usize,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the data here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Run the parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Realize(args) => cmd_realize(&args),
        Command::Montecarlo(args) => cmd_montecarlo(&args),
        Command::Gendata(args) => cmd_gendata(&args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// 3 for usage/input problems, 2 for solver-side failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::DimensionMismatch(_) | Error::Io(_) => 3,
        _ => 2,
    }
}

pub fn cmd_realize(args: &RealizeArgs) -> Result<()> {
    let raw = fs::read(&args.data)?;
    let y = parse_data(&raw)?;
    let fixed = parse_pole_set(&args.fixed_poles)?;
    let problem = ProblemSpec {
        n_samples: y.len(),
        order: args.order,
        n_fixed: fixed.len(),
        fixed_poles: fixed.poles().iter().map(|p| Cplx::from(*p)).collect(),
    };
    let start = std::time::Instant::now();
    let mut report = match args.method {
        Method::Gor => {
            let res = realize(&y, args.order, &fixed)?;
            RunReport::from_realization(&raw, problem, &res, args.all_candidates)
        }
        Method::Npf => RunReport::from_baseline(&raw, problem, &npf(&y, args.order, &fixed)?),
        Method::Tsd => RunReport::from_baseline(&raw, problem, &tsd(&y, args.order, &fixed)?),
    };
    if args.timings {
        report.solve_time_s = Some(start.elapsed().as_secs_f64());
    }
    let text = match args.output {
        OutputFormat::Json => {
            let mut t = report.to_json();
            t.push('\n');
            t
        }
        OutputFormat::Csv => report.to_csv(),
    };
    write_output(args.out.as_deref(), &text)
}

pub fn cmd_montecarlo(args: &MontecarloArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)?;
    let cfg = parse_config(&text)?;
    let records = montecarlo(&cfg)?;
    write_output(args.out.as_deref(), &trials_to_csv(&records, args.timings))?;
    if let Some(path) = &args.summary {
        write_output(Some(path), &summary_csv(&records))?;
    }
    Ok(())
}

pub fn cmd_gendata(args: &GendataArgs) -> Result<()> {
    let poles = parse_pole_set(&args.poles)?;
    let n = poles.len();
    let ones = || vec![1.0; n];
    let c = args.c.as_deref().map(parse_floats).transpose()?.unwrap_or_else(ones);
    let x0 = args.x0.as_deref().map(parse_floats).transpose()?.unwrap_or_else(ones);
    let model = StateSpaceModel::from_poles(&poles, c, x0)?;
    let clean = model.simulate(args.samples)?;
    let noisy = add_noise(&clean, args.sigma, args.seed)?;
    let mut text = String::new();
    for v in noisy.values() {
        text.push_str(&v.to_string());
        text.push('\n');
    }
    write_output(args.out.as_deref(), &text)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parse a data file: one real per line, blank lines and `#` comments
/// ignored.
pub fn parse_data(raw: &[u8]) -> Result<Signal> {
    let text = std::str::from_utf8(raw)
        .map_err(|_| Error::InvalidInput("data file is not valid UTF-8".into()))?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let v: f64 = body.parse().map_err(|_| {
            Error::InvalidInput(format!("line {}: cannot parse '{body}' as a number", lineno + 1))
        })?;
        values.push(v);
    }
    Signal::new(values)
}

/// Parse one `re` or `re,im` pole token.
fn parse_pole(token: &str) -> Result<Complex64> {
    let parts: Vec<&str> = token.split(',').map(str::trim).collect();
    let bad = || Error::InvalidInput(format!("cannot parse pole '{token}' (use re or re,im)"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(re.parse().map_err(|_| bad())?, 0.0)),
        [re, im] => Ok(Complex64::new(
            re.parse().map_err(|_| bad())?,
            im.parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

/// Parse pole tokens, auto-completing conjugates of complex entries.
pub fn parse_pole_set(tokens: &[String]) -> Result<FixedPoleSet> {
    let mut poles: Vec<Complex64> = Vec::new();
    for t in tokens {
        for part in t.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            poles.push(parse_pole(part)?);
        }
    }
    let mut completed = Vec::new();
    let mut i = 0;
    while i < poles.len() {
        let p = poles[i];
        completed.push(p);
        if p.im != 0.0 {
            // pair with the next matching conjugate if the user listed it,
            // otherwise add it
            if let Some(j) = poles[i + 1..]
                .iter()
                .position(|q| (q - p.conj()).norm() <= 1e-12 * (1.0 + p.norm()))
            {
                completed.push(poles[i + 1 + j]);
                poles.remove(i + 1 + j);
            } else {
                completed.push(p.conj());
            }
        }
        i += 1;
    }
    FixedPoleSet::new(completed)
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("cannot parse '{t}' as a number")))
        })
        .collect()
}

/// Parse the Monte Carlo config: `key = value` lines, `#` comments.
///
/// Keys: `samples`, `order`, `trials`, `seed`, `sigmas` (comma list),
/// `poles` and `fixed` (`;`-separated `re` or `re,im`, conjugates
/// auto-completed), `c`, `x0` (comma lists, default all ones), `sgor`
/// (`grid` or `exact`), `grid_points`, `transform` (row-major, rows
/// `;`-separated).
pub fn parse_config(text: &str) -> Result<MonteCarloConfig> {
    let mut kv = std::collections::BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!("config line {}: expected key = value", lineno + 1))
        })?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let get = |k: &str| -> Result<&String> {
        kv.get(k)
            .ok_or_else(|| Error::InvalidInput(format!("config is missing '{k}'")))
    };
    let parse_usize = |k: &str| -> Result<usize> {
        get(k)?
            .parse()
            .map_err(|_| Error::InvalidInput(format!("config '{k}' is not an integer")))
    };

    let poles = parse_pole_set(&[get("poles")?.clone()])?;
    let n_state = poles.len();
    let c = match kv.get("c") {
        Some(s) => parse_floats(s)?,
        None => vec![1.0; n_state],
    };
    let x0 = match kv.get("x0") {
        Some(s) => parse_floats(s)?,
        None => vec![1.0; n_state],
    };
    let mut model = StateSpaceModel::from_poles(&poles, c, x0)?;
    if let Some(t) = kv.get("transform") {
        let rows: Vec<Vec<f64>> = t
            .split(';')
            .map(parse_floats)
            .collect::<Result<_>>()?;
        if rows.len() != n_state || rows.iter().any(|r| r.len() != n_state) {
            return Err(Error::InvalidInput(format!(
                "transform must be {n_state}x{n_state}"
            )));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let t = Array2::from_shape_vec((n_state, n_state), flat)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        model = model.transform(&t)?;
    }
    let fixed = match kv.get("fixed") {
        Some(s) => parse_pole_set(&[s.clone()])?,
        None => FixedPoleSet::empty(),
    };
    let sgor = match kv.get("sgor").map(String::as_str) {
        None | Some("grid") => SgorMode::Grid {
            points_per_dim: match kv.get("grid_points") {
                Some(s) => s.parse().map_err(|_| {
                    Error::InvalidInput("config 'grid_points' is not an integer".into())
                })?,
                None => 9,
            },
        },
        Some("exact") => SgorMode::Exact,
        Some(other) => {
            return Err(Error::InvalidInput(format!(
                "config 'sgor' must be grid or exact, got '{other}'"
            )))
        }
    };
    let sigmas = parse_floats(get("sigmas")?)?;
    let cfg = MonteCarloConfig {
        model,
        nsamp: parse_usize("samples")?,
        sigmas,
        trials: parse_usize("trials")?,
        base_seed: get("seed")?
            .parse()
            .map_err(|_| Error::InvalidInput("config 'seed' is not an integer".into()))?,
        order: parse_usize("order")?,
        fixed,
        sgor,
    };
    cfg.validate()?;
    Ok(cfg)
}
