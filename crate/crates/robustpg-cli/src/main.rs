//! Command-line front end for the robust public-good toolkit.
//!
//! Six verbs cover the workflow end to end: `classify` labels a mean
//! pair with its solution family, `solve` computes mechanism constants
//! and the revenue guarantee, `eval` evaluates a solved mechanism at a
//! reported value profile, `sample` draws profiles from the worst-case
//! joint distribution as CSV, `verify` runs the full saddle-point
//! verification battery, and `sweep` tabulates labels and guarantees
//! over a grid of means. All file IO lives here; the library stays pure.
//!
//! Machine-readable output (JSON documents, CSV tables) goes to standard
//! output or `--out`; human-readable summaries go to standard error.
//! Every JSON document carries a `schema_version` field, floats are
//! written with enough digits to round-trip exactly, and CSV always uses
//! a `.` decimal separator regardless of locale.
//!
//! Exit codes are a stable contract:
//!
//! ```text
//! 0  success (for `verify`: every check passed)
//! 1  verification ran and at least one check failed
//! 2  domain error (invalid means, wrong profile length, bad flags)
//! 3  the parameter system has no solution for these inputs
//! 4  file or serialization error
//! ```
//!
//! All randomness is seed-controlled; the seed in effect is echoed on
//! standard error so every report can be reproduced bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use robustpg::error::Error;
use robustpg::params::{
    solve, solve_deterministic, solve_excludable, solve_nagent, SolvedParams,
};
use robustpg::regions::{classify, MeanVector};
use robustpg::verify::{verify_saddle, GridSpec};
use robustpg::{Mechanism, SamplerState, WorstCaseDistribution};
use serde::{Deserialize, Serialize};

/// Version stamp on every JSON document the binary reads or writes.
const SCHEMA_VERSION: u32 = 1;

/// Seed used when `--seed` is not given; echoed on standard error.
const DEFAULT_SEED: u64 = 0;

/// Robust public-good mechanisms: solve, evaluate, sample, verify.
#[derive(Parser)]
#[command(name = "robustpg", version, about, max_term_width = 80)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Label a pair of means with its solution family
    Classify(ClassifyArgs),
    /// Compute mechanism constants and the revenue guarantee
    Solve(SolveArgs),
    /// Evaluate allocation and payments at a reported profile
    Eval(EvalArgs),
    /// Draw value profiles from the worst-case distribution as CSV
    Sample(SampleArgs),
    /// Run the saddle-point verification battery
    Verify(VerifyArgs),
    /// Tabulate case labels and guarantees over a grid of means as CSV
    Sweep(SweepArgs),
}

/// Mechanism family to solve within.
#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Two agents, randomized provision (the general case)
    Randomized,
    /// Two agents, deterministic provision
    Deterministic,
    /// Per-agent posted prices with exclusion
    Excludable,
    /// N symmetric agents with a common mean
    Nagent,
}

#[derive(Args)]
struct ClassifyArgs {
    /// First agent's mean
    #[arg(long)]
    m1: f64,
    /// Second agent's mean
    #[arg(long)]
    m2: f64,
}

#[derive(Args)]
struct SolveArgs {
    /// Agent mean (repeat once per agent; nagent mode takes one shared mean)
    #[arg(long = "m", required = true)]
    means: Vec<f64>,
    /// Mechanism family
    #[arg(long, value_enum, default_value = "randomized")]
    mode: Mode,
    /// Number of agents (nagent mode only)
    #[arg(long)]
    n: Option<usize>,
    /// Write the JSON document here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// JSON document produced by `solve`
    #[arg(long)]
    params: PathBuf,
    /// Reported value (repeat once per agent)
    #[arg(long = "v", required = true)]
    values: Vec<f64>,
    /// Write the JSON document here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    /// JSON document produced by `solve`
    #[arg(long)]
    params: PathBuf,
    /// Number of profiles to draw
    #[arg(long, default_value_t = 1000)]
    n: u64,
    /// Random seed (the seed in effect is echoed on standard error)
    #[arg(long)]
    seed: Option<u64>,
    /// Write the CSV here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Agent mean (repeat once per agent); or pass --params instead
    #[arg(long = "m", conflicts_with = "params")]
    means: Vec<f64>,
    /// Verify a previously solved (possibly hand-edited) JSON document
    #[arg(long)]
    params: Option<PathBuf>,
    /// Mechanism family for --m
    #[arg(long, value_enum, default_value = "randomized")]
    mode: Mode,
    /// Number of agents (nagent mode only)
    #[arg(long)]
    n: Option<usize>,
    /// Grid points per axis for the feasibility/slackness/LP scans
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Monte-Carlo draws
    #[arg(long, default_value_t = 1_000_000)]
    mc: usize,
    /// Random seed (the seed in effect is echoed on standard error)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (results are identical for any worker count)
    #[arg(long)]
    workers: Option<usize>,
    /// Write the JSON report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// First mean's range as start:stop:count (count ≥ 1, inclusive)
    #[arg(long = "m1-range")]
    m1_range: Range,
    /// Second mean's range; omit to sweep the diagonal m2 = m1
    #[arg(long = "m2-range")]
    m2_range: Option<Range>,
    /// Mechanism family (two-agent families only)
    #[arg(long, value_enum, default_value = "randomized")]
    mode: Mode,
    /// Worker threads (results are identical for any worker count)
    #[arg(long)]
    workers: Option<usize>,
    /// Write the CSV here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Inclusive `start:stop:count` range of evenly spaced values.
#[derive(Clone, Copy)]
struct Range {
    start: f64,
    stop: f64,
    count: usize,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, k] = parts.as_slice() else {
            return Err(format!("expected start:stop:count, got `{s}`"));
        };
        let start: f64 = a.parse().map_err(|e| format!("bad start `{a}`: {e}"))?;
        let stop: f64 = b.parse().map_err(|e| format!("bad stop `{b}`: {e}"))?;
        let count: usize = k.parse().map_err(|e| format!("bad count `{k}`: {e}"))?;
        if count == 0 {
            return Err("count must be at least 1".into());
        }
        if count == 1 && start != stop {
            return Err("count 1 requires start = stop".into());
        }
        if !(start.is_finite() && stop.is_finite() && stop >= start) {
            return Err(format!("need finite start ≤ stop, got `{s}`"));
        }
        Ok(Range { start, stop, count })
    }
}

impl Range {
    fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + i as f64 * step
                }
            })
            .collect()
    }
}

/// Error currency of the binary: a message plus the exit code it maps to.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn io(message: impl Into<String>) -> Self {
        CliError {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Domain(_) | Error::Dimension { .. } | Error::Degenerate(_)
            | Error::Unsupported(_) => 2,
            Error::NoSolution(_) | Error::Bracket(_) | Error::NonConvergence(_)
            | Error::Quadrature(_) => 3,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// On-disk form of a solved instance: what `solve` writes and `eval`,
/// `sample`, and `verify --params` read back.
#[derive(Serialize, Deserialize)]
struct ParamsDoc {
    schema_version: u32,
    solved: SolvedParams,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Classify(args) => run_classify(args),
        Cmd::Solve(args) => run_solve(args),
        Cmd::Eval(args) => run_eval(args),
        Cmd::Sample(args) => run_sample(args),
        Cmd::Verify(args) => run_verify(args),
        Cmd::Sweep(args) => run_sweep(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Writes `text` to `out` if given, else to standard output.
fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::io(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn read_params(path: &PathBuf) -> Result<SolvedParams, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    let doc: ParamsDoc = serde_json::from_str(&text)
        .map_err(|e| CliError::io(format!("{} is not a params document: {e}", path.display())))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(CliError::io(format!(
            "{}: unsupported schema_version {} (this binary reads {SCHEMA_VERSION})",
            path.display(),
            doc.schema_version
        )));
    }
    Ok(doc.solved)
}

/// Exactly 17 significant digits — every f64 round-trips from this form.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Runs `f` on a pool of `workers` threads if given, else inline.
/// Work is split identically either way, so results never depend on it.
fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(CliError {
            code: 2,
            message: "--workers must be at least 1".into(),
        }),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::io(format!("cannot build worker pool: {e}")))
            .map(|pool| pool.install(f)),
    }
}

fn run_classify(args: ClassifyArgs) -> Result<u8, CliError> {
    let means = MeanVector::pair(args.m1, args.m2)?;
    let label = classify(&means)?;
    let (hi, lo, swapped) = means.ordered_two()?;

    #[derive(Serialize)]
    struct ClassifyDoc {
        schema_version: u32,
        means: [f64; 2],
        /// Means sorted descending — the order the solver works in.
        sorted_means: [f64; 2],
        /// True when the agents were relabelled to sort the means.
        swapped: bool,
        case: String,
        boundary: Option<String>,
    }

    let doc = ClassifyDoc {
        schema_version: SCHEMA_VERSION,
        means: [args.m1, args.m2],
        sorted_means: [hi, lo],
        swapped,
        case: label.case.to_string(),
        boundary: label.boundary.map(|b| b.to_string()),
    };
    emit(&None, &to_json(&doc)?)?;
    eprintln!("({}, {}) → {label}", args.m1, args.m2);
    Ok(0)
}

/// Dispatches to the family solver selected by `--mode`.
fn solve_instance(
    mode: Mode,
    means: &[f64],
    n: Option<usize>,
) -> Result<SolvedParams, CliError> {
    match mode {
        Mode::Randomized => {
            let mv = MeanVector::new(means.to_vec())?;
            Ok(solve(&mv)?)
        }
        Mode::Deterministic => {
            let mv = MeanVector::new(means.to_vec())?;
            Ok(solve_deterministic(&mv)?)
        }
        Mode::Excludable => {
            let mv = MeanVector::new(means.to_vec())?;
            Ok(solve_excludable(&mv)?)
        }
        Mode::Nagent => {
            let &[m] = means else {
                return Err(CliError {
                    code: 2,
                    message: format!(
                        "nagent mode takes exactly one shared --m, got {}",
                        means.len()
                    ),
                });
            };
            let n = n.ok_or(CliError {
                code: 2,
                message: "nagent mode requires --n".into(),
            })?;
            Ok(solve_nagent(n, m)?)
        }
    }
}

fn run_solve(args: SolveArgs) -> Result<u8, CliError> {
    if args.n.is_some() && args.mode != Mode::Nagent {
        return Err(CliError {
            code: 2,
            message: "--n only applies to --mode nagent".into(),
        });
    }
    let solved = solve_instance(args.mode, &args.means, args.n)?;
    let doc = ParamsDoc {
        schema_version: SCHEMA_VERSION,
        solved,
    };
    emit(&args.out, &to_json(&doc)?)?;
    let s = &doc.solved;
    let case = s
        .label
        .map(|l| l.to_string())
        .unwrap_or_else(|| format!("{}-agent", s.means.len()));
    eprintln!(
        "case {case}: guarantee {:.12}, residual {:.2e}{}",
        s.guarantee(),
        s.residual,
        if s.degenerate { " (degenerate)" } else { "" }
    );
    Ok(0)
}

fn run_eval(args: EvalArgs) -> Result<u8, CliError> {
    let solved = read_params(&args.params)?;
    let mech = Mechanism::from_solved(&solved);
    let allocation = mech.allocation(&args.values)?;
    let payments = mech.payments(&args.values)?;

    #[derive(Serialize)]
    struct EvalDoc {
        schema_version: u32,
        values: Vec<f64>,
        /// Per-agent provision probability (identical entries unless the
        /// mechanism excludes agents individually).
        allocation: Vec<f64>,
        payments: Vec<f64>,
        total_payment: f64,
    }

    let doc = EvalDoc {
        schema_version: SCHEMA_VERSION,
        values: args.values.clone(),
        total_payment: payments.iter().sum(),
        allocation,
        payments,
    };
    emit(&args.out, &to_json(&doc)?)?;
    Ok(0)
}

fn run_sample(args: SampleArgs) -> Result<u8, CliError> {
    let solved = read_params(&args.params)?;
    let dist = WorstCaseDistribution::from_solved(&solved)?;
    let n_agents = dist.n_agents();
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    eprintln!("seed: {seed}");

    let mut rng = SamplerState::new(seed).rng();
    let mut buf = vec![0.0; n_agents];
    let mut csv = String::new();
    for i in 0..n_agents {
        if i > 0 {
            csv.push(',');
        }
        let _ = write!(csv, "v{}", i + 1);
    }
    csv.push('\n');
    for _ in 0..args.n {
        dist.sample_into(&mut rng, &mut buf);
        for (i, v) in buf.iter().enumerate() {
            if i > 0 {
                csv.push(',');
            }
            csv.push_str(&fmt17(*v));
        }
        csv.push('\n');
    }
    emit(&args.out, &csv)?;
    Ok(0)
}

fn run_verify(args: VerifyArgs) -> Result<u8, CliError> {
    let solved = match &args.params {
        Some(path) => read_params(path)?,
        None => {
            if args.means.is_empty() {
                return Err(CliError {
                    code: 2,
                    message: "pass --m means or a --params document".into(),
                });
            }
            solve_instance(args.mode, &args.means, args.n)?
        }
    };
    if args.grid < 2 {
        return Err(CliError {
            code: 2,
            message: "--grid must be at least 2 points per axis".into(),
        });
    }
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    eprintln!("seed: {seed}");
    let grid = GridSpec::new(args.grid);
    let report = with_workers(args.workers, || {
        verify_saddle(&solved, &grid, args.mc, SamplerState::new(seed))
    })??;
    emit(&args.out, &to_json(&report)?)?;
    eprintln!("{}", report.summary());
    Ok(if report.all_pass { 0 } else { 1 })
}

fn run_sweep(args: SweepArgs) -> Result<u8, CliError> {
    if !matches!(args.mode, Mode::Randomized | Mode::Deterministic) {
        return Err(CliError {
            code: 2,
            message: "sweep covers the two-agent families: randomized or deterministic".into(),
        });
    }
    let m1s = args.m1_range.values();
    let cells: Vec<(f64, f64)> = match &args.m2_range {
        Some(r) => {
            let m2s = r.values();
            m1s.iter()
                .flat_map(|&a| m2s.iter().map(move |&b| (a, b)))
                .collect()
        }
        None => m1s.iter().map(|&a| (a, a)).collect(),
    };

    let mode = args.mode;
    let rows: Vec<String> = with_workers(args.workers, || {
        use rayon::prelude::*;
        cells
            .par_iter()
            .map(|&(m1, m2)| {
                let label = MeanVector::pair(m1, m2)
                    .and_then(|mv| classify(&mv))
                    .map(|l| l.to_string())
                    .unwrap_or_else(|e| format!("ERROR({e})"));
                // cells where the solver degenerates keep their label and
                // record the guarantee as nan
                let guarantee = solve_instance(mode, &[m1, m2], None)
                    .map(|s| s.guarantee())
                    .unwrap_or(f64::NAN);
                format!("{},{},{},{}\n", fmt17(m1), fmt17(m2), label, fmt17(guarantee))
            })
            .collect()
    })?;

    let mut csv = String::from("m1,m2,case,guarantee\n");
    for row in rows {
        csv.push_str(&row);
    }
    emit(&args.out, &csv)?;
    eprintln!("swept {} cells", cells.len());
    Ok(0)
}
