//! Command-line surface.
//!
//! One command per process: `estimate` runs the certified estimator in one
//! of its four modes, `oracle mc` and `oracle exact` run the reference
//! oracles, `hitting` answers a single hitting-time query. Every command
//! emits one report on stdout; errors go to stderr with exit code 2 for
//! bad input and 3 for resource caps.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cover::cover_time;
use crate::error::{Error, Result};
use crate::estimate::{cover_return_time, Backend, Depth, EstimateRequest};
use crate::hitting::hitting_time_exact;
use crate::numeric::{decimal_str, parse_rat, Round, REPORT_DIGITS};
use crate::oracles::exact::oracle_exact;
use crate::oracles::mc::mc_cover_return;
use crate::report::{ExactOracleReport, HittingReport, McReport, Report};
use crate::subset::cover_return_subset;
use crate::tree::WeightedTree;
use crate::weighted::{cover_return_weighted, Units};

#[derive(Parser)]
#[command(
    name = "covertime",
    version,
    about = "Certified cover-time intervals for random walks on trees"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Deterministic estimate with a certified interval
    Estimate(EstimateArgs),
    /// Reference oracles (simulation and exact state-space solving)
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Exact expected hitting time between two vertices
    Hitting(HittingArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    CoverReturn,
    Cover,
    Subset,
    Weighted,
}

impl ModeArg {
    fn as_str(self) -> &'static str {
        match self {
            ModeArg::CoverReturn => "cover-return",
            ModeArg::Cover => "cover",
            ModeArg::Subset => "subset",
            ModeArg::Weighted => "weighted",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Rational,
    Float,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum UnitsArg {
    /// Steps of the conductance walk on the weighted tree
    Chain,
    /// Steps on the unit-resistor subdivision
    Subdivided,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Json,
    Text,
}

#[derive(Args)]
struct EstimateArgs {
    /// Tree file: one edge per line, `u v [resistance]`
    #[arg(long)]
    input: PathBuf,
    /// Start vertex label
    #[arg(long)]
    start: String,
    /// Relative error target (picks the truncation depth)
    #[arg(long)]
    epsilon: Option<String>,
    /// Explicit truncation depth (alternative to --epsilon)
    #[arg(long = "trunc-n")]
    trunc_n: Option<usize>,
    #[arg(long, value_enum, default_value = "cover-return")]
    mode: ModeArg,
    /// Target labels, one per line (subset mode)
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Time unit for weighted mode
    #[arg(long, value_enum, default_value = "chain")]
    units: UnitsArg,
    /// Arithmetic backend; default picks rational when the table is small
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Float mantissa bits (the built-in float backend is fixed at 53)
    #[arg(long)]
    precision: Option<u32>,
    #[arg(long, value_enum, default_value = "json")]
    output: OutputArg,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Monte Carlo cover-and-return estimate
    Mc(McArgs),
    /// Exact state-space oracle (small trees only)
    Exact(ExactArgs),
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    start: String,
    /// Number of independent walk episodes
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    start: String,
}

#[derive(Args)]
struct HittingArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
}

fn load_tree(path: &PathBuf) -> Result<WeightedTree> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    WeightedTree::parse(&text)
}

fn load_targets(tree: &WeightedTree, path: &PathBuf) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    let mut ids = Vec::new();
    for line in text.lines() {
        let label = line.trim();
        if label.is_empty() {
            continue;
        }
        let id = tree.vertex(label)?;
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    if ids.is_empty() {
        return Err(Error::input("targets file names no vertices"));
    }
    Ok(ids)
}

fn run_estimate(args: &EstimateArgs) -> Result<String> {
    let t0 = Instant::now();
    let tree = load_tree(&args.input)?;
    let start = tree.vertex(&args.start)?;
    let depth = match (&args.epsilon, args.trunc_n) {
        (Some(eps), None) => {
            let eps = parse_rat(eps)?;
            if eps <= crate::numeric::Rat::default() {
                return Err(Error::input("epsilon must be positive"));
            }
            Depth::Epsilon(eps)
        }
        (None, Some(n)) => Depth::Explicit(n),
        _ => {
            return Err(Error::input(
                "provide exactly one of --epsilon and --trunc-n",
            ))
        }
    };
    if let Some(bits) = args.precision {
        if bits != 53 {
            return Err(Error::input(
                "the float backend runs at fixed 53-bit precision; \
                 use --backend rational for exact certificates",
            ));
        }
    }
    let req = EstimateRequest {
        depth,
        backend: args.backend.map(|b| match b {
            BackendArg::Rational => Backend::Rational,
            BackendArg::Float => Backend::Float,
        }),
        ctx: Default::default(),
    };
    let outcome = match args.mode {
        ModeArg::CoverReturn => cover_return_time(&tree, start, &req)?,
        ModeArg::Cover => cover_time(&tree, start, &req)?,
        ModeArg::Subset => {
            let path = args.targets.as_ref().ok_or_else(|| {
                Error::input("subset mode needs --targets (one label per line)")
            })?;
            let targets = load_targets(&tree, path)?;
            cover_return_subset(&tree, start, &targets, &req)?
        }
        ModeArg::Weighted => {
            let units = match args.units {
                UnitsArg::Chain => Units::ChainSteps,
                UnitsArg::Subdivided => Units::SubdividedSteps,
            };
            cover_return_weighted(&tree, start, units, &req)?
        }
    };
    let report = Report::from_outcome(
        args.mode.as_str(),
        &args.start,
        &outcome,
        t0.elapsed().as_millis() as u64,
    );
    Ok(match args.output {
        OutputArg::Json => report.to_json(),
        OutputArg::Text => report.render_text().trim_end().to_string(),
    })
}

fn run_oracle(cmd: &OracleCmd) -> Result<String> {
    match cmd {
        OracleCmd::Mc(args) => {
            let t0 = Instant::now();
            let tree = load_tree(&args.input)?;
            let start = tree.vertex(&args.start)?;
            let r = mc_cover_return(&tree, start, args.samples, args.seed);
            let report = McReport {
                mode: "oracle-mc".to_string(),
                n: tree.n(),
                start: args.start.clone(),
                samples: r.samples,
                mean: r.mean,
                std_dev: r.std_dev,
                half_width_99: r.half_width,
                seed: r.seed,
                wallclock_ms: t0.elapsed().as_millis() as u64,
            };
            Ok(serde_json::to_string(&report).expect("report serializes"))
        }
        OracleCmd::Exact(args) => {
            let t0 = Instant::now();
            let tree = load_tree(&args.input)?;
            let start = tree.vertex(&args.start)?;
            let r = oracle_exact(&tree, start)?;
            let report = ExactOracleReport::new(
                tree.n(),
                &args.start,
                &r.cover_return,
                &r.cover,
                t0.elapsed().as_millis() as u64,
            );
            Ok(serde_json::to_string(&report).expect("report serializes"))
        }
    }
}

fn run_hitting(args: &HittingArgs) -> Result<String> {
    let t0 = Instant::now();
    let tree = load_tree(&args.input)?;
    let from = tree.vertex(&args.from)?;
    let to = tree.vertex(&args.to)?;
    let h = hitting_time_exact(&tree, from, to)?;
    let (value, exact) = decimal_str(&h, REPORT_DIGITS, Round::Down);
    let report = HittingReport {
        mode: "hitting".to_string(),
        n: tree.n(),
        from: args.from.clone(),
        to: args.to.clone(),
        value,
        exact,
        wallclock_ms: t0.elapsed().as_millis() as u64,
    };
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

fn dispatch(cli: &Cli) -> Result<String> {
    match &cli.cmd {
        Cmd::Estimate(args) => run_estimate(args),
        Cmd::Oracle(cmd) => run_oracle(cmd),
        Cmd::Hitting(args) => run_hitting(args),
    }
}

/// Entry point for the `covertime` binary; returns the process exit code.
pub fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version land here too; clap picks the right code
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            println!("{out}");
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
