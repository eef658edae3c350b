use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use randsld::{parse_program, parse_query, solve, Limits, Probability, SplitMix64, Strategy};
use randsld_cli::analyze::{analyze, AnalyzeParams};
use randsld_cli::bench::{
    gnuplot_script, run_bench, summarize, write_csv, BenchConfig, BenchError, Benchmark, StrategyKind,
};
use randsld_cli::config::ConfigFile;
use randsld_cli::simulate::{simulate_chain, ChainKind, Quantity, SimParams};
use serde_json::json;

const KEYS: &[&str] = &[
    "p-cont",
    "p-steady",
    "p-drop",
    "goal-length",
    "target-value",
    "trials",
    "seed",
    "max-steps",
    "max-depth",
    "out",
    "strategy",
    "commands",
    "count-inclusive",
    "gnuplot",
    "r",
    "alpha",
    "i",
    "l",
    "l-max",
    "chain",
    "quantity",
    "step-cap",
    "depth-cap",
    "program",
    "query",
    "max-solutions",
];

const BENCH_HELP: &str = "\
Columns: run_id,benchmark,strategy,p_cont,p_steady,p_drop,goal,iterations,results,steps,truncated,seed

  iterations  query restarts, including the one that produced the target
  results     solutions emitted strictly before the target (with --count-inclusive, including it)
  steps       goal reductions over all iterations of the trial
  truncated   the step or depth limit ended the trial before the target appeared
  seed        the per-trial seed, derived from --seed and run_id by a SplitMix64 finalizer mix";

#[derive(Parser)]
#[command(
    name = "randsld",
    version,
    about = "Randomized SLD resolution: benchmarks, chain simulations and analytic reports"
)]
struct Cli {
    /// Flat `key = value` file with the same keys as the long flags. Flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form expectations and hitting times with validity verdicts, as JSON.
    Analyze(AnalyzeArgs),
    /// Monte Carlo or exact chain quantities next to their closed forms, as JSON.
    SimulateChain(SimArgs),
    /// Runs one query against a program file and prints its solutions as JSON.
    Run(RunArgs),
    /// Generator benchmarks, one CSV row per trial.
    Bench {
        #[command(subcommand)]
        which: BenchCommand,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Re-run `t(X)` until X is the list of `goal-length` copies of `second`.
    #[command(after_help = BENCH_HELP)]
    Commands(BenchArgs),
    /// Re-run `expr(X)` until X evaluates to `target-value`.
    #[command(after_help = BENCH_HELP)]
    Expr(BenchArgs),
}

#[derive(Args)]
struct Output {
    /// Output file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    strategy: Option<StrategyKind>,
    /// Guard of the recursive clause.
    #[arg(long)]
    p_cont: Option<f64>,
    /// Guard of the other clauses.
    #[arg(long)]
    p_steady: Option<f64>,
    #[arg(long)]
    p_drop: Option<f64>,
    #[arg(long)]
    goal_length: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    target_value: Option<i64>,
    /// Number of command facts.
    #[arg(long)]
    commands: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Goal reductions per trial, over all iterations.
    #[arg(long)]
    max_steps: Option<u64>,
    /// Depth bound for a single derivation.
    #[arg(long)]
    max_depth: Option<u64>,
    /// Count the target solution in `results`.
    #[arg(long)]
    count_inclusive: bool,
    /// Also write a gnuplot script plotting the CSV.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    p_steady: Option<f64>,
    #[arg(long)]
    p_cont: Option<f64>,
    #[arg(long)]
    p_drop: Option<f64>,
    /// Block letters, comma separated.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<usize>>,
    #[arg(long)]
    i: Option<usize>,
    #[arg(long)]
    l_max: Option<usize>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, value_enum)]
    chain: Option<ChainKind>,
    #[arg(long, value_enum)]
    quantity: Option<Quantity>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    p_steady: Option<f64>,
    #[arg(long)]
    p_cont: Option<f64>,
    #[arg(long)]
    p_drop: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<usize>>,
    #[arg(long)]
    i: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    step_cap: Option<u64>,
    /// Depth cap of the exact solver.
    #[arg(long)]
    depth_cap: Option<usize>,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RunStrategy {
    Standard,
    Guard,
    DropShuffle,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    program: Option<PathBuf>,
    #[arg(long)]
    query: Option<String>,
    #[arg(long, value_enum)]
    strategy: Option<RunStrategy>,
    #[arg(long)]
    p_drop: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_solutions: Option<u64>,
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long)]
    max_depth: Option<u64>,
    #[command(flatten)]
    out: Output,
}

fn sink(out: &Output, cfg: &ConfigFile) -> Result<Box<dyn Write>> {
    Ok(match cfg.pick(out.out.clone(), "out")? {
        Some(p) => {
            Box::new(BufWriter::new(File::create(&p).with_context(|| format!("cannot create {}", p.display()))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json(v: &serde_json::Value, out: &Output, cfg: &ConfigFile) -> Result<()> {
    let mut w = sink(out, cfg)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn alpha(flag: Option<Vec<usize>>, cfg: &ConfigFile) -> Result<Option<Vec<usize>>> {
    if flag.is_some() {
        return Ok(flag);
    }
    let Some(text) = cfg.pick::<String>(None, "alpha")? else { return Ok(None) };
    let letters = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse())
        .collect::<Result<Vec<usize>, _>>()
        .with_context(|| format!("bad value for `alpha`: `{text}`"))?;
    Ok(Some(letters))
}

fn parse_enum<T: ValueEnum>(flag: Option<T>, cfg: &ConfigFile, key: &str) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match cfg.pick::<String>(None, key)? {
        None => Ok(None),
        Some(s) => T::from_str(&s.replace('_', "-"), true)
            .map(Some)
            .map_err(|_| anyhow::anyhow!("bad value for `{key}`: `{s}`")),
    }
}

fn bench(which: Benchmark, a: BenchArgs, cfg: &ConfigFile) -> Result<()> {
    let mut c = match which {
        Benchmark::Commands => {
            if cfg.pick(a.target_value, "target-value")?.is_some() {
                bail!("`target-value` belongs to `bench expr`");
            }
            let t = cfg.pick(a.goal_length, "goal-length")?.context("`bench commands` needs --goal-length")?;
            BenchConfig::commands(t)
        }
        Benchmark::Expr => {
            if cfg.pick(a.goal_length, "goal-length")?.is_some() {
                bail!("`goal-length` belongs to `bench commands`");
            }
            let v = cfg.pick(a.target_value, "target-value")?.context("`bench expr` needs --target-value")?;
            BenchConfig::expr(v)
        }
    };
    if let Some(s) = parse_enum(a.strategy, cfg, "strategy")? {
        c.strategy = s;
    }
    c.p_cont = cfg.pick(a.p_cont, "p-cont")?.unwrap_or(c.p_cont);
    c.p_steady = cfg.pick(a.p_steady, "p-steady")?.unwrap_or(c.p_steady);
    c.p_drop = cfg.pick(a.p_drop, "p-drop")?.unwrap_or(c.p_drop);
    c.commands = cfg.pick(a.commands, "commands")?.unwrap_or(c.commands);
    c.trials = cfg.pick(a.trials, "trials")?.unwrap_or(c.trials);
    c.seed = cfg.pick(a.seed, "seed")?.unwrap_or(c.seed);
    c.max_steps = cfg.pick(a.max_steps, "max-steps")?.unwrap_or(c.max_steps);
    c.max_depth = cfg.pick(a.max_depth, "max-depth")?.or(c.max_depth);
    c.count_inclusive = cfg.pick(a.count_inclusive.then_some(true), "count-inclusive")?.unwrap_or(false);

    let rows = run_bench(&c)?;
    let out_path = cfg.pick(a.out.out.clone(), "out")?;
    write_csv(&rows, sink(&a.out, cfg)?)?;
    if let Some(g) = cfg.pick(a.gnuplot, "gnuplot")? {
        let csv = out_path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "-".into());
        std::fs::write(&g, gnuplot_script(&csv, &c)).with_context(|| format!("cannot write {}", g.display()))?;
    }
    let s = summarize(&rows);
    eprintln!(
        "trials {} truncated {} iterations mean {:.4} ± {:.4} median {} results mean {:.4} median {}",
        s.trials,
        s.truncated,
        s.mean_iterations,
        s.stderr_iterations,
        s.median_iterations,
        s.mean_results,
        s.median_results
    );
    Ok(())
}

fn run_analyze(a: AnalyzeArgs, cfg: &ConfigFile) -> Result<()> {
    let d = AnalyzeParams::default();
    let p = AnalyzeParams {
        r: cfg.pick(a.r, "r")?.unwrap_or(d.r),
        p_steady: cfg.pick(a.p_steady, "p-steady")?.unwrap_or(d.p_steady),
        p_cont: cfg.pick(a.p_cont, "p-cont")?.unwrap_or(d.p_cont),
        p_drop: cfg.pick(a.p_drop, "p-drop")?.unwrap_or(d.p_drop),
        alpha: alpha(a.alpha, cfg)?.unwrap_or(d.alpha),
        i: cfg.pick(a.i, "i")?.unwrap_or(d.i),
        l_max: cfg.pick(a.l_max, "l-max")?.unwrap_or(d.l_max),
    };
    emit_json(&analyze(&p), &a.out, cfg)
}

fn run_simulate(a: SimArgs, cfg: &ConfigFile) -> Result<()> {
    let d = SimParams::default();
    let p = SimParams {
        chain: parse_enum(a.chain, cfg, "chain")?.unwrap_or(d.chain),
        quantity: parse_enum(a.quantity, cfg, "quantity")?.unwrap_or(d.quantity),
        r: cfg.pick(a.r, "r")?.unwrap_or(d.r),
        p_steady: cfg.pick(a.p_steady, "p-steady")?.unwrap_or(d.p_steady),
        p_cont: cfg.pick(a.p_cont, "p-cont")?.unwrap_or(d.p_cont),
        p_drop: cfg.pick(a.p_drop, "p-drop")?.unwrap_or(d.p_drop),
        alpha: alpha(a.alpha, cfg)?.unwrap_or(d.alpha),
        i: cfg.pick(a.i, "i")?.unwrap_or(d.i),
        l: cfg.pick(a.l, "l")?.unwrap_or(d.l),
        trials: cfg.pick(a.trials, "trials")?.unwrap_or(d.trials),
        seed: cfg.pick(a.seed, "seed")?.unwrap_or(d.seed),
        step_cap: cfg.pick(a.step_cap, "step-cap")?.unwrap_or(d.step_cap),
        depth_cap: cfg.pick(a.depth_cap, "depth-cap")?.unwrap_or(d.depth_cap),
    };
    emit_json(&simulate_chain(&p)?, &a.out, cfg)
}

fn run_query(a: RunArgs, cfg: &ConfigFile) -> Result<()> {
    let path = cfg.pick(a.program, "program")?.context("`run` needs --program")?;
    let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    let program = parse_program(&text)?;
    let query_text = cfg.pick(a.query, "query")?.context("`run` needs --query")?;
    let query = parse_query(&query_text)?;
    let strategy = match parse_enum(a.strategy, cfg, "strategy")?.unwrap_or(RunStrategy::Standard) {
        RunStrategy::Standard => Strategy::Standard,
        RunStrategy::Guard => Strategy::Guard,
        RunStrategy::DropShuffle => {
            Strategy::DropShuffle { p_drop: Probability::new(cfg.pick(a.p_drop, "p-drop")?.unwrap_or(0.5))? }
        }
    };
    let seed = cfg.pick(a.seed, "seed")?.unwrap_or(0);
    let max_solutions = cfg.pick(a.max_solutions, "max-solutions")?.unwrap_or(10);
    let limits = Limits::new(cfg.pick(a.max_depth, "max-depth")?, cfg.pick(a.max_steps, "max-steps")?)?;

    let mut it = solve(&program, &query, strategy, SplitMix64::new(seed), limits);
    let mut solutions = Vec::new();
    let mut error = None;
    while (solutions.len() as u64) < max_solutions {
        match it.next() {
            None => break,
            Some(Ok(s)) => {
                let mut pairs: Vec<_> = s.bindings.iter().map(|(v, t)| (v.to_string(), json!(t.to_string()))).collect();
                pairs.sort_by(|a, b| a.0.cmp(&b.0));
                solutions.push(pairs.into_iter().collect::<serde_json::Map<_, _>>());
            }
            Some(Err(e)) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    let report = json!({
        "query": query_text,
        "strategy": strategy.name(),
        "seed": seed,
        "solutions": solutions,
        "exhausted": it.is_exhausted(),
        "error": error,
        "stats": it.stats(),
    });
    emit_json(&report, &a.out, cfg)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io = c.downcast_ref::<io::Error>().map(io::Error::kind);
        let csv = match c.downcast_ref::<BenchError>() {
            Some(BenchError::Csv(e)) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e.kind()),
                _ => None,
            },
            Some(BenchError::Io(e)) => Some(e.kind()),
            _ => None,
        };
        io.or(csv) == Some(io::ErrorKind::BrokenPipe)
    })
}

fn dispatch(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p, KEYS)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Analyze(a) => run_analyze(a, &cfg),
        Command::SimulateChain(a) => run_simulate(a, &cfg),
        Command::Run(a) => run_query(a, &cfg),
        Command::Bench { which: BenchCommand::Commands(a) } => bench(Benchmark::Commands, a, &cfg),
        Command::Bench { which: BenchCommand::Expr(a) } => bench(Benchmark::Expr, a, &cfg),
    }
}
