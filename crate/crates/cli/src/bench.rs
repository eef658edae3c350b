//! The two generator benchmarks: re-run a query until a target solution
//! appears and record the counters of every trial.

use std::io::Write;
use std::str::FromStr;

use randsld::programs::{command_sequence, commands_program, expr_program, ExprGuards};
use randsld::rng::derive_seed;
use randsld::{
    parse_query, solve_loop, EngineError, GuardParams, Limits, Probability, RunStats, SplitMix64, Strategy, Target,
};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::eval_expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    Commands,
    Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Guard,
    DropShuffle,
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "guard" => Ok(StrategyKind::Guard),
            "drop-shuffle" | "drop_shuffle" => Ok(StrategyKind::DropShuffle),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchConfig {
    pub benchmark: Benchmark,
    pub strategy: StrategyKind,
    pub p_cont: f64,
    /// Guard of every command clause, or of every non-recursive clause for `expr`.
    pub p_steady: f64,
    pub p_drop: f64,
    /// Goal length for `commands`, target value for `expr`.
    pub goal: i64,
    /// Number of commands for `commands`.
    pub commands: usize,
    pub trials: u64,
    pub seed: u64,
    pub max_steps: u64,
    pub max_depth: Option<u64>,
    /// Count the target solution in `results`.
    pub count_inclusive: bool,
}

impl BenchConfig {
    pub fn commands(goal_length: usize) -> Self {
        BenchConfig {
            benchmark: Benchmark::Commands,
            strategy: StrategyKind::Guard,
            p_cont: 0.5,
            p_steady: 1.0 / 3.0,
            p_drop: 0.5,
            goal: goal_length as i64,
            commands: 3,
            trials: 1000,
            seed: 0,
            max_steps: 10_000_000,
            max_depth: None,
            count_inclusive: false,
        }
    }

    pub fn expr(target_value: i64) -> Self {
        let g = ExprGuards::default();
        BenchConfig {
            benchmark: Benchmark::Expr,
            p_cont: g.p_cont,
            p_steady: g.p_other,
            goal: target_value,
            ..BenchConfig::commands(0)
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("goal length must be at least 1")]
    GoalLength,
    #[error(transparent)]
    Param(#[from] randsld::strategy::ParamError),
    #[error(transparent)]
    Probability(#[from] randsld::term::ProbabilityError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub run_id: u64,
    pub benchmark: Benchmark,
    pub strategy: &'static str,
    pub p_cont: Option<f64>,
    pub p_steady: Option<f64>,
    pub p_drop: Option<f64>,
    pub goal: i64,
    pub iterations: u64,
    pub results: u64,
    pub steps: u64,
    /// The step or depth limit stopped the trial before the target appeared.
    pub truncated: bool,
    pub seed: u64,
}

pub const CSV_HEADER: &str =
    "run_id,benchmark,strategy,p_cont,p_steady,p_drop,goal,iterations,results,steps,truncated,seed";

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<Row>, BenchError> {
    if cfg.trials == 0 {
        return Err(BenchError::NoTrials);
    }
    let strategy = match cfg.strategy {
        StrategyKind::Guard => Strategy::Guard,
        StrategyKind::DropShuffle => Strategy::DropShuffle { p_drop: Probability::new(cfg.p_drop)? },
    };
    let guarded = cfg.strategy == StrategyKind::Guard;
    let limits = Limits::new(cfg.max_depth, Some(cfg.max_steps))?;
    let program = match cfg.benchmark {
        Benchmark::Commands => {
            if cfg.goal < 1 {
                return Err(BenchError::GoalLength);
            }
            let g = GuardParams::uniform(cfg.commands, cfg.p_steady, cfg.p_cont)?;
            commands_program(cfg.commands, guarded.then_some(&g))
        }
        Benchmark::Expr => {
            Probability::new(cfg.p_cont)?;
            Probability::new(cfg.p_steady)?;
            expr_program(guarded.then_some(ExprGuards { p_cont: cfg.p_cont, p_other: cfg.p_steady }))
        }
    };
    let (query, wanted) = match cfg.benchmark {
        Benchmark::Commands => ("t(X)", Some(command_sequence(&vec![2; cfg.goal as usize]))),
        Benchmark::Expr => ("expr(X)", None),
    };
    let query = parse_query(query).expect("benchmark query parses");
    let trial = |i: u64| -> Result<Row, BenchError> {
        let seed = derive_seed(cfg.seed, i);
        let target = match &wanted {
            Some(t) => Target::equals("X", t.clone()),
            None => Target::matches("X", |t| eval_expr(t) == Ok(cfg.goal)),
        };
        let outcome = solve_loop(&program, &query, &target, strategy, SplitMix64::new(seed), limits);
        let (stats, truncated) = match outcome {
            Ok(s) => (s, false),
            Err(EngineError::LimitExceeded { stats, .. }) => (stats, true),
            Err(e) => return Err(e.into()),
        };
        Ok(row(cfg, i, seed, stats, truncated))
    };
    (0..cfg.trials).into_par_iter().map(trial).collect()
}

fn row(cfg: &BenchConfig, i: u64, seed: u64, stats: RunStats, truncated: bool) -> Row {
    let guarded = cfg.strategy == StrategyKind::Guard;
    let results = if truncated || cfg.count_inclusive { stats.results } else { stats.results - 1 };
    Row {
        run_id: i,
        benchmark: cfg.benchmark,
        strategy: if guarded { "guard" } else { "drop_shuffle" },
        p_cont: guarded.then_some(cfg.p_cont),
        p_steady: guarded.then_some(cfg.p_steady),
        p_drop: (!guarded).then_some(cfg.p_drop),
        goal: cfg.goal,
        iterations: stats.iterations,
        results,
        steps: stats.steps,
        truncated,
        seed,
    }
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub trials: u64,
    pub truncated: u64,
    pub mean_iterations: f64,
    pub stderr_iterations: f64,
    pub median_iterations: f64,
    pub mean_results: f64,
    pub median_results: f64,
}

fn median(mut xs: Vec<u64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_unstable();
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2] as f64
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) as f64 / 2.0
    }
}

/// Statistics over the trials that reached the target.
pub fn summarize(rows: &[Row]) -> Summary {
    let done: Vec<&Row> = rows.iter().filter(|r| !r.truncated).collect();
    let n = done.len() as f64;
    let it: Vec<f64> = done.iter().map(|r| r.iterations as f64).collect();
    let mean = it.iter().sum::<f64>() / n;
    let var = it.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Summary {
        trials: rows.len() as u64,
        truncated: (rows.len() - done.len()) as u64,
        mean_iterations: mean,
        stderr_iterations: (var / n).sqrt(),
        median_iterations: median(done.iter().map(|r| r.iterations).collect()),
        mean_results: done.iter().map(|r| r.results as f64).sum::<f64>() / n,
        median_results: median(done.iter().map(|r| r.results).collect()),
    }
}

/// A gnuplot script plotting iterations and results per run from `csv_path`.
pub fn gnuplot_script(csv_path: &str, cfg: &BenchConfig) -> String {
    format!(
        "set datafile separator ','\n\
         set title '{:?} goal {} ({})'\n\
         set xlabel 'run'\n\
         set logscale y\n\
         plot '{csv_path}' using 1:8 every ::1 with points title 'iterations', \\\n     \
         '' using 1:9 every ::1 with points title 'results'\n",
        cfg.benchmark,
        cfg.goal,
        if cfg.strategy == StrategyKind::Guard { "guard" } else { "drop_shuffle" }
    )
}
