use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use exactdag::engine::{run_search, Direction, Rule, RuleSet, SearchConfig, DEFAULT_EPSILON};
use exactdag::scores::{
    compute_bge_listed, compute_bge_tables, load_score_file, write_score_file, BgeParams,
    DataMatrix, SearchSpace,
};
use exactdag::sim::{bench_csv, run_bench, simulate, truth_csv, BenchGrid, SimConfig};
use exactdag::{Error, ScoreProvider};

/// Exact Bayesian network structure learning.
#[derive(Parser)]
#[command(name = "exactdag", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample data from a random linear-Gaussian network.
    Simulate(SimulateArgs),
    /// Compute BGe local scores and write a score file.
    Score(ScoreArgs),
    /// Find an optimal DAG.
    Learn(LearnArgs),
    /// Run a simulation grid and write one CSV row per run.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    p: usize,
    /// Expected neighbourhood size.
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    /// Number of samples.
    #[arg(long, default_value_t = 300)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_data: PathBuf,
    #[arg(long)]
    out_truth: Option<PathBuf>,
    #[arg(long)]
    random_sign: bool,
    #[arg(long)]
    random_variance: bool,
}

#[derive(Args)]
struct BgeArgs {
    /// BGe prior sample size for the mean.
    #[arg(long = "am", default_value_t = 0.1)]
    alpha_mu: f64,
    /// BGe degrees of freedom; defaults to p + am + 1.
    #[arg(long = "aw")]
    alpha_w: Option<f64>,
}

impl BgeArgs {
    fn params(&self) -> BgeParams {
        BgeParams {
            alpha_mu: self.alpha_mu,
            alpha_w: self.alpha_w,
        }
    }
}

#[derive(Args)]
struct SpaceArgs {
    /// Search space JSON: {"name": {"preselected": [...], "plus1": bool}}.
    #[arg(long, conflicts_with = "max_parents")]
    space: Option<PathBuf>,
    /// Score every parent set up to this size instead of a search space.
    #[arg(long)]
    max_parents: Option<usize>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    space: SpaceArgs,
    #[command(flatten)]
    bge: BgeArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    /// Search the whole problem at once.
    #[arg(long)]
    no_dnc: bool,
    /// Disable rules 11, 12, u1 and u2.
    #[arg(long)]
    no_bounds: bool,
    /// Plain dynamic programming: only duplicate removal stays on.
    #[arg(long)]
    no_prune: bool,
    /// Disable one rule by label (2..12, u1, u2); repeatable.
    #[arg(long = "disable-rule", value_name = "RULE")]
    disable: Vec<Rule>,
    /// Relative slack for strict-improvement rules.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value = "front")]
    direction: Direction,
    /// Worker threads; 0 picks the machine default.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig> {
        let mut rules = if self.no_prune {
            RuleSet::only(&[Rule::Dedup])
        } else {
            RuleSet::all()
        };
        if self.no_bounds {
            for r in Rule::BOUNDS {
                rules = rules.without(r);
            }
        }
        for &r in &self.disable {
            if r == Rule::Dedup {
                bail!("duplicate removal cannot be disabled");
            }
            rules = rules.without(r);
        }
        Ok(SearchConfig {
            rules,
            epsilon: self.epsilon,
            direction: self.direction,
            workers: self.workers,
            dnc: !self.no_dnc,
            ..SearchConfig::default()
        })
    }
}

#[derive(Args)]
struct LearnArgs {
    /// Local score file.
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    scores: Option<PathBuf>,
    /// Data CSV; scored with BGe.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    space: SpaceArgs,
    #[command(flatten)]
    bge: BgeArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Edge list `child,parent`.
    #[arg(long)]
    out_dag: Option<PathBuf>,
    #[arg(long)]
    out_dot: Option<PathBuf>,
    /// Score, order and search counters as JSON.
    #[arg(long)]
    out_stats: Option<PathBuf>,
    /// Optimal order, one name per line, left to right.
    #[arg(long)]
    out_order: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON grid: {"p": [..], "density": [..], "seeds": n or [..], "samples", "alpha_mu", "plus1"}.
    #[arg(long)]
    grid_file: PathBuf,
    #[arg(long)]
    out_csv: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn bge_provider(data: &Path, space: &SpaceArgs, bge: &BgeArgs) -> Result<ScoreProvider> {
    let data = DataMatrix::load_csv(data).with_context(|| format!("reading {}", data.display()))?;
    let provider = match (&space.space, space.max_parents) {
        (Some(path), _) => {
            let sp = SearchSpace::load(path, data.names())
                .with_context(|| format!("reading {}", path.display()))?;
            compute_bge_tables(&data, &sp, bge.params())?
        }
        (None, Some(k)) => compute_bge_listed(&data, k, bge.params())?,
        (None, None) => compute_bge_tables(&data, &SearchSpace::full(data.p()), bge.params())?,
    };
    for w in provider.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(provider)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let cfg = SimConfig {
        random_sign: a.random_sign,
        random_variance: a.random_variance,
        ..SimConfig::new(a.p, a.density, a.n, a.seed)
    };
    let sim = simulate(&cfg)?;
    sim.data.write_csv(&a.out_data)?;
    if let Some(path) = &a.out_truth {
        write(path, &truth_csv(sim.data.names(), &sim.truth))?;
    }
    Ok(())
}

fn cmd_score(a: &ScoreArgs) -> Result<()> {
    let provider = bge_provider(&a.data, &a.space, &a.bge)?;
    write_score_file(&provider, &a.out)?;
    Ok(())
}

fn cmd_learn(a: &LearnArgs) -> Result<()> {
    let provider = match (&a.scores, &a.data) {
        (Some(path), _) => {
            load_score_file(path).with_context(|| format!("reading {}", path.display()))?
        }
        (None, Some(data)) => bge_provider(data, &a.space, &a.bge)?,
        (None, None) => bail!("need --scores or --data"),
    };
    let cfg = a.search.config()?;
    let res = run_search(&provider, &cfg)?;
    let names = provider.names();
    println!("score {}", res.score);
    println!("edges {}", res.dag.edges().len());
    println!("sigma_n {}", res.stats.sigma_n);
    if let Some(path) = &a.out_dag {
        write(path, &res.dag.to_edge_csv(names))?;
    }
    if let Some(path) = &a.out_dot {
        write(path, &res.dag.to_dot(names))?;
    }
    let order: Vec<&str> = res.order.iter().map(|&v| names[v].as_str()).collect();
    if let Some(path) = &a.out_order {
        write(path, &(order.join("\n") + "\n"))?;
    }
    if let Some(path) = &a.out_stats {
        let json = serde_json::json!({
            "score": res.score,
            "order": order,
            "edges": res.dag.edges().len(),
            "stats": res.stats,
            "warnings": provider.warnings(),
        });
        write(path, &serde_json::to_string_pretty(&json)?)?;
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let text = fs::read_to_string(&a.grid_file)
        .with_context(|| format!("reading {}", a.grid_file.display()))?;
    let grid: BenchGrid = serde_json::from_str(&text).context("parsing the grid file")?;
    let rows = run_bench(&grid, &a.search.config()?)?;
    write(&a.out_csv, &bench_csv(&rows))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.cmd {
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Score(a) => cmd_score(a),
        Cmd::Learn(a) => cmd_learn(a),
        Cmd::Bench(a) => cmd_bench(a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Infeasible(_)) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
