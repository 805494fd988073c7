//! Random linear-Gaussian networks and the benchmark grid.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use crate::bounds::matching_certificate;
use crate::engine::{run_search, Rule, SearchConfig};
use crate::error::{Error, Result};
use crate::nodeset::NodeSet;
use crate::scores::{compute_bge_tables, BgeParams, DataMatrix, SearchSpace};
use crate::testing::names;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub p: usize,
    /// Expected neighbourhood size.
    pub density: f64,
    /// Samples.
    pub m: usize,
    pub seed: u64,
    pub weight_lo: f64,
    pub weight_hi: f64,
    /// Flip each edge coefficient's sign with probability 1/2.
    pub random_sign: bool,
    /// Draw noise variances uniformly from [0.5, 2] instead of 1.
    pub random_variance: bool,
}

impl SimConfig {
    pub fn new(p: usize, density: f64, m: usize, seed: u64) -> Self {
        SimConfig {
            p,
            density,
            m,
            seed,
            weight_lo: 0.25,
            weight_hi: 1.0,
            random_sign: false,
            random_variance: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub data: DataMatrix,
    /// True parent set of each node.
    pub truth: Vec<NodeSet>,
}

/// Erdős–Rényi DAG: a random causal order, then each pair linked with
/// probability `min(1, d/(p-1))`, pointing from the earlier node.
pub fn random_dag(p: usize, density: f64, rng: &mut impl Rng) -> Vec<NodeSet> {
    let mut perm: Vec<usize> = (0..p).collect();
    for i in (1..p).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let prob = if p > 1 { (density / (p - 1) as f64).clamp(0.0, 1.0) } else { 0.0 };
    let mut parents = vec![NodeSet::EMPTY; p];
    for a in 0..p {
        for b in a + 1..p {
            if rng.random_bool(prob) {
                parents[perm[b]].insert(perm[a]);
            }
        }
    }
    parents
}

/// Samples from the linear-Gaussian model on `parents`.
pub fn sample_sem(
    parents: &[NodeSet],
    cfg: &SimConfig,
    rng: &mut impl Rng,
) -> Result<DataMatrix> {
    let p = parents.len();
    let topo = topological(parents)?;
    let mut coef = vec![vec![0.0; p]; p];
    for &v in &topo {
        for q in parents[v] {
            let mut w = rng.random_range(cfg.weight_lo..=cfg.weight_hi);
            if cfg.random_sign && rng.random_bool(0.5) {
                w = -w;
            }
            coef[v][q] = w;
        }
    }
    let sd: Vec<f64> = (0..p)
        .map(|_| {
            if cfg.random_variance {
                rng.random_range(0.5f64..=2.0).sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(cfg.m);
    for _ in 0..cfg.m {
        let mut x = vec![0.0; p];
        for &v in &topo {
            let e: f64 = StandardNormal.sample(rng);
            x[v] = parents[v].iter().map(|q| coef[v][q] * x[q]).sum::<f64>() + sd[v] * e;
        }
        rows.push(x);
    }
    DataMatrix::new(names(p), rows)
}

fn topological(parents: &[NodeSet]) -> Result<Vec<usize>> {
    let p = parents.len();
    let mut placed = NodeSet::EMPTY;
    let mut out = Vec::with_capacity(p);
    while out.len() < p {
        let v = (0..p)
            .find(|&v| !placed.contains(v) && parents[v].is_subset(placed))
            .ok_or_else(|| Error::Invalid("graph has a cycle".into()))?;
        placed.insert(v);
        out.push(v);
    }
    Ok(out)
}

pub fn simulate(cfg: &SimConfig) -> Result<Simulation> {
    if cfg.p < 1 || cfg.m < 1 || !(cfg.density >= 0.0) {
        return Err(Error::Invalid("need p >= 1, m >= 1 and density >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let truth = random_dag(cfg.p, cfg.density, &mut rng);
    let data = sample_sem(&truth, cfg, &mut rng)?;
    Ok(Simulation { data, truth })
}

/// `child,parent` rows with a header.
pub fn truth_csv(names: &[String], truth: &[NodeSet]) -> String {
    let mut s = String::from("child,parent\n");
    for (c, pa) in truth.iter().enumerate() {
        for q in *pa {
            writeln!(s, "{},{}", names[c], names[q]).unwrap();
        }
    }
    s
}

/// Undirected edges of a DAG.
pub fn skeleton(truth: &[NodeSet]) -> Vec<(usize, usize)> {
    truth
        .iter()
        .enumerate()
        .flat_map(|(c, pa)| pa.iter().map(move |q| (c, q)))
        .collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn to_vec(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

fn default_samples() -> usize {
    300
}

fn default_alpha_mu() -> f64 {
    0.1
}

/// Benchmark grid as read from JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchGrid {
    #[serde(default)]
    pub p: Vec<usize>,
    #[serde(default)]
    pub density: Vec<f64>,
    pub seeds: Seeds,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_alpha_mu")]
    pub alpha_mu: f64,
    /// Search space: the true skeleton as preselected sets, with one extra
    /// parent allowed when set.
    #[serde(default = "yes")]
    pub plus1: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub p: usize,
    pub density: f64,
    pub seed: u64,
    pub score: f64,
    pub sigma_n: u64,
    pub stage_counts: Vec<u64>,
    /// Prune counts in [`Rule::ALL`] order.
    pub pruned: Vec<u64>,
    pub wall_ms: f64,
    pub certified: bool,
}

pub fn bench_one(p: usize, density: f64, seed: u64, grid: &BenchGrid, cfg: &SearchConfig) -> Result<BenchRow> {
    let sim = simulate(&SimConfig::new(p, density, grid.samples, seed))?;
    let space = SearchSpace::from_skeleton(p, &skeleton(&sim.truth), grid.plus1);
    let params = BgeParams {
        alpha_mu: grid.alpha_mu,
        alpha_w: None,
    };
    let provider = compute_bge_tables(&sim.data, &space, params)?;
    let res = run_search(&provider, cfg)?;
    Ok(BenchRow {
        p,
        density,
        seed,
        score: res.score,
        sigma_n: res.stats.sigma_n,
        stage_counts: res.stats.stage_counts.clone(),
        pruned: Rule::ALL
            .iter()
            .map(|r| res.stats.pruned.get(r.label()).copied().unwrap_or(0))
            .collect(),
        wall_ms: res.stats.wall_ms,
        certified: matching_certificate(&provider, 1e-8).is_some(),
    })
}

/// Runs every grid point; rows are ordered by `(p, density, seed)`.
///
/// Jobs run on plain threads, each search with its own single-worker pool.
/// Nesting pools inside a rayon job would let blocked workers steal further
/// jobs onto the same stack.
pub fn run_bench(grid: &BenchGrid, cfg: &SearchConfig) -> Result<Vec<BenchRow>> {
    let mut jobs = Vec::new();
    for &p in &grid.p {
        for &d in &grid.density {
            for s in grid.seeds.to_vec() {
                jobs.push((p, d, s));
            }
        }
    }
    jobs.sort_by(|a, b| (a.0, a.1, a.2).partial_cmp(&(b.0, b.1, b.2)).unwrap());
    let inner = SearchConfig { workers: 1, ..*cfg };
    let threads = match cfg.workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        w => w,
    }
    .min(jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<BenchRow>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, AtomicOrdering::Relaxed);
                let Some(&(p, d, s)) = jobs.get(k) else { break };
                *slots[k].lock().unwrap() = Some(bench_one(p, d, s, grid, &inner));
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every job ran"))
        .collect()
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from("p,density,seed,score,sigma_n,stage_counts");
    for r in Rule::ALL {
        write!(s, ",pruned_{}", r.label()).unwrap();
    }
    s.push_str(",wall_ms,certified\n");
    for r in rows {
        let stages: Vec<String> = r.stage_counts.iter().map(u64::to_string).collect();
        write!(
            s,
            "{},{},{},{},{},{}",
            r.p,
            r.density,
            r.seed,
            r.score,
            r.sigma_n,
            stages.join(";")
        )
        .unwrap();
        for k in &r.pruned {
            write!(s, ",{k}").unwrap();
        }
        writeln!(s, ",{:.3},{}", r.wall_ms, r.certified).unwrap();
    }
    s
}
