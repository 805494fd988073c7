//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach stdout.

use std::time::{Duration, Instant};

use exactdag::bounds::{matching_bound, matching_certificate, tree_bound, PairMatrices};
use exactdag::dnc::{build_h, dnc_search_traced, upper_components};
use exactdag::engine::{
    run_search, Direction, Problem, Rule, RuleSet, Search, SearchConfig, SearchResult,
};
use exactdag::oracle::{best_completion, brute_force_best_order};
use exactdag::scores::{compute_bge_tables, BgeParams, BgeScorer, SearchSpace};
use exactdag::sim::{random_dag, run_bench, sample_sem, simulate, BenchGrid, SimConfig};
use exactdag::{testing, NodeSet, ScoreProvider};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Two in three instances use a full space with an in-degree cap.
const ORACLE_INSTANCES: u64 = 300;
const CRIT1_BUDGET: Duration = Duration::from_secs(60);
const SANDWICH_SLACK: f64 = 1e-12;
const SANDWICH_INSTANCES: u64 = 100;
const DNC_INSTANCES: u64 = 100;
const BGE_EQUIV_TOL: f64 = 1e-8;
const BGE_EQUIV_PAIRS: u64 = 50;
const CERT_TOL: f64 = 1e-8;
const CERT_SCORE_TOL: f64 = 1e-8;
const CERT_INSTANCES: u64 = 20;
const SCALING_SEEDS: u64 = 50;
const SCALING_BUDGET: Duration = Duration::from_secs(600);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn oracle_instances() -> Vec<ScoreProvider> {
    (0..ORACLE_INSTANCES).map(testing::random_instance).collect()
}

fn oracle_scores(instances: &[ScoreProvider]) -> Vec<f64> {
    instances
        .iter()
        .map(|sp| brute_force_best_order(sp).unwrap().score)
        .collect()
}

/// Index of the first instance where the search disagrees with the oracle.
fn first_mismatch(instances: &[ScoreProvider], want: &[f64], cfg: &SearchConfig) -> Option<String> {
    instances.iter().zip(want).enumerate().find_map(|(k, (sp, &w))| {
        match run_search(sp, cfg) {
            Ok(r) if r.score == w => None,
            Ok(r) => Some(format!("instance {k}: got {} want {w}", r.score)),
            Err(e) => Some(format!("instance {k}: {e}")),
        }
    })
}

fn criterion_1(instances: &[ScoreProvider], want: &[f64]) -> Outcome {
    let start = Instant::now();
    let bad = first_mismatch(instances, want, &SearchConfig::default());
    let took = start.elapsed();
    match bad {
        Some(b) => outcome(false, b),
        None => outcome(
            took < CRIT1_BUDGET,
            format!(
                "{} instances ({} full-space), p 4..7, exact equality, {:.1?}",
                instances.len(),
                instances.len() - instances.len() / 3,
                took
            ),
        ),
    }
}

fn criterion_2(instances: &[ScoreProvider], want: &[f64]) -> Outcome {
    let mut checked = Vec::new();
    for r in Rule::ALL.into_iter().filter(|&r| r != Rule::Dedup) {
        let direction = match r {
            Rule::OptimalBack | Rule::OrderedBack | Rule::NoLeftGaps => Direction::Back,
            _ => Direction::Front,
        };
        let cfg = SearchConfig {
            direction,
            ..SearchConfig::exhaustive().with_rules(RuleSet::only(&[Rule::Dedup, r]))
        };
        if let Some(b) = first_mismatch(instances, want, &cfg) {
            return outcome(false, format!("rule {r}: {b}"));
        }
        checked.push(r.label());
    }
    outcome(true, format!("rules {} each alone over {} instances", checked.join(","), instances.len()))
}

fn criterion_3() -> Outcome {
    let order_rules = SearchConfig::exhaustive().with_rules(RuleSet::only(&[
        Rule::Dedup,
        Rule::OptimalFront,
        Rule::OrderedFront,
        Rule::NoRightGaps,
        Rule::DormantGap,
        Rule::OrderedDormantGap,
    ]));
    let mut seen = Vec::new();
    for p in [5, 10, 15, 20] {
        let zero = testing::all_zero(p);
        let sim = simulate(&SimConfig::new(p, 0.0, 10_000, p as u64)).unwrap();
        let space = SearchSpace::from_skeleton(p, &[], true);
        let bge = compute_bge_tables(&sim.data, &space, BgeParams::default()).unwrap();
        for (name, sp) in [("zero", &zero), ("bge", &bge)] {
            for (cfg_name, cfg) in [("default", SearchConfig::default()), ("order-rules", order_rules)] {
                let r = run_search(sp, &cfg).unwrap();
                if r.stats.sigma_n != p as u64 || !r.dag.edges().is_empty() {
                    return outcome(
                        false,
                        format!("{name} p={p} {cfg_name}: sigma_n {} edges {}", r.stats.sigma_n, r.dag.edges().len()),
                    );
                }
            }
        }
        seen.push(p.to_string());
    }
    outcome(true, format!("sigma_n = p for p in {{{}}}, all-zero and BGe empty graphs", seen.join(",")))
}

fn matching_instance(seed: u64) -> ScoreProvider {
    let p = 4 + (seed % 4) as usize;
    let mut truth = vec![NodeSet::EMPTY; p];
    for k in 0..p / 2 {
        truth[2 * k].insert(2 * k + 1);
    }
    let mut cfg = SimConfig::new(p, 0.0, 10_000, seed);
    cfg.weight_lo = 0.9;
    cfg.weight_hi = 1.0;
    cfg.random_sign = true;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = sample_sem(&truth, &cfg, &mut rng).unwrap();
    compute_bge_tables(&data, &SearchSpace::full(p), BgeParams::default()).unwrap()
}

fn criterion_4() -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    for seed in 0..CERT_INSTANCES {
        let sp = matching_instance(seed);
        let p = sp.p();
        let Some(cert) = matching_certificate(&sp, CERT_TOL) else {
            return outcome(false, format!("seed {seed}: no certificate"));
        };
        let oracle = brute_force_best_order(&sp).unwrap().score;
        if (cert.dag.score - oracle).abs() > CERT_SCORE_TOL {
            return outcome(false, format!("seed {seed}: certificate {} oracle {oracle}", cert.dag.score));
        }
        worst_ratio = worst_ratio.max(cert.lookups as f64 / (p * p) as f64);
        if cert.lookups > 4 * p * p {
            return outcome(false, format!("seed {seed}: {} lookups for p={p}", cert.lookups));
        }
        let r = run_search(&sp, &SearchConfig::default()).unwrap();
        if r.stats.sigma_n > p as u64 {
            return outcome(false, format!("seed {seed}: sigma_n {} > p", r.stats.sigma_n));
        }
    }
    outcome(
        true,
        format!("{CERT_INSTANCES} matching instances p 4..7, lookups <= {worst_ratio:.2} p^2, tol {CERT_TOL:e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut checked = 0usize;
    for seed in 0..SANDWICH_INSTANCES {
        let p = 4 + (seed / 3 % 3) as usize;
        let k = 1 + (seed / 9 % 3) as usize;
        let sp = match seed % 3 {
            0 => testing::rugged(p, k, seed),
            1 => testing::structured(p, 1.5, k, seed),
            _ => testing::random_dense(p, k, seed),
        };
        for direction in [Direction::Front, Direction::Back] {
            let cfg = SearchConfig {
                dnc: false,
                direction,
                ..SearchConfig::default()
            };
            let problem = Problem::whole(&sp);
            let comp = problem.comp;
            let pm = PairMatrices::build(&sp, comp, NodeSet::EMPTY);
            let base: Vec<f64> = (0..p).map(|u| sp.best_score(u, NodeSet::EMPTY)).collect();
            let all: Vec<f64> = (0..p).map(|u| sp.best_score(u, comp.without(u))).collect();
            let mut search = Search::new(&sp, problem, &cfg).unwrap();
            loop {
                for o in search.stage() {
                    let dormant = comp.difference(o.set);
                    if dormant.is_empty() {
                        continue;
                    }
                    let (tree, f) = tree_bound(&pm, dormant, &base);
                    let (_, g) = matching_bound(&pm, &tree, dormant, &all);
                    let parents = match direction {
                        Direction::Front => o.set,
                        Direction::Back => NodeSet::EMPTY,
                    };
                    let mid = best_completion(&sp, dormant, parents).unwrap();
                    if !(f <= mid + SANDWICH_SLACK && mid <= g + SANDWICH_SLACK) {
                        return outcome(false, format!("seed {seed} {direction:?} {:?}: {f} {mid} {g}", o.seq));
                    }
                    checked += 1;
                }
                if !search.step() {
                    break;
                }
            }
        }
    }
    outcome(true, format!("{checked} suborders over {SANDWICH_INSTANCES} instances, slack {SANDWICH_SLACK:e}"))
}

fn dnc_instances() -> Vec<ScoreProvider> {
    (0..DNC_INSTANCES)
        .map(|seed| {
            let p = 6 + (seed % 7) as usize;
            let d = [0.5, 0.8, 1.0][(seed % 3) as usize];
            testing::structured(p, d, 2, seed)
        })
        .collect()
}

fn criterion_6() -> Outcome {
    let mono = SearchConfig {
        dnc: false,
        ..SearchConfig::default()
    };
    let mut merges = 0;
    let mut split = 0;
    for (k, sp) in dnc_instances().iter().enumerate() {
        let (d, trace) = dnc_search_traced(sp, &SearchConfig::default()).unwrap();
        let m = run_search(sp, &mono).unwrap();
        if d.score != m.score {
            return outcome(false, format!("instance {k}: dnc {} monolithic {}", d.score, m.score));
        }
        merges += trace.merges;
        split += usize::from(trace.parts.len() > 1);
    }
    let mut crossing_checked = 0;
    for seed in 0..ORACLE_INSTANCES {
        let sp = testing::random_instance(seed);
        let upper = upper_components(&build_h(&sp));
        let comp_of = |v: usize| upper.iter().position(|c| c.contains(v));
        for dag in brute_force_best_order(&sp).unwrap().dags {
            for (c, q) in dag.edges() {
                if comp_of(c) != comp_of(q) {
                    return outcome(false, format!("seed {seed}: optimal edge {q}->{c} crosses upper components"));
                }
            }
            crossing_checked += 1;
        }
    }
    outcome(
        true,
        format!(
            "{DNC_INSTANCES} sparse instances p 6..12 ({split} decomposed, {merges} merges); {crossing_checked} oracle DAGs without crossing edges"
        ),
    )
}

fn covered_edge(parents: &[NodeSet]) -> Option<(usize, usize)> {
    for (j, pa) in parents.iter().enumerate() {
        for i in *pa {
            if *pa == parents[i].with(i) {
                return Some((i, j));
            }
        }
    }
    None
}

fn criterion_7() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let mut seed = 0;
    while done < BGE_EQUIV_PAIRS {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = 2 + (seed % 5) as usize;
        let dag = random_dag(p, 2.0, &mut rng);
        let Some((i, j)) = covered_edge(&dag) else {
            continue;
        };
        let mut cfg = SimConfig::new(p, 0.0, 100, seed);
        cfg.random_sign = true;
        let data = sample_sem(&dag, &cfg, &mut rng).unwrap();
        let scorer = BgeScorer::new(&data, BgeParams::default()).unwrap();
        let total = |g: &[NodeSet]| -> f64 {
            g.iter().enumerate().map(|(v, &pa)| scorer.local_score(v, pa).unwrap()).sum()
        };
        let mut rev = dag.clone();
        rev[j] = rev[j].without(i);
        rev[i] = rev[i].with(j);
        let diff = (total(&dag) - total(&rev)).abs();
        worst = worst.max(diff);
        done += 1;
    }
    outcome(worst <= BGE_EQUIV_TOL, format!("{done} covered-edge reversals, max |diff| {worst:.2e}"))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let ps: Vec<usize> = (10..=16).collect();
    let grid = BenchGrid {
        p: ps.clone(),
        density: vec![0.2, 1.5],
        seeds: exactdag::sim::Seeds::Count(SCALING_SEEDS),
        samples: 300,
        alpha_mu: 0.1,
        plus1: true,
    };
    let rows = run_bench(&grid, &SearchConfig::default()).unwrap();
    let median = |p: usize, d: f64| {
        let mut v: Vec<u64> = rows.iter().filter(|r| r.p == p && r.density == d).map(|r| r.sigma_n).collect();
        v.sort_unstable();
        v[v.len() / 2]
    };
    let mut parts = Vec::new();
    for &p in &ps {
        let (lo, hi) = (median(p, 0.2), median(p, 1.5));
        parts.push(format!("p{p}:{lo}/{hi}"));
        if lo > 4 * p as u64 || hi <= lo {
            return outcome(false, format!("p={p}: median sigma_n {lo} (d=0.2) vs {hi} (d=1.5)"));
        }
    }
    let took = start.elapsed();
    outcome(
        took < SCALING_BUDGET,
        format!("median sigma_n d=0.2/d=1.5 {} in {:.1?}", parts.join(" "), took),
    )
}

fn fingerprint(r: &SearchResult) -> String {
    let mut stats = r.stats.clone();
    stats.wall_ms = 0.0;
    format!("{:?}|{:?}|{}|{:?}", r.order, r.dag.parents, r.score, stats)
}

fn criterion_10(instances: &[ScoreProvider]) -> Outcome {
    let many = std::thread::available_parallelism().map_or(4, |n| n.get().max(2));
    let run_all = |workers: usize| -> Vec<String> {
        let c1 = SearchConfig {
            workers,
            ..SearchConfig::default()
        };
        let c6 = SearchConfig {
            workers,
            dnc: false,
            ..SearchConfig::default()
        };
        let mut out: Vec<String> = instances.iter().map(|sp| fingerprint(&run_search(sp, &c1).unwrap())).collect();
        for sp in dnc_instances() {
            out.push(fingerprint(&run_search(&sp, &c1).unwrap()));
            out.push(fingerprint(&run_search(&sp, &c6).unwrap()));
        }
        out
    };
    let one = run_all(1);
    let n = run_all(many);
    let same = one == n;
    outcome(same, format!("{} runs identical with 1 and {many} workers", one.len()))
}

fn main() {
    let instances = oracle_instances();
    let want = oracle_scores(&instances);
    let mut failed = 0;
    let mut report = |id: &str, name: &str, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("criterion {id:>2} [{tag}] {name}: {}", o.detail);
    };
    report("1", "oracle equivalence", criterion_1(&instances, &want));
    report("2", "per-rule soundness", criterion_2(&instances, &want));
    report("3", "empty-graph scaling", criterion_3());
    report("4", "matching certificate", criterion_4());
    report("5", "bound sandwich", criterion_5());
    report("6", "divide-and-conquer equivalence", criterion_6());
    report("7", "BGe score equivalence", criterion_7());
    report("8", "scaling regime (bench substitute)", criterion_8());
    println!("criterion  9 [EXCLUDED] real-data result: needs an external search-space pipeline and dataset");
    report("10", "determinism", criterion_10(&instances));
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
