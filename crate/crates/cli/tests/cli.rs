use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn exactdag(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exactdag"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run binary")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = exactdag(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stats(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn all_zero_file(p: usize) -> String {
    let mut s = format!("{p}\n");
    for i in 0..p {
        s += &format!("V{i} {}\n0 0\n", p);
        for j in (0..p).filter(|&j| j != i) {
            s += &format!("0 1 V{j}\n");
        }
    }
    s
}

#[test]
fn two_node_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.txt"), "2\nA 2\n0 0\n1 1 B\nB 2\n0 0\n1 1 A\n").unwrap();
    ok(
        &["learn", "--scores", "s.txt", "--out-dag", "g.csv", "--out-dot", "g.dot", "--out-stats", "st.json"],
        dir.path(),
    );
    let csv = fs::read_to_string(dir.path().join("g.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(stats(dir.path(), "st.json")["score"], 1.0);
    assert!(fs::read_to_string(dir.path().join("g.dot")).unwrap().contains("->"));
}

#[test]
fn all_zero_sigma_equals_p() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("z.txt"), all_zero_file(10)).unwrap();
    ok(&["learn", "--scores", "z.txt", "--out-stats", "st.json"], dir.path());
    let st = stats(dir.path(), "st.json");
    assert_eq!(st["stats"]["sigma_n"], 10);
    assert_eq!(st["edges"], 0);
}

#[test]
fn pruning_flags_keep_the_score() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "--p", "6", "--density", "1.5", "--n", "200", "--seed", "4", "--out-data", "x.csv"], d);
    ok(&["score", "--data", "x.csv", "--max-parents", "3", "--out", "s.txt"], d);
    let runs: [&[&str]; 5] = [
        &[],
        &["--no-prune"],
        &["--no-bounds", "--no-dnc"],
        &["--disable-rule", "4", "--disable-rule", "u1", "--workers", "1"],
        &["--direction", "back", "--no-dnc"],
    ];
    let mut scores = Vec::new();
    for (k, extra) in runs.iter().enumerate() {
        let out = format!("st{k}.json");
        let mut args = vec!["learn", "--scores", "s.txt", "--out-stats", out.as_str()];
        args.extend_from_slice(extra);
        ok(&args, d);
        scores.push(stats(d, &out)["score"].as_f64().unwrap());
    }
    for s in &scores {
        assert!((s - scores[0]).abs() <= 1e-9 * scores[0].abs(), "{scores:?}");
    }
}

// The reported score is the sum of the local scores of the written edges.
#[test]
fn score_matches_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "--p", "5", "--density", "1", "--n", "100", "--seed", "9", "--out-data", "x.csv"], d);
    ok(&["score", "--data", "x.csv", "--out", "s.txt"], d);
    ok(&["learn", "--scores", "s.txt", "--out-dag", "g.csv", "--out-stats", "st.json"], d);
    let text = fs::read_to_string(d.join("s.txt")).unwrap();
    let mut lines = text.lines().skip(1);
    let mut table: Vec<(String, Vec<(f64, Vec<String>)>)> = Vec::new();
    while let Some(h) = lines.next() {
        let mut t = h.split_whitespace();
        let name = t.next().unwrap().to_string();
        let count: usize = t.next().unwrap().parse().unwrap();
        let rows = (0..count)
            .map(|_| {
                let toks: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
                let mut pa: Vec<String> = toks[2..].iter().map(|s| s.to_string()).collect();
                pa.sort();
                (toks[0].parse().unwrap(), pa)
            })
            .collect();
        table.push((name, rows));
    }
    let edges = fs::read_to_string(d.join("g.csv")).unwrap();
    let mut total = 0.0;
    for (name, rows) in &table {
        let mut pa: Vec<String> = edges
            .lines()
            .skip(1)
            .filter_map(|l| l.split_once(','))
            .filter(|(c, _)| c == name)
            .map(|(_, q)| q.to_string())
            .collect();
        pa.sort();
        total += rows.iter().find(|r| r.1 == pa).expect("parent set listed").0;
    }
    let reported = stats(d, "st.json")["score"].as_f64().unwrap();
    assert!((total - reported).abs() <= 1e-9 * reported.abs(), "{total} vs {reported}");
}

#[test]
fn learn_from_data_with_space() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "--p", "4", "--density", "1", "--n", "100", "--seed", "2", "--out-data", "x.csv"], d);
    fs::write(
        d.join("space.json"),
        r#"{"X1": {"preselected": ["X2"], "plus1": true}, "X2": {"preselected": [], "plus1": true},
            "X3": {"preselected": ["X4"], "plus1": false}, "X4": {"preselected": [], "plus1": true}}"#,
    )
    .unwrap();
    ok(&["learn", "--data", "x.csv", "--space", "space.json", "--out-order", "o.txt"], d);
    let order = fs::read_to_string(d.join("o.txt")).unwrap();
    assert_eq!(order.lines().count(), 4);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["a", "b"] {
        let data = format!("{out}.csv");
        let truth = format!("{out}_truth.csv");
        ok(
            &["simulate", "--p", "7", "--density", "1.2", "--n", "50", "--seed", "3", "--random-sign",
              "--out-data", data.as_str(), "--out-truth", truth.as_str()],
            d,
        );
    }
    for f in [".csv", "_truth.csv"] {
        let a = fs::read(d.join(format!("a{f}"))).unwrap();
        let b = fs::read(d.join(format!("b{f}"))).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn empty_grid_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("grid.json"), r#"{"p": [], "density": [0.5], "seeds": 2}"#).unwrap();
    ok(&["bench", "--grid-file", "grid.json", "--out-csv", "b.csv"], d);
    let csv = fs::read_to_string(d.join("b.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("p,density,seed,score,sigma_n"));
}

#[test]
fn small_grid_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("grid.json"), r#"{"p": [6], "density": [0.5, 1.5], "seeds": [1, 2]}"#).unwrap();
    ok(&["bench", "--grid-file", "grid.json", "--out-csv", "b.csv"], d);
    assert_eq!(fs::read_to_string(d.join("b.csv")).unwrap().lines().count(), 5);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // each node only admits the other as parent: no DAG exists
    fs::write(d.join("cyc.txt"), "2\nA 1\n0 1 B\nB 1\n0 1 A\n").unwrap();
    assert_eq!(exactdag(&["learn", "--scores", "cyc.txt"], d).status.code(), Some(2));
    fs::write(d.join("bad.txt"), "2\nA 1\n").unwrap();
    let out = exactdag(&["learn", "--scores", "bad.txt"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    assert_eq!(exactdag(&["learn", "--scores", "missing.txt"], d).status.code(), Some(1));
}
