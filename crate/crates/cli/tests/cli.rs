use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cim-ising"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(str::to_string).collect()
}

#[test]
fn generate_writes_exact_gset() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("edge.txt");
    let o = run(&["generate", "--n", "2", "--density", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "2 1\n1 2 1\n");
}

#[test]
fn generate_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["a.txt", "b.txt"].iter().map(|f| dir.path().join(f)).collect();
    for p in &paths {
        let o = run(&[
            "generate", "--n", "60", "--density", "0.2", "--wmin", "-3", "--wmax", "3", "--seed", "11",
            "--out", p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

#[test]
fn solve_writes_reports_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for name in ["one", "two"] {
        let out = dir.path().join(name);
        let o = run(&[
            "solve", "--generate", "40,0.2,-2,2,5", "--repetitions", "3", "--seed", "7", "--set",
            "sb.max_iters=150", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        for f in ["report.csv", "aggregate.csv", "config.toml", "traces/run-000.json"] {
            assert!(out.join(f).exists(), "{f} missing");
        }
        let cfg = std::fs::read_to_string(out.join("config.toml")).unwrap();
        assert!(cfg.contains("max_iters = 150"));
        // Drop wall time, the last column.
        let rows: Vec<String> = csv_rows(&out.join("report.csv"))
            .into_iter()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect();
        assert_eq!(rows.len(), 3);
        reports.push(rows);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let out = out.to_str().unwrap();
    let missing = run(&["solve", "--instance", "/nonexistent/graph.txt", "--out", out]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!missing.stderr.is_empty());
    let bad = run(&["solve", "--generate", "8,0.5,1,1,0", "--delta", "-1", "--out", out]);
    assert_eq!(bad.status.code(), Some(1));
    let unknown = run(&["solve", "--generate", "8,0.5,1,1,0", "--set", "sb.no_such_key=1", "--out", out]);
    assert_eq!(unknown.status.code(), Some(1));
    let flag = run(&["solve", "--bogus"]);
    assert_eq!(flag.status.code(), Some(1));
    let ok = run(&["solve", "--generate", "8,0.5,1,1,0", "--repetitions", "1", "--out", out]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn compare_init_with_one_repetition_has_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    let o = run(&[
        "compare-init", "--generate", "30,0.2,1,1,2", "--repetitions", "1", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&out.join("compare.csv")).len(), 2);
    assert!(out.join("compare.json").exists());
}

#[test]
fn sweep_interval_emits_eight_rows_and_eighty_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = run(&[
        "sweep-interval", "--generate", "24,0.5,-1,1,3", "--runs", "10", "--max-iters", "100", "--sa-sweeps",
        "100", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("sweep.csv"));
    assert_eq!(rows.len(), 8);
    assert!(rows[7].contains(",sa,"));
    let runs = csv_rows(&out.join("sweep_runs.csv"));
    assert_eq!(runs.iter().filter(|r| !r.contains(",sa,")).count(), 70);
    assert_eq!(runs.len(), 80);
}
