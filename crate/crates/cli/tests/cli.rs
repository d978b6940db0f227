use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
master_seed = 4
budgets = [3]
strategies = ["D-PR", "D-D"]
baselines = ["random", "celf"]
seed_files = true

[graph.synthetic]
nodes = 60
blocks = 3

[dataset]
pairs = 200

[train]
epochs = 5

[evaluation]
replications = 100
repeats = 3
celf_replications = 50
"#;

/// Runs the binary with whitespace-separated `args` inside `dir`.
fn dscom(dir: &Path, args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dscom"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args.split_whitespace())
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &str) -> String {
    let out = dscom(dir, args);
    assert!(
        out.status.success(),
        "dscom {args} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn seed_order(path: &Path) -> Vec<usize> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().next().unwrap().parse().unwrap())
        .collect()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), CONFIG).unwrap();
    dir
}

#[test]
fn stages_reproduce_the_pipeline() {
    let dir = workspace();
    let d = dir.path();
    let summary = ok(d, "--config run.toml --out report pipeline");
    assert!(summary.contains("D-PR"));
    let csv = std::fs::read_to_string(d.join("report/report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);

    ok(d, "--config run.toml --out relation.json train");
    ok(
        d,
        "--config run.toml --out weights.txt extract --relation relation.json",
    );
    let cl = ok(
        d,
        "--config run.toml --out part.txt cluster --weights weights.txt -k 3",
    );
    assert!(cl.contains("3 communities"));
    ok(
        d,
        "--config run.toml --out dpr.txt select --partition part.txt -k 3 --strategy D-PR",
    );
    assert_eq!(
        seed_order(&d.join("dpr.txt")),
        seed_order(&d.join("report/seeds/D-PR_k3.txt"))
    );

    ok(d, "--config run.toml --out random.txt baseline random -k 3");
    assert_eq!(
        seed_order(&d.join("random.txt")),
        seed_order(&d.join("report/seeds/random_k3.txt"))
    );

    let eval = ok(d, "--config run.toml evaluate --seeds dpr.txt");
    let row: Vec<&str> = eval.lines().nth(1).unwrap().split(',').collect();
    let mean: f64 = row[1].parse().unwrap();
    let line = summary.lines().find(|l| l.starts_with("D-PR")).unwrap();
    let reported: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((mean - reported).abs() < 1e-3, "{mean} vs {reported}");
}

#[test]
fn file_based_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let g = "--edges g/edges.txt --features g/features.txt";

    let made = ok(d, "--seed 2 --out g gen-graph --nodes 40 --blocks 2");
    assert!(made.starts_with("40 nodes"));
    ok(
        d,
        &format!("--seed 2 --out m.json gen-model {g} --kind IC --calibration 0.2"),
    );
    let cascades = ok(
        d,
        &format!("--seed 2 --out ds.txt gen-cascades {g} --model m.json --pairs 100"),
    );
    assert!(cascades.starts_with("100 pairs"));
    let trained = ok(
        d,
        &format!("--out rel.json train {g} --dataset ds.txt --epochs 3"),
    );
    assert!(trained.starts_with("3 epochs"));
    ok(
        d,
        &format!("--out gatk.txt baseline gatk {g} -k 2 --relation rel.json --model m.json"),
    );
    assert_eq!(seed_order(&d.join("gatk.txt")).len(), 2);
    let eval = ok(
        d,
        &format!("evaluate {g} --model m.json --seeds gatk.txt -r 50 --repeats 2"),
    );
    assert!(eval.starts_with("seeds_hash,mean,std"));
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = workspace();
    let d = dir.path();
    for args in [
        "--config missing.toml pipeline",
        "select --partition nope.txt -k 2",
        "--config run.toml baseline gatk -k 2",
        "--config run.toml select --partition run.toml -k 2 --strategy D-Q",
        "baseline imm -k 2",
    ] {
        let out = dscom(d, args);
        assert!(!out.status.success(), "{args} should fail");
        assert!(!out.stderr.is_empty(), "{args} printed nothing");
    }
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "budgets = [2]\nbudget = 3\n").unwrap();
    let out = dscom(dir.path(), "--config bad.toml pipeline");
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}
