use dscom_core::harness::{emit_report, run_pipeline, CellOutcome, RunConfig, CSV_HEADER};

fn tiny(strategies: &[&str], baselines: &[&str], budgets: &[usize]) -> RunConfig {
    let mut cfg = RunConfig::from_toml(
        r#"
        master_seed = 7
        [graph.synthetic]
        nodes = 60
        blocks = 4
        [dataset]
        pairs = 200
        [train]
        epochs = 5
        [evaluation]
        replications = 100
        repeats = 3
        celf_replications = 50
        rl_ris_theta = 2000
        "#,
    )
    .unwrap();
    cfg.strategies = strategies.iter().map(|s| s.to_string()).collect();
    cfg.baselines = baselines.iter().map(|s| s.to_string()).collect();
    cfg.budgets = budgets.to_vec();
    cfg
}

#[test]
fn three_line_config_runs_with_defaults() {
    let cfg =
        RunConfig::from_toml("master_seed = 3\nbudgets = [2]\nstrategies = [\"D-D\"]\n").unwrap();
    assert_eq!(cfg.evaluation.replications, 1000);
    assert_eq!(cfg.evaluation.repeats, 10);
    assert_eq!(cfg.dataset.pairs, 1000);
    assert_eq!(cfg.budgets, vec![2]);
    cfg.validate().unwrap();
}

#[test]
fn config_errors() {
    assert!(RunConfig::from_toml("budgets = [0]")
        .unwrap()
        .validate()
        .is_err());
    assert!(RunConfig::from_toml("strategies = [\"D-X\"]")
        .unwrap()
        .validate()
        .is_err());
    assert!(RunConfig::from_toml("baselines = [\"imm\"]")
        .unwrap()
        .validate()
        .is_err());
    assert!(RunConfig::from_toml("no_such_key = 1").is_err());
    assert!(
        RunConfig::from_toml("[graph]\nedges = \"/definitely/missing.txt\"")
            .unwrap()
            .validate()
            .is_err()
    );
}

#[test]
fn config_paths_resolve_next_to_the_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.txt"), "0 1\n1 2\n").unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "[graph]\nedges = \"g.txt\"\n").unwrap();
    let cfg = RunConfig::load(&path).unwrap();
    assert_eq!(
        cfg.graph.edges.as_deref(),
        Some(dir.path().join("g.txt").as_path())
    );
    cfg.validate().unwrap();
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = tiny(&["D-PR", "D-K"], &["random", "celf"], &[3, 5]);
    assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
}

#[test]
fn two_cells_within_range() {
    let report = run_pipeline(&tiny(&["D-PR"], &["random"], &[5])).unwrap();
    assert_eq!(report.cells.len(), 2);
    for c in &report.cells {
        let mean = c
            .mean()
            .unwrap_or_else(|| panic!("{} failed: {:?}", c.method, c.outcome));
        assert!((5.0..=60.0).contains(&mean), "{} {mean}", c.method);
    }
}

#[test]
fn identical_runs_have_identical_bodies() {
    let cfg = tiny(&["D-PR", "D-D"], &["random", "spec-pr", "gatk"], &[3]);
    let a = run_pipeline(&cfg).unwrap();
    let b = run_pipeline(&cfg).unwrap();
    assert_eq!(a.body(), b.body());
    assert!(!a.body().contains("timings"));
}

#[test]
fn every_selector_fills_its_cell() {
    let report = run_pipeline(&tiny(
        &["D-D", "D-K", "D-PR", "D-C"],
        &["random", "celf", "gatk", "spec-pr", "rl-ris"],
        &[4],
    ))
    .unwrap();
    assert_eq!(report.cells.len(), 9);
    for c in &report.cells {
        match &c.outcome {
            CellOutcome::Done { seeds, std, .. } => {
                assert_eq!(seeds.len(), 4, "{}", c.method);
                assert!(*std >= 0.0);
            }
            CellOutcome::Failed(r) => panic!("{} failed: {r}", c.method),
        }
    }
    assert!(report.ncut.contains_key(&4));
    assert!(report.training.as_ref().unwrap().weight_spearman.is_some());
}

#[test]
fn strategy_order_only_permutes_rows() {
    let a = run_pipeline(&tiny(&["D-PR", "D-D"], &["random"], &[3])).unwrap();
    let b = run_pipeline(&tiny(&["D-D", "D-PR"], &["random"], &[3])).unwrap();
    for c in &a.cells {
        let other = b.cell(&c.method, c.k).unwrap();
        assert_eq!(c.mean(), other.mean());
        assert_eq!(c.seeds(), other.seeds());
    }
}

#[test]
fn budgets_do_not_perturb_other_stages() {
    let a = run_pipeline(&tiny(&["D-PR"], &["random"], &[3])).unwrap();
    let b = run_pipeline(&tiny(&["D-PR"], &["random"], &[5, 3])).unwrap();
    assert_eq!(
        a.training.as_ref().unwrap().final_loss,
        b.training.as_ref().unwrap().final_loss
    );
    assert_eq!(
        a.cell("D-PR", 3).unwrap().seeds(),
        b.cell("D-PR", 3).unwrap().seeds()
    );
    assert_eq!(
        a.cell("random", 3).unwrap().seeds(),
        b.cell("random", 3).unwrap().seeds()
    );
}

#[test]
fn csv_shapes() {
    let dir = tempfile::tempdir().unwrap();

    let empty = run_pipeline(&tiny(&[], &[], &[3])).unwrap();
    assert!(empty.training.is_none());
    emit_report(&empty, dir.path(), false).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv, format!("{CSV_HEADER}\n"));

    let full = run_pipeline(&tiny(&["D-D", "D-PR"], &["random", "spec-pr"], &[2, 4])).unwrap();
    let files = emit_report(&full, dir.path(), true).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert!(f[3].parse::<f64>().unwrap() >= 0.0, "{row}");
    }
    assert!(files.iter().any(|p| p.ends_with("seeds/D-PR_k4.txt")));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.starts_with(&full.body()));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let report = run_pipeline(&tiny(&[], &["random"], &[2])).unwrap();
    assert!(emit_report(&report, &blocker.join("sub"), false).is_err());
}
