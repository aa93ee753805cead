use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinvtte"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_is_byte_identical_and_thread_independent() {
    let args = [
        "simulate",
        "--graph",
        "cycle:n=30,r=2",
        "--model",
        "cycle:beta=1",
        "--clustering",
        "cycle:w=3",
        "--clustering",
        "singleton",
        "--p",
        "0.3",
        "--replicates",
        "80",
        "--seed",
        "5",
    ];
    let a = stdout(&args);
    let mut single = args.to_vec();
    single.extend(["--threads", "1"]);
    assert_eq!(a, stdout(&single));
    assert!(a
        .lines()
        .next()
        .unwrap()
        .starts_with("graph,model,clustering"));
    assert!(a.contains("# seed=5\n"));
    assert!(a.lines().last().unwrap().starts_with("# git_describe="));
    assert!(!a.contains("wall_seconds"));
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "graph = \"cycle:n=20,r=1\"\nmodel = \"cycle:beta=1\"\nclustering = [\"cycle:w=2\"]\np = 0.25\nreplicates = 30\nseed = 1\n",
    )
    .unwrap();
    let from_config = stdout(&["simulate", "--config", path(&cfg)]);
    let explicit = stdout(&[
        "simulate",
        "--graph",
        "cycle:n=20,r=1",
        "--model",
        "cycle:beta=1",
        "--clustering",
        "cycle:w=2",
        "--p",
        "0.25",
        "--replicates",
        "30",
        "--seed",
        "1",
    ]);
    assert_eq!(from_config, explicit);
    let overridden = stdout(&["simulate", "--config", path(&cfg), "--seed", "2"]);
    assert!(overridden.contains("# seed=2\n"));
}

#[test]
fn generated_files_feed_back_in() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, clusters, model) = (
        dir.path().join("g.tsv"),
        dir.path().join("c.tsv"),
        dir.path().join("m.tsv"),
    );
    fs::write(&edges, "# ring\nn=6\n0\t1\n1\t2\n2\t3\n3\t4\n4\t5\n5\t0\n").unwrap();
    stdout(&[
        "cluster",
        "--graph",
        path(&edges),
        "--method",
        "cycle",
        "--width",
        "2",
        "-o",
        path(&clusters),
    ]);
    stdout(&[
        "model",
        "gen",
        "--graph",
        path(&edges),
        "--kind",
        "cycle",
        "--beta-star",
        "1",
        "-o",
        path(&model),
    ]);
    let oracle = stdout(&[
        "oracle",
        "--graph",
        path(&edges),
        "--model",
        path(&model),
        "--clustering",
        path(&clusters),
        "--p",
        "0.5",
        "--estimator",
        "pinv",
        "--estimator",
        "ht",
    ]);
    let mut rows = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(oracle.as_bytes());
    for rec in rows.records() {
        let rec = rec.unwrap();
        let bias: f64 = rec[4].parse().unwrap();
        assert!(bias.abs() < 1e-12, "{rec:?}");
    }
}

#[test]
fn estimate_reads_observed_data() {
    let dir = tempfile::tempdir().unwrap();
    let (y, z) = (dir.path().join("y.tsv"), dir.path().join("z.tsv"));
    fs::write(&y, "0 1.0\n1 0.0\n").unwrap();
    fs::write(&z, "0 1\n1 0\n").unwrap();
    let out = stdout(&[
        "estimate",
        "--graph",
        "cycle:n=2,r=0",
        "--design",
        "bern",
        "--p",
        "0.5",
        "--outcomes",
        path(&y),
        "--treatment",
        path(&z),
        "--weights",
    ]);
    // unit 0 treated: weight 1/p = 2; unit 1 control: weight -1/(1-p) = -2
    assert!(out.contains("tte_hat,,1.0\n"), "{out}");
    assert!(out.contains("weight,1,-2.0\n"), "{out}");
}

#[test]
fn bounds_and_select_emit_rows() {
    let out = stdout(&[
        "bounds",
        "--graph",
        "cycle:n=24,r=1",
        "--clustering",
        "singleton",
        "--clustering",
        "cycle:w=3",
        "--p",
        "0.25",
        "--B-bound",
        "1",
    ]);
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 3);
    let sel = stdout(&[
        "select",
        "--graph",
        "sbm:n=40,blocks=2,pin=0.6,pout=0,seed=3",
        "--candidate",
        "singleton",
        "--louvain-grid",
        "1",
        "--p",
        "0.25",
        "--B-bound",
        "1",
    ]);
    assert!(sel.contains("# chosen=1\n"), "{sel}");
}

#[test]
fn bad_input_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.tsv");
    fs::write(&edges, "n=3\n0 1\n1 7\n").unwrap();
    let out = run(&["cluster", "--graph", path(&edges), "--method", "singleton"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
    let out = run(&[
        "simulate",
        "--graph",
        "cycle:n=10,r=1",
        "--model",
        "weak",
        "--clustering",
        "singleton",
        "--design",
        "crd",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--k"));
}
