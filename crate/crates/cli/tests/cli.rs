use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use grouptest_cli::config::ExperimentConfig;
use grouptest_cli::pipeline::{CheckOutcome, RESULTS_HEADER};
use grouptest_cli::run_experiment;
use grouptest_cli::sweep::{expand_base, sweep, SUMMARY_HEADER};
use num_rational::Ratio;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grouptest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const IDENTITY: &str = r#"
name = "identity"
seed = 1
d = 2

[construction]
name = "identity"
n = 4

[decoder]
name = "trivial"
"#;

const KAUTZ_SINGLETON: &str = r#"
name = "ks"
seed = 3
d = 2

[construction]
name = "kautz_singleton"
q = 5
msg_len = 2

[[claim]]
property = "disjunct"
e = 2

[noise]
mode = "exhaustive"
budget = 1

[decoder]
name = "noisy_trivial"
noise_threshold = 1
"#;

#[test]
fn identity_recovers_everything_noiselessly() {
    let r = run_experiment(&ExperimentConfig::from_toml(IDENTITY).unwrap()).unwrap();
    // all supports of size 0..=2 out of 4 items
    assert_eq!(r.rows.len(), 11);
    assert!(r.rows.iter().all(|t| t.success && t.false_positives == 0));
    assert_eq!(r.failed_claims(), 0);
}

#[test]
fn kautz_singleton_survives_every_single_flip() {
    let r = run_experiment(&ExperimentConfig::from_toml(KAUTZ_SINGLETON).unwrap()).unwrap();
    match &r.reports[..] {
        [CheckOutcome::Checked(rep)] => {
            assert!(rep.holds);
            assert_eq!(rep.extremal_count(), Some(2));
        }
        other => panic!("unexpected reports {other:?}"),
    }
    // 326 vectors, each with the clean outcome and 25 single flips
    assert_eq!(r.rows.len(), 326 * 26);
    assert!(r.rows.iter().all(|t| t.success));
    assert!(r.rows.iter().any(|t| t.e0 == 1) && r.rows.iter().any(|t| t.e1 == 1));
}

#[test]
fn extractor_regime_bounds_false_positives() {
    // certified distance 23/60 on 10-sets; d t = 3 < |R| (1 - ε) / 2 = 3.7
    let config = ExperimentConfig::from_toml(
        r#"
name = "extractor"
seed = 5
d = 1

[construction]
name = "random_regular"
n_left = 20
n_right = 12
t = 3

[[claim]]
property = "extractor"
k = 10
epsilon = 0.3834
"#,
    )
    .unwrap();
    let r = run_experiment(&config).unwrap();
    let CheckOutcome::Checked(rep) = &r.reports[0] else {
        panic!()
    };
    assert!(rep.holds, "{rep}");
    let eps = rep.extremal_ratio().unwrap();
    assert_eq!(eps, Ratio::new(23, 60));
    let (d, t, m, k) = (1u64, 3u64, 12u64, 10usize);
    assert!(
        Ratio::from_integer(d * t) < Ratio::from_integer(m) * (Ratio::from_integer(1) - eps) / 2
    );
    assert_eq!(r.rows.len(), 21);
    for row in &r.rows {
        assert_eq!(row.false_negatives, 0);
        assert!(row.false_positives < k - d as usize, "{row:?}");
    }
}

#[test]
fn false_claim_sets_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let bad = IDENTITY.replace(
        "[decoder]",
        "[[claim]]\nproperty = \"disjunct\"\nd = 1\ne = 1\n\n[decoder]",
    );
    let cfg = write(dir.path(), "bad.toml", &bad);
    let out = bin(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("holds = false"));
    assert!(text.contains("witness = i=1 S=0"), "{text}");

    let good = write(dir.path(), "good.toml", KAUTZ_SINGLETON);
    assert_eq!(bin(&["certify", "--config", &good]).status.code(), Some(0));
    let broken = write(dir.path(), "broken.toml", "seed = 1\n");
    assert_eq!(bin(&["run", "--config", &broken]).status.code(), Some(2));
}

#[test]
fn oversized_checks_are_skipped_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ks.toml", KAUTZ_SINGLETON);
    let out = bin(&["certify", "--config", &cfg, "--max-subsets", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("status = skipped-infeasible"), "{text}");

    let out = bin(&[
        "certify",
        "--config",
        &cfg,
        "--max-subsets",
        "10",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("schema,property,status,"));
    assert!(text.contains("gt-reports-v1,disjunct,skipped-infeasible"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let noisy = KAUTZ_SINGLETON.replace(
        "mode = \"exhaustive\"\nbudget = 1",
        "mode = \"stochastic\"\np0 = 0.05\np1 = 0.05\nrepeats = 3",
    );
    let cfg = write(dir.path(), "ks.toml", &noisy);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = bin(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    for f in ["graph.gt1", "graph.meta", "reports.kv", "results.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let csv = fs::read_to_string(a.join("results.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), RESULTS_HEADER.join(","));
    assert!(csv
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("gt-results-v1,ks,3,0,25,"));
}

#[test]
fn graph_files_feed_simulate_and_decode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ks.toml", KAUTZ_SINGLETON);
    let out = dir.path().join("g");
    assert!(
        bin(&["build", "--config", &cfg, "--out", out.to_str().unwrap()])
            .status
            .success()
    );
    let graph = out.join("graph.gt1");
    let meta = fs::read_to_string(out.join("graph.meta")).unwrap();
    assert!(meta.starts_with("construction = kautz_singleton\n"));

    let sim = bin(&[
        "simulate",
        "--graph",
        graph.to_str().unwrap(),
        "--support",
        "3,17",
        "--e1",
        "1",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(sim.status.success());
    let dec = bin(&[
        "decode",
        "--graph",
        graph.to_str().unwrap(),
        "--outcome",
        out.join("outcome.txt").to_str().unwrap(),
        "--decoder",
        "noisy-trivial",
        "--noise-threshold",
        "1",
    ]);
    assert!(dec.status.success());
    let record: serde_json::Value = serde_json::from_slice(&dec.stdout).unwrap();
    assert_eq!(record["support"], serde_json::json!([3, 17]));
    assert_eq!(record["decoder"], "noisy_trivial");
    assert_eq!(record["graph_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn empty_sweep_is_just_the_header() {
    let s = sweep(Vec::new());
    assert_eq!(s.csv().unwrap(), format!("{}\n", SUMMARY_HEADER.join(",")));
}

const BERNOULLI: &str = r#"
name = "bern"
seed = 0
d = 2

[construction]
name = "bernoulli"
n = 16
m = 40

[[claim]]
property = "disjunct"
e = 0

[simulation]
vectors = "random"
count = 20
"#;

#[test]
fn seed_sweep_reports_extremal_per_seed() {
    let base = ExperimentConfig::from_toml(BERNOULLI).unwrap();
    let s = sweep(expand_base(&base, &[1, 2, 3], &[]));
    assert_eq!(s.rows.len(), 3);
    for (row, seed) in s.rows.iter().zip(["1", "2", "3"]) {
        assert_eq!(row.seed, seed);
        assert_eq!(row.property, "disjunct");
        // the extremal tolerance matches a direct certification
        let mut c = base.clone();
        c.seed = seed.parse().unwrap();
        let g = grouptest_cli::pipeline::build(&c).unwrap().graph;
        let r = grouptest::verify::check_disjunct(&g, 2, 0, &grouptest::Limits::default()).unwrap();
        assert_eq!(row.extremal, r.extremal.unwrap().to_string());
    }
}

#[test]
fn m_sweep_isolates_errors_and_keeps_order() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bern.toml", BERNOULLI);
    write(dir.path(), "broken.toml", "not toml at all [");
    let sweep_path = write(
        dir.path(),
        "sweep.toml",
        "configs = [\"broken.toml\"]\nbase = \"bern.toml\"\nseeds = [7]\nm_values = [10, 40, 80]\n",
    );
    let out = bin(&["sweep", "--config", &sweep_path]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("gt-sweep-v1,broken.toml,"));
    let extremal: Vec<i64> = lines[2..]
        .iter()
        .map(|l| l.split(',').nth(10).unwrap().parse().unwrap())
        .collect();
    assert!(extremal.windows(2).all(|w| w[0] <= w[1]), "{extremal:?}");
    assert!(lines[2].starts_with("gt-sweep-v1,bern-s7-m10,7,bernoulli,16,10,"));
}
