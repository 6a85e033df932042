use std::path::PathBuf;
use std::process::Command;

use convex_oracles::cli::run;

fn body_file(name: &str, json: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("convex-oracles-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn args(list: &[&str]) -> Vec<String> {
    std::iter::once("convex-oracles")
        .chain(list.iter().copied())
        .map(String::from)
        .collect()
}

#[test]
fn separate_is_deterministic_and_separates() {
    let body = body_file(
        "ball2.json",
        r#"{"kind": "ball", "center": [0, 0], "radius": 1}"#,
    );
    let a = args(&[
        "separate",
        "--body",
        body.to_str().unwrap(),
        "--point",
        "2,0",
        "--seed",
        "7",
    ]);
    let first = run(a.clone());
    let second = run(a);
    assert_eq!(first.code, 0, "{}", first.stderr);
    assert_eq!(first, second);
    let v: serde_json::Value = serde_json::from_str(&first.stdout).unwrap();
    assert_eq!(v["result"]["answer"], "separated");
}

#[test]
fn optimize_reports_value() {
    let body = body_file(
        "ball3.json",
        r#"{"kind": "ball", "center": [0, 0, 0], "radius": 1}"#,
    );
    let out = run(args(&[
        "optimize",
        "--body",
        body.to_str().unwrap(),
        "--objective",
        "1,0,0",
        "--eps",
        "0.01",
    ]));
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert!(v["report"]["optimize"]["value"].as_f64().unwrap() >= 0.99);
}

#[test]
fn eval_h_and_polar_check_run() {
    let body = body_file(
        "ball3h.json",
        r#"{"kind": "ball", "center": [0, 0, 0], "radius": 1}"#,
    );
    let out = run(args(&[
        "eval-h",
        "--body",
        body.to_str().unwrap(),
        "--y",
        "0.3,-0.2",
    ]));
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let exact = -(1.0f64 - 0.13).sqrt();
    assert!((v["value"].as_f64().unwrap() - exact).abs() <= 1e-3);

    let square = body_file(
        "box2.json",
        r#"{"kind": "box", "lower": [-1, -1], "upper": [1, 1]}"#,
    );
    let out = run(args(&[
        "polar-check",
        "--body",
        square.to_str().unwrap(),
        "--queries",
        "200",
    ]));
    assert_eq!(out.code, 0, "{}", out.stderr);
}

#[test]
fn jordan_demo_formats() {
    let json = run(args(&[
        "jordan-demo",
        "--gradient",
        "0.3,-0.2",
        "--shots",
        "100",
    ]));
    assert_eq!(json.code, 0, "{}", json.stderr);
    serde_json::from_str::<serde_json::Value>(&json.stdout).unwrap();
    let csv = run(args(&[
        "jordan-demo",
        "--gradient",
        "0.3,-0.2",
        "--format",
        "csv",
    ]));
    assert_eq!(csv.code, 0);
    assert!(csv.stdout.lines().count() > 1);
    let bad = run(args(&["jordan-demo", "--gradient", "0.7,0"]));
    assert_eq!(bad.code, 1);
}

#[test]
fn verify_adversary_prints_pass_lines() {
    let out = run(args(&["hardness", "verify-adversary", "--n", "6"]));
    assert_eq!(out.code, 0, "{}", out.stderr);
    let passes = out.stdout.lines().filter(|l| l.starts_with("PASS")).count();
    assert_eq!(passes, 3, "{}", out.stdout);
    assert!(!out.stdout.contains("FAIL"));
}

#[test]
fn first_diff_bench_csv() {
    let out = run(args(&[
        "hardness",
        "first-diff-bench",
        "--n",
        "12",
        "--trials",
        "20",
        "--seed",
        "3",
    ]));
    assert_eq!(out.code, 0, "{}", out.stderr);
    let mut lines = out.stdout.lines();
    assert_eq!(lines.next(), Some("n,seed,trial,queries,recovered"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert!(cols[3].parse::<u64>().unwrap() <= 13);
        assert_eq!(cols[4], "true");
    }
}

#[test]
fn bench_queries_grow_with_dimension() {
    let out = run(args(&["bench-queries", "--n", "2..5", "--body", "box"]));
    assert_eq!(out.code, 0, "{}", out.stderr);
    let mut lines = out.stdout.lines();
    assert_eq!(
        lines.next(),
        Some("reduction,body,n,eta,rho,seed,mem,sep,phase_queries,height_evaluations")
    );
    let mem: Vec<u64> = lines
        .map(|l| l.split(',').nth(6).unwrap().parse().unwrap())
        .collect();
    assert_eq!(mem.len(), 4);
    assert!(mem.windows(2).all(|w| w[0] < w[1]), "{mem:?}");
}

#[test]
fn exit_codes() {
    assert_eq!(run(args(&["--help"])).code, 0);
    assert_eq!(run(args(&["no-such-command"])).code, 1);
    let missing = run(args(&[
        "separate",
        "--body",
        "/nonexistent/body.json",
        "--point",
        "1,0",
    ]));
    assert_eq!(missing.code, 1);
    assert!(missing.stdout.is_empty());
    let big = run(args(&[
        "bench-queries",
        "--reduction",
        "sep-from-mem-quantum",
        "--n",
        "4",
    ]));
    assert_eq!(big.code, 2, "{}", big.stderr);
    assert!(big.stdout.is_empty());
}

#[test]
fn binary_matches_library() {
    let bin = env!("CARGO_BIN_EXE_convex-oracles");
    let out = Command::new(bin)
        .args(["hardness", "first-diff-bench", "--n", "8", "--trials", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let lib = run(args(&[
        "hardness",
        "first-diff-bench",
        "--n",
        "8",
        "--trials",
        "5",
    ]));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), lib.stdout);

    let bad = Command::new(bin)
        .args(["separate", "--body", "/nonexistent.json", "--point", "0"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8(bad.stderr).unwrap().starts_with("error:"));
}
