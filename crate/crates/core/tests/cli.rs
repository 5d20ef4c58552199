use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn qpfix(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpfix")).args(args).arg("--output-dir").arg(out).output().expect("binary runs")
}

fn run(sub: &str, cfg: &str, extra: &[&str], out: &Path) -> Output {
    let path = config(cfg);
    let mut args = vec![sub, "--config", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    qpfix(&args, out)
}

fn report(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn solve_pair_example_converges() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("solve", "pair_max_affine.json", &[], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let mut rdr = csv::Reader::from_path(dir.path().join("trace.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["n", "x", "y", "phi_x", "phi_y", "step_x", "step_y", "scheme_phase"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let last = rows.last().unwrap();
    for col in [1, 2] {
        let v: f64 = last[col].parse().unwrap();
        assert!((1.0 - v).abs() <= 1e-9, "{v}");
    }
    assert_eq!(&rows[0][7], "seed");
    assert_eq!(report(dir.path())["report"]["status"], "converged");
}

#[test]
fn planted_triangle_violation_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("check-space", "planted_triangle_violation.json", &[], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let v = &report(dir.path())["axioms"]["triangle_violations"];
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!((v[0]["x"].as_u64(), v[0]["y"].as_u64(), v[0]["z"].as_u64()), (Some(0), Some(1), Some(2)));
}

#[test]
fn hypothesis_violation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("solve", "pair_contracting_g.json", &[], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let rep = report(dir.path());
    assert_eq!(rep["report"]["status"], "hypothesis_violated");
    assert_eq!(rep["report"]["violation"]["condition"], "C1");
}

#[test]
fn fuzz_compare_needs_seed_and_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("compare", "fuzz_finite.json", &[], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));

    let o = run("compare", "fuzz_finite.json", &["--seed", "42"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(dir.path())["campaign"]["disagreements"], 0);
}

#[test]
fn finite_instance_pipeline() {
    for (sub, code) in [("check-order", 0), ("check-relations", 0), ("oracle", 0), ("compare", 0), ("solve", 0)] {
        let dir = tempfile::tempdir().unwrap();
        let o = run(sub, "finite_chain_oracle.json", &[], dir.path());
        assert_eq!(o.status.code(), Some(code), "{sub}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let dir = tempfile::tempdir().unwrap();
    run("oracle", "finite_chain_oracle.json", &[], dir.path());
    let sets = &report(dir.path())["sets"];
    assert_eq!(sets["E3"]["table"], serde_json::json!([[3, 3]]));
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qpfix(&["frobnicate"], dir.path()).status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"schema": "1", "space": {"id": "upper_interval"}, "solver": {"tol": 1e-9, "tolerance": 1}}"#)
        .unwrap();
    let o = qpfix(&["solve", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tolerance"));

    fs::write(&bad, r#"{"schema": "1", "space": {"id": "klein_bottle"}, "maps": [{"id": "coupled_max"}]}"#).unwrap();
    let o = qpfix(&["solve", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = qpfix(&["solve", "--config", "/nonexistent/config.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for cfg in ["triple_max_pull_sqrt.json", "single_affine.json"] {
        run("solve", cfg, &[], a.path());
        run("solve", cfg, &[], b.path());
        for file in ["report.json", "trace.csv"] {
            assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{cfg} {file}");
        }
    }
    run("compare", "fuzz_finite.json", &["--seed", "7"], a.path());
    run("compare", "fuzz_finite.json", &["--seed", "7"], b.path());
    assert_eq!(fs::read(a.path().join("report.json")).unwrap(), fs::read(b.path().join("report.json")).unwrap());
}
