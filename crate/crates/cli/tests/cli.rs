use std::path::Path;
use std::process::{Command, Output};

use satscape::fixtures::GOLDEN_DIMACS;

fn satscape(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satscape"))
        .args(args)
        .env_remove("SATSCAPE_STATE_CAP")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn golden_file(dir: &Path) -> String {
    let p = dir.join("golden.cnf");
    std::fs::write(&p, GOLDEN_DIMACS).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn gen_writes_dimacs_with_provenance() {
    let d = tempfile::tempdir().unwrap();
    let path = d.path().join("f.cnf");
    let p = path.to_str().unwrap();
    let out = satscape(&["gen", "uniform", "--vars", "100", "--clauses", "430", "--seed", "7", "-o", p]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed: 7"));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("c provenance: "));
    let f = satscape::dimacs::parse_dimacs(&text).unwrap();
    assert_eq!((f.num_vars(), f.num_clauses()), (100, 430));
    assert_eq!(f, satscape::generate::gen_uniform(430, 100, 7).unwrap());
}

#[test]
fn gen_is_reproducible_from_echoed_seed() {
    let a = satscape(&["gen", "hard-solvable", "--vars", "20", "--clauses", "80"]);
    let stderr = String::from_utf8_lossy(&a.stderr);
    let seed = stderr
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .expect("seed echoed")
        .to_string();
    let b = satscape(&["gen", "hard-solvable", "--vars", "20", "--clauses", "80", "--seed", &seed]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn gen_cluster() {
    let out = satscape(&[
        "gen", "cluster", "--vars", "10", "--clauses", "30", "--clusters", "4", "--linking", "5", "--seed", "1",
    ]);
    assert!(out.status.success());
    let f = satscape::dimacs::parse_dimacs(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!((f.num_vars(), f.num_clauses()), (40, 125));
}

#[test]
fn solve_prints_model() {
    let d = tempfile::tempdir().unwrap();
    let g = golden_file(d.path());
    let out = satscape(&["solve", &g]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "s SATISFIABLE\nv 1 2 3 4 0\n");
}

#[test]
fn gsat_success_and_failure_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let g = golden_file(d.path());
    let trace = d.path().join("t.jsonl");
    let out = satscape(&["gsat", &g, "--seed", "3", "--trace", trace.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["found"], "1111");
    let lines = std::fs::read_to_string(&trace).unwrap();
    for l in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert!(v["poss_flips"].as_u64().unwrap() >= 1);
    }

    let unsat = d.path().join("unsat.cnf");
    std::fs::write(&unsat, satscape::dimacs::emit_dimacs(&satscape::fixtures::all_sign_patterns())).unwrap();
    let out = satscape(&["gsat", unsat.to_str().unwrap(), "--seed", "1", "--max-tries", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_json(&out)["found"].is_null());
}

#[test]
fn sample_state_hits_level() {
    let d = tempfile::tempdir().unwrap();
    let g = golden_file(d.path());
    let out = satscape(&["sample-state", &g, "--level", "1", "--seed", "9"]);
    assert!(out.status.success());
    let s: satscape::Assignment = stdout_json(&out)["state"].as_str().unwrap().parse().unwrap();
    assert_eq!(satscape::fixtures::golden().level(&s).unwrap(), 1);
}

#[test]
fn plateau_report() {
    let d = tempfile::tempdir().unwrap();
    let g = golden_file(d.path());
    let out = satscape(&["plateau", &g, "--state", "1001", "--cap", "10000"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["level"], 1);
    assert_eq!(v["size"], 3);
    assert_eq!(v["exit_count"], 2);
    assert_eq!(v["classification"], "bench");
    assert_eq!(v["canonical_rep"], "1001");
}

#[test]
fn state_cap_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let g = golden_file(d.path());
    let out = Command::new(env!("CARGO_BIN_EXE_satscape"))
        .args(["plateau", &g, "--state", "1001"])
        .env("SATSCAPE_STATE_CAP", "2")
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["size"], 2);
    assert_eq!(v["truncated"], true);
}

#[test]
fn escape_report() {
    let d = tempfile::tempdir().unwrap();
    let g = golden_file(d.path());
    let out = satscape(&["escape", &g, "--state", "0000", "--level-ordered"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["escape"]["barrier_increase"], 1);
    assert_eq!(v["escape"]["level_ordered_barrier"], 1);
    assert_eq!(v["plateau"]["classification"], "minimum");
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let g = golden_file(d.path());
    assert_eq!(satscape(&["plateau", &g, "--bogus"]).status.code(), Some(2));
    assert_eq!(satscape(&["plateau", &g, "--state", "01"]).status.code(), Some(2));
    assert_eq!(satscape(&["plateau", &g, "--state", "01x1"]).status.code(), Some(2));
    assert_eq!(satscape(&["gen", "uniform", "--vars", "2", "--clauses", "3"]).status.code(), Some(2));
    let out = satscape(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_file_is_domain_failure() {
    assert_eq!(satscape(&["solve", "/nonexistent/x.cnf"]).status.code(), Some(1));
}

#[test]
fn experiment_run_writes_outputs() {
    let d = tempfile::tempdir().unwrap();
    let config = d.path().join("survey.json");
    std::fs::write(
        &config,
        r#"{"name":"small","kind":{"type":"survey","levels":[0,1,2]},
            "grid":[{"variant":"uniform","num_clauses":50,"num_variables":12}],
            "instances_per_point":4,"sat_filter":"require_sat","master_seed":3}"#,
    )
    .unwrap();
    let out_dir = d.path().join("out");
    let run = |workers: &str| {
        satscape(&[
            "experiment",
            "run",
            config.to_str().unwrap(),
            "--workers",
            workers,
            "--out",
            out_dir.to_str().unwrap(),
        ])
    };
    let out = run("2");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("master seed 3"));
    let first = std::fs::read(out_dir.join("survey.csv")).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["spec"]["master_seed"], 3);
    let header = String::from_utf8_lossy(&first).lines().next().unwrap().to_string();
    assert!(header.starts_with("point,generator,num_variables,num_clauses,level,n_instances,n_samples"));
    assert!(header.contains("proportion_minima"));
    run("1");
    assert_eq!(std::fs::read(out_dir.join("survey.csv")).unwrap(), first);
}
