use std::path::Path;
use std::process::{Command, Output};

use ufg_cli::formats::{emit_cnf, parse_cnf};
use ufg_core::csp::CnfFormula;
use ufg_core::universal_poly::{build_poly_universal, embed_formula};

fn ufg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ufg")).current_dir(dir).args(args).output().expect("run ufg")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = ufg(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn embed_then_instantiate_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("f.cnf"), "p cnf 3 2\n1 -2 3 0\n-1 2 0\n").unwrap();
    ok(d, &["build-universal", "--n", "3", "--out", "u.fgraph"]);
    ok(d, &["embed", "--universal", "u.fgraph", "--formula", "f.cnf", "--out", "t.tpl"]);
    ok(d, &["instantiate", "--universal", "u.fgraph", "--template", "t.tpl", "--out", "g.cnf"]);
    let f = parse_cnf(&read(d, "f.cnf")).unwrap();
    let want = embed_formula(&build_poly_universal(3).unwrap(), &f).unwrap();
    assert_eq!(read(d, "g.cnf"), emit_cnf(&want));
    let manifest: serde_json::Value = serde_json::from_str(&read(d, "g.cnf.manifest.json")).unwrap();
    assert_eq!(manifest["subcommand"], "instantiate");
    assert_eq!(manifest["outputs"][0]["path"], "g.cnf");
}

#[test]
fn universal_file_must_match_its_tag() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("f.cnf"), "p cnf 2 1\n1 -2 0\n").unwrap();
    ok(d, &["build-universal", "--n", "2", "--out", "u.fgraph"]);
    let tampered = read(d, "u.fgraph").replacen("1 1 3 0", "1 2 3 0", 1);
    std::fs::write(d.join("u.fgraph"), tampered).unwrap();
    let out = ufg(d, &["embed", "--universal", "u.fgraph", "--formula", "f.cnf", "--out", "t.tpl"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn circuit_template_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("f.cnf"), "p cnf 2 2\n1 2 0\n-1 -2 0\n").unwrap();
    ok(d, &["build-universal", "--n", "2", "--m", "2", "--out", "c.fgraph"]);
    ok(d, &["embed", "--universal", "c.fgraph", "--formula", "f.cnf", "--out", "c.tpl"]);
    ok(d, &["instantiate", "--universal", "c.fgraph", "--template", "c.tpl", "--out", "c.cnf"]);
    let g: CnfFormula = parse_cnf(&read(d, "c.cnf")).unwrap();
    assert!(g.n() > 2 && g.max_arity() <= 3);
}

#[test]
fn oracle_cap_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("f.cnf"), "p cnf 4 2\n1 -2 0\n-1 0\n").unwrap();
    let out = ok(d, &["unsat", "--formula", "f.cnf"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0/1");
    let capped = Command::new(env!("CARGO_BIN_EXE_ufg"))
        .current_dir(d)
        .env("UFG_ORACLE_CAP", "8")
        .args(["unsat", "--formula", "f.cnf"])
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&capped.stderr).contains("oracle cap"));
}

#[test]
fn suite_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let good = ufg(d, &["suite", "--pass", "formula2graph", "--trials", "16", "--out", "r.json"]);
    assert_eq!(good.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&good.stdout).starts_with("PASS formula2graph"));
    let bad = ufg(d, &["suite", "--pass", "broken-control", "--trials", "16"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).starts_with("FAIL broken-control"));
    let report: serde_json::Value = serde_json::from_str(&read(d, "r.json")).unwrap();
    assert_eq!(report[0]["passed"], true);
    assert_eq!(report[0]["results"].as_array().unwrap().len(), 16);
}

#[test]
fn malformed_input_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.cnf"), "p cnf 2 1\n1 5 0\n").unwrap();
    let out = ufg(d, &["unsat", "--formula", "bad.cnf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn fold_and_verify_a_long_code() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["fold", "--long-code", "3", "--n", "2", "--over-true", "--out", "a.blob"]);
    ok(d, &["verify-longcode", "--input", "a.blob", "--out", "a.json"]);
    let report: serde_json::Value = serde_json::from_str(&read(d, "a.json")).unwrap();
    assert_eq!(report["nearest_long_code"], 3);
    assert_eq!(report["nearest_long_code_distance"], "0/1");
    assert_eq!(report["close_long_codes"], 1);
    assert_eq!(report["bound_holds"], true);
}

#[test]
fn kind_flags_and_positional_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("f.cnf"), "p cnf 2 1\n1 -2 2 0\n").unwrap();
    ok(d, &["build-universal", "--kind", "poly", "-n", "2", "--out", "p.fgraph"]);
    ok(d, &["build-universal", "--n", "2", "--out", "q.fgraph"]);
    assert_eq!(read(d, "p.fgraph"), read(d, "q.fgraph"));
    ok(d, &["build-universal", "--kind", "circuit", "-n", "2", "-m", "1", "--out", "c.fgraph"]);
    ok(d, &["instantiate", "--template", "c.fgraph", "--source", "f.cnf", "--out", "direct.cnf"]);
    ok(d, &["embed", "--universal", "c.fgraph", "--formula", "f.cnf", "--out", "c.tpl"]);
    ok(d, &["instantiate", "--universal", "c.fgraph", "--template", "c.tpl", "--out", "two-step.cnf"]);
    assert_eq!(read(d, "direct.cnf"), read(d, "two-step.cnf"));
    assert_eq!(ufg(d, &["build-universal", "--kind", "circuit", "-n", "2", "--out", "x"]).status.code(), Some(2));
    ok(d, &["sparsify", "--epsilon", "3/10", "f.cnf", "--out-dir", "branches"]);
    assert!(d.join("branches/branch-0000.cnf").exists());
    ok(d, &["reduce", "f.cnf", "--chain", "3sat,nae4", "--out", "r.cnf"]);
}

#[test]
fn quiet_silences_stdout_only() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("f.cnf"), "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let loud = ok(d, &["unsat", "--formula", "f.cnf", "--out", "a.json"]);
    assert_eq!(String::from_utf8_lossy(&loud.stdout).trim(), "1/2");
    let quiet = ok(d, &["--quiet", "unsat", "--formula", "f.cnf", "--out", "b.json"]);
    assert!(quiet.stdout.is_empty());
    assert_eq!(read(d, "a.json"), read(d, "b.json"));
}
