use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn entile(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entile")).args(args).output().expect("binary runs")
}

fn scenario(dir: &Path, name: &str, body: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(body).unwrap()).unwrap();
    p
}

fn shipped(name: &str) -> String {
    format!("{}/../../scenarios/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn tile_check_finds_the_two_translates() {
    let out = tempfile::tempdir().unwrap();
    let o = entile(&["tile", "check", "--scenario", &shipped("tile_check.json"), "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["verdict"], "pass");
    assert_eq!(r["summary"][0]["C"], json!(["-1", "1"]));
    let cert: Value = serde_json::from_slice(&fs::read(out.path().join("tile_cert.json")).unwrap()).unwrap();
    assert_eq!(cert["C"], json!(["-1", "1"]));
}

#[test]
fn tile_check_without_cover_fails() {
    let dir = tempfile::tempdir().unwrap();
    let p = scenario(dir.path(), "s.json", &json!({"operation": "tile.check", "monoid": "int", "T": [0, 2], "V": [0, 1, 2]}));
    let o = entile(&["run", "--scenario", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout_json(&o)["counterexample"].as_str().unwrap().contains("no C"));
}

#[test]
fn addition_example_has_zero_residual() {
    let out = tempfile::tempdir().unwrap();
    let o = entile(&["entropy", "addition", "--scenario", &shipped("entropy_addition.json"), "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["summary"][0]["exact"], true);
    assert_eq!(r["summary"][0]["max_residual"], "0");
    let csv = fs::read_to_string(out.path().join("addition_0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,|F_n|,|T_n|,value_nats,residual"));
    for (n, l) in lines.enumerate() {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols[0], n.to_string());
        assert_eq!(cols[2], num_bigint::BigUint::from(4u32).pow(1 << n).to_string());
        assert_eq!(cols[4], "0");
    }
}

#[test]
fn malformed_json_is_a_usage_error_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{\n  \"operation\": \"tile.check\",\n  \"T\": [0, 1,\n}\n").unwrap();
    let o = entile(&["run", "--scenario", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4 column"), "{err}");
}

#[test]
fn unknown_names_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = scenario(dir.path(), "s.json", &json!({"operation": "tile.extract", "sequence": {"builder": "spiral"}}));
    let o = entile(&["run", "--scenario", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown builder"));

    let p = scenario(dir.path(), "t.json", &json!({"operation": "tile.flip"}));
    assert_eq!(entile(&["run", "--scenario", p.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(entile(&["tile", "flip"]).status.code(), Some(3));
    assert_eq!(entile(&["tile", "check"]).status.code(), Some(3), "missing --scenario");
}

#[test]
fn subcommand_must_match_the_scenario() {
    let o = entile(&["tile", "extract", "--scenario", &shipped("tile_check.json")]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn outputs_are_byte_deterministic() {
    for (name, extra) in [("entropy_profile.json", "4"), ("construct_qsemidirect.json", "2"), ("congruentize.json", "3")] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let oa = entile(&["run", "--scenario", &shipped(name), "--out", a.path().to_str().unwrap()]);
        let ob = entile(&["run", "--scenario", &shipped(name), "--out", b.path().to_str().unwrap(), "--jobs", extra]);
        assert_eq!(oa.status.code(), Some(0), "{name}");
        assert_eq!(oa.stdout, ob.stdout, "{name}");
        assert_eq!(read_all(a.path()), read_all(b.path()), "{name}");
    }
}

#[test]
fn emitted_certificates_verify_independently() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path();
    let o = entile(&["run", "--scenario", &shipped("tile_extract.json"), "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let p = scenario(
        dir,
        "verify.json",
        &json!({"operation": "tile.verify", "certificate_file": "tiling_cert.json", "sequence": {"builder": "punctured"}}),
    );
    assert_eq!(entile(&["tile", "verify", "--scenario", p.to_str().unwrap()]).status.code(), Some(0));

    // a moved translate is caught
    let mut cert: Value = serde_json::from_slice(&fs::read(dir.join("tiling_cert.json")).unwrap()).unwrap();
    let levels = cert["levels"].as_array_mut().unwrap();
    let last = levels.last_mut().unwrap();
    last["cert"]["C"][0] = json!(["7", "3"]);
    fs::write(dir.join("tiling_cert.json"), cert.to_string()).unwrap();
    let o = entile(&["tile", "verify", "--scenario", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = entile(&["run", "--scenario", &shipped("construct_extension.json"), "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for file in ["certificates.json", "local_tiling.json"] {
        let p = scenario(dir, "v2.json", &json!({"operation": "tile.verify", "certificate_file": file}));
        let o = entile(&["run", "--scenario", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{file}: {}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn node_budget_makes_searches_inconclusive() {
    let o = entile(&["run", "--scenario", &shipped("tile_extract.json"), "--budget-nodes", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout_json(&o)["exhausted_budget"].is_string());
}

#[test]
fn selftest_reports_injected_fault() {
    let o = entile(&["selftest", "--criteria", "1,3", "--inject-fault", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let table = String::from_utf8_lossy(&o.stdout);
    let row = |id: &str| table.lines().find(|l| l.starts_with(id)).unwrap_or_else(|| panic!("{table}")).to_string();
    assert!(row("1 ").contains("PASS"), "{table}");
    assert!(row("3 ").contains("FAIL"), "{table}");
}

#[test]
fn selftest_with_unit_budget_is_inconclusive() {
    let o = entile(&["selftest", "--budget-nodes", "1", "--json"]);
    assert_eq!(o.status.code(), Some(2));
    let r = stdout_json(&o);
    let rows = r["criteria"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|c| c["verdict"] == "inconclusive"), "{r}");
}

#[test]
fn selftest_rejects_unknown_criteria() {
    assert_eq!(entile(&["selftest", "--inject-fault", "9"]).status.code(), Some(3));
}

#[test]
fn shipped_scenarios_pass() {
    let dir = format!("{}/../../scenarios", env!("CARGO_MANIFEST_DIR"));
    let mut names: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    assert!(names.len() >= 13);
    for p in names {
        let o = entile(&["run", "--scenario", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}: {}{}", p.display(), String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    }
}
