use std::process::{Command, Output};

use serde_json::Value;

fn crosm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crosm"))
        .args(args)
        .env_remove("CROSM_MODE")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn item<'a>(v: &'a Value, name: &str) -> &'a Value {
    v["items"]
        .as_array()
        .unwrap()
        .iter()
        .find(|i| i["name"] == name)
        .unwrap_or_else(|| panic!("no item {name}"))
}

fn temp_file(name: &str, body: &str) -> std::path::PathBuf {
    let p = std::env::temp_dir().join(format!("crosm-{}-{name}", std::process::id()));
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn verify_type_ai_unit_parameters_is_sasakian() {
    let out = crosm(&[
        "verify", "--space", "cpn", "--n", "2", "--type", "AI", "--kappa", "1", "--qeps", "1", "--qhalf", "1",
        "--alpha", "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    for name in ["contact", "kcontact", "sasakian"] {
        assert_eq!(item(&v, name)["verdict"], "pass", "{name}");
    }
}

#[test]
fn einstein_sphere_four_prints_solution() {
    let out = crosm(&["einstein", "--space", "sphere", "--n", "4", "--a0", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["results"]["a_eps"], "2/3");
    assert_eq!(v["results"]["b_eps"], "2/3");
    assert_eq!(v["results"]["lambda"], "27/8");
}

#[test]
fn full_suite_cp1_passes_exactly() {
    let out = crosm(&["full-suite", "--space", "cpn", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["model"]["algebra"], "su(2)");
    assert_eq!(item(&v, "three_sasakian")["verdict"], "pass");
    assert_eq!(item(&v, "sasakian_einstein")["verdict"], "pass");
    for it in v["items"].as_array().unwrap() {
        if it["required"] == true {
            assert_eq!(it["verdict"], "pass", "{} {}", it["subject"], it["name"]);
        }
    }
}

#[test]
fn failed_required_check_exits_two_and_still_reports() {
    let out = crosm(&[
        "verify", "--space", "cpn", "--n", "2", "--type", "BII", "--kappa", "1", "--theta", "3/5,4/5", "--require",
        "kcontact",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["passed"], false);
    assert_eq!(item(&v, "kcontact")["verdict"], "fail");
}

#[test]
fn input_errors_exit_one() {
    let out = crosm(&["verify", "--space", "cpn", "--n", "2", "--type", "AZ"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("type"));
    let out = crosm(&["verify", "--space", "sphere", "--n", "3", "--kappa", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let out = crosm(&["verify", "--nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_config_names_the_key() {
    let p = temp_file("bad.toml", "[space]\nkind = \"cpn\"\nn = 2\n[family]\nkapa = 1\n[run]\ntask = \"verify\"\n");
    let out = crosm(&["run", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("family.kapa"));
}

#[test]
fn flags_override_config_file() {
    let p = temp_file(
        "ok.toml",
        "[space]\nkind = \"sphere\"\nn = 3\n[family]\nkappa = \"1/2\"\nq_eps = 2\n[run]\ntask = \"verify\"\n",
    );
    let out = crosm(&["run", "--config", p.to_str().unwrap(), "--qeps", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["params"]["q_eps"], "1");
    assert_eq!(v["params"]["kappa"], "1/2");
    assert_eq!(item(&v, "kcontact")["verdict"], "pass");
}

#[test]
fn env_mode_is_overridden_by_flag() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_crosm"));
        c.args(["verify", "--space", "sphere", "--n", "2"]);
        if let Some(f) = flag {
            c.args(["--mode", f]);
        }
        match env {
            Some(e) => c.env("CROSM_MODE", e),
            None => c.env_remove("CROSM_MODE"),
        };
        json(&c.output().unwrap())["params"]["mode"].as_str().unwrap().to_string()
    };
    assert_eq!(run(None, None), "exact");
    assert_eq!(run(Some("float"), None), "float");
    assert_eq!(run(Some("float"), Some("exact")), "exact");
}

#[test]
fn catalog_csv_has_table_columns() {
    let out = crosm(&["catalog", "--space", "cpn", "--n", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("type,a0,a_eps,b_eps,a_half,b_half,xi"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 7);
    assert!(rows[6].starts_with("C,1/4,1/4,1/4,1/8,1/8,"));
}

#[test]
fn reports_are_byte_identical() {
    for args in [
        vec!["full-suite", "--space", "sphere", "--n", "3"],
        vec!["catalog", "--space", "cpn", "--n", "2", "--format", "text"],
        vec!["verify", "--space", "cpn", "--n", "2", "--type", "C", "--theta", "0.4", "--mode", "float"],
    ] {
        let a = crosm(&args);
        let b = crosm(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn out_flag_writes_report_file() {
    let p = std::env::temp_dir().join(format!("crosm-{}-out.json", std::process::id()));
    let out = crosm(&["cone", "--space", "sphere", "--n", "3", "--out", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(item(&v, "cone_contact_equivalence")["verdict"], "pass");
}
