use std::process::Command;

use serde_json::Value;

fn stc(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_stc")).args(args).output().unwrap();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report)
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn identity_pair_is_consistent() {
    let (code, r) = stc(&["check", "--theorem", "1", "--f", "identity", "--g", "identity", "--grid", "8x64"]);
    assert_eq!(code, 0);
    let v = &r["outcome"]["check"]["verdict"];
    assert_eq!(num(&v["concl_sup"]), 0.0);
    assert_eq!(v["consistent"], true);
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["schema_version"], 1);
}

#[test]
fn synthesized_pair_theorem_three() {
    let pair = ["--f", "synth(g=identity,mu=0.8,w=cmono(0.6,1))", "--g", "identity", "--mu", "0.8"];
    let mut args = vec!["check", "--theorem", "3", "--rho", "0.9", "--delta", "1"];
    args.extend(pair);
    let (code, r) = stc(&args);
    assert_eq!(code, 0);
    let v = &r["outcome"]["check"]["verdict"];
    assert!((num(&v["concl_sup"]) - 0.6 * 0.995).abs() < 1e-9);
    assert!(v["hyp_margin"].is_number() && v["concl_margin"].is_number());
}

#[test]
fn adversarial_w_never_exits_inconsistent() {
    let (code, r) = stc(&[
        "check",
        "--theorem",
        "1",
        "--f",
        "synth(g=identity,mu=1,w=cmono(1.2,1))",
        "--g",
        "identity",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["outcome"]["check"]["verdict"]["hyp_holds"], false);
}

#[test]
fn parse_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("err.json");
    let out = Command::new(env!("CARGO_BIN_EXE_stc"))
        .args(["check", "--theorem", "1", "--f", "koebe(0.5", "--g", "identity", "--json"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["outcome"]["error"]["kind"], "input");
    assert!(r["outcome"]["error"]["message"].as_str().unwrap().contains("9"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let (code, _) = stc(&["check", "--theorem", "1", "--f", "identity", "--g", "identity", "--bogus"]);
    assert_eq!(code, 2);
    let (code, _) = stc(&["check", "--theorem", "7", "--f", "identity", "--g", "identity"]);
    assert_eq!(code, 2);
}

#[test]
fn mu_sweep_bound_column_follows_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("rows.csv");
    let p = csv_path.to_str().unwrap();
    let (code, r) = stc(&[
        "sweep", "--theorem", "1", "--f", "poly(0.1)", "--g", "identity", "--param", "mu", "--from", "0.2", "--to",
        "1", "--step", "0.2", "--grid", "8x64", "--csv", p, "--delta", "0.3", "--gamma", "2",
    ]);
    assert_eq!(r["outcome"]["sweep"]["rows"], 5);
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let header = reader.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let get = |name: &str| rec[col(name)].parse::<f64>().unwrap();
        let (mu, n) = (get("mu"), get("n"));
        assert_eq!(n, 1.0);
        let expected = (0.3 + mu * n / 2.0).powi(2);
        assert!((get("hyp_bound") - expected).abs() < 1e-14);
        assert_eq!(&rec[col("consistent")], "true");
        rows += 1;
    }
    assert_eq!(rows, 5);
    assert_eq!(code, 0);
}

#[test]
fn rho_sweep_over_synthesized_pair_is_consistent() {
    let floor = (0.5f64 / 1.3).sqrt();
    let from = format!("{}", floor + 0.01);
    let (code, r) = stc(&[
        "sweep",
        "--theorem",
        "3",
        "--f",
        "synth(g=identity,mu=0.8,w=cmono(0.6,1))",
        "--g",
        "identity",
        "--mu",
        "0.8",
        "--delta",
        "0.5",
        "--n",
        "1",
        "--param",
        "rho",
        "--from",
        &from,
        "--to",
        "0.99",
        "--step",
        "0.05",
        "--grid",
        "16x128",
    ]);
    assert_eq!(code, 0);
    let s = &r["outcome"]["sweep"];
    assert_eq!(s["inconsistent"], 0);
    assert_eq!(s["consistent"], s["rows"]);
}

#[test]
fn empty_sweep_range_is_an_input_error() {
    let (code, r) = stc(&[
        "sweep", "--theorem", "1", "--f", "identity", "--g", "identity", "--param", "mu", "--from", "1", "--to", "0.2",
        "--step", "0.2",
    ]);
    assert_eq!(code, 2);
    assert_eq!(r["outcome"]["error"]["kind"], "input");
}

#[test]
fn jack_probes_each_radius() {
    let (code, r) = stc(&["jack", "--w", "wpoly(0,0.5,0.2-0.1i)", "--radii", "0.3,0.6,0.9"]);
    assert_eq!(code, 0);
    let probes = r["outcome"]["jack"]["probes"].as_array().unwrap();
    assert_eq!(probes.len(), 3);
    for p in probes {
        let ok = &p["ok"];
        assert_eq!(ok["vanishing_order"], 2);
        let q = ok["quotient"].as_array().unwrap();
        assert!(num(&q[1]).abs() < 1e-6);
        assert!(num(&q[0]) >= 2.0 - 1e-6);
    }
}

#[test]
fn jack_from_pair() {
    let (code, r) = stc(&[
        "jack",
        "--f",
        "synth(g=identity,mu=0.5,w=mmono(0.7,1,0.3))",
        "--g",
        "identity",
        "--mu",
        "0.5",
        "--radii",
        "0.5",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r["outcome"]["jack"]["probes"].as_array().unwrap().len(), 1);
}

#[test]
fn identity_command_both_directions() {
    let (code, r) = stc(&["identity", "--f", "synth(g=koebe(0.5),mu=0.6,w=cmono(0.4,2))", "--g", "koebe(0.5)", "--mu", "0.6"]);
    assert_eq!(code, 0);
    let o = &r["outcome"]["identity"];
    assert!(num(&o["forward_residual"]) < 1e-9, "{o}");
    assert!(o["reciprocal_residual"].is_number(), "{o}");
}
