use std::process::Command;

use halo_cli::{run, EXIT_GAP, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};
use serde_json::Value;

fn halo(args: &[&str]) -> (i32, Value) {
    let mut argv = vec!["halo"];
    argv.extend_from_slice(args);
    let out = run(argv);
    let v = if out.stdout.is_empty() { Value::Null } else { serde_json::from_str(&out.stdout).expect("json report") };
    (out.code, v)
}

fn write_tmp(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("halo-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn worked_tree_example() {
    let (code, v) = halo(&["treenorm", "--element", "[2,2]", "--C", "2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["results"]["lower"], "4");
    assert_eq!(v["results"]["upper"], "4");
    assert_eq!(v["results"]["witness"]["leaves"], 2);
    assert_eq!(v["budgets"]["leaves"], 8);
    assert_eq!(v["budgets"]["radius"], 4);
}

#[test]
fn enumerate_lists_eight_matrices() {
    let (code, v) = halo(&["kn", "enumerate", "--n", "2"]);
    assert_eq!(code, EXIT_OK);
    let ms = v["results"]["matrices"].as_array().unwrap();
    assert_eq!(ms.len(), 8);
    // every listed matrix is a signed permutation
    for m in ms {
        let rows = m.as_array().unwrap();
        for r in rows {
            let nz: Vec<&str> = r.as_array().unwrap().iter().map(|x| x.as_str().unwrap()).filter(|x| *x != "0").collect();
            assert_eq!(nz.len(), 1);
            assert!(nz[0] == "1" || nz[0] == "-1");
        }
    }
}

#[test]
fn membership_verdicts_and_expectations() {
    let rot90 = write_tmp("rot90.json", "[[0,-1],[1,0]]");
    let (code, v) = halo(&["kn", "check", "--context", "real", "--matrix", &rot90]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["results"]["verdict"], "member");

    let (code, v) = halo(&["kn", "check", "--context", "real", "--matrix", "[[2,0],[0,1]]", "--expect", "member"]);
    assert_eq!(code, EXIT_VIOLATION);
    assert_eq!(v["results"]["verdict"], "non-member");
    let (code, _) = halo(&["kn", "check", "--context", "real", "--matrix", "[[2,0],[0,1]]", "--expect", "non-member"]);
    assert_eq!(code, EXIT_OK);

    let (_, v) = halo(&["kn", "check", "--context", "padic:5", "--matrix", "[[\"3/5\",\"-4/5\"],[\"4/5\",\"3/5\"]]"]);
    assert_eq!(v["results"]["verdict"], "non-member");
    let (_, v) = halo(&["kn", "check", "--context", "padic:7", "--matrix", "[[\"3/5\",\"-4/5\"],[\"4/5\",\"3/5\"]]", "--flow", "1/2"]);
    assert_eq!(v["results"]["verdict"], "member");
    assert_eq!(v["results"]["flow"], "1/2");
    let (_, v) = halo(&["kn", "check", "--context", "int", "--matrix", "[[0,1],[1,0]]"]);
    assert_eq!(v["results"]["verdict"], "member");
}

#[test]
fn phi_membership() {
    let phi = write_tmp("hyp.json", "[[0,1],[1,0]]");
    let (code, v) = halo(&["kn", "check", "--context", "real", "--phi", &phi, "--matrix", "[[2,0],[0,\"1/2\"]]", "--expect", "member"]);
    assert_eq!(code, EXIT_VIOLATION);
    assert_eq!(v["results"]["checks"][0]["passed"], true);
    let (code, _) = halo(&["kn", "check", "--context", "real", "--phi", &phi, "--matrix", "[[0,1],[1,0]]", "--expect", "member"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn relations_counts() {
    for (n, count) in [("1", 1), ("2", 8), ("3", 18)] {
        let (code, v) = halo(&["kn", "relations", "--n", n]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(v["results"]["count"], count);
    }
}

#[test]
fn halo_check_exit_codes() {
    let good = write_tmp("abs.json", r#"{"ring":"Z","norm":"arch","power":"2","flavor":"short","p":"1/2"}"#);
    let bad = write_tmp("sq.json", r#"{"ring":"Z","norm":"arch","power":"2","flavor":"short","p":"1"}"#);
    let (code, v) = halo(&["halo-check", "--config", &good, "--samples", "-5..5"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["results"]["passed"], true);
    let (code, v) = halo(&["halo-check", "--config", &bad, "--samples", "-5..5"]);
    assert_eq!(code, EXIT_VIOLATION);
    let failing: Vec<&Value> = v["results"]["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "fail").collect();
    assert_eq!(failing[0]["witness"], serde_json::json!(["1", "1"]));
}

#[test]
fn renorm_and_budget_gap() {
    let sq = r#"{"ring":"Z","norm":"arch","power":"2","flavor":"short","p":"1"}"#;
    let (code, v) = halo(&["renorm", "--config", sq, "--p", "1", "--element", "3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["results"]["upper"], "3");
    assert_eq!(v["budgets"]["parts"], 6);
    assert_eq!(v["budgets"]["part"], 3);
    // one part only: the bounds cannot meet
    let (code, v) = halo(&["renorm", "--config", sq, "--p", "1", "--element", "3", "--budget", "parts=1"]);
    assert_eq!(code, EXIT_GAP);
    assert_eq!(v["results"]["meets"], false);
}

#[test]
fn opnorm_contexts() {
    let (code, v) = halo(&["opnorm", "--matrix", "[[1,-2],[3,4]]", "--q", "inf"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["results"]["upper"], "7");
    let (_, v) = halo(&["opnorm", "--matrix", "[[1,-2],[3,4]]", "--q", "1"]);
    assert_eq!(v["results"]["upper"], "6");
    let (_, v) = halo(&["opnorm", "--matrix", "[[\"1/5\",0],[0,5]]", "--q", "inf", "--context", "padic:5"]);
    assert_eq!(v["results"]["upper"], "5");
    let (code, _) = halo(&["opnorm", "--matrix", "[[1,1],[0,1]]", "--q", "2"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn presentation_norm_padic() {
    let (code, v) = halo(&["tensor", "presentation-norm", "--base", r#"{"rank":2}"#, "--context", "padic:5", "--target", "[\"1/5\",3]"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["results"]["lower"], "5");
    assert_eq!(v["results"]["upper"], "5");
}

#[test]
fn usage_errors() {
    assert_eq!(halo(&["bogus"]).0, EXIT_USAGE);
    assert_eq!(halo(&["kn", "check", "--context", "complex", "--matrix", "[[1]]"]).0, EXIT_USAGE);
    assert_eq!(halo(&["kn", "enumerate", "--n", "9"]).0, EXIT_USAGE);
    assert_eq!(halo(&["treenorm", "--element", "[1,x]", "--C", "2"]).0, EXIT_USAGE);
    assert_eq!(halo(&["opnorm", "--matrix", "/no/such/file.json"]).0, EXIT_USAGE);
}

#[test]
fn reports_are_deterministic() {
    let args = ["halo", "kn", "check", "--context", "padic:3", "--matrix", "[[1,3],[0,1]]"];
    let a = run(args);
    let b = run(args);
    assert_eq!(a, b);
    assert!(!a.stdout.contains("timings"));
    let t = run(["halo", "--timings", "kn", "enumerate", "--n", "1"]);
    assert!(t.stdout.contains("elapsed_ms"));
    // output format does not change the inputs digest
    let j: Value = serde_json::from_str(&run(["halo", "kn", "enumerate", "--n", "1"]).stdout).unwrap();
    let table = run(["halo", "--output", "table", "kn", "enumerate", "--n", "1"]).stdout;
    assert!(table.contains(j["inputs_digest"].as_str().unwrap()));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_halo");
    let ok = Command::new(bin).args(["treenorm", "--element", "[2,2]", "--C", "2"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let again = Command::new(bin).args(["treenorm", "--element", "[2,2]", "--C", "2"]).output().unwrap();
    assert_eq!(ok.stdout, again.stdout);
    let bad = Command::new(bin).args(["kn", "check", "--context", "real", "--matrix", "[[1,1],[0,1]]", "--expect", "member"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let usage = Command::new(bin).args(["renorm"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}
