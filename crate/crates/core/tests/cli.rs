use std::path::PathBuf;
use std::process::Command;

use approbust::cli::{run, Command as Sub, Method, RunRequest};
use approbust::format::{parse_election, serialize_election};
use approbust::perturbation::OpType;
use serde_json::Value;

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn approbust(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_approbust"))
        .args(args)
        .env_remove("APPROBUST_CAP")
        .output()
        .unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let json = serde_json::from_str(stdout.trim()).unwrap_or(Value::String(stdout));
    (out.status.code().unwrap(), json)
}

#[test]
fn radius_on_a_score_gap() {
    let f = fixture("gap_two.txt");
    let (code, out) = approbust(&["radius", "--rule", "av", "--op", "add", "--k", "1", &f]);
    assert_eq!(code, 0);
    assert_eq!(out["outcome"], "finite");
    assert_eq!(out["value"], 2);
    for key in ["rule", "k", "op", "method", "provenance"] {
        assert!(out.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn count_with_every_addition_harmless() {
    let f = fixture("two_c1.txt");
    let (code, out) = approbust(&["count", "--rule", "av", "--op", "add", "--budget", "1", "--k", "1", &f]);
    assert_eq!(code, 0);
    assert_eq!(out["unchanged"], "4");
    assert_eq!(out["total"], "4");
    assert_eq!(out["probability"], "1");
}

#[test]
fn thiele_add_witness_is_the_grid() {
    let (code, out) = approbust(&["witness", "--which", "thiele-add", "--k", "3"]);
    assert_eq!(code, 0);
    let e = parse_election(out["election"].as_str().unwrap()).unwrap();
    assert_eq!((e.num_candidates(), e.num_voters()), (6, 10));
    assert!(e.ballot(0).unwrap().is_empty());
    assert_eq!(e.ballot(1).unwrap(), &[0, 3]);
    assert_eq!(e.ballot(9).unwrap(), &[2, 5]);
    assert_eq!(e.tie_break(), Some(&[3, 4, 5, 0, 1, 2][..]));
}

#[test]
fn exit_codes() {
    let (code, out) = approbust(&["winners", "--k", "1", &fixture("bad_order.txt")]);
    assert_eq!(code, 2);
    assert_eq!(out["error"]["kind"], "validation");
    let (code, _) = approbust(&["winners", "--k", "9", &fixture("two_voters.txt")]);
    assert_eq!(code, 2);
    let (code, out) = approbust(&["winners", "--rule", "pav", "--k", "2", "--cap", "3", &fixture("mixed.txt")]);
    assert_eq!(code, 3);
    assert_eq!(out["error"]["kind"], "cap_exceeded");
    let out = Command::new(env!("CARGO_BIN_EXE_approbust"))
        .args(["winners", "--rule", "pav", "--k", "2", &fixture("mixed.txt")])
        .env("APPROBUST_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let (code, _) = approbust(&["count", "--rule", "pav", "--op", "add", "--budget", "1", "--k", "1", &fixture("two_voters.txt")]);
    assert_eq!(code, 2);
}

#[test]
fn winners_and_diff() {
    let (code, out) = approbust(&["winners", "--k", "1", "--expand", &fixture("two_voters.txt")]);
    assert_eq!(code, 0);
    assert_eq!(out["winners"]["form"], "explicit");
    assert_eq!(out["expanded"], serde_json::json!([[1]]));
    let (code, out) = approbust(&["winners", "--rule", "thiele", "--weights", "1,1/2", "--k", "2", &fixture("two_voters.txt")]);
    assert_eq!(code, 0);
    assert_eq!(out["rule"], "pav");
    let (code, out) = approbust(&["diff", &fixture("two_voters.txt"), &fixture("two_voters.txt")]);
    assert_eq!(code, 0);
    assert!(out["matrix"].as_str().unwrap().contains('∘'));
}

#[test]
fn reductions_from_instance_files() {
    let (code, out) = approbust(&["reduce", "--which", "x3c-thiele", "--op", "swap", &fixture("cover.x3c")]);
    assert_eq!(code, 0);
    assert_eq!(out["num_voters"], 104);
    assert_eq!(out["audit_passed"], true);
    let (code, out) = approbust(&["reduce", "--which", "matching", "--op", "add", &fixture("c4.graph")]);
    assert_eq!(code, 0);
    assert_eq!(out["expected_count"], "128");
    let (code, out) = approbust(&["reduce", "--which", "matching", "--op", "add", "--format", "text", &fixture("c4.graph")]);
    assert_eq!(code, 0);
    assert!(parse_election(out.as_str().unwrap()).is_ok());
}

#[test]
fn exact_and_oracle_agree_on_fixtures() {
    for name in ["two_voters.txt", "gap_two.txt", "two_c1.txt", "tied.txt", "mixed.txt"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let e = parse_election(&text).unwrap();
        assert_eq!(parse_election(&serialize_election(&e)).unwrap(), e);
        for k in 1..e.num_candidates() {
            for rule in ["av", "sav"] {
                for op in OpType::ALL {
                    let mut req = RunRequest {
                        command: Sub::Radius,
                        rule: rule.into(),
                        k: Some(k),
                        op: Some(op),
                        election: Some(text.clone()),
                        budget: Some(6),
                        ..RunRequest::default()
                    };
                    let exact = run(&req).unwrap();
                    req.method = Method::Oracle;
                    let oracle = run(&req).unwrap();
                    assert_eq!(exact["outcome"], oracle["outcome"], "{name} {rule} k={k} {op}");
                    assert_eq!(exact["value"], oracle["value"], "{name} {rule} k={k} {op}");
                }
                if rule == "av" {
                    for op in [OpType::Add, OpType::Remove] {
                        let mut req = RunRequest {
                            command: Sub::Count,
                            rule: rule.into(),
                            k: Some(k),
                            op: Some(op),
                            budget: Some(1),
                            election: Some(text.clone()),
                            ..RunRequest::default()
                        };
                        let exact = run(&req);
                        req.method = Method::Oracle;
                        let oracle = run(&req);
                        match (exact, oracle) {
                            (Ok(a), Ok(b)) => assert_eq!(a["unchanged"], b["unchanged"]),
                            (a, b) => assert_eq!(a.is_err(), b.is_err()),
                        }
                    }
                }
            }
        }
    }
}
