mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use common::{credentials_file, crisismesh, fixture, wait_for_file, Server, SECRET};
use crisismesh_core::fixtures::{DOMAIN_FACTS, ROAD_ACCIDENT_SNIFF};
use crisismesh_core::ontology::build_domain_ontology;
use crisismesh_core::scenario::RunReport;
use crisismesh_testkit::gen::synthetic_scenario;
use serde_json::{json, Value};

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_road_accident_exits_zero() {
    let out = crisismesh(&["run", path(&fixture("road_accident.scenario"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("final phase Resolved"));
}

#[test]
fn run_missing_file_exits_two() {
    assert_eq!(crisismesh(&["run", "/definitely/not/here.scenario"]).status.code(), Some(2));
}

#[test]
fn run_with_forced_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("road_accident.scenario")).unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    // a human recommendation before anything is detected fails the run
    doc["events"].as_array_mut().unwrap().insert(
        0,
        json!({"tick": 0, "agent": "decision-maker", "kind": "human_recommendation", "payload": {"target": "observer-2", "action": "x"}}),
    );
    let p = dir.path().join("forced.scenario");
    std::fs::write(&p, doc.to_string()).unwrap();
    let out = crisismesh(&["run", path(&p)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wrong phase"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for seed in [3u64, 14, 15] {
        let s = dir.path().join(format!("{seed}.scenario"));
        std::fs::write(&s, synthetic_scenario(seed).to_json()).unwrap();
        crisismesh(&["run", path(&s), "--report", path(&a)]);
        crisismesh(&["run", path(&s), "--report", path(&b)]);
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}

#[test]
fn config_flag_and_environment_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "credibility_threshold = 7.0\n").unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, "awareness_window = 2\n").unwrap();
    let scenario = fixture("road_accident.scenario");
    assert_eq!(crisismesh(&["run", path(&scenario), "--config", path(&bad)]).status.code(), Some(2));
    assert_eq!(crisismesh(&["run", path(&scenario), "--config", path(&good)]).status.code(), Some(0));
    let env = common::bin().args(["run", path(&scenario)]).env("CRISISMESH_CONFIG", &bad).output().unwrap();
    assert_eq!(env.status.code(), Some(2));
    let flag_wins = common::bin()
        .args(["run", path(&scenario), "--config", path(&good)])
        .env("CRISISMESH_CONFIG", &bad)
        .output()
        .unwrap();
    assert_eq!(flag_wins.status.code(), Some(0));
}

/// Instances typed with a subclass of cm:Actor, read straight from the
/// document lines and the schema edge list.
fn actor_instances() -> BTreeSet<String> {
    let (schema, _) = build_domain_ontology();
    let mut parents: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (c, p) in schema.subclass_edges() {
        parents.entry(c.to_string()).or_default().push(p.to_string());
    }
    let is_actor = |class: &str| {
        let mut stack = vec![class.to_string()];
        let mut seen = BTreeSet::new();
        while let Some(c) = stack.pop() {
            if c == "cm:Actor" {
                return true;
            }
            if seen.insert(c.clone()) {
                stack.extend(parents.get(&c).cloned().unwrap_or_default());
            }
        }
        false
    };
    DOMAIN_FACTS
        .lines()
        .filter_map(|l| {
            let parts: Vec<&str> = l.split_whitespace().collect();
            (parts.len() >= 3 && parts[1] == "rdf:type" && is_actor(parts[2])).then(|| parts[0].to_string())
        })
        .collect()
}

#[test]
fn query_lists_actor_instances() {
    let out = crisismesh(&["query", path(&fixture("domain.triples")), "SELECT ?a WHERE { ?a rdf:type cm:Actor }"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("?a"));
    let got: BTreeSet<String> = lines.map(str::to_string).collect();
    assert_eq!(got, actor_instances());
    assert_eq!(got.len(), 5);
}

#[test]
fn query_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.triples");
    std::fs::write(&empty, "").unwrap();
    let out = crisismesh(&["query", path(&empty), "SELECT ?a ?b WHERE { ?a cm:p ?b }"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "?a\t?b\n");
    let out = crisismesh(&["query", path(&empty), "SELECT ?a WHERE {\n ?a cm:p }"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn sniff_reproduces_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report");
    crisismesh(&["run", path(&fixture("road_accident.scenario")), "--report", path(&report)]);
    let out = crisismesh(&["sniff", path(&report)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), ROAD_ACCIDENT_SNIFF);
    std::fs::write(&report, "garbage").unwrap();
    assert_eq!(crisismesh(&["sniff", path(&report)]).status.code(), Some(2));
}

#[test]
fn validate_seed_document() {
    assert_eq!(crisismesh(&["validate", path(&fixture("domain.triples"))]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.triples");
    std::fs::write(&bad, "cm:x rdf:type cm:NoSuchClass .\n").unwrap();
    assert_eq!(crisismesh(&["validate", path(&bad)]).status.code(), Some(1));
}

#[test]
fn serve_rejects_bad_credentials_file() {
    let dir = tempfile::tempdir().unwrap();
    let creds = dir.path().join("creds");
    std::fs::write(&creds, "no colon here\n").unwrap();
    let out = crisismesh(&["serve", path(&fixture("road_accident.scenario")), "--credentials", path(&creds)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn serve_login_and_submit_adds_propose() {
    let dir = tempfile::tempdir().unwrap();
    let creds = credentials_file(dir.path());
    let server = Server::start(&[path(&fixture("road_accident.scenario")), "--credentials", path(&creds)]);
    let http = reqwest::blocking::Client::new();
    let login: Value = http
        .post(server.url("/login"))
        .json(&json!({"operator": "operator", "secret": SECRET}))
        .send()
        .unwrap()
        .json()
        .unwrap();
    let token = login["token"].as_str().unwrap();
    let state: Value = http.get(server.url("/state")).bearer_auth(token).send().unwrap().json().unwrap();
    assert_eq!(state["phase"], "Decision");
    let ack = http
        .post(server.url("/recommendation"))
        .bearer_auth(token)
        .json(&json!({"target": "observer-2", "action": "clear the road"}))
        .send()
        .unwrap();
    assert!(ack.status().is_success());
    let ack: Value = ack.json().unwrap();
    let events = http.get(server.url("/events")).bearer_auth(token).send().unwrap().text().unwrap();
    let propose = events
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .find(|v| v["performative"] == "PROPOSE")
        .unwrap();
    assert_eq!(propose["seq"], ack["seq"]);
    assert_eq!(propose["receivers"], json!(["observer-2"]));
}

#[test]
fn serve_auto_equals_run() {
    let dir = tempfile::tempdir().unwrap();
    let creds = credentials_file(dir.path());
    for seed in [1u64, 2] {
        let s = dir.path().join(format!("{seed}.scenario"));
        std::fs::write(&s, synthetic_scenario(seed).to_json()).unwrap();
        let (served, ran) = (dir.path().join(format!("served-{seed}")), dir.path().join(format!("ran-{seed}")));
        let _server = Server::start(&[path(&s), "--credentials", path(&creds), "--auto", "--report", path(&served)]);
        crisismesh(&["run", path(&s), "--report", path(&ran)]);
        let served = wait_for_file(&served, Duration::from_secs(10)).expect("served report");
        let ran = std::fs::read_to_string(&ran).unwrap();
        assert_eq!(RunReport::parse(&served).unwrap(), RunReport::parse(&ran).unwrap());
        assert_eq!(served, ran);
    }
}
