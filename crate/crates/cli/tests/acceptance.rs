//! One PASS/FAIL line per acceptance criterion. Exits non-zero on any FAIL.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::{credentials_file, crisismesh, fixture, wait_for_file, Server};
use crisismesh_core::agents::{sniffer_export, validate_conversation, AclMessage, Content, Performative, TraceRecord};
use crisismesh_core::fixtures::ROAD_ACCIDENT_SNIFF;
use crisismesh_core::ontology::OntologySchema;
use crisismesh_core::pipeline::{Phase, PipelineConfig};
use crisismesh_core::scenario::{replay_check, run, RunReport};
use crisismesh_core::store::{evaluate, QueryError};
use crisismesh_testkit::gen::{random_dag, random_performative_trace, random_query, random_store, rng, synthetic_scenario};
use crisismesh_testkit::oracle::{
    closure_matrix, contains_subsequence, fsm_oracle, query_oracle, severity_oracle, OracleOutcome,
};
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

fn road_accident_fidelity() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let report_path = dir.path().join("report");
    let start = Instant::now();
    let out = crisismesh(&["run", fixture("road_accident.scenario").to_str().unwrap(), "--report", report_path.to_str().unwrap()]);
    let took = within(start, Duration::from_secs(1))?;
    ensure(out.status.code() == Some(0), || format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))?;
    let report = RunReport::parse(&std::fs::read_to_string(&report_path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(report.final_phase == Phase::Resolved, || format!("final phase {}", report.final_phase))?;
    let proposals: Vec<&TraceRecord> = report.proposals().collect();
    ensure(proposals.len() == 1, || format!("{} PROPOSE messages", proposals.len()))?;
    ensure(proposals[0].message.receivers == ["observer-2"], || format!("PROPOSE to {:?}", proposals[0].message.receivers))?;
    ensure(sniffer_export(&report.message_trace) == ROAD_ACCIDENT_SNIFF, || "sniffer export differs from golden file".into())?;
    Ok(format!("exit 0, Resolved, PROPOSE to observer-2, golden sniff equal, {took:.2?}"))
}

fn sequence_fidelity() -> Check {
    let scenario = crisismesh_core::scenario::Scenario::load(crisismesh_core::fixtures::ROAD_ACCIDENT_SCENARIO).map_err(|e| e.to_string())?;
    let report = run(&scenario, None);
    let dm = "decision-maker";
    let deploy = |r: &TraceRecord| r.message.performative == Performative::Request && r.message.sender == dm && r.message.conversation_id == "deploy";
    let observer_inform = |r: &TraceRecord| r.message.performative == Performative::Inform && r.message.sender.starts_with("observer") && r.message.in_reply_to.as_deref() == Some("deploy");
    let camera_inform = |r: &TraceRecord| {
        r.message.performative == Performative::Inform && r.message.sender.starts_with("camera") && matches!(r.message.content, Content::FrameMeta(_))
    };
    let request = |r: &TraceRecord| r.message.performative == Performative::Request && r.message.sender == dm && r.message.conversation_id != "deploy";
    let reply_inform = |r: &TraceRecord| r.message.performative == Performative::Inform && r.message.conversation_id.starts_with("collect");
    let propose = |r: &TraceRecord| r.message.performative == Performative::Propose && r.message.sender == dm;
    let steps: [&dyn Fn(&TraceRecord) -> bool; 6] = [&deploy, &observer_inform, &camera_inform, &request, &reply_inform, &propose];
    ensure(contains_subsequence(&report.message_trace, &steps), || "subsequence not found".into())?;
    Ok(format!("6 ordered steps matched in {} records", report.message_trace.len()))
}

fn query_equivalence() -> Check {
    let start = Instant::now();
    let mut errors = 0;
    for seed in 0..500u64 {
        let mut r = rng(seed);
        let store = random_store(&mut r, 64);
        let query = random_query(&mut r, 3);
        match (evaluate(&store, &query), query_oracle(&store, &query)) {
            (Ok(rs), OracleOutcome::Rows(rows)) if rs.rows == rows => {}
            (Err(QueryError::TypeMismatch { .. }), OracleOutcome::TypeMismatch) => errors += 1,
            (got, want) => return Err(format!("seed {seed}: {query}: got {got:?}, oracle {want:?}")),
        }
    }
    let took = within(start, Duration::from_secs(30))?;
    Ok(format!("500/500 equal ({errors} agreed type errors), {took:.2?}"))
}

fn subclass_closure() -> Check {
    let start = Instant::now();
    let mut pairs = 0usize;
    for seed in 0..200u64 {
        let (nodes, edges) = random_dag(&mut rng(seed), 50);
        let schema = OntologySchema::new(nodes.iter().cloned().collect(), edges.iter().cloned().collect(), BTreeMap::new())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let reach = closure_matrix(&nodes, &edges);
        for (i, a) in nodes.iter().enumerate() {
            for (j, b) in nodes.iter().enumerate() {
                let got = schema.is_subclass_of(a, b).map_err(|e| e.to_string())?;
                ensure(got == reach[i][j], || format!("seed {seed}: {a} <= {b}: got {got}"))?;
                pairs += 1;
            }
        }
    }
    let took = within(start, Duration::from_secs(10))?;
    Ok(format!("200 DAGs, {pairs} pairs equal, {took:.2?}"))
}

fn protocol_fsm() -> Check {
    let mut flagged = 0;
    for seed in 0..1000u64 {
        let mut r = rng(seed);
        let mut trace = random_performative_trace(&mut r, 12);
        let got: Vec<_> = validate_conversation(&trace).into_iter().map(|v| (v.seq, v.kind)).collect();
        ensure(got == fsm_oracle(&trace), || format!("seed {seed}: got {got:?}, oracle {:?}", fsm_oracle(&trace)))?;
        // a lone INFORM in a conversation nobody opened
        let at = r.gen_range(0..=trace.len());
        let inform = AclMessage::new(Performative::Inform, "o1", ["dm"], "lone", Content::Ack, 0);
        trace.insert(at, TraceRecord { seq: 0, delivered_to: inform.receivers.clone(), message: inform });
        for (i, rec) in trace.iter_mut().enumerate() {
            rec.seq = i as u64 + 1;
        }
        let lone = at as u64 + 1;
        let v = validate_conversation(&trace);
        ensure(v.iter().any(|v| v.seq == lone && v.reason() == "INFORM without prior REQUEST"), || format!("seed {seed}: lone INFORM missed"))?;
        flagged += 1;
    }
    Ok(format!("1000/1000 equal to table oracle, {flagged} lone INFORMs flagged"))
}

fn determinism() -> Check {
    for seed in 0..100u64 {
        let s = synthetic_scenario(seed);
        ensure(replay_check(&run(&s, None), &run(&s, None)), || format!("seed {seed} diverged"))?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let creds = credentials_file(dir.path());
    for seed in 0..10u64 {
        let path = dir.path().join(format!("{seed}.scenario"));
        std::fs::write(&path, synthetic_scenario(seed).to_json()).map_err(|e| e.to_string())?;
        let (served, ran) = (dir.path().join(format!("served-{seed}")), dir.path().join(format!("ran-{seed}")));
        let p = |x: &std::path::Path| x.to_str().unwrap().to_string();
        let _server = Server::start(&[&p(&path), "--credentials", &p(&creds), "--auto", "--report", &p(&served)]);
        crisismesh(&["run", &p(&path), "--report", &p(&ran)]);
        let served = wait_for_file(&served, Duration::from_secs(10)).ok_or_else(|| format!("seed {seed}: no served report"))?;
        let ran = std::fs::read_to_string(&ran).map_err(|e| e.to_string())?;
        ensure(served == ran, || format!("seed {seed}: serve --auto report differs from run"))?;
    }
    Ok("100/100 replays identical, 10/10 serve --auto reports equal run".into())
}

fn severity_rule() -> Check {
    let config = PipelineConfig::default();
    let mut cells = 0;
    for seed in 0..50u64 {
        let mut r = rng(seed);
        let damage: Vec<Option<i64>> = (0..8).map(|_| r.gen_bool(0.9).then(|| r.gen_range(-2..10))).collect();
        let casualties: Vec<Option<i64>> = (0..12).map(|_| r.gen_bool(0.9).then(|| r.gen_range(-2..60))).collect();
        for &d in &damage {
            for &c in &casualties {
                ensure(config.severity(d, c) == severity_oracle(d, c), || format!("damage {d:?} casualties {c:?}"))?;
                cells += 1;
            }
        }
    }
    Ok(format!("{cells} cells equal"))
}

fn main() {
    let checks: [Criterion; 7] = [
        ("road-accident fidelity", road_accident_fidelity),
        ("sequence fidelity", sequence_fidelity),
        ("query-engine oracle equivalence", query_equivalence),
        ("subclass-closure oracle", subclass_closure),
        ("protocol FSM", protocol_fsm),
        ("determinism", determinism),
        ("severity rule", severity_rule),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
