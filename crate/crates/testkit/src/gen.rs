//! Seeded generators. Every function is a pure function of the RNG state.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crisismesh_core::agents::{AclMessage, AgentDescriptor, AgentRole, Content, FieldReport, FrameMeta, Performative, TraceRecord};
use crisismesh_core::scenario::{EventKind, EventPayload, HumanInput, Scenario, ScenarioEvent};
use crisismesh_core::store::{
    Comparator, Datatype, Filter, Iri, Literal, Projection, Query, Term, Triple, TriplePattern, TripleStore, Variable,
};

pub use rand_chacha::ChaCha8Rng as Rng8;
use rand::SeedableRng;

pub fn rng(seed: u64) -> Rng8 {
    Rng8::seed_from_u64(seed)
}

const SUBJECTS: usize = 6;
const PREDICATES: usize = 3;

fn subject(rng: &mut impl Rng) -> Term {
    Term::Iri(Iri::cm(&format!("s{}", rng.gen_range(0..SUBJECTS))))
}

fn predicate(rng: &mut impl Rng) -> Term {
    Term::Iri(Iri::cm(&format!("p{}", rng.gen_range(0..PREDICATES))))
}

fn literal(rng: &mut impl Rng) -> Literal {
    match rng.gen_range(0..4) {
        0 | 1 => Literal::integer(rng.gen_range(0..5)),
        2 => Literal::new(format!("{}.5", rng.gen_range(0..3)), Datatype::Decimal),
        _ => Literal::string(["a", "b", "c"][rng.gen_range(0..3)]),
    }
}

fn object(rng: &mut impl Rng) -> Term {
    if rng.gen_bool(0.5) {
        subject(rng)
    } else {
        Term::Literal(literal(rng))
    }
}

/// A store of up to `max` triples over a small vocabulary so joins connect.
pub fn random_store(rng: &mut impl Rng, max: usize) -> TripleStore {
    let n = rng.gen_range(0..=max);
    let mut store = TripleStore::new();
    for _ in 0..n {
        store.insert(Triple::new(subject(rng), predicate(rng), object(rng))).expect("generated triples are valid");
    }
    store
}

const VARS: [&str; 4] = ["a", "b", "c", "d"];

/// A valid query with up to `max_patterns` patterns and at most one filter.
pub fn random_query(rng: &mut impl Rng, max_patterns: usize) -> Query {
    loop {
        let n = rng.gen_range(1..=max_patterns);
        let var = |rng: &mut dyn rand::RngCore| Term::var(VARS[rng.gen_range(0..VARS.len())]);
        let patterns: Vec<TriplePattern> = (0..n)
            .map(|_| {
                let s = if rng.gen_bool(0.6) { var(rng) } else { subject(rng) };
                let p = if rng.gen_bool(0.3) { var(rng) } else { predicate(rng) };
                let o = if rng.gen_bool(0.6) { var(rng) } else { object(rng) };
                TriplePattern::new(s, p, o)
            })
            .collect();
        let vars: Vec<Variable> = patterns
            .iter()
            .flat_map(|p| p.variables().cloned().collect::<Vec<_>>())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if vars.is_empty() {
            continue;
        }
        let projection = if rng.gen_bool(0.3) {
            Projection::All
        } else {
            let mut chosen: Vec<Variable> = vars.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
            if chosen.is_empty() {
                chosen.push(vars[0].clone());
            }
            chosen.shuffle(rng);
            Projection::Vars(chosen)
        };
        let filters = if rng.gen_bool(0.4) {
            let op = [Comparator::Eq, Comparator::Ne, Comparator::Lt, Comparator::Gt][rng.gen_range(0..4)];
            vec![Filter { variable: vars[rng.gen_range(0..vars.len())].clone(), op, value: literal(rng) }]
        } else {
            Vec::new()
        };
        if let Ok(q) = Query::new(projection, patterns, filters) {
            return q;
        }
    }
}

/// Up to `max_nodes` classes with random child-to-parent edges that cannot
/// form a cycle; names are shuffled so they carry no order information.
pub fn random_dag(rng: &mut impl Rng, max_nodes: usize) -> (Vec<Iri>, Vec<(Iri, Iri)>) {
    let n = rng.gen_range(1..=max_nodes);
    let mut names: Vec<Iri> = (0..n).map(|i| Iri::cm(&format!("C{i}"))).collect();
    names.shuffle(rng);
    let density = rng.gen_range(0.02..0.3);
    let mut edges = Vec::new();
    for child in 1..n {
        for parent in 0..child {
            if rng.gen_bool(density) {
                edges.push((names[child].clone(), names[parent].clone()));
            }
        }
    }
    (names, edges)
}

/// A raw trace of up to `max_len` records over at most two conversations,
/// bypassing the bus so that protocol-violating sequences occur.
pub fn random_performative_trace(rng: &mut impl Rng, max_len: usize) -> Vec<TraceRecord> {
    let agents = ["dm", "o1", "o2"];
    let n = rng.gen_range(1..=max_len);
    (1..=n as u64)
        .map(|seq| {
            let p = Performative::ALL[rng.gen_range(0..Performative::ALL.len())];
            let sender = agents[rng.gen_range(0..agents.len())];
            let mut receivers: Vec<&str> = agents.iter().copied().filter(|a| *a != sender && rng.gen_bool(0.6)).collect();
            if receivers.is_empty() {
                receivers.push(if sender == "dm" { "o1" } else { "dm" });
            }
            let conv = ["c1", "c2"][rng.gen_range(0..2)];
            let message = AclMessage::new(p, sender, receivers, conv, Content::Ack, seq);
            TraceRecord { seq, delivered_to: message.receivers.clone(), message }
        })
        .collect()
}

const FEATURES: [&str; 7] =
    ["VehicleInvolved", "RoadBlocked", "Explosion", "ArmedAssailant", "CrowdPanic", "Flood", "PowerOutage"];
const ROLES: [&str; 5] = ["PoliceRole", "MedicalRole", "CitizenRole", "InvestigatorRole", "ExpertRole"];

fn features(rng: &mut impl Rng) -> Vec<Iri> {
    let profile: &[&str] = match rng.gen_range(0..4) {
        0 => &FEATURES[0..2],
        1 => &FEATURES[2..5],
        2 => &FEATURES[..],
        _ => &FEATURES[5..],
    };
    let mut out: Vec<Iri> = profile.iter().filter(|_| rng.gen_bool(0.75)).map(|f| Iri::cm(f)).collect();
    out.sort();
    out
}

/// A valid synthetic scenario. Runs may end in any phase, including failure.
pub fn synthetic_scenario(seed: u64) -> Scenario {
    let mut rng = rng(seed);
    let mut agents = vec![AgentDescriptor::new("dm", AgentRole::DecisionMaker)];
    let observers = rng.gen_range(1..=3);
    for i in 1..=observers {
        agents.push(AgentDescriptor::new(format!("observer-{i}"), AgentRole::Observer));
    }
    if rng.gen_bool(0.6) {
        agents.push(AgentDescriptor::new("camera-1", AgentRole::Camera));
    }
    agents[1..].shuffle(&mut rng);
    let field: Vec<String> = agents[1..].iter().map(|a| a.id.clone()).collect();

    let ticks = rng.gen_range(1..=10u64);
    let mut events = Vec::new();
    let mut frames = 0;
    for tick in 0..ticks {
        for _ in 0..rng.gen_range(0..=3) {
            let agent = field[rng.gen_range(0..field.len())].clone();
            let kind = if agent.starts_with("camera") && rng.gen_bool(0.7) {
                EventKind::Frame
            } else {
                [EventKind::Signal, EventKind::Report, EventKind::Context, EventKind::Status][rng.gen_range(0..4)]
            };
            let payload = match kind {
                EventKind::Frame => {
                    frames += 1;
                    EventPayload::Frame(FrameMeta { frame_id: format!("f-{frames:03}"), caption: "scene".into() })
                }
                EventKind::Signal => EventPayload::Field(FieldReport {
                    kind: kind_of(kind),
                    source: rng.gen_bool(0.3).then(|| format!("hotline-{}", rng.gen_range(0..3))),
                    features: features(&mut rng),
                    credibility: Some(f64::from(rng.gen_range(0..=10u8)) / 10.0),
                    ..Default::default()
                }),
                EventKind::Report => EventPayload::Field(FieldReport {
                    kind: kind_of(kind),
                    features: if rng.gen_bool(0.3) { features(&mut rng) } else { Vec::new() },
                    casualties: rng.gen_bool(0.6).then(|| rng.gen_range(0..15)),
                    role: rng.gen_bool(0.6).then(|| Iri::cm(ROLES[rng.gen_range(0..ROLES.len())])),
                    ..Default::default()
                }),
                EventKind::Context => EventPayload::Field(FieldReport {
                    kind: kind_of(kind),
                    climate: rng.gen_bool(0.5).then(|| ["rain", "fog", "clear"][rng.gen_range(0..3)].to_string()),
                    geography: rng.gen_bool(0.5).then(|| Iri::cm("NationalRoad1")),
                    damage_level: rng.gen_bool(0.7).then(|| rng.gen_range(0..=6)),
                    ..Default::default()
                }),
                _ => EventPayload::Field(FieldReport {
                    kind: kind_of(kind),
                    status: Some(if rng.gen_bool(0.5) { "resolved" } else { "ongoing" }.to_string()),
                    ..Default::default()
                }),
            };
            events.push(ScenarioEvent { tick, agent, kind, payload });
        }
        if rng.gen_bool(0.05) {
            let target = field[rng.gen_range(0..field.len())].clone();
            events.push(ScenarioEvent {
                tick,
                agent: "dm".into(),
                kind: EventKind::HumanRecommendation,
                payload: EventPayload::Human(HumanInput { target, action: "hold position".into() }),
            });
        }
    }
    let scenario = Scenario { name: format!("synthetic-{seed}"), seed, agents, events, expected: None };
    scenario.validate().expect("generator emits valid scenarios");
    scenario
}

fn kind_of(kind: EventKind) -> crisismesh_core::agents::ReportKind {
    use crisismesh_core::agents::ReportKind;
    match kind {
        EventKind::Signal => ReportKind::Signal,
        EventKind::Context => ReportKind::Context,
        EventKind::Status => ReportKind::Status,
        _ => ReportKind::Observation,
    }
}
