use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::agents::{AgentDescriptor, AgentRole, BusError, FieldReport, FrameMeta, Registry, ReportKind};
use crate::pipeline::Phase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Signal,
    Report,
    Frame,
    Context,
    Status,
    HumanRecommendation,
}

impl EventKind {
    fn report_kind(self) -> Option<ReportKind> {
        match self {
            EventKind::Signal => Some(ReportKind::Signal),
            EventKind::Report => Some(ReportKind::Observation),
            EventKind::Context => Some(ReportKind::Context),
            EventKind::Status => Some(ReportKind::Status),
            EventKind::Frame | EventKind::HumanRecommendation => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumanInput {
    pub target: String,
    pub action: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventPayload {
    Field(FieldReport),
    Frame(FrameMeta),
    Human(HumanInput),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEvent {
    pub tick: u64,
    pub agent: String,
    pub kind: EventKind,
    pub payload: EventPayload,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_phase: Option<Phase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recommendation_target: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub agents: Vec<AgentDescriptor>,
    pub events: Vec<ScenarioEvent>,
    pub expected: Option<Expected>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LoadError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("event {index} names agent `{agent}`, which is not in the roster")]
    UnknownAgentInEvent { index: usize, agent: String },
    #[error("event {index} at tick {tick} follows a later tick")]
    UnsortedEvents { index: usize, tick: u64 },
    #[error("event {index}: invalid {kind:?} payload: {message}")]
    InvalidPayload { index: usize, kind: EventKind, message: String },
    #[error("event {index}: agent `{agent}` may not emit {kind:?} events")]
    EventFromWrongRole { index: usize, agent: String, kind: EventKind },
    #[error("scenario has events but no decision maker")]
    MissingDecisionMaker,
    #[error("invalid roster: {0}")]
    Roster(#[from] BusError),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    seed: u64,
    agents: Vec<AgentDescriptor>,
    #[serde(default)]
    events: Vec<RawEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expected: Option<Expected>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    tick: u64,
    agent: String,
    kind: EventKind,
    #[serde(default)]
    payload: Value,
}

fn payload_value(payload: &Value) -> Value {
    if payload.is_null() {
        Value::Object(Default::default())
    } else {
        payload.clone()
    }
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn load(text: &str) -> Result<Scenario, LoadError> {
        let raw: RawScenario = serde_json::from_str(text).map_err(|e| LoadError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut events = Vec::with_capacity(raw.events.len());
        for (index, e) in raw.events.into_iter().enumerate() {
            let value = payload_value(&e.payload);
            let invalid = |err: serde_json::Error| LoadError::InvalidPayload { index, kind: e.kind, message: err.to_string() };
            let payload = match e.kind {
                EventKind::Frame => EventPayload::Frame(serde_json::from_value(value).map_err(invalid)?),
                EventKind::HumanRecommendation => EventPayload::Human(serde_json::from_value(value).map_err(invalid)?),
                kind => {
                    let mut report: FieldReport = serde_json::from_value(value).map_err(invalid)?;
                    report.kind = kind.report_kind().expect("field event kinds map to report kinds");
                    EventPayload::Field(report)
                }
            };
            events.push(ScenarioEvent { tick: e.tick, agent: e.agent, kind: e.kind, payload });
        }
        let scenario = Scenario { name: raw.name, seed: raw.seed, agents: raw.agents, events, expected: raw.expected };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), LoadError> {
        let mut registry = Registry::new();
        for a in &self.agents {
            registry.register(a.clone())?;
        }
        let dm = registry.decision_maker().map(|a| a.id.clone());
        if !self.events.is_empty() && dm.is_none() {
            return Err(LoadError::MissingDecisionMaker);
        }
        let mut last = 0;
        for (index, e) in self.events.iter().enumerate() {
            if e.tick < last {
                return Err(LoadError::UnsortedEvents { index, tick: e.tick });
            }
            last = e.tick;
            let Some(agent) = registry.get(&e.agent) else {
                return Err(LoadError::UnknownAgentInEvent { index, agent: e.agent.clone() });
            };
            let from_dm = agent.role == AgentRole::DecisionMaker;
            if from_dm != (e.kind == EventKind::HumanRecommendation) {
                return Err(LoadError::EventFromWrongRole { index, agent: e.agent.clone(), kind: e.kind });
            }
            let consistent = matches!(
                (e.kind, &e.payload),
                (EventKind::Frame, EventPayload::Frame(_))
                    | (EventKind::HumanRecommendation, EventPayload::Human(_))
                    | (EventKind::Signal | EventKind::Report | EventKind::Context | EventKind::Status, EventPayload::Field(_))
            );
            if !consistent {
                return Err(LoadError::InvalidPayload {
                    index,
                    kind: e.kind,
                    message: "payload does not match the event kind".into(),
                });
            }
        }
        Ok(())
    }

    /// The scenario as a JSON document that [`Scenario::load`] accepts.
    pub fn to_json(&self) -> String {
        let events = self
            .events
            .iter()
            .map(|e| {
                let payload = match &e.payload {
                    EventPayload::Field(r) => {
                        let mut v = serde_json::to_value(r).expect("reports serialize");
                        v.as_object_mut().expect("reports are objects").remove("kind");
                        v
                    }
                    EventPayload::Frame(f) => serde_json::to_value(f).expect("frames serialize"),
                    EventPayload::Human(h) => serde_json::to_value(h).expect("human input serializes"),
                };
                RawEvent { tick: e.tick, agent: e.agent.clone(), kind: e.kind, payload }
            })
            .collect();
        let raw = RawScenario {
            name: self.name.clone(),
            seed: self.seed,
            agents: self.agents.clone(),
            events,
            expected: self.expected.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("scenarios serialize") + "\n"
    }
}
