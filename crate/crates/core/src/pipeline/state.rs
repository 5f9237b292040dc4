use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    Idle,
    Detection,
    Selection,
    Awareness,
    Assembly,
    Decision,
    Monitoring,
    Resolved,
    Rejected,
}

impl Phase {
    pub const ALL: [Phase; 9] = [
        Phase::Idle,
        Phase::Detection,
        Phase::Selection,
        Phase::Awareness,
        Phase::Assembly,
        Phase::Decision,
        Phase::Monitoring,
        Phase::Resolved,
        Phase::Rejected,
    ];

    pub fn is_terminal(self) -> bool {
        matches!(self, Phase::Resolved | Phase::Rejected)
    }

    pub fn parse(name: &str) -> Option<Phase> {
        Phase::ALL.into_iter().find(|p| format!("{p:?}") == name)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PipelineEvent {
    SignalReceived,
    SignalVerified,
    DetectionAbandoned,
    CrisisSelected,
    AwarenessBuilt,
    PlanAssembled,
    RecommendationIssued,
    Replan,
    CrisisResolved,
}

impl PipelineEvent {
    pub const ALL: [PipelineEvent; 9] = [
        PipelineEvent::SignalReceived,
        PipelineEvent::SignalVerified,
        PipelineEvent::DetectionAbandoned,
        PipelineEvent::CrisisSelected,
        PipelineEvent::AwarenessBuilt,
        PipelineEvent::PlanAssembled,
        PipelineEvent::RecommendationIssued,
        PipelineEvent::Replan,
        PipelineEvent::CrisisResolved,
    ];
}

impl fmt::Display for PipelineEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The complete legal transition table.
pub const TRANSITIONS: [(Phase, PipelineEvent, Phase); 10] = [
    (Phase::Idle, PipelineEvent::SignalReceived, Phase::Detection),
    (Phase::Detection, PipelineEvent::SignalReceived, Phase::Detection),
    (Phase::Detection, PipelineEvent::SignalVerified, Phase::Selection),
    (Phase::Detection, PipelineEvent::DetectionAbandoned, Phase::Rejected),
    (Phase::Selection, PipelineEvent::CrisisSelected, Phase::Awareness),
    (Phase::Awareness, PipelineEvent::AwarenessBuilt, Phase::Assembly),
    (Phase::Assembly, PipelineEvent::PlanAssembled, Phase::Decision),
    (Phase::Decision, PipelineEvent::RecommendationIssued, Phase::Monitoring),
    (Phase::Monitoring, PipelineEvent::Replan, Phase::Assembly),
    (Phase::Monitoring, PipelineEvent::CrisisResolved, Phase::Resolved),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("illegal transition: {event} in phase {from}")]
pub struct IllegalTransition {
    pub from: Phase,
    pub event: PipelineEvent,
}

pub fn advance(state: Phase, event: PipelineEvent) -> Result<Phase, IllegalTransition> {
    TRANSITIONS
        .iter()
        .find(|(from, ev, _)| *from == state && *ev == event)
        .map(|(_, _, to)| *to)
        .ok_or(IllegalTransition { from: state, event })
}
