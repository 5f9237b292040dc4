use serde::{Deserialize, Serialize};

use super::model::Expected;
use crate::agents::{read_trace, validate_conversation, write_trace, Performative, ProtocolViolation, TraceRecord};
use crate::pipeline::{Phase, Recommendation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseEntry {
    pub tick: u64,
    pub phase: Phase,
}

/// The error that halted a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Failure {
    pub tick: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub message_trace: Vec<TraceRecord>,
    pub phase_log: Vec<PhaseEntry>,
    pub recommendations: Vec<Recommendation>,
    pub final_phase: Phase,
    pub failure: Option<Failure>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Footer {
    scenario: String,
    seed: u64,
    phase_log: Vec<PhaseEntry>,
    recommendations: Vec<Recommendation>,
    final_phase: Phase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    failure: Option<Failure>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed run report: {0}")]
pub struct ReportError(pub String);

impl RunReport {
    /// Canonical text form: trace wire lines, then one JSON footer line.
    pub fn serialize(&self) -> String {
        let footer = Footer {
            scenario: self.scenario.clone(),
            seed: self.seed,
            phase_log: self.phase_log.clone(),
            recommendations: self.recommendations.clone(),
            final_phase: self.final_phase,
            failure: self.failure.clone(),
        };
        let mut out = write_trace(&self.message_trace);
        out.push_str(&serde_json::to_string(&footer).expect("footer serializes"));
        out.push('\n');
        out
    }

    pub fn parse(text: &str) -> Result<RunReport, ReportError> {
        let body = text.trim_end_matches('\n');
        let (trace_text, footer_line) = match body.rfind('\n') {
            Some(i) => (&body[..i], &body[i + 1..]),
            None => ("", body),
        };
        let footer: Footer =
            serde_json::from_str(footer_line).map_err(|e| ReportError(format!("footer: {e}")))?;
        let message_trace = read_trace(trace_text).map_err(|e| ReportError(e.to_string()))?;
        Ok(RunReport {
            scenario: footer.scenario,
            seed: footer.seed,
            message_trace,
            phase_log: footer.phase_log,
            recommendations: footer.recommendations,
            final_phase: footer.final_phase,
            failure: footer.failure,
        })
    }

    pub fn violations(&self) -> Vec<ProtocolViolation> {
        validate_conversation(&self.message_trace)
    }

    pub fn proposals(&self) -> impl Iterator<Item = &TraceRecord> {
        self.message_trace.iter().filter(|r| r.message.performative == Performative::Propose)
    }

    /// Differences from `expected`, one line each; empty when it holds.
    pub fn mismatches(&self, expected: &Expected) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(phase) = expected.final_phase {
            if phase != self.final_phase {
                out.push(format!("final phase {} (expected {phase})", self.final_phase));
            }
        }
        if let Some(target) = &expected.recommendation_target {
            match self.recommendations.first() {
                Some(r) if &r.target == target => {}
                Some(r) => out.push(format!("recommendation targets {} (expected {target})", r.target)),
                None => out.push(format!("no recommendation (expected one for {target})")),
            }
        }
        out
    }
}

/// True iff both reports serialize identically.
pub fn replay_check(a: &RunReport, b: &RunReport) -> bool {
    a.serialize() == b.serialize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AclMessage, Content};

    fn report() -> RunReport {
        let m = AclMessage::new(Performative::Request, "dm", ["o1"], "c", Content::Ack, 0).with_reply_with("c");
        RunReport {
            scenario: "s".into(),
            seed: 3,
            message_trace: vec![TraceRecord { seq: 1, delivered_to: m.receivers.clone(), message: m }],
            phase_log: vec![PhaseEntry { tick: 1, phase: Phase::Detection }],
            recommendations: vec![],
            final_phase: Phase::Detection,
            failure: Some(Failure { tick: 2, error: "boom".into() }),
        }
    }

    #[test]
    fn round_trip() {
        let r = report();
        let text = r.serialize();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(RunReport::parse(&text).unwrap(), r);
    }

    #[test]
    fn replay_check_detects_seq_change() {
        let a = report();
        assert!(replay_check(&a, &a.clone()));
        let mut b = a.clone();
        b.message_trace[0].seq = 2;
        assert!(!replay_check(&a, &b));
    }

    #[test]
    fn empty_trace_is_footer_only() {
        let mut r = report();
        r.message_trace.clear();
        let text = r.serialize();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(RunReport::parse(&text).unwrap(), r);
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(RunReport::parse("not json\n").is_err());
        assert!(RunReport::parse("").is_err());
    }
}
