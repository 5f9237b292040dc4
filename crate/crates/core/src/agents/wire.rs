use serde::{Deserialize, Serialize};

use super::bus::TraceRecord;
use super::message::{AclMessage, Content, Performative};

/// One trace record as a JSON object; field order is the wire order.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRecord {
    seq: u64,
    tick: u64,
    performative: Performative,
    sender: String,
    receivers: Vec<String>,
    conversation_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reply_with: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    in_reply_to: Option<String>,
    ontology: String,
    content: Content,
}

#[derive(Debug, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct WireError {
    pub line: usize,
    pub message: String,
}

/// Serializes one record without the trailing newline.
pub fn to_wire_line(rec: &TraceRecord) -> String {
    let m = &rec.message;
    let wire = WireRecord {
        seq: rec.seq,
        tick: m.tick,
        performative: m.performative,
        sender: m.sender.clone(),
        receivers: m.receivers.clone(),
        conversation_id: m.conversation_id.clone(),
        reply_with: m.reply_with.clone(),
        in_reply_to: m.in_reply_to.clone(),
        ontology: m.ontology.clone(),
        content: m.content.clone(),
    };
    serde_json::to_string(&wire).expect("trace records always serialize")
}

pub fn from_wire_line(line: &str) -> Result<TraceRecord, serde_json::Error> {
    let w: WireRecord = serde_json::from_str(line)?;
    let message = AclMessage {
        performative: w.performative,
        sender: w.sender,
        receivers: w.receivers,
        conversation_id: w.conversation_id,
        reply_with: w.reply_with,
        in_reply_to: w.in_reply_to,
        ontology: w.ontology,
        content: w.content,
        tick: w.tick,
    };
    Ok(TraceRecord { seq: w.seq, delivered_to: message.receivers.clone(), message })
}

/// Newline-terminated wire lines for a whole trace.
pub fn write_trace(trace: &[TraceRecord]) -> String {
    trace.iter().map(|r| to_wire_line(r) + "\n").collect()
}

/// Parses wire lines, skipping blank ones.
pub fn read_trace(text: &str) -> Result<Vec<TraceRecord>, WireError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| from_wire_line(l).map_err(|e| WireError { line: i + 1, message: e.to_string() }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::message::FieldReport;

    fn sample() -> TraceRecord {
        let m = AclMessage::new(
            Performative::Inform,
            "observer-1",
            ["decision-maker"],
            "deploy",
            Content::Report(FieldReport { casualties: Some(1), ..Default::default() }),
            2,
        )
        .in_reply_to("deploy");
        TraceRecord { seq: 4, delivered_to: m.receivers.clone(), message: m }
    }

    #[test]
    fn field_order_and_omitted_optionals() {
        let line = to_wire_line(&sample());
        assert_eq!(
            line,
            r#"{"seq":4,"tick":2,"performative":"INFORM","sender":"observer-1","receivers":["decision-maker"],"conversation_id":"deploy","in_reply_to":"deploy","ontology":"cm-crisis-v1","content":{"type":"report","kind":"observation","casualties":1}}"#
        );
    }

    #[test]
    fn round_trip() {
        let rec = sample();
        assert_eq!(from_wire_line(&to_wire_line(&rec)).unwrap(), rec);
        let text = write_trace(&[rec.clone(), rec.clone()]);
        assert!(text.ends_with('\n'));
        assert_eq!(read_trace(&text).unwrap(), vec![rec.clone(), rec]);
    }

    #[test]
    fn bad_line_reports_its_number() {
        let err = read_trace(&format!("{}\n{{nope\n", to_wire_line(&sample()))).unwrap_err();
        assert_eq!(err.line, 2);
    }
}
