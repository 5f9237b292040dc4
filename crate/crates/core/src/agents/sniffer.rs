use std::fmt::Write;

use super::bus::TraceRecord;

/// Plain-text sequence diagram of a trace, one arrow per receiver:
/// `seq tick sender ->> receiver : PERFORMATIVE conversation_id`.
pub fn sniffer_export(trace: &[TraceRecord]) -> String {
    let mut out = String::new();
    for rec in trace {
        let m = &rec.message;
        for r in &rec.delivered_to {
            writeln!(out, "{} {} {} ->> {} : {} {}", rec.seq, m.tick, m.sender, r, m.performative, m.conversation_id)
                .expect("writing to a String");
        }
    }
    out
}
