use std::collections::BTreeMap;
use std::fmt;

use super::bus::TraceRecord;
use super::message::Performative;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    /// INFORM or FAILURE with no REQUEST to answer.
    WithoutRequest,
    /// A reply that opens a conversation.
    WithoutOpener,
    /// The initiator sent something only a responder may send.
    FromInitiator,
    /// Legal performative, wrong moment (or sender outside the conversation).
    OutOfOrder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolViolation {
    pub seq: u64,
    pub conversation_id: String,
    pub performative: Performative,
    pub kind: ViolationKind,
}

impl ProtocolViolation {
    pub fn reason(&self) -> String {
        let p = self.performative;
        match self.kind {
            ViolationKind::WithoutRequest => format!("{p} without prior REQUEST"),
            ViolationKind::WithoutOpener => format!("{p} without prior REQUEST or PROPOSE"),
            ViolationKind::FromInitiator => format!("{p} sent by the conversation initiator"),
            ViolationKind::OutOfOrder => format!("{p} out of order"),
        }
    }
}

impl fmt::Display for ProtocolViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seq {} [{}]: {}", self.seq, self.conversation_id, self.reason())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Opener {
    Request,
    Proposal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Responder {
    Pending,
    Agreed,
    Informed,
    Closed,
}

struct Conversation {
    opener: Opener,
    initiator: String,
    responders: BTreeMap<String, Responder>,
}

impl Conversation {
    fn open(opener: Opener, initiator: &str, receivers: &[String]) -> Self {
        Conversation {
            opener,
            initiator: initiator.to_string(),
            responders: receivers.iter().map(|r| (r.clone(), Responder::Pending)).collect(),
        }
    }

    fn step(&mut self, sender: &str, receivers: &[String], p: Performative) -> Result<(), ViolationKind> {
        use Performative as P;
        if sender == self.initiator {
            return match (self.opener, p) {
                (Opener::Request, P::Request) | (Opener::Proposal, P::Propose) => {
                    *self = Conversation::open(self.opener, sender, receivers);
                    Ok(())
                }
                (_, P::NotUnderstood) => Ok(()),
                (_, P::Request | P::Propose) => Err(ViolationKind::OutOfOrder),
                _ => Err(ViolationKind::FromInitiator),
            };
        }
        let Some(state) = self.responders.get_mut(sender) else {
            return Err(ViolationKind::OutOfOrder);
        };
        let next = match (self.opener, *state, p) {
            (Opener::Request, Responder::Pending, P::Agree) => Responder::Agreed,
            (Opener::Request, Responder::Pending | Responder::Agreed | Responder::Informed, P::Inform) => {
                Responder::Informed
            }
            (Opener::Request, Responder::Pending | Responder::Agreed | Responder::Informed, P::Failure) => {
                Responder::Closed
            }
            (Opener::Request, Responder::Pending, P::Refuse | P::NotUnderstood) => Responder::Closed,
            (Opener::Proposal, Responder::Pending, P::Agree | P::Refuse | P::NotUnderstood) => Responder::Closed,
            (Opener::Proposal, _, P::Inform | P::Failure) => return Err(ViolationKind::WithoutRequest),
            _ => return Err(ViolationKind::OutOfOrder),
        };
        *state = next;
        Ok(())
    }
}

/// Checks each conversation in `trace` against the request/proposal protocol.
///
/// A conversation opens with REQUEST (answered by AGREE, REFUSE,
/// NOT_UNDERSTOOD, then INFORM or FAILURE) or PROPOSE (answered once by AGREE,
/// REFUSE or NOT_UNDERSTOOD). The initiator may re-issue its opener. A
/// violating message leaves the conversation state untouched.
pub fn validate_conversation(trace: &[TraceRecord]) -> Vec<ProtocolViolation> {
    let mut conversations: BTreeMap<&str, Conversation> = BTreeMap::new();
    let mut out = Vec::new();
    for rec in trace {
        let m = &rec.message;
        let result = match conversations.get_mut(m.conversation_id.as_str()) {
            Some(conv) => conv.step(&m.sender, &m.receivers, m.performative),
            None => match m.performative {
                Performative::Request | Performative::Propose => {
                    let opener =
                        if m.performative == Performative::Request { Opener::Request } else { Opener::Proposal };
                    conversations.insert(&m.conversation_id, Conversation::open(opener, &m.sender, &m.receivers));
                    Ok(())
                }
                Performative::Inform | Performative::Failure => Err(ViolationKind::WithoutRequest),
                _ => Err(ViolationKind::WithoutOpener),
            },
        };
        if let Err(kind) = result {
            out.push(ProtocolViolation {
                seq: rec.seq,
                conversation_id: m.conversation_id.clone(),
                performative: m.performative,
                kind,
            });
        }
    }
    out
}
