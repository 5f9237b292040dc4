use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::message::AclMessage;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BusError {
    #[error("agent id `{0}` is already deployed")]
    DuplicateId(String),
    #[error("a decision maker (`{0}`) is already deployed")]
    SecondDecisionMaker(String),
    #[error("unknown or withdrawn agent `{0}`")]
    UnknownAgent(String),
    #[error("invalid agent id `{0}`")]
    InvalidId(String),
    #[error("`{0}` cannot send a message to itself")]
    SelfSend(String),
    #[error("message has no receivers")]
    NoReceivers,
    #[error("receiver `{0}` listed twice")]
    DuplicateReceiver(String),
    #[error("{performative} in conversation `{conversation_id}` must reply to an earlier reply_with token")]
    MissingReplyReference { performative: String, conversation_id: String },
    #[error("in_reply_to `{token}` matches no earlier reply_with in conversation `{conversation_id}`")]
    InvalidReply { token: String, conversation_id: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRole {
    DecisionMaker,
    Observer,
    Camera,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentStatus {
    Deployed,
    Withdrawn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentDescriptor {
    pub id: String,
    pub role: AgentRole,
    #[serde(default = "deployed", skip_serializing)]
    pub status: AgentStatus,
}

fn deployed() -> AgentStatus {
    AgentStatus::Deployed
}

impl AgentDescriptor {
    pub fn new(id: impl Into<String>, role: AgentRole) -> Self {
        AgentDescriptor { id: id.into(), role, status: AgentStatus::Deployed }
    }
}

/// Agents known to the platform. At most one deployed decision maker.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    agents: BTreeMap<String, AgentDescriptor>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, descriptor: AgentDescriptor) -> Result<String, BusError> {
        let id = descriptor.id.clone();
        if id.is_empty() || id.chars().any(char::is_whitespace) {
            return Err(BusError::InvalidId(id));
        }
        if self.is_deployed(&id) {
            return Err(BusError::DuplicateId(id));
        }
        if descriptor.role == AgentRole::DecisionMaker {
            if let Some(dm) = self.decision_maker() {
                return Err(BusError::SecondDecisionMaker(dm.id.clone()));
            }
        }
        self.agents.insert(id.clone(), AgentDescriptor { status: AgentStatus::Deployed, ..descriptor });
        Ok(id)
    }

    pub fn withdraw(&mut self, id: &str) -> Result<(), BusError> {
        match self.agents.get_mut(id) {
            Some(a) if a.status == AgentStatus::Deployed => {
                a.status = AgentStatus::Withdrawn;
                Ok(())
            }
            _ => Err(BusError::UnknownAgent(id.to_string())),
        }
    }

    pub fn get(&self, id: &str) -> Option<&AgentDescriptor> {
        self.agents.get(id)
    }

    pub fn is_deployed(&self, id: &str) -> bool {
        self.agents.get(id).is_some_and(|a| a.status == AgentStatus::Deployed)
    }

    /// Deployed agents in ascending id order.
    pub fn deployed(&self) -> impl Iterator<Item = &AgentDescriptor> {
        self.agents.values().filter(|a| a.status == AgentStatus::Deployed)
    }

    pub fn decision_maker(&self) -> Option<&AgentDescriptor> {
        self.deployed().find(|a| a.role == AgentRole::DecisionMaker)
    }

    pub fn len(&self) -> usize {
        self.deployed().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One delivered message as the sniffer sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub seq: u64,
    pub message: AclMessage,
    pub delivered_to: Vec<String>,
}

/// Reliable, totally ordered message bus with per-agent inboxes.
///
/// Every successful `send` gets the next sequence number (1, 2, ...) and is
/// appended to each receiver's inbox, so inboxes drain in global seq order.
#[derive(Debug, Clone, Default)]
pub struct Bus {
    registry: Registry,
    inboxes: HashMap<String, VecDeque<u64>>,
    trace: Vec<TraceRecord>,
    reply_tokens: HashMap<String, HashSet<String>>,
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    /// Deploys an agent and gives it an empty inbox.
    pub fn register(&mut self, descriptor: AgentDescriptor) -> Result<String, BusError> {
        let id = self.registry.register(descriptor)?;
        self.inboxes.insert(id.clone(), VecDeque::new());
        Ok(id)
    }

    pub fn withdraw(&mut self, id: &str) -> Result<(), BusError> {
        self.registry.withdraw(id)?;
        self.inboxes.remove(id);
        Ok(())
    }

    fn check(&self, msg: &AclMessage) -> Result<(), BusError> {
        if !self.registry.is_deployed(&msg.sender) {
            return Err(BusError::UnknownAgent(msg.sender.clone()));
        }
        if msg.receivers.is_empty() {
            return Err(BusError::NoReceivers);
        }
        let mut seen = HashSet::new();
        for r in &msg.receivers {
            if r == &msg.sender {
                return Err(BusError::SelfSend(r.clone()));
            }
            if !seen.insert(r) {
                return Err(BusError::DuplicateReceiver(r.clone()));
            }
            if !self.registry.is_deployed(r) {
                return Err(BusError::UnknownAgent(r.clone()));
            }
        }
        match (&msg.in_reply_to, msg.performative.is_reply()) {
            (None, true) => Err(BusError::MissingReplyReference {
                performative: msg.performative.to_string(),
                conversation_id: msg.conversation_id.clone(),
            }),
            (Some(token), _) => {
                let known = self.reply_tokens.get(&msg.conversation_id).is_some_and(|t| t.contains(token));
                if known {
                    Ok(())
                } else {
                    Err(BusError::InvalidReply { token: token.clone(), conversation_id: msg.conversation_id.clone() })
                }
            }
            (None, false) => Ok(()),
        }
    }

    pub fn send(&mut self, msg: AclMessage) -> Result<&TraceRecord, BusError> {
        self.check(&msg)?;
        let seq = self.trace.len() as u64 + 1;
        for r in &msg.receivers {
            self.inboxes.get_mut(r).expect("deployed agents have inboxes").push_back(seq);
        }
        if let Some(token) = &msg.reply_with {
            self.reply_tokens.entry(msg.conversation_id.clone()).or_default().insert(token.clone());
        }
        let delivered_to = msg.receivers.clone();
        self.trace.push(TraceRecord { seq, message: msg, delivered_to });
        Ok(self.trace.last().expect("just pushed"))
    }

    /// Removes and returns the lowest-seq pending message for `agent`.
    pub fn next_message(&mut self, agent: &str) -> Result<Option<AclMessage>, BusError> {
        let inbox = self.inboxes.get_mut(agent).ok_or_else(|| BusError::UnknownAgent(agent.to_string()))?;
        Ok(inbox.pop_front().map(|seq| self.trace[seq as usize - 1].message.clone()))
    }

    pub fn pending(&self, agent: &str) -> usize {
        self.inboxes.get(agent).map_or(0, VecDeque::len)
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::message::{Content, Performative};

    fn roster() -> Bus {
        let mut bus = Bus::new();
        bus.register(AgentDescriptor::new("decision-maker", AgentRole::DecisionMaker)).unwrap();
        bus.register(AgentDescriptor::new("observer-1", AgentRole::Observer)).unwrap();
        bus.register(AgentDescriptor::new("observer-2", AgentRole::Observer)).unwrap();
        bus.register(AgentDescriptor::new("camera-1", AgentRole::Camera)).unwrap();
        bus
    }

    fn request(from: &str, to: &[&str], token: &str) -> AclMessage {
        AclMessage::new(Performative::Request, from, to.iter().copied(), "c1", Content::Ack, 0).with_reply_with(token)
    }

    #[test]
    fn four_agent_roster() {
        assert_eq!(roster().registry().len(), 4);
    }

    #[test]
    fn duplicate_and_second_decision_maker_rejected() {
        let mut bus = roster();
        assert_eq!(
            bus.register(AgentDescriptor::new("observer-1", AgentRole::Observer)),
            Err(BusError::DuplicateId("observer-1".into()))
        );
        assert!(matches!(
            bus.register(AgentDescriptor::new("dm-2", AgentRole::DecisionMaker)),
            Err(BusError::SecondDecisionMaker(_))
        ));
        bus.withdraw("decision-maker").unwrap();
        bus.register(AgentDescriptor::new("dm-2", AgentRole::DecisionMaker)).unwrap();
        assert_eq!(bus.registry().decision_maker().unwrap().id, "dm-2");
    }

    #[test]
    fn unit_delivery() {
        let mut bus = roster();
        bus.send(request("decision-maker", &["observer-1"], "r1")).unwrap();
        let inform = AclMessage::new(Performative::Inform, "observer-1", ["decision-maker"], "c1", Content::Ack, 0)
            .in_reply_to("r1");
        bus.send(inform).unwrap();
        assert_eq!(bus.pending("decision-maker"), 1);
        assert_eq!(bus.trace().len(), 2);
    }

    #[test]
    fn multicast_request_shares_seq() {
        let mut bus = roster();
        let rec = bus.send(request("decision-maker", &["observer-1", "observer-2"], "r1")).unwrap().clone();
        assert_eq!(rec.delivered_to, vec!["observer-1", "observer-2"]);
        let a = bus.next_message("observer-1").unwrap().unwrap();
        let b = bus.next_message("observer-2").unwrap().unwrap();
        assert_eq!(a, b);
        assert_eq!(rec.seq, 1);
    }

    #[test]
    fn reply_must_reference_known_token() {
        let mut bus = roster();
        let inform = AclMessage::new(Performative::Inform, "observer-1", ["decision-maker"], "c1", Content::Ack, 0)
            .in_reply_to("r99");
        assert!(matches!(bus.send(inform), Err(BusError::InvalidReply { .. })));
        let bare = AclMessage::new(Performative::Agree, "observer-1", ["decision-maker"], "c1", Content::Ack, 0);
        assert!(matches!(bus.send(bare), Err(BusError::MissingReplyReference { .. })));
        assert!(bus.trace().is_empty());
    }

    #[test]
    fn reply_token_is_scoped_to_conversation() {
        let mut bus = roster();
        bus.send(request("decision-maker", &["observer-1"], "r1")).unwrap();
        let mut inform = AclMessage::new(Performative::Inform, "observer-1", ["decision-maker"], "other", Content::Ack, 0);
        inform.in_reply_to = Some("r1".into());
        assert!(matches!(bus.send(inform), Err(BusError::InvalidReply { .. })));
    }

    #[test]
    fn self_send_and_unknown_agents_rejected() {
        let mut bus = roster();
        assert_eq!(
            bus.send(request("observer-1", &["observer-1"], "x")).unwrap_err(),
            BusError::SelfSend("observer-1".into())
        );
        assert!(matches!(bus.send(request("ghost", &["observer-1"], "x")), Err(BusError::UnknownAgent(_))));
        assert!(matches!(bus.send(request("observer-1", &["ghost"], "x")), Err(BusError::UnknownAgent(_))));
        assert!(matches!(bus.next_message("ghost"), Err(BusError::UnknownAgent(_))));
    }

    #[test]
    fn inbox_is_fifo_and_empties() {
        let mut bus = roster();
        bus.send(request("decision-maker", &["observer-1"], "a")).unwrap();
        bus.send(request("decision-maker", &["observer-1"], "b")).unwrap();
        assert_eq!(bus.next_message("observer-1").unwrap().unwrap().reply_with.as_deref(), Some("a"));
        assert_eq!(bus.next_message("observer-1").unwrap().unwrap().reply_with.as_deref(), Some("b"));
        assert_eq!(bus.next_message("observer-1").unwrap(), None);
    }

    #[test]
    fn bus_is_send() {
        fn assert_send<T: Send + Sync>() {}
        assert_send::<Bus>();
    }
}
