use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pipeline::Recommendation;
use crate::store::Iri;

/// Ontology tag carried by every message the runtime produces.
pub const ONTOLOGY_TAG: &str = "cm-crisis-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Performative {
    Request,
    Inform,
    Agree,
    Refuse,
    Failure,
    Propose,
    NotUnderstood,
}

impl Performative {
    pub const ALL: [Performative; 7] = [
        Performative::Request,
        Performative::Inform,
        Performative::Agree,
        Performative::Refuse,
        Performative::Failure,
        Performative::Propose,
        Performative::NotUnderstood,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Performative::Request => "REQUEST",
            Performative::Inform => "INFORM",
            Performative::Agree => "AGREE",
            Performative::Refuse => "REFUSE",
            Performative::Failure => "FAILURE",
            Performative::Propose => "PROPOSE",
            Performative::NotUnderstood => "NOT_UNDERSTOOD",
        }
    }

    /// Performatives that answer an earlier message and so must carry
    /// `in_reply_to`.
    pub fn is_reply(self) -> bool {
        matches!(self, Performative::Inform | Performative::Agree | Performative::Refuse | Performative::Failure)
    }
}

impl fmt::Display for Performative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Signal,
    Observation,
    Context,
    Status,
}

/// What a field agent tells the decision-maker. Every field is optional
/// except the kind; the pipeline turns present fields into facts.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldReport {
    #[serde(default = "default_kind")]
    pub kind: ReportKind,
    /// External origin of a relayed warning signal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub features: Vec<Iri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credibility: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub casualties: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damage_level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub climate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geography: Option<Iri>,
    /// Field role the reporting agent declares it plays.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Iri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
}

fn default_kind() -> ReportKind {
    ReportKind::Observation
}

impl Default for ReportKind {
    fn default() -> Self {
        default_kind()
    }
}

/// Camera frame metadata; image bytes never travel on the bus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameMeta {
    pub frame_id: String,
    #[serde(default)]
    pub caption: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Content {
    Report(FieldReport),
    FrameMeta(FrameMeta),
    QueryText { text: String },
    Recommendation(Recommendation),
    Ack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AclMessage {
    pub performative: Performative,
    pub sender: String,
    pub receivers: Vec<String>,
    pub conversation_id: String,
    pub reply_with: Option<String>,
    pub in_reply_to: Option<String>,
    pub ontology: String,
    pub content: Content,
    pub tick: u64,
}

impl AclMessage {
    pub fn new(
        performative: Performative,
        sender: impl Into<String>,
        receivers: impl IntoIterator<Item = impl Into<String>>,
        conversation_id: impl Into<String>,
        content: Content,
        tick: u64,
    ) -> Self {
        AclMessage {
            performative,
            sender: sender.into(),
            receivers: receivers.into_iter().map(Into::into).collect(),
            conversation_id: conversation_id.into(),
            reply_with: None,
            in_reply_to: None,
            ontology: ONTOLOGY_TAG.to_string(),
            content,
            tick,
        }
    }

    pub fn with_reply_with(mut self, token: impl Into<String>) -> Self {
        self.reply_with = Some(token.into());
        self
    }

    pub fn in_reply_to(mut self, token: impl Into<String>) -> Self {
        self.in_reply_to = Some(token.into());
        self
    }
}
