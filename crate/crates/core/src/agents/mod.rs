//! Agent registry, message bus, conversation checks and trace export.

mod bus;
mod message;
mod protocol;
mod sniffer;
mod wire;

pub use bus::{AgentDescriptor, AgentRole, AgentStatus, Bus, BusError, Registry, TraceRecord};
pub use message::{AclMessage, Content, FieldReport, FrameMeta, Performative, ReportKind, ONTOLOGY_TAG};
pub use protocol::{validate_conversation, ProtocolViolation, ViolationKind};
pub use sniffer::sniffer_export;
pub use wire::{from_wire_line, read_trace, to_wire_line, write_trace, WireError};
