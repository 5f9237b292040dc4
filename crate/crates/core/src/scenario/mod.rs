//! Deterministic replay of timed scenarios into run reports.

mod engine;
mod model;
mod report;

pub use engine::{run, Engine, JournalEntry, Mode, StepOutcome, SubmitError};
pub use model::{EventKind, EventPayload, Expected, HumanInput, LoadError, Scenario, ScenarioEvent};
pub use report::{replay_check, Failure, PhaseEntry, ReportError, RunReport};
