use std::path::PathBuf;

use rand::RngCore;
use serde::Serialize;

use crate::credentials::Credentials;
use crisismesh_core::agents::Performative;
use crisismesh_core::pipeline::{Phase, SituationModel};
use crisismesh_core::scenario::{Engine, Failure, HumanInput, SubmitError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Session {
    pub token: String,
    pub operator: String,
    pub established_tick: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GatewayError {
    #[error("unknown operator or wrong secret")]
    BadCredentials,
    #[error("a decision-maker session is already active")]
    SessionExists,
    #[error("missing or invalid session token")]
    Unauthorized,
    #[error("{0}")]
    WrongPhase(String),
    #[error("{0}")]
    UnknownTarget(String),
    #[error("{0}")]
    BadRequest(String),
}

impl GatewayError {
    pub fn code(&self) -> &'static str {
        match self {
            GatewayError::BadCredentials => "bad_credentials",
            GatewayError::SessionExists => "session_exists",
            GatewayError::Unauthorized => "unauthorized",
            GatewayError::WrongPhase(_) => "wrong_phase",
            GatewayError::UnknownTarget(_) => "unknown_target",
            GatewayError::BadRequest(_) => "bad_request",
        }
    }
}

impl From<SubmitError> for GatewayError {
    fn from(e: SubmitError) -> Self {
        match e {
            SubmitError::WrongPhase { .. } => GatewayError::WrongPhase(e.to_string()),
            SubmitError::UnknownTarget(_) => GatewayError::UnknownTarget(e.to_string()),
        }
    }
}

/// Acknowledges an accepted recommendation with the PROPOSE it produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ack {
    pub seq: u64,
    pub tick: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateView {
    pub phase: Phase,
    pub tick: u64,
    pub paused: bool,
    pub finished: bool,
    pub situation: Option<SituationModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
}

/// One served run: the engine, the credential table and at most one session.
#[derive(Debug)]
pub struct Gateway {
    engine: Engine,
    credentials: Credentials,
    session: Option<Session>,
    report_path: Option<PathBuf>,
    report_written: bool,
}

impl Gateway {
    /// Takes ownership of the engine and runs it until it blocks.
    pub fn new(engine: Engine, credentials: Credentials) -> Gateway {
        Gateway::with_report(engine, credentials, None)
    }

    /// As [`Gateway::new`]; the run report is written to `report_path` once
    /// the run finishes.
    pub fn with_report(engine: Engine, credentials: Credentials, report_path: Option<PathBuf>) -> Gateway {
        let mut g = Gateway { engine, credentials, session: None, report_path, report_written: false };
        g.drive();
        g
    }

    fn drive(&mut self) {
        self.engine.run_until_blocked();
        if self.engine.is_finished() && !self.report_written {
            self.report_written = true;
            if let Some(path) = &self.report_path {
                if let Err(e) = std::fs::write(path, self.engine.report().serialize()) {
                    tracing::error!("writing report to {}: {e}", path.display());
                }
            }
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    pub fn login(&mut self, operator: &str, secret: &str) -> Result<Session, GatewayError> {
        if self.session.is_some() {
            return Err(GatewayError::SessionExists);
        }
        if !self.credentials.verify(operator, secret) {
            return Err(GatewayError::BadCredentials);
        }
        let mut bytes = [0u8; 24];
        rand::thread_rng().fill_bytes(&mut bytes);
        let session = Session { token: hex::encode(bytes), operator: operator.to_string(), established_tick: self.engine.tick() };
        self.session = Some(session.clone());
        tracing::info!(operator, "session established");
        Ok(session)
    }

    pub fn authorize(&self, token: Option<&str>) -> Result<&Session, GatewayError> {
        match (&self.session, token) {
            (Some(s), Some(t)) if s.token == t => Ok(s),
            _ => Err(GatewayError::Unauthorized),
        }
    }

    /// Queues the recommendation, advances the run and returns the PROPOSE
    /// that carried it.
    pub fn submit(&mut self, token: Option<&str>, input: HumanInput) -> Result<Ack, GatewayError> {
        self.authorize(token)?;
        let before = self.engine.bus().trace().len();
        let target = input.target.clone();
        self.engine.submit(input)?;
        self.drive();
        self.engine.bus().trace()[before..]
            .iter()
            .find(|r| r.message.performative == Performative::Propose && r.message.receivers == [target.as_str()])
            .map(|r| Ack { seq: r.seq, tick: r.message.tick })
            .ok_or_else(|| {
                let why = self.engine.failure().map_or_else(|| "run ended first".to_string(), |f| f.error.clone());
                GatewayError::WrongPhase(format!("recommendation was not delivered: {why}"))
            })
    }

    pub fn state(&self) -> StateView {
        StateView {
            phase: self.engine.phase(),
            tick: self.engine.tick(),
            paused: self.engine.is_paused(),
            finished: self.engine.is_finished(),
            situation: self.engine.situation().cloned(),
            failure: self.engine.failure().cloned(),
        }
    }

    /// Journal lines from index `from`, and whether the run has finished.
    pub fn journal_from(&self, from: usize) -> (Vec<String>, bool) {
        let journal = self.engine.journal();
        let lines = journal.get(from..).unwrap_or_default().iter().map(|e| e.to_line()).collect();
        (lines, self.engine.is_finished())
    }

    pub fn journal_len(&self) -> usize {
        self.engine.journal().len()
    }
}
