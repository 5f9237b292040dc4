use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use super::model::{EventKind, EventPayload, HumanInput, Scenario};
use super::report::{Failure, PhaseEntry, RunReport};
use crate::agents::{AclMessage, AgentRole, Bus, Content, FieldReport, Performative, ReportKind, TraceRecord};
use crate::pipeline::{
    report_facts, Detection, MonitorOutcome, Phase, Pipeline, PipelineConfig, Recommendation, Selection,
    SituationModel, WarningSignal,
};
use crate::store::{Iri, Literal, Triple};

const DEPLOY: &str = "deploy";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// The automated policy decides whenever no human input is available.
    Auto,
    /// The clock stops at Decision until a human recommendation arrives.
    AwaitHuman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Advanced,
    Paused,
    Finished,
}

/// One entry of the live event log: a bus message or a phase change.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum JournalEntry {
    Message(TraceRecord),
    Phase(PhaseEntry),
}

impl JournalEntry {
    /// The entry as one line of the event stream (no newline).
    pub fn to_line(&self) -> String {
        match self {
            JournalEntry::Message(rec) => crate::agents::to_wire_line(rec),
            JournalEntry::Phase(p) => serde_json::to_string(p).expect("phase entries serialize"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubmitError {
    #[error("recommendations are not accepted in phase {phase}{}", if *.finished { " after the run has finished" } else { "" })]
    WrongPhase { phase: Phase, finished: bool },
    #[error("`{0}` is not a deployed field agent")]
    UnknownTarget(String),
}

#[derive(Debug, Clone)]
enum Observation {
    Report(FieldReport),
    Frame(String),
}

#[derive(Debug, Clone, Default)]
struct FieldMemory {
    reports: usize,
    frames: usize,
    summary: FieldReport,
}

impl FieldMemory {
    fn absorb(&mut self, r: &FieldReport) {
        self.reports += 1;
        let s = &mut self.summary;
        for f in &r.features {
            if !s.features.contains(f) {
                s.features.push(f.clone());
            }
        }
        s.features.sort();
        s.casualties = s.casualties.max(r.casualties);
        s.damage_level = s.damage_level.max(r.damage_level);
        for (slot, value) in [(&mut s.climate, &r.climate), (&mut s.location, &r.location), (&mut s.status, &r.status)] {
            if value.is_some() {
                slot.clone_from(value);
            }
        }
        if r.geography.is_some() {
            s.geography.clone_from(&r.geography);
        }
        if r.role.is_some() {
            s.role.clone_from(&r.role);
        }
    }

    fn report(&self) -> FieldReport {
        let description = match (self.reports, self.frames) {
            (0, 0) => "nothing to report".to_string(),
            (r, 0) => format!("{r} report(s)"),
            (0, f) => format!("{f} frame(s)"),
            (r, f) => format!("{r} report(s), {f} frame(s)"),
        };
        FieldReport { kind: ReportKind::Observation, description: Some(description), ..self.summary.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Collect {
    NotSent,
    Awaiting { conversation: String, pending: BTreeSet<String> },
    Done,
}

/// Drives one scenario tick by tick.
///
/// Within a tick: deployment (tick 0 only), decision-maker duties (decision,
/// queued human input, collect request), scenario events, message delivery
/// round-robin until every inbox is empty, then monitoring.
#[derive(Debug, Clone)]
pub struct Engine {
    scenario: Scenario,
    mode: Mode,
    bus: Bus,
    pipeline: Pipeline,
    order: Vec<String>,
    dm: String,
    tick: u64,
    cursor: usize,
    consumed: HashSet<usize>,
    finished: bool,
    deployed: bool,
    phase_log: Vec<PhaseEntry>,
    phases_seen: usize,
    journal: Vec<JournalEntry>,
    trace_seen: usize,
    failure: Option<Failure>,
    memory: BTreeMap<String, FieldMemory>,
    early: Vec<Observation>,
    facts: BTreeSet<Triple>,
    selection_tick: Option<u64>,
    collect: Collect,
    submissions: VecDeque<HumanInput>,
    proposals: usize,
}

impl Engine {
    pub fn new(scenario: Scenario, config: PipelineConfig, mode: Mode) -> Self {
        let mut engine = Engine {
            mode,
            bus: Bus::new(),
            pipeline: Pipeline::new(config),
            order: Vec::new(),
            dm: String::new(),
            tick: 0,
            cursor: 0,
            consumed: HashSet::new(),
            finished: false,
            deployed: false,
            phase_log: Vec::new(),
            phases_seen: 0,
            journal: Vec::new(),
            trace_seen: 0,
            failure: None,
            memory: BTreeMap::new(),
            early: Vec::new(),
            facts: BTreeSet::new(),
            selection_tick: None,
            collect: Collect::NotSent,
            submissions: VecDeque::new(),
            proposals: 0,
            scenario,
        };
        // The decision maker registers first, then the field agents in roster order.
        let mut agents = engine.scenario.agents.clone();
        agents.sort_by_key(|a| a.role != AgentRole::DecisionMaker);
        for a in agents {
            match engine.bus.register(a) {
                Ok(id) => engine.order.push(id),
                Err(e) => {
                    engine.fail(0, e.to_string());
                    return engine;
                }
            }
        }
        if let Some(dm) = engine.bus.registry().decision_maker() {
            engine.dm = dm.id.clone();
        }
        if engine.scenario.events.is_empty() {
            engine.finished = true;
        }
        engine
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The next tick to be processed.
    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn phase(&self) -> Phase {
        self.pipeline.phase()
    }

    pub fn situation(&self) -> Option<&SituationModel> {
        self.pipeline.situation()
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    pub fn bus(&self) -> &Bus {
        &self.bus
    }

    pub fn journal(&self) -> &[JournalEntry] {
        &self.journal
    }

    pub fn failure(&self) -> Option<&Failure> {
        self.failure.as_ref()
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Waiting at Decision for a human recommendation.
    pub fn is_paused(&self) -> bool {
        !self.finished
            && self.mode == Mode::AwaitHuman
            && self.phase() == Phase::Decision
            && self.submissions.is_empty()
            && self.human_event_at(self.tick).is_none()
    }

    fn fail(&mut self, tick: u64, error: String) {
        self.failure = Some(Failure { tick, error });
        self.finished = true;
    }

    fn sync(&mut self, tick: u64) {
        let trace = self.bus.trace();
        let history = self.pipeline.history();
        // Called around every send, so at most one side has news.
        for rec in &trace[self.trace_seen..] {
            self.journal.push(JournalEntry::Message(rec.clone()));
        }
        self.trace_seen = trace.len();
        for &phase in &history[self.phases_seen..] {
            let entry = PhaseEntry { tick, phase };
            self.phase_log.push(entry.clone());
            self.journal.push(JournalEntry::Phase(entry));
        }
        self.phases_seen = history.len();
    }

    fn human_event_at(&self, tick: u64) -> Option<usize> {
        self.scenario.events[self.cursor..]
            .iter()
            .enumerate()
            .take_while(|(_, e)| e.tick == tick)
            .map(|(i, e)| (i + self.cursor, e))
            .find(|(i, e)| e.kind == EventKind::HumanRecommendation && !self.consumed.contains(i))
            .map(|(i, _)| i)
    }

    fn is_field_agent(&self, id: &str) -> bool {
        id != self.dm && self.bus.registry().is_deployed(id)
    }

    /// Queues a human recommendation for the next tick boundary.
    pub fn submit(&mut self, input: HumanInput) -> Result<(), SubmitError> {
        let phase = self.phase();
        if self.finished || !matches!(phase, Phase::Decision | Phase::Monitoring) {
            return Err(SubmitError::WrongPhase { phase, finished: self.finished });
        }
        if !self.is_field_agent(&input.target) {
            return Err(SubmitError::UnknownTarget(input.target));
        }
        self.submissions.push_back(input);
        Ok(())
    }

    /// Processes one tick unless paused or finished.
    pub fn step(&mut self) -> StepOutcome {
        if self.finished {
            return StepOutcome::Finished;
        }
        if self.is_paused() {
            return StepOutcome::Paused;
        }
        let t = self.tick;
        let result = self.process_tick(t);
        self.sync(t);
        if let Err(e) = result {
            self.fail(t, e);
            return StepOutcome::Finished;
        }
        self.tick += 1;
        if self.is_done() {
            self.finish(t);
            return StepOutcome::Finished;
        }
        StepOutcome::Advanced
    }

    /// Steps until the run pauses for human input or finishes.
    pub fn run_until_blocked(&mut self) -> StepOutcome {
        loop {
            match self.step() {
                StepOutcome::Advanced => continue,
                other => return other,
            }
        }
    }

    fn is_done(&self) -> bool {
        let phase = self.phase();
        let scheduled = match phase {
            Phase::Awareness => self.collect == Collect::NotSent,
            Phase::Assembly | Phase::Decision => true,
            Phase::Monitoring => !self.submissions.is_empty(),
            _ => false,
        };
        phase.is_terminal() || (self.cursor == self.scenario.events.len() && !scheduled)
    }

    fn finish(&mut self, last_tick: u64) {
        if self.phase() == Phase::Detection {
            if let Err(e) = self.pipeline.abandon() {
                self.fail(last_tick, e.to_string());
            }
            self.sync(last_tick);
        }
        self.finished = true;
    }

    pub fn report(&self) -> RunReport {
        RunReport {
            scenario: self.scenario.name.clone(),
            seed: self.scenario.seed,
            message_trace: self.bus.trace().to_vec(),
            phase_log: self.phase_log.clone(),
            recommendations: self.pipeline.recommendations().to_vec(),
            final_phase: self.phase(),
            failure: self.failure.clone(),
        }
    }

    fn send(&mut self, msg: AclMessage) -> Result<(), String> {
        let t = msg.tick;
        self.sync(t);
        self.bus.send(msg).map_err(|e| e.to_string())?;
        self.sync(t);
        Ok(())
    }

    fn process_tick(&mut self, t: u64) -> Result<(), String> {
        if !self.deployed {
            self.deployed = true;
            let field: Vec<String> = self.order.iter().filter(|id| **id != self.dm).cloned().collect();
            if !field.is_empty() {
                self.send(AclMessage::new(Performative::Request, &self.dm, field, DEPLOY, Content::Ack, t).with_reply_with(DEPLOY))?;
                self.deliver(t)?;
            }
        }

        if self.phase() == Phase::Decision {
            let human = match self.human_event_at(t) {
                Some(i) => {
                    self.consumed.insert(i);
                    match &self.scenario.events[i].payload {
                        EventPayload::Human(h) => Some(h.clone()),
                        _ => unreachable!("human events carry human payloads"),
                    }
                }
                None => self.submissions.pop_front(),
            };
            self.decide(human, t)?;
        }
        while self.phase() == Phase::Monitoring {
            let Some(input) = self.submissions.pop_front() else { break };
            self.amend(input, t)?;
        }
        if self.phase() == Phase::Awareness && self.collect == Collect::NotSent {
            let due = self.selection_tick.expect("selection precedes awareness") + self.pipeline.config().awareness_window;
            if t >= due {
                self.request_collect(t)?;
            }
        }

        while self.cursor < self.scenario.events.len() && self.scenario.events[self.cursor].tick == t {
            let i = self.cursor;
            self.cursor += 1;
            if self.consumed.contains(&i) {
                continue;
            }
            let event = self.scenario.events[i].clone();
            match event.payload {
                EventPayload::Human(h) => match self.phase() {
                    Phase::Monitoring => self.amend(h, t)?,
                    phase => return Err(format!("human recommendation rejected: wrong phase {phase}")),
                },
                EventPayload::Field(report) => {
                    self.memory.entry(event.agent.clone()).or_default().absorb(&report);
                    let msg = AclMessage::new(Performative::Inform, &event.agent, [&self.dm], DEPLOY, Content::Report(report), t)
                        .in_reply_to(DEPLOY);
                    self.send(msg)?;
                }
                EventPayload::Frame(frame) => {
                    self.memory.entry(event.agent.clone()).or_default().frames += 1;
                    let msg = AclMessage::new(Performative::Inform, &event.agent, [&self.dm], DEPLOY, Content::FrameMeta(frame), t)
                        .in_reply_to(DEPLOY);
                    self.send(msg)?;
                }
            }
        }
        self.deliver(t)?;

        if self.phase() == Phase::Monitoring {
            let facts = std::mem::take(&mut self.facts);
            if self.pipeline.monitor(&facts).map_err(|e| e.to_string())? == MonitorOutcome::Replan {
                self.pipeline.assemble_solution().map_err(|e| e.to_string())?;
            }
        }
        Ok(())
    }

    /// Round-robin over agents in registration order, one message per turn,
    /// until no inbox holds anything.
    fn deliver(&mut self, t: u64) -> Result<(), String> {
        loop {
            let mut progressed = false;
            for id in self.order.clone() {
                let msg = self.bus.next_message(&id).map_err(|e| e.to_string())?;
                if let Some(msg) = msg {
                    progressed = true;
                    if id == self.dm {
                        self.dm_handle(msg, t)?;
                    } else {
                        self.field_handle(&id, msg, t)?;
                    }
                }
            }
            if !progressed {
                return Ok(());
            }
        }
    }

    fn field_handle(&mut self, me: &str, msg: AclMessage, t: u64) -> Result<(), String> {
        let Some(token) = msg.reply_with.clone() else { return Ok(()) };
        let reply = |p: Performative, content: Content| {
            AclMessage::new(p, me, [&msg.sender], &msg.conversation_id, content, t).in_reply_to(&token)
        };
        match msg.performative {
            Performative::Request if msg.conversation_id == DEPLOY => self.send(reply(Performative::Agree, Content::Ack)),
            Performative::Request => {
                let summary = self.memory.get(me).cloned().unwrap_or_default().report();
                self.send(reply(Performative::Inform, Content::Report(summary)))
            }
            Performative::Propose => self.send(reply(Performative::Agree, Content::Ack)),
            _ => Ok(()),
        }
    }

    fn dm_handle(&mut self, msg: AclMessage, t: u64) -> Result<(), String> {
        if msg.performative != Performative::Inform {
            return Ok(());
        }
        if msg.conversation_id == DEPLOY {
            return self.observe(&msg.sender, msg.content, t);
        }
        let Collect::Awaiting { conversation, pending } = &mut self.collect else { return Ok(()) };
        if *conversation != msg.conversation_id || !pending.remove(&msg.sender) {
            return Ok(());
        }
        let complete = pending.is_empty();
        if let Content::Report(summary) = &msg.content {
            self.absorb(&msg.sender, Observation::Report(summary.clone()))?;
        }
        if complete {
            self.collect = Collect::Done;
            let facts = std::mem::take(&mut self.facts);
            self.pipeline.build_awareness(&facts).map_err(|e| e.to_string())?;
            self.pipeline.assemble_solution().map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    fn absorb(&mut self, sender: &str, obs: Observation) -> Result<(), String> {
        if let Observation::Report(FieldReport { role: Some(role), .. }) = &obs {
            self.pipeline.declare_role(sender, role).map_err(|e| e.to_string())?;
        }
        match self.pipeline.crisis().cloned() {
            Some(instance) => self.facts.extend(observation_facts(&instance, &obs)),
            None => self.early.push(obs),
        }
        Ok(())
    }

    fn observe(&mut self, sender: &str, content: Content, t: u64) -> Result<(), String> {
        match content {
            Content::Report(report)
                if report.kind == ReportKind::Signal && matches!(self.phase(), Phase::Idle | Phase::Detection) =>
            {
                if let Some(role) = &report.role {
                    self.pipeline.declare_role(sender, role).map_err(|e| e.to_string())?;
                }
                let source = report.source.clone().unwrap_or_else(|| sender.to_string());
                let signal = WarningSignal::from_report(source, &report, t);
                let registry = self.bus.registry().clone();
                match self.pipeline.detect(signal, &registry).map_err(|e| e.to_string())? {
                    Detection::Rejected(_) => Ok(()),
                    Detection::Verified(instance) => {
                        self.facts.extend(report_facts(&instance, &report));
                        for obs in std::mem::take(&mut self.early) {
                            self.facts.extend(observation_facts(&instance, &obs));
                        }
                        match self.pipeline.select_crisis().map_err(|e| e.to_string())? {
                            Selection::Selected { .. } => {
                                self.selection_tick = Some(t);
                                Ok(())
                            }
                            Selection::Escalation { ranked } => {
                                let best = ranked.first().map_or(0.0, |r| r.score.value());
                                Err(format!("crisis type escalated for manual classification (best score {best:.3})"))
                            }
                        }
                    }
                }
            }
            Content::Report(report) => self.absorb(sender, Observation::Report(report)),
            Content::FrameMeta(frame) => self.absorb(sender, Observation::Frame(frame.frame_id)),
            _ => Ok(()),
        }
    }

    fn request_collect(&mut self, t: u64) -> Result<(), String> {
        let field: Vec<String> = self.order.iter().filter(|id| self.is_field_agent(id)).cloned().collect();
        let conversation = "collect-1".to_string();
        self.collect = Collect::Awaiting { conversation: conversation.clone(), pending: field.iter().cloned().collect() };
        let query = Content::QueryText { text: "report the situation observed so far".into() };
        self.send(AclMessage::new(Performative::Request, &self.dm, field, &conversation, query, t).with_reply_with(&conversation))
    }

    fn propose(&mut self, rec: &Recommendation, t: u64) -> Result<(), String> {
        self.proposals += 1;
        let n = self.proposals;
        let msg = AclMessage::new(
            Performative::Propose,
            &self.dm,
            [&rec.target],
            format!("recommend-{n}"),
            Content::Recommendation(rec.clone()),
            t,
        )
        .with_reply_with(format!("rec-{n}"));
        self.send(msg)
    }

    fn check_target(&self, input: &HumanInput) -> Result<(), String> {
        if self.is_field_agent(&input.target) {
            Ok(())
        } else {
            Err(SubmitError::UnknownTarget(input.target.clone()).to_string())
        }
    }

    fn decide(&mut self, human: Option<HumanInput>, t: u64) -> Result<(), String> {
        let human = match human {
            Some(h) => {
                self.check_target(&h)?;
                Some(Recommendation::human(h.target, h.action, t))
            }
            None => None,
        };
        let registry = self.bus.registry().clone();
        let rec = self.pipeline.decide(&registry, human, t).map_err(|e| e.to_string())?;
        self.propose(&rec, t)
    }

    fn amend(&mut self, input: HumanInput, t: u64) -> Result<(), String> {
        self.check_target(&input)?;
        let rec = Recommendation::human(input.target, input.action, t);
        self.pipeline.amend(rec.clone()).map_err(|e| e.to_string())?;
        self.propose(&rec, t)
    }
}

fn observation_facts(instance: &Iri, obs: &Observation) -> BTreeSet<Triple> {
    match obs {
        Observation::Report(r) => report_facts(instance, r),
        Observation::Frame(id) => {
            BTreeSet::from([Triple::new(instance.clone(), Iri::cm("observedFrame"), Literal::string(id))])
        }
    }
}

/// Runs a scenario to completion under the automated policy.
pub fn run(scenario: &Scenario, config: Option<&PipelineConfig>) -> RunReport {
    let mut engine = Engine::new(scenario.clone(), config.cloned().unwrap_or_default(), Mode::Auto);
    engine.run_until_blocked();
    engine.report()
}
