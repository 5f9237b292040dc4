//! The five-phase decision process: detection, crisis selection, situation
//! awareness, solution assembly, then decision and monitoring.

mod config;
mod state;

pub use config::{ConfigError, PipelineConfig};
pub use state::{advance, IllegalTransition, Phase, PipelineEvent, TRANSITIONS};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::agents::{FieldReport, Registry};
use crate::ontology::{
    build_domain_ontology, match_crisis_type, merge_context, profiles_from_store, MatchResult, OntologyError,
    OntologySchema,
};
use crate::store::{
    evaluate, load_document, Comparator, Filter, Iri, Literal, Projection, Query, QueryError, StoreError, Term, Triple,
    TriplePattern, TripleStore, Variable,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Transition(#[from] IllegalTransition),
    #[error("{operation} is not allowed in phase {phase}")]
    WrongPhase { operation: &'static str, phase: Phase },
    #[error("invalid warning signal: {0}")]
    InvalidSignal(String),
    #[error("no deployed agent plays {}", .role.as_ref().map_or("any role the plan needs".to_string(), |r| r.to_string()))]
    NoEligibleTarget { role: Option<Iri> },
    #[error("{0} is not a crisis type")]
    NotACrisisType(Iri),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarningSignal {
    /// Deployed agent id or the name of an external source.
    pub source: String,
    pub description: String,
    pub location: Option<String>,
    pub features: BTreeSet<Iri>,
    pub credibility: f64,
    pub tick: u64,
}

impl WarningSignal {
    pub fn from_report(source: impl Into<String>, report: &FieldReport, tick: u64) -> Self {
        WarningSignal {
            source: source.into(),
            description: report.description.clone().unwrap_or_default(),
            location: report.location.clone(),
            features: report.features.iter().cloned().collect(),
            credibility: report.credibility.unwrap_or(0.0),
            tick,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Detection {
    Verified(Iri),
    Rejected(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    Selected { crisis_type: Iri, result: MatchResult },
    /// No profile reached the match threshold; the ranking is kept for the
    /// human who has to classify the crisis.
    Escalation { ranked: Vec<MatchResult> },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub climate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geography: Option<Iri>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub damage_level: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub casualty_count: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SituationModel {
    pub crisis_instance: Iri,
    pub crisis_type: Iri,
    pub severity: u8,
    pub context_summary: ContextSummary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanTask {
    pub task: Iri,
    pub role: Iri,
    pub resource: Iri,
    pub priority: i64,
    pub min_severity: i64,
    /// The query row that selected this task.
    pub bindings: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionPlan {
    pub plan_id: String,
    pub tasks: Vec<PlanTask>,
}

impl SolutionPlan {
    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IssuedBy {
    AutomatedPolicy,
    HumanDecisionMaker,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub target: String,
    pub action: String,
    #[serde(default)]
    pub rationale: Vec<(String, String)>,
    pub issued_by: IssuedBy,
    pub tick: u64,
}

impl Recommendation {
    pub fn human(target: impl Into<String>, action: impl Into<String>, tick: u64) -> Self {
        Recommendation {
            target: target.into(),
            action: action.into(),
            rationale: Vec::new(),
            issued_by: IssuedBy::HumanDecisionMaker,
            tick,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorOutcome {
    Continue,
    Replan,
    Resolved,
}

fn cm(local: &str) -> Iri {
    Iri::cm(local)
}

/// IRI naming a deployed agent in the store, e.g. `cm:observer-2`.
pub fn agent_iri(agent_id: &str) -> Iri {
    cm(agent_id)
}

/// Facts a field report contributes about `instance`.
pub fn report_facts(instance: &Iri, report: &FieldReport) -> BTreeSet<Triple> {
    let s = || Term::Iri(instance.clone());
    let mut out = BTreeSet::new();
    for f in &report.features {
        out.insert(Triple::new(s(), cm("hasFeature"), f.clone()));
    }
    if let Some(n) = report.casualties {
        out.insert(Triple::new(s(), cm("casualtyCount"), Literal::integer(i64::from(n))));
    }
    if let Some(d) = report.damage_level {
        out.insert(Triple::new(s(), cm("damageLevel"), Literal::integer(i64::from(d))));
    }
    if let Some(c) = &report.climate {
        out.insert(Triple::new(s(), cm("climate"), Literal::string(c)));
    }
    if let Some(g) = &report.geography {
        out.insert(Triple::new(s(), cm("locatedIn"), g.clone()));
        out.insert(Triple::new(g.clone(), Iri::rdf_type(), cm("Geography")));
    }
    if let Some(l) = &report.location {
        out.insert(Triple::new(s(), cm("location"), Literal::string(l)));
    }
    if let Some(st) = &report.status {
        out.insert(Triple::new(s(), cm("status"), Literal::string(st)));
    }
    out
}

/// One crisis worked through the decision process over its own store.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    schema: OntologySchema,
    store: TripleStore,
    phase: Phase,
    pending: Vec<WarningSignal>,
    crisis: Option<Iri>,
    situation: Option<SituationModel>,
    plan: Option<SolutionPlan>,
    recommendations: Vec<Recommendation>,
    plans_built: usize,
    history: Vec<Phase>,
}

impl Pipeline {
    /// A pipeline over the bundled domain ontology.
    pub fn new(config: PipelineConfig) -> Self {
        let (schema, doc) = build_domain_ontology();
        let mut store = TripleStore::new();
        load_document(&mut store, doc).expect("bundled seed document parses");
        Self::with_store(config, schema, store)
    }

    pub fn with_store(config: PipelineConfig, schema: OntologySchema, store: TripleStore) -> Self {
        Pipeline {
            config,
            schema,
            store,
            phase: Phase::Idle,
            pending: Vec::new(),
            crisis: None,
            situation: None,
            plan: None,
            recommendations: Vec::new(),
            plans_built: 0,
            history: Vec::new(),
        }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn schema(&self) -> &OntologySchema {
        &self.schema
    }

    pub fn store(&self) -> &TripleStore {
        &self.store
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn crisis(&self) -> Option<&Iri> {
        self.crisis.as_ref()
    }

    pub fn situation(&self) -> Option<&SituationModel> {
        self.situation.as_ref()
    }

    pub fn plan(&self) -> Option<&SolutionPlan> {
        self.plan.as_ref()
    }

    pub fn recommendations(&self) -> &[Recommendation] {
        &self.recommendations
    }

    pub fn pending_signals(&self) -> &[WarningSignal] {
        &self.pending
    }

    fn require(&self, operation: &'static str, allowed: &[Phase]) -> Result<(), PipelineError> {
        if allowed.contains(&self.phase) {
            Ok(())
        } else {
            Err(PipelineError::WrongPhase { operation, phase: self.phase })
        }
    }

    /// Every phase entered so far, in order (self-loops excluded).
    pub fn history(&self) -> &[Phase] {
        &self.history
    }

    fn step(&mut self, event: PipelineEvent) -> Result<(), PipelineError> {
        let next = advance(self.phase, event)?;
        if next != self.phase {
            self.history.push(next);
        }
        self.phase = next;
        Ok(())
    }

    /// Records that `agent_id` plays `role` in the field.
    pub fn declare_role(&mut self, agent_id: &str, role: &Iri) -> Result<(), PipelineError> {
        self.store.insert(Triple::new(agent_iri(agent_id), cm("playsRole"), role.clone()))?;
        Ok(())
    }

    /// Verifies a warning signal by source, credibility or corroboration.
    pub fn detect(&mut self, signal: WarningSignal, registry: &Registry) -> Result<Detection, PipelineError> {
        self.require("detect", &[Phase::Idle, Phase::Detection])?;
        if !(0.0..=1.0).contains(&signal.credibility) {
            return Err(PipelineError::InvalidSignal(format!("credibility {} outside [0, 1]", signal.credibility)));
        }
        self.step(PipelineEvent::SignalReceived)?;
        if signal.features.is_empty() {
            return Ok(Detection::Rejected("signal carries no features".into()));
        }
        let corroborating: BTreeSet<&str> = self
            .pending
            .iter()
            .filter(|p| p.source != signal.source && !p.features.is_disjoint(&signal.features))
            .map(|p| p.source.as_str())
            .collect();
        let verified = registry.is_deployed(&signal.source)
            || signal.credibility >= self.config.credibility_threshold
            || corroborating.len() >= self.config.corroboration_min;
        if !verified {
            let reason = format!(
                "source `{}` is not deployed, credibility {} below {}, {} corroborating source(s)",
                signal.source,
                signal.credibility,
                self.config.credibility_threshold,
                corroborating.len()
            );
            self.pending.push(signal);
            return Ok(Detection::Rejected(reason));
        }

        let instance = cm("crisis-1");
        let mut facts = BTreeSet::from([Triple::new(instance.clone(), Iri::rdf_type(), cm("Crisis"))]);
        for f in &signal.features {
            facts.insert(Triple::new(instance.clone(), cm("hasFeature"), f.clone()));
        }
        if let Some(l) = &signal.location {
            facts.insert(Triple::new(instance.clone(), cm("location"), Literal::string(l)));
        }
        self.store.insert_all(facts)?;
        self.crisis = Some(instance.clone());
        self.step(PipelineEvent::SignalVerified)?;
        Ok(Detection::Verified(instance))
    }

    /// Gives up on an unverified detection.
    pub fn abandon(&mut self) -> Result<(), PipelineError> {
        self.step(PipelineEvent::DetectionAbandoned)
    }

    fn instance(&self) -> Iri {
        self.crisis.clone().expect("crisis instance exists past detection")
    }

    fn objects(&self, subject: &Iri, predicate: &str) -> Vec<Term> {
        let pattern = TriplePattern::new(subject.clone(), cm(predicate), Term::var("o"));
        self.store.match_pattern(&pattern).into_iter().map(|t| t.object).collect()
    }

    pub fn observed_features(&self) -> BTreeSet<Iri> {
        match &self.crisis {
            Some(c) => self.objects(c, "hasFeature").into_iter().filter_map(|t| t.as_iri().cloned()).collect(),
            None => BTreeSet::new(),
        }
    }

    /// Matches the observed features against the crisis-type profiles.
    pub fn select_crisis(&mut self) -> Result<Selection, PipelineError> {
        self.require("select_crisis", &[Phase::Selection])?;
        let profiles = profiles_from_store(&self.store, &self.schema)?;
        let ranked = match_crisis_type(&profiles, &self.observed_features())?;
        match ranked.first() {
            Some(top) if top.score.at_least(self.config.match_threshold) => {
                let result = top.clone();
                let crisis_type = result.type_class.clone();
                self.assert_type(crisis_type.clone())?;
                Ok(Selection::Selected { crisis_type, result })
            }
            _ => Ok(Selection::Escalation { ranked }),
        }
    }

    /// Manual classification after an escalation.
    pub fn classify(&mut self, crisis_type: Iri) -> Result<(), PipelineError> {
        self.require("classify", &[Phase::Selection])?;
        let crisis = cm("Crisis");
        if !self.schema.has_class(&crisis_type) || !self.schema.is_subclass_of(&crisis_type, &crisis)? {
            return Err(PipelineError::NotACrisisType(crisis_type));
        }
        self.assert_type(crisis_type)
    }

    fn assert_type(&mut self, crisis_type: Iri) -> Result<(), PipelineError> {
        self.store.insert(Triple::new(self.instance(), Iri::rdf_type(), crisis_type))?;
        self.step(PipelineEvent::CrisisSelected)
    }

    fn crisis_type(&self) -> Iri {
        let crisis = cm("Crisis");
        let pattern = TriplePattern::new(self.instance(), Iri::rdf_type(), Term::var("t"));
        self.store
            .match_pattern(&pattern)
            .into_iter()
            .filter_map(|t| t.object.as_iri().cloned())
            .find(|t| *t != crisis && self.schema.is_subclass_of(t, &crisis).unwrap_or(false))
            .unwrap_or(crisis)
    }

    fn max_integer(&self, subject: &Iri, predicate: &str) -> Option<i64> {
        self.objects(subject, predicate).iter().filter_map(|t| t.as_literal().and_then(Literal::as_integer)).max()
    }

    /// Re-derives the situation from the store and replaces the asserted
    /// severity.
    fn recompute(&mut self) -> Result<SituationModel, PipelineError> {
        let instance = self.instance();
        let damage_level = self.max_integer(&instance, "damageLevel");
        let casualty_count = self.max_integer(&instance, "casualtyCount");
        let severity = self.config.severity(damage_level, casualty_count);
        let context_summary = ContextSummary {
            climate: self.objects(&instance, "climate").iter().find_map(|t| t.as_literal().map(|l| l.lexical().to_string())),
            geography: self.objects(&instance, "locatedIn").iter().find_map(|t| t.as_iri().cloned()),
            damage_level,
            casualty_count,
        };
        for old in self.store.match_pattern(&TriplePattern::new(instance.clone(), cm("hasSeverity"), Term::var("s"))) {
            self.store.remove(&old);
        }
        self.store.insert(Triple::new(instance.clone(), cm("hasSeverity"), Literal::integer(i64::from(severity))))?;
        let model = SituationModel { crisis_instance: instance, crisis_type: self.crisis_type(), severity, context_summary };
        self.situation = Some(model.clone());
        Ok(model)
    }

    /// Merges context facts and derives the situation model.
    pub fn build_awareness(&mut self, context_facts: &BTreeSet<Triple>) -> Result<SituationModel, PipelineError> {
        self.require("build_awareness", &[Phase::Awareness])?;
        merge_context(&mut self.store, &BTreeSet::new(), context_facts)?;
        let model = self.recompute()?;
        self.step(PipelineEvent::AwarenessBuilt)?;
        Ok(model)
    }

    /// Task templates for the crisis type whose minimum severity is met,
    /// ordered by priority then task IRI.
    pub fn assemble_solution(&mut self) -> Result<SolutionPlan, PipelineError> {
        self.require("assemble_solution", &[Phase::Assembly])?;
        let situation = self.situation.clone().expect("situation exists past awareness");
        let tasks = solution_tasks(&self.store, &situation.crisis_type, situation.severity)?;
        self.plans_built += 1;
        let plan = SolutionPlan { plan_id: format!("plan-{}", self.plans_built), tasks };
        self.plan = Some(plan.clone());
        self.step(PipelineEvent::PlanAssembled)?;
        Ok(plan)
    }

    /// Human input wins outright; otherwise the first task goes to the
    /// lowest-id deployed agent playing its role.
    pub fn decide(
        &mut self,
        registry: &Registry,
        human_input: Option<Recommendation>,
        tick: u64,
    ) -> Result<Recommendation, PipelineError> {
        self.require("decide", &[Phase::Decision])?;
        let rec = match human_input {
            Some(rec) => rec,
            None => automated_policy(&self.store, registry, self.plan.as_ref().expect("plan exists in Decision"), tick)?,
        };
        self.recommendations.push(rec.clone());
        self.step(PipelineEvent::RecommendationIssued)?;
        Ok(rec)
    }

    /// A further human recommendation while the plan is being monitored.
    pub fn amend(&mut self, rec: Recommendation) -> Result<(), PipelineError> {
        self.require("amend", &[Phase::Monitoring])?;
        self.recommendations.push(rec);
        Ok(())
    }

    pub fn monitor(&mut self, new_facts: &BTreeSet<Triple>) -> Result<MonitorOutcome, PipelineError> {
        self.require("monitor", &[Phase::Monitoring])?;
        merge_context(&mut self.store, &BTreeSet::new(), new_facts)?;
        let previous = self.situation.as_ref().map_or(1, |s| s.severity);
        let model = self.recompute()?;
        let resolved = Triple::new(model.crisis_instance.clone(), cm("status"), Literal::string("resolved"));
        if self.store.contains(&resolved) {
            self.step(PipelineEvent::CrisisResolved)?;
            Ok(MonitorOutcome::Resolved)
        } else if model.severity > previous {
            self.step(PipelineEvent::Replan)?;
            Ok(MonitorOutcome::Replan)
        } else {
            Ok(MonitorOutcome::Continue)
        }
    }
}

/// The assembly query, independent of any pipeline state.
pub fn solution_tasks(store: &TripleStore, crisis_type: &Iri, severity: u8) -> Result<Vec<PlanTask>, PipelineError> {
    let v = |n: &str| Term::var(n);
    let patterns = vec![
        TriplePattern::new(crisis_type.clone(), cm("handledBy"), v("task")),
        TriplePattern::new(v("task"), cm("assignedTo"), v("role")),
        TriplePattern::new(v("role"), Iri::rdf_type(), cm("Role")),
        TriplePattern::new(v("task"), cm("requires"), v("resource")),
        TriplePattern::new(v("resource"), Iri::rdf_type(), cm("Resource")),
        TriplePattern::new(v("task"), cm("minSeverity"), v("min")),
        TriplePattern::new(v("task"), cm("priority"), v("prio")),
    ];
    let filter = Filter {
        variable: Variable::new("min"),
        op: Comparator::Lt,
        value: Literal::integer(i64::from(severity) + 1),
    };
    let projection = Projection::Vars(["task", "role", "resource", "min", "prio"].map(Variable::new).to_vec());
    let query = Query::new(projection, patterns, vec![filter])?;
    let results = evaluate(store, &query)?;

    let mut tasks: Vec<PlanTask> = results
        .bindings()
        .filter_map(|row| {
            let get = |name: &str| row.iter().find(|(var, _)| var.name() == name).map(|(_, t)| t.clone());
            let int = |name: &str| get(name).and_then(|t| t.as_literal().and_then(Literal::as_integer));
            Some(PlanTask {
                task: get("task")?.as_iri()?.clone(),
                role: get("role")?.as_iri()?.clone(),
                resource: get("resource")?.as_iri()?.clone(),
                min_severity: int("min")?,
                priority: int("prio")?,
                bindings: row.iter().map(|(var, t)| (var.name().to_string(), t.to_string())).collect(),
            })
        })
        .collect();
    tasks.sort_by(|a, b| (a.priority, &a.task, &a.role, &a.resource).cmp(&(b.priority, &b.task, &b.role, &b.resource)));
    Ok(tasks)
}

/// Targets the plan's first task at the lowest-id deployed agent playing its
/// role.
pub fn automated_policy(
    store: &TripleStore,
    registry: &Registry,
    plan: &SolutionPlan,
    tick: u64,
) -> Result<Recommendation, PipelineError> {
    let task = plan.tasks.first().ok_or(PipelineError::NoEligibleTarget { role: None })?;
    let target = registry
        .deployed()
        .find(|a| store.contains(&Triple::new(agent_iri(&a.id), cm("playsRole"), task.role.clone())))
        .ok_or_else(|| PipelineError::NoEligibleTarget { role: Some(task.role.clone()) })?;
    Ok(Recommendation {
        target: target.id.clone(),
        action: task.task.to_string(),
        rationale: task.bindings.clone(),
        issued_by: IssuedBy::AutomatedPolicy,
        tick,
    })
}
