//! Reference implementations written for clarity, not speed. Each one avoids
//! the production code path it checks.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crisismesh_core::agents::{Performative, TraceRecord, ViolationKind};
use crisismesh_core::store::{Comparator, Datatype, Iri, Literal, Query, Term, Triple, TripleStore, Variable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleOutcome {
    Rows(Vec<Vec<Term>>),
    /// Some complete solution bound a non-number under `<` or `>`.
    TypeMismatch,
}

fn number(term: &Term) -> Option<f64> {
    match term {
        Term::Literal(l) if matches!(l.datatype(), Datatype::Integer | Datatype::Decimal) => l.lexical().parse().ok(),
        _ => None,
    }
}

/// Tries every combination of one stored triple per pattern, keeps the
/// consistent ones, then filters, projects, deduplicates and sorts.
pub fn query_oracle(store: &TripleStore, query: &Query) -> OracleOutcome {
    let facts: Vec<&Triple> = store.iter().collect();
    let patterns = query.patterns();
    let mut solutions: Vec<BTreeMap<Variable, Term>> = Vec::new();
    let mut choice = vec![0usize; patterns.len()];
    if facts.is_empty() {
        return OracleOutcome::Rows(Vec::new());
    }
    'outer: loop {
        let mut assignment: BTreeMap<Variable, Term> = BTreeMap::new();
        let mut ok = true;
        'check: for (pattern, &idx) in patterns.iter().zip(&choice) {
            let fact = facts[idx];
            for (p, f) in pattern.terms().into_iter().zip([&fact.subject, &fact.predicate, &fact.object]) {
                match p {
                    Term::Variable(v) => match assignment.get(v) {
                        Some(bound) if bound != f => {
                            ok = false;
                            break 'check;
                        }
                        Some(_) => {}
                        None => {
                            assignment.insert(v.clone(), f.clone());
                        }
                    },
                    constant if constant != f => {
                        ok = false;
                        break 'check;
                    }
                    _ => {}
                }
            }
        }
        if ok {
            solutions.push(assignment);
        }
        // odometer increment over all pattern-to-triple choices
        for slot in choice.iter_mut().rev() {
            *slot += 1;
            if *slot < facts.len() {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }

    let mut rows = BTreeSet::new();
    let columns = query.columns();
    for s in &solutions {
        let mut keep = true;
        for f in query.filters() {
            let bound = &s[&f.variable];
            let value = Term::Literal(f.value.clone());
            let pass = match f.op {
                Comparator::Eq | Comparator::Ne => {
                    let same = match (number(bound), number(&value)) {
                        (Some(a), Some(b)) => a == b,
                        _ => *bound == value,
                    };
                    same == (f.op == Comparator::Eq)
                }
                Comparator::Lt | Comparator::Gt => match (number(bound), number(&value)) {
                    (Some(a), Some(b)) => {
                        if f.op == Comparator::Lt {
                            a < b
                        } else {
                            a > b
                        }
                    }
                    _ => return OracleOutcome::TypeMismatch,
                },
            };
            if !pass {
                keep = false;
                break;
            }
        }
        if keep {
            rows.insert(columns.iter().map(|c| s[c].clone()).collect::<Vec<_>>());
        }
    }
    OracleOutcome::Rows(rows.into_iter().collect())
}

/// Reflexive-transitive closure of `child -> parent` edges by Floyd–Warshall.
pub fn closure_matrix(nodes: &[Iri], edges: &[(Iri, Iri)]) -> Vec<Vec<bool>> {
    let n = nodes.len();
    let index: BTreeMap<&Iri, usize> = nodes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for (c, p) in edges {
        reach[index[c]][index[p]] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    reach
}

/// Severity by the bucket table written out case by case.
pub fn severity_oracle(damage_level: Option<i64>, casualties: Option<i64>) -> u8 {
    let bucket = match casualties {
        None | Some(i64::MIN..=0) => 1,
        Some(1..=2) => 2,
        Some(3..=5) => 3,
        Some(6..=10) => 4,
        Some(_) => 5,
    };
    let raw = damage_level.map_or(bucket, |d| d.max(bucket));
    raw.clamp(1, 5) as u8
}

/// Jaccard index as (|A ∩ B|, |A ∪ B|) via hash sets.
pub fn jaccard_oracle(a: &BTreeSet<Iri>, b: &BTreeSet<Iri>) -> (usize, usize) {
    let a: HashSet<&Iri> = a.iter().collect();
    let b: HashSet<&Iri> = b.iter().collect();
    (a.iter().filter(|x| b.contains(*x)).count(), a.len() + b.iter().filter(|x| !a.contains(*x)).count())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub source: String,
    pub features: BTreeSet<Iri>,
    pub credibility: f64,
}

/// Index of the first signal the verification rule accepts, replaying the
/// rule over the sequence with the default thresholds.
pub fn detection_oracle(signals: &[SignalSpec], deployed: &BTreeSet<String>) -> Option<usize> {
    let mut rejected: Vec<&SignalSpec> = Vec::new();
    for (i, s) in signals.iter().enumerate() {
        if s.features.is_empty() {
            continue;
        }
        let sources: BTreeSet<&str> = rejected
            .iter()
            .filter(|r| r.source != s.source && r.features.iter().any(|f| s.features.contains(f)))
            .map(|r| r.source.as_str())
            .collect();
        if deployed.contains(&s.source) || s.credibility >= 0.6 || sources.len() >= 2 {
            return Some(i);
        }
        rejected.push(s);
    }
    None
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Conv {
    Request,
    Proposal,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Slot {
    Pending,
    Agreed,
    Informed,
    Closed,
}

enum Cell {
    Go(Slot),
    Bad(ViolationKind),
}

/// The responder transition table, one row per (conversation, state,
/// performative). Pairs missing from the table are out of order.
fn responder_table(conv: Conv, slot: Slot, p: Performative) -> Cell {
    use Performative::*;
    use Slot::*;
    const ROWS: &[(Conv, Slot, Performative, Slot)] = &[
        (Conv::Request, Pending, Agree, Agreed),
        (Conv::Request, Pending, Refuse, Closed),
        (Conv::Request, Pending, NotUnderstood, Closed),
        (Conv::Request, Pending, Inform, Informed),
        (Conv::Request, Pending, Failure, Closed),
        (Conv::Request, Agreed, Inform, Informed),
        (Conv::Request, Agreed, Failure, Closed),
        (Conv::Request, Informed, Inform, Informed),
        (Conv::Request, Informed, Failure, Closed),
        (Conv::Proposal, Pending, Agree, Closed),
        (Conv::Proposal, Pending, Refuse, Closed),
        (Conv::Proposal, Pending, NotUnderstood, Closed),
    ];
    if let Some(row) = ROWS.iter().find(|r| r.0 == conv && r.1 == slot && r.2 == p) {
        return Cell::Go(row.3);
    }
    if conv == Conv::Proposal && matches!(p, Inform | Failure) {
        Cell::Bad(ViolationKind::WithoutRequest)
    } else {
        Cell::Bad(ViolationKind::OutOfOrder)
    }
}

struct OracleConversation {
    kind: Conv,
    initiator: String,
    slots: BTreeMap<String, Slot>,
}

/// (seq, kind) of every violation, computed from the explicit table.
pub fn fsm_oracle(trace: &[TraceRecord]) -> Vec<(u64, ViolationKind)> {
    let mut convs: BTreeMap<String, OracleConversation> = BTreeMap::new();
    let mut out = Vec::new();
    for rec in trace {
        let m = &rec.message;
        let opener = match m.performative {
            Performative::Request => Some(Conv::Request),
            Performative::Propose => Some(Conv::Proposal),
            _ => None,
        };
        let fresh = |kind| OracleConversation {
            kind,
            initiator: m.sender.clone(),
            slots: m.receivers.iter().map(|r| (r.clone(), Slot::Pending)).collect(),
        };
        let Some(conv) = convs.get_mut(&m.conversation_id) else {
            match opener {
                Some(kind) => {
                    convs.insert(m.conversation_id.clone(), fresh(kind));
                }
                None if matches!(m.performative, Performative::Inform | Performative::Failure) => {
                    out.push((rec.seq, ViolationKind::WithoutRequest))
                }
                None => out.push((rec.seq, ViolationKind::WithoutOpener)),
            }
            continue;
        };
        if m.sender == conv.initiator {
            if opener == Some(conv.kind) {
                *conv = fresh(conv.kind);
            } else if m.performative == Performative::NotUnderstood {
                // the initiator may always say it did not understand
            } else if opener.is_some() {
                out.push((rec.seq, ViolationKind::OutOfOrder));
            } else {
                out.push((rec.seq, ViolationKind::FromInitiator));
            }
            continue;
        }
        match conv.slots.get(&m.sender).copied() {
            None => out.push((rec.seq, ViolationKind::OutOfOrder)),
            Some(slot) => match responder_table(conv.kind, slot, m.performative) {
                Cell::Go(next) => {
                    conv.slots.insert(m.sender.clone(), next);
                }
                Cell::Bad(kind) => out.push((rec.seq, kind)),
            },
        }
    }
    out
}

/// Ordered-subsequence search: true iff every step matches some record,
/// each strictly after the previous match.
pub fn contains_subsequence<T>(items: &[T], steps: &[&dyn Fn(&T) -> bool]) -> bool {
    let mut it = items.iter();
    steps.iter().all(|step| it.any(step))
}

/// Integer literal helper for hand-built oracle inputs.
pub fn int(v: i64) -> Term {
    Term::Literal(Literal::integer(v))
}
