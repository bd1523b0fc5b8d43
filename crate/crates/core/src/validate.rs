//! Checks shared by the family validators.

use crate::error::Violation;
use crate::events::{EventId, EventSet, Relation, Triple};

pub(crate) fn pair_within(events: &EventSet, rel: &Relation, what: &str, out: &mut Vec<Violation>) {
    for (a, b) in rel {
        for e in [a, b] {
            if !events.contains(e) {
                out.push(Violation::new(format!("{what} ({a}, {b}) mentions undeclared event {e}")));
            }
        }
    }
}

pub(crate) fn triples_within(events: &EventSet, triples: &std::collections::BTreeSet<Triple>, what: &str, out: &mut Vec<Violation>) {
    for t in triples {
        for e in [&t.modifier, &t.cause, &t.target] {
            if !events.contains(e) {
                out.push(Violation::new(format!("{what} {t} mentions undeclared event {e}")));
            }
        }
    }
}

pub(crate) fn set_within(events: &EventSet, set: &EventSet, what: &str, out: &mut Vec<Violation>) {
    for e in set {
        if !events.contains(e) {
            out.push(Violation::new(format!("{what} mentions undeclared event {e}")));
        }
    }
}

/// Checks irreflexivity and returns the symmetric closure. In strict mode a
/// pair without its mirror is reported instead of being closed.
pub(crate) fn symmetric_conflict(conflict: &Relation, strict: bool, out: &mut Vec<Violation>) -> Relation {
    let mut closed = Relation::new();
    for (a, b) in conflict {
        if a == b {
            out.push(Violation::new(format!("reflexive conflict at {a}")));
            continue;
        }
        if strict && !conflict.contains(&(b.clone(), a.clone())) {
            out.push(Violation::new(format!("asymmetric conflict ({a}, {b})")));
        }
        closed.insert((a.clone(), b.clone()));
        closed.insert((b.clone(), a.clone()));
    }
    closed
}

pub(crate) fn irreflexive(rel: &Relation, what: &str, out: &mut Vec<Violation>) {
    for (a, b) in rel {
        if a == b {
            out.push(Violation::new(format!("reflexive {what} at {a}")));
        }
    }
}

pub(crate) fn has_pair(rel: &Relation, a: &EventId, b: &EventId) -> bool {
    rel.contains(&(a.clone(), b.clone()))
}
