//! Shared vocabulary: event names, finite relations, traces, posets and
//! transition graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Opaque event name. Ordering is lexicographic on the name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(Arc<str>);

impl EventId {
    /// Creates an event name; it must be non-empty and free of whitespace.
    pub fn new(name: impl AsRef<str>) -> Result<Self> {
        let name = name.as_ref();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidEventName(name.to_string()));
        }
        Ok(EventId(Arc::from(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Panics on names that [`EventId::new`] would reject.
impl From<&str> for EventId {
    fn from(name: &str) -> Self {
        EventId::new(name).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for EventId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for EventId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        EventId::new(s).map_err(serde::de::Error::custom)
    }
}

pub type EventSet = BTreeSet<EventId>;
pub type Relation = BTreeSet<(EventId, EventId)>;
/// A configuration is a finite set of events.
pub type Configuration = EventSet;

/// Builds an event set from names. Panics on invalid names.
pub fn event_set<I, S>(names: I) -> EventSet
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    names.into_iter().map(|n| EventId::from(n.as_ref())).collect()
}

/// Builds a relation from name pairs. Panics on invalid names.
pub fn relation<I, S>(pairs: I) -> Relation
where
    I: IntoIterator<Item = (S, S)>,
    S: AsRef<str>,
{
    pairs
        .into_iter()
        .map(|(a, b)| (EventId::from(a.as_ref()), EventId::from(b.as_ref())))
        .collect()
}

/// `modifier` changes whether `cause` is a predecessor of `target`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Triple {
    pub modifier: EventId,
    pub cause: EventId,
    pub target: EventId,
}

impl Triple {
    pub fn new(modifier: impl Into<EventId>, cause: impl Into<EventId>, target: impl Into<EventId>) -> Self {
        Triple {
            modifier: modifier.into(),
            cause: cause.into(),
            target: target.into(),
        }
    }

    pub fn pair(&self) -> (EventId, EventId) {
        (self.cause.clone(), self.target.clone())
    }
}

impl From<(&str, &str, &str)> for Triple {
    fn from((m, c, t): (&str, &str, &str)) -> Self {
        Triple::new(m, c, t)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : ({} -> {})", self.modifier, self.cause, self.target)
    }
}

pub(crate) fn fmt_set(set: &EventSet) -> String {
    let names: Vec<&str> = set.iter().map(EventId::as_str).collect();
    format!("{{{}}}", names.join(","))
}

/// A sequence of pairwise distinct events.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default, Serialize)]
#[serde(transparent)]
pub struct Trace(Vec<EventId>);

impl Trace {
    pub fn new(events: Vec<EventId>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for e in &events {
            if !seen.insert(e) {
                return Err(Error::DuplicateEvent(e.clone()));
            }
        }
        Ok(Trace(events))
    }

    pub fn empty() -> Self {
        Trace(Vec::new())
    }

    pub fn events(&self) -> &[EventId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The set of events occurring in the trace.
    pub fn alphabet(&self) -> EventSet {
        self.0.iter().cloned().collect()
    }

    /// Events strictly before position `i` (zero based).
    pub fn prefix_set(&self, i: usize) -> EventSet {
        self.0[..i.min(self.0.len())].iter().cloned().collect()
    }

    pub fn position(&self, e: &EventId) -> Option<usize> {
        self.0.iter().position(|x| x == e)
    }
}

impl<'de> Deserialize<'de> for Trace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<EventId>::deserialize(d)?;
        Trace::new(v).map_err(serde::de::Error::custom)
    }
}

/// Whitespace separated event names; `ε` or the empty string is the empty trace.
impl FromStr for Trace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "ε" {
            return Ok(Trace::empty());
        }
        let events = s.split_whitespace().map(EventId::new).collect::<Result<Vec<_>>>()?;
        Trace::new(events)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// `count` names starting with `prefix` and numbered from zero, none of which
/// occurs in `taken`. Colliding names get extra leading underscores.
pub(crate) fn fresh_names(taken: &EventSet, prefix: &str, count: usize) -> Vec<EventId> {
    (0..count)
        .map(|i| {
            let mut name = format!("{prefix}{i}");
            while taken.iter().any(|e| e.as_str() == name) {
                name.insert(0, '_');
            }
            EventId::from(name.as_str())
        })
        .collect()
}

/// A single name based on `base` that does not occur in `taken`.
pub(crate) fn fresh_name(taken: &EventSet, base: &str) -> EventId {
    let mut name = base.to_string();
    while taken.iter().any(|e| e.as_str() == name) {
        name.insert(0, '_');
    }
    EventId::from(name.as_str())
}

/// Smallest reflexive and transitive relation on `carrier` containing `rel`.
pub fn transitive_reflexive_closure(rel: &Relation, carrier: &EventSet) -> Relation {
    let idx: BTreeMap<&EventId, usize> = carrier.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let names: Vec<&EventId> = carrier.iter().collect();
    let n = names.len();
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in rel {
        if let (Some(&i), Some(&j)) = (idx.get(a), idx.get(b)) {
            reach[i][j] = true;
        }
    }
    for k in 0..n {
        let via = reach[k].clone();
        for row in reach.iter_mut() {
            if row[k] {
                for (r, &v) in row.iter_mut().zip(&via) {
                    *r |= v;
                }
            }
        }
    }
    let mut out = Relation::new();
    for i in 0..n {
        for j in 0..n {
            if reach[i][j] {
                out.insert((names[i].clone(), names[j].clone()));
            }
        }
    }
    out
}

/// Whether `rel` is reflexive, transitive and antisymmetric on `carrier`.
pub fn is_partial_order(rel: &Relation, carrier: &EventSet) -> bool {
    if rel.iter().any(|(a, b)| !carrier.contains(a) || !carrier.contains(b)) {
        return false;
    }
    if carrier.iter().any(|e| !rel.contains(&(e.clone(), e.clone()))) {
        return false;
    }
    for (a, b) in rel {
        if a != b && rel.contains(&(b.clone(), a.clone())) {
            return false;
        }
    }
    for (a, b) in rel {
        for (c, d) in rel.range((b.clone(), EventId(Arc::from("")))..) {
            if c != b {
                break;
            }
            if !rel.contains(&(a.clone(), d.clone())) {
                return false;
            }
        }
    }
    true
}

/// A configuration together with a partial order over it. The order is
/// stored in full (reflexive and transitive), so equality is extensional.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Poset {
    carrier: EventSet,
    order: Relation,
}

impl Poset {
    pub fn new(carrier: EventSet, order: Relation) -> Result<Self> {
        if !is_partial_order(&order, &carrier) {
            return Err(Error::NotAPartialOrder);
        }
        Ok(Poset { carrier, order })
    }

    /// Closes `precedence` reflexively and transitively over `carrier`.
    pub fn from_precedence(carrier: EventSet, precedence: &Relation) -> Result<Self> {
        if let Some((a, b)) = precedence
            .iter()
            .find(|(a, b)| !carrier.contains(a) || !carrier.contains(b))
        {
            let missing = if carrier.contains(a) { b } else { a };
            return Err(Error::OutOfUniverse(missing.clone()));
        }
        let order = transitive_reflexive_closure(precedence, &carrier);
        Poset::new(carrier, order)
    }

    pub(crate) fn from_parts_unchecked(carrier: EventSet, order: Relation) -> Self {
        debug_assert!(is_partial_order(&order, &carrier));
        Poset { carrier, order }
    }

    pub fn carrier(&self) -> &EventSet {
        &self.carrier
    }

    pub fn order(&self) -> &Relation {
        &self.order
    }

    pub fn leq(&self, a: &EventId, b: &EventId) -> bool {
        self.order.contains(&(a.clone(), b.clone()))
    }

    /// Covering pairs of the order (its Hasse diagram).
    pub fn hasse(&self) -> Relation {
        self.order
            .iter()
            .filter(|(a, b)| {
                a != b
                    && !self
                        .carrier
                        .iter()
                        .any(|m| m != a && m != b && self.leq(a, m) && self.leq(m, b))
            })
            .cloned()
            .collect()
    }
}

impl fmt::Display for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_set(&self.carrier))?;
        let hasse = self.hasse();
        if !hasse.is_empty() {
            let pairs: Vec<String> = hasse.iter().map(|(a, b)| format!("{a}<{b}")).collect();
            write!(f, " [{}]", pairs.join(", "))?;
        }
        Ok(())
    }
}

/// All total orders of the carrier that extend the poset's order.
pub fn linearizations(p: &Poset) -> BTreeSet<Trace> {
    fn go(p: &Poset, remaining: &mut Vec<EventId>, acc: &mut Vec<EventId>, out: &mut BTreeSet<Trace>) {
        if remaining.is_empty() {
            out.insert(Trace(acc.clone()));
            return;
        }
        for i in 0..remaining.len() {
            let e = remaining[i].clone();
            let minimal = remaining.iter().all(|o| o == &e || !p.leq(o, &e));
            if minimal {
                remaining.remove(i);
                acc.push(e.clone());
                go(p, remaining, acc, out);
                acc.pop();
                remaining.insert(i, e);
            }
        }
    }
    let mut out = BTreeSet::new();
    let mut remaining: Vec<EventId> = p.carrier.iter().cloned().collect();
    go(p, &mut remaining, &mut Vec::new(), &mut out);
    out
}

/// Extensional equality of two poset families.
pub fn poset_sets_equal(a: &BTreeSet<Poset>, b: &BTreeSet<Poset>) -> bool {
    a == b
}

/// A node of a transition graph: a configuration, plus the current causality
/// relation for dynamic causality structures.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct GraphNode {
    pub config: Configuration,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub caus: Option<Relation>,
}

impl GraphNode {
    pub fn config(config: Configuration) -> Self {
        GraphNode { config, caus: None }
    }
}

/// Reachable configurations (or states) and the steps between them.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct TransitionGraph {
    pub nodes: BTreeSet<GraphNode>,
    pub edges: BTreeSet<(GraphNode, GraphNode)>,
}

impl TransitionGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn configurations(&self) -> BTreeSet<Configuration> {
        self.nodes.iter().map(|n| n.config.clone()).collect()
    }

    /// Whether some edge leads from configuration `from` to configuration `to`.
    pub fn has_step(&self, from: &EventSet, to: &EventSet) -> bool {
        self.edges.iter().any(|(x, y)| &x.config == from && &y.config == to)
    }

    /// Forgets causality annotations, merging states that share a configuration.
    pub fn project(&self) -> TransitionGraph {
        TransitionGraph {
            nodes: self.nodes.iter().map(|n| GraphNode::config(n.config.clone())).collect(),
            edges: self
                .edges
                .iter()
                .map(|(x, y)| (GraphNode::config(x.config.clone()), GraphNode::config(y.config.clone())))
                .collect(),
        }
    }

    /// Edge endpoints are nodes, the empty configuration is a node and every
    /// edge strictly grows the configuration.
    pub fn is_well_formed(&self) -> bool {
        self.nodes.iter().any(|n| n.config.is_empty())
            && self.edges.iter().all(|(x, y)| {
                self.nodes.contains(x)
                    && self.nodes.contains(y)
                    && x.config.is_subset(&y.config)
                    && x.config.len() < y.config.len()
            })
    }
}
