//! Dynamic causality: droppers and adders on the same structure. The
//! current causality relation depends on the order of events, so execution
//! works on states `(configuration, caus)`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bundle::Ebes;
use crate::error::{Error, Result, Violation, Violations};
use crate::events::{
    fmt_set, fresh_name, fresh_names, Configuration, EventId, EventSet, GraphNode, Poset, Relation, Trace,
    TransitionGraph, Triple,
};
use crate::growing::Ges;
use crate::kernel::{bit, bits, submasks, Mask, MaskGraph, MaskPoset, Universe};
use crate::shrinking::Ses;
use crate::validate;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Dces {
    events: EventSet,
    enabling: Relation,
    shrink: BTreeSet<Triple>,
    grow: BTreeSet<Triple>,
}

/// A configuration together with the causality relation in force after it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DcesState {
    pub config: Configuration,
    pub caus: Relation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepMode {
    /// One event per step.
    Single,
    /// Any nonempty set of events per step.
    Multi,
}

impl FromStr for StepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(StepMode::Single),
            "multi" => Ok(StepMode::Multi),
            other => Err(Error::UnknownName { what: "step mode", name: other.to_string() }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    /// No dependency has both an adder and a dropper.
    pub is_ssdc: bool,
    /// Single state, disabling only through self-dependencies, and causes
    /// of a dependency mutually exclusive with its droppers.
    pub is_ebdc: bool,
}

/// Changes of the causality relation caused by one step.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delta {
    pub added: Relation,
    pub dropped: Relation,
}

impl Delta {
    pub fn between(before: &DcesState, after: &DcesState) -> Delta {
        Delta {
            added: after.caus.difference(&before.caus).cloned().collect(),
            dropped: before.caus.difference(&after.caus).cloned().collect(),
        }
    }
}

impl Dces {
    pub fn new(
        events: EventSet,
        enabling: Relation,
        shrink: BTreeSet<Triple>,
        grow: BTreeSet<Triple>,
    ) -> Result<Self, Violations> {
        let mut v = Vec::new();
        validate::pair_within(&events, &enabling, "enabling", &mut v);
        validate::triples_within(&events, &shrink, "drop", &mut v);
        validate::triples_within(&events, &grow, "add", &mut v);
        let has_adder: BTreeSet<_> = grow.iter().map(Triple::pair).collect();
        let has_dropper: BTreeSet<_> = shrink.iter().map(Triple::pair).collect();
        for t in &shrink {
            if !has_adder.contains(&t.pair()) && !enabling.contains(&t.pair()) {
                v.push(Violation::condition(1, format!("dropper without dependency or adder: {t}")));
            }
            if t.modifier == t.cause || t.modifier == t.target {
                v.push(Violation::condition(2, format!("dropper is the cause or target: {t}")));
            }
            if grow.contains(t) {
                v.push(Violation::condition(
                    5,
                    format!("{} adds and drops the same cause {} -> {}", t.modifier, t.cause, t.target),
                ));
            }
        }
        for t in &grow {
            if !has_dropper.contains(&t.pair()) && enabling.contains(&t.pair()) {
                v.push(Violation::condition(3, format!("adder for an existing dependency without dropper: {t}")));
            }
            if t.modifier == t.cause || t.modifier == t.target {
                v.push(Violation::condition(4, format!("adder is the cause or target: {t}")));
            }
        }
        Violations(v).into_result(Dces { events, enabling, shrink, grow })
    }

    pub fn events(&self) -> &EventSet {
        &self.events
    }

    /// The initial causality relation.
    pub fn enabling(&self) -> &Relation {
        &self.enabling
    }

    pub fn shrink(&self) -> &BTreeSet<Triple> {
        &self.shrink
    }

    pub fn grow(&self) -> &BTreeSet<Triple> {
        &self.grow
    }

    pub(crate) fn kernel(&self) -> Result<DcesKernel> {
        let u = Universe::new(&self.events)?;
        let n = u.len();
        let init = u.preds(&self.enabling)?;
        let mut drop_by = vec![vec![0; n]; n];
        let mut add_by = vec![vec![0; n]; n];
        for t in &self.shrink {
            drop_by[u.idx(&t.target)?][u.idx(&t.cause)?] |= bit(u.idx(&t.modifier)?);
        }
        for t in &self.grow {
            add_by[u.idx(&t.target)?][u.idx(&t.cause)?] |= bit(u.idx(&t.modifier)?);
        }
        Ok(DcesKernel { u, init, drop_by, add_by })
    }

    pub fn initial_state(&self) -> DcesState {
        DcesState {
            config: EventSet::new(),
            caus: self.enabling.clone(),
        }
    }

    /// Performs the step from `s` to configuration `y`, reporting the first
    /// violated transition condition on rejection.
    pub fn step(&self, s: &DcesState, y: &Configuration) -> Result<DcesState> {
        let k = self.kernel()?;
        let from = k.state(s)?;
        let y = k.u.mask(y)?;
        k.step(&from, y).map(|t| k.export(&t)).map_err(Error::StepRejected)
    }

    /// Fires the single event `e` from `s`.
    pub fn fire(&self, s: &DcesState, e: &EventId) -> Result<DcesState> {
        let mut y = s.config.clone();
        y.insert(e.clone());
        self.step(s, &y)
    }

    /// Every event that can fire alone from `s`, with the successor state.
    pub fn enabled_steps(&self, s: &DcesState) -> Result<BTreeMap<EventId, DcesState>> {
        let k = self.kernel()?;
        let from = k.state(s)?;
        Ok(bits(k.u.all() & !from.x)
            .filter_map(|e| k.step(&from, from.x | bit(e)).ok().map(|t| (k.u.name(e).clone(), k.export(&t))))
            .collect())
    }

    /// Reachable states keyed by configuration and causality relation.
    pub fn state_graph(&self, mode: StepMode) -> Result<TransitionGraph> {
        let k = self.kernel()?;
        let (states, edges) = k.explore(mode);
        let node = |i: usize| {
            let s = k.export(&states[i]);
            GraphNode {
                config: s.config,
                caus: Some(s.caus),
            }
        };
        Ok(TransitionGraph {
            nodes: (0..states.len()).map(node).collect(),
            edges: edges.iter().map(|&(a, b)| (node(a), node(b))).collect(),
        })
    }

    /// Reachable configurations and the steps between them, forgetting the
    /// causality relation.
    pub fn transition_graph(&self) -> Result<TransitionGraph> {
        let k = self.kernel()?;
        Ok(k.u.graph(&k.config_graph()))
    }

    pub fn configurations(&self) -> Result<BTreeSet<Configuration>> {
        let k = self.kernel()?;
        Ok(k.u.configs(&k.config_graph().nodes))
    }

    /// Event sequences fired one at a time from the initial state.
    pub fn traces(&self) -> Result<BTreeSet<Trace>> {
        fn go(k: &DcesKernel, s: &MState, acc: &mut Vec<usize>, out: &mut BTreeSet<Trace>) {
            out.insert(k.u.trace(acc));
            for e in bits(k.u.all() & !s.x) {
                if let Ok(t) = k.step(s, s.x | bit(e)) {
                    acc.push(e);
                    go(k, &t, acc, out);
                    acc.pop();
                }
            }
        }
        let k = self.kernel()?;
        let mut out = BTreeSet::new();
        go(&k, &k.initial(), &mut Vec::new(), &mut out);
        Ok(out)
    }

    pub fn classify(&self) -> Classification {
        let is_ssdc = self.ssdc_conflict().is_none();
        let is_ebdc = is_ssdc && self.ebdc_violation().is_none();
        Classification { is_ssdc, is_ebdc }
    }

    fn ssdc_conflict(&self) -> Option<(EventId, EventId)> {
        let adds: BTreeSet<_> = self.grow.iter().map(Triple::pair).collect();
        self.shrink.iter().map(Triple::pair).find(|p| adds.contains(p))
    }

    /// Statically impossible: a self-dependency nobody drops.
    fn impossible(&self, e: &EventId) -> bool {
        self.enabling.contains(&(e.clone(), e.clone()))
            && !self.shrink.iter().any(|t| &t.cause == e && &t.target == e)
    }

    fn ebdc_violation(&self) -> Option<String> {
        if let Some(t) = self.grow.iter().find(|t| t.cause != t.target) {
            return Some(format!("adder {t} does not add a self-dependency"));
        }
        if let Some(t) = self.shrink.iter().find(|t| t.cause == t.target) {
            return Some(format!("dropper {t} drops a self-dependency"));
        }
        let mut groups: BTreeMap<(EventId, EventId), EventSet> = BTreeMap::new();
        for t in &self.shrink {
            groups.entry(t.pair()).or_default().insert(t.modifier.clone());
        }
        let disables = |a: &EventId, b: &EventId| self.grow.contains(&Triple::new(a.clone(), b.clone(), b.clone()));
        for ((c, t), droppers) in groups {
            let mut members = droppers;
            members.insert(c.clone());
            for a in &members {
                for b in members.range(a..).skip(1) {
                    let exclusive = self.impossible(a) || self.impossible(b) || (disables(a, b) && disables(b, a));
                    if !exclusive {
                        return Some(format!(
                            "{a} and {b} among the cause and droppers of {c} -> {t} do not disable each other"
                        ));
                    }
                }
            }
        }
        None
    }

    /// Causality relation after `x` for single state structures.
    pub fn ssdc_caus(&self, x: &Configuration) -> Result<Relation> {
        if self.ssdc_conflict().is_some() {
            return Err(Error::NotSsdc);
        }
        let k = self.kernel()?;
        let x = k.u.mask(x)?;
        Ok(k.u.relation(&k.ssdc_caus(x)))
    }

    fn require_ebdc(&self) -> Result<()> {
        if let Some((c, t)) = self.ssdc_conflict() {
            return Err(Error::NotEbdc(format!("{c} -> {t} has both adders and droppers")));
        }
        match self.ebdc_violation() {
            Some(reason) => Err(Error::NotEbdc(reason)),
            None => Ok(()),
        }
    }

    /// Precedence on a reachable configuration of an extended-bundle-like
    /// structure, closed reflexively and transitively.
    pub fn ebdc_poset(&self, x: &Configuration) -> Result<Poset> {
        self.require_ebdc()?;
        let k = self.kernel()?;
        let m = k.u.mask(x)?;
        if !k.config_graph().nodes.contains(&m) {
            return Err(Error::NotAConfiguration(fmt_set(x)));
        }
        let p = k.ebdc_poset(m).ok_or(Error::NotAPartialOrder)?;
        Ok(k.u.poset(&p))
    }

    pub fn ebdc_posets(&self) -> Result<BTreeSet<Poset>> {
        self.require_ebdc()?;
        let k = self.kernel()?;
        k.config_graph()
            .nodes
            .iter()
            .map(|&m| k.ebdc_poset(m).map(|p| k.u.poset(&p)).ok_or(Error::NotAPartialOrder))
            .collect()
    }

    /// Decides a step from the posets alone: every event of `Y` lying below
    /// another event of `Y` must already be in `X`.
    pub fn ebdc_step_from_posets(&self, x: &Configuration, y: &Configuration) -> Result<bool> {
        let p = self.ebdc_poset(y)?;
        if !x.is_subset(y) || x == y {
            return Ok(false);
        }
        Ok(p.order().iter().all(|(lo, hi)| lo == hi || x.contains(lo)))
    }
}

/// Conflicts become mutual additions of a fresh impossible cause; droppers
/// are kept.
pub fn embed_ses(s: &Ses) -> Dces {
    let imp = fresh_name(s.events(), "__imp");
    let mut events = s.events().clone();
    events.insert(imp.clone());
    let mut enabling = s.enabling().clone();
    enabling.insert((imp.clone(), imp.clone()));
    let grow = s
        .conflict()
        .iter()
        .map(|(a, b)| Triple::new(a.clone(), imp.clone(), b.clone()))
        .collect();
    Dces::new(events, enabling, s.shrink().clone(), grow).expect("the embedding satisfies all conditions")
}

pub fn embed_ges(g: &Ges) -> Dces {
    Dces::new(g.events().clone(), g.enabling().clone(), BTreeSet::new(), g.grow().clone())
        .expect("the embedding satisfies all conditions")
}

/// Each bundle `X_i ↦ e` becomes a fresh impossible cause `x_i → e` dropped
/// by the members of `X_i`; disabling `(e, e′)` becomes `e′` adding `e → e`.
pub fn dces_of_ebes(x: &Ebes) -> Dces {
    let fresh = fresh_names(x.events(), "__x", x.bundles().len());
    let mut events = x.events().clone();
    let mut enabling = Relation::new();
    let mut shrink = BTreeSet::new();
    for (b, xi) in x.bundles().iter().zip(fresh) {
        events.insert(xi.clone());
        enabling.insert((xi.clone(), b.target.clone()));
        enabling.insert((xi.clone(), xi.clone()));
        for m in b.members.iter().filter(|&m| m != &b.target) {
            shrink.insert(Triple::new(m.clone(), xi.clone(), b.target.clone()));
        }
    }
    let grow = x
        .disabling()
        .iter()
        .map(|(e, e2)| Triple::new(e2.clone(), e.clone(), e.clone()))
        .collect();
    Dces::new(events, enabling, shrink, grow).expect("the encoding satisfies all conditions")
}

/// Execution state over numbered events.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct MState {
    pub x: Mask,
    pub caus: Vec<Mask>,
}

pub(crate) struct DcesKernel {
    pub u: Universe,
    pub init: Vec<Mask>,
    /// `drop_by[t][c]` / `add_by[t][c]`: droppers / adders of `c → t`.
    pub drop_by: Vec<Vec<Mask>>,
    pub add_by: Vec<Vec<Mask>>,
}

impl DcesKernel {
    pub(crate) fn initial(&self) -> MState {
        MState {
            x: 0,
            caus: self.init.clone(),
        }
    }

    fn state(&self, s: &DcesState) -> Result<MState> {
        Ok(MState {
            x: self.u.mask(&s.config)?,
            caus: self.u.preds(&s.caus)?,
        })
    }

    fn export(&self, s: &MState) -> DcesState {
        DcesState {
            config: self.u.set(s.x),
            caus: self.u.relation(&s.caus),
        }
    }

    fn modified(table: &[Mask], h: Mask) -> Mask {
        table.iter().enumerate().filter(|(_, &m)| m & h != 0).fold(0, |a, (c, _)| a | bit(c))
    }

    pub(crate) fn step(&self, s: &MState, y: Mask) -> std::result::Result<MState, u8> {
        let x = s.x;
        if x & !y != 0 || x == y {
            return Err(1);
        }
        let new = y & !x;
        if bits(new).any(|e| s.caus[e] & !x != 0) {
            return Err(2);
        }
        let n = self.u.len();
        let mut caus = Vec::with_capacity(n);
        for t in 0..n {
            let added = Self::modified(&self.add_by[t], new);
            let dropped = Self::modified(&self.drop_by[t], new);
            if x & bit(t) == 0 && added & dropped & !x != 0 {
                return Err(4);
            }
            caus.push((s.caus[t] & !dropped) | added);
        }
        if bits(new).any(|t| Self::modified(&self.add_by[t], new) & !x != 0) {
            return Err(5);
        }
        Ok(MState { x: y, caus })
    }

    fn successors(&self, s: &MState, mode: StepMode) -> Vec<MState> {
        let rest = self.u.all() & !s.x;
        let targets: Vec<Mask> = match mode {
            StepMode::Single => bits(rest).map(|e| s.x | bit(e)).collect(),
            StepMode::Multi => submasks(rest).skip(1).map(|m| s.x | m).collect(),
        };
        targets.into_iter().filter_map(|y| self.step(s, y).ok()).collect()
    }

    /// Reachable states and the edges between them, by index.
    pub(crate) fn explore(&self, mode: StepMode) -> (Vec<MState>, BTreeSet<(usize, usize)>) {
        let mut index: HashMap<MState, usize> = HashMap::new();
        let mut states = vec![self.initial()];
        index.insert(self.initial(), 0);
        let mut edges = BTreeSet::new();
        let mut queue = VecDeque::from([0]);
        while let Some(i) = queue.pop_front() {
            for t in self.successors(&states[i].clone(), mode) {
                let j = *index.entry(t.clone()).or_insert_with(|| {
                    states.push(t);
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                });
                edges.insert((i, j));
            }
        }
        (states, edges)
    }

    pub(crate) fn config_graph(&self) -> MaskGraph {
        let (states, edges) = self.explore(StepMode::Multi);
        MaskGraph {
            nodes: states.iter().map(|s| s.x).collect(),
            edges: edges.iter().map(|&(a, b)| (states[a].x, states[b].x)).collect(),
        }
    }

    pub(crate) fn ssdc_caus(&self, x: Mask) -> Vec<Mask> {
        (0..self.u.len())
            .map(|t| (self.init[t] & !Self::modified(&self.drop_by[t], x)) | Self::modified(&self.add_by[t], x))
            .collect()
    }

    pub(crate) fn ebdc_poset(&self, x: Mask) -> Option<MaskPoset> {
        let n = self.u.len();
        let mut strict = self.init.clone();
        for (t, s) in strict.iter_mut().enumerate() {
            // (e′, e, e) ∈ grow puts e below its adder e′
            for e in 0..n {
                if e != t && self.add_by[e][e] & bit(t) != 0 {
                    *s |= bit(e);
                }
            }
            // (e, c, e′) ∈ shrink puts the dropper e below e′
            *s |= self.drop_by[t].iter().fold(0, |a, &d| a | d);
            *s &= !bit(t);
        }
        MaskPoset::close(x, &strict)
    }
}

/// Both structures allow the same step sequences from the empty
/// configuration over their common events. Step targets are matched by
/// event names; events outside the common set are ignored.
pub fn ts_equivalent(a: &Dces, b: &Dces) -> Result<bool> {
    let ka = a.kernel()?;
    let kb = b.kernel()?;
    let common: EventSet = a.events.intersection(&b.events).cloned().collect();
    let ca = ka.u.mask(&common)?;
    let to_b: Vec<usize> = (0..ka.u.len())
        .map(|i| kb.u.idx(ka.u.name(i)).map_or(usize::MAX, |j| j))
        .collect();
    let translate = |m: Mask| bits(m).fold(0, |acc, i| acc | bit(to_b[i]));
    let cb = translate(ca);
    let mut seen: HashSet<(MState, MState)> = HashSet::new();
    let mut queue = VecDeque::from([(ka.initial(), kb.initial())]);
    seen.insert((ka.initial(), kb.initial()));
    while let Some((sa, sb)) = queue.pop_front() {
        let mut next_b: HashMap<Mask, MState> = HashMap::new();
        for t in kb.successors(&sb, StepMode::Multi) {
            if t.x & !cb == 0 {
                next_b.insert(t.x, t);
            }
        }
        let mut matched = 0;
        for t in ka.successors(&sa, StepMode::Multi) {
            if t.x & !ca != 0 {
                continue;
            }
            let Some(u) = next_b.get(&translate(t.x)) else {
                return Ok(false);
            };
            matched += 1;
            let pair = (t, u.clone());
            if seen.insert(pair.clone()) {
                queue.push_back(pair);
            }
        }
        if matched != next_b.len() {
            return Ok(false);
        }
    }
    Ok(true)
}
