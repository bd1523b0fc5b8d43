//! Bitmask machinery shared by every family. Events of a structure are
//! numbered in name order and sets of events become `u64` masks.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::events::{
    Configuration, EventId, EventSet, GraphNode, Poset, Relation, Trace, TransitionGraph,
};

pub(crate) type Mask = u64;

/// Hard limit for mask based representations.
pub const MAX_EVENTS: usize = 64;
/// Limit for operations that enumerate subsets of the whole event set.
pub const ENUMERATION_LIMIT: usize = 20;

pub(crate) fn bits(mut m: Mask) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

#[inline]
pub(crate) fn bit(i: usize) -> Mask {
    1u64 << i
}

#[inline]
pub(crate) fn full(n: usize) -> Mask {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// All submasks of `m`, the empty mask first and `m` itself last.
pub(crate) fn submasks(m: Mask) -> impl Iterator<Item = Mask> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == m { None } else { Some(((cur | !m).wrapping_add(1)) & m) };
        Some(cur)
    })
}

/// Numbering of a structure's events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Universe {
    names: Arc<[EventId]>,
    index: Arc<BTreeMap<EventId, usize>>,
}

impl Universe {
    pub(crate) fn new(events: &EventSet) -> Result<Self> {
        if events.len() > MAX_EVENTS {
            return Err(Error::TooManyEvents {
                got: events.len(),
                limit: MAX_EVENTS,
            });
        }
        let names: Arc<[EventId]> = events.iter().cloned().collect();
        let index = Arc::new(names.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect());
        Ok(Universe { names, index })
    }

    pub(crate) fn len(&self) -> usize {
        self.names.len()
    }

    pub(crate) fn all(&self) -> Mask {
        full(self.len())
    }

    pub(crate) fn name(&self, i: usize) -> &EventId {
        &self.names[i]
    }

    pub(crate) fn idx(&self, e: &EventId) -> Result<usize> {
        self.index.get(e).copied().ok_or_else(|| Error::OutOfUniverse(e.clone()))
    }

    pub(crate) fn mask(&self, set: &EventSet) -> Result<Mask> {
        set.iter().try_fold(0, |m, e| Ok(m | bit(self.idx(e)?)))
    }

    pub(crate) fn set(&self, m: Mask) -> EventSet {
        bits(m).map(|i| self.names[i].clone()).collect()
    }

    pub(crate) fn seq(&self, t: &Trace) -> Result<Vec<usize>> {
        t.events().iter().map(|e| self.idx(e)).collect()
    }

    pub(crate) fn trace(&self, seq: &[usize]) -> Trace {
        Trace::new(seq.iter().map(|&i| self.names[i].clone()).collect())
            .expect("kernel sequences are duplicate free")
    }

    /// `preds[t]` holds every `c` with `(c, t)` in the relation.
    pub(crate) fn preds(&self, rel: &Relation) -> Result<Vec<Mask>> {
        let mut out = vec![0; self.len()];
        for (c, t) in rel {
            out[self.idx(t)?] |= bit(self.idx(c)?);
        }
        Ok(out)
    }

    pub(crate) fn relation(&self, preds: &[Mask]) -> Relation {
        let mut out = Relation::new();
        for (t, &p) in preds.iter().enumerate() {
            for c in bits(p) {
                out.insert((self.names[c].clone(), self.names[t].clone()));
            }
        }
        out
    }

    pub(crate) fn poset(&self, p: &MaskPoset) -> Poset {
        let mut order = Relation::new();
        for i in bits(p.carrier) {
            for j in bits(p.below[i]) {
                order.insert((self.names[j].clone(), self.names[i].clone()));
            }
        }
        Poset::from_parts_unchecked(self.set(p.carrier), order)
    }

    pub(crate) fn graph(&self, g: &MaskGraph) -> TransitionGraph {
        let node = |m: Mask| GraphNode::config(self.set(m));
        TransitionGraph {
            nodes: g.nodes.iter().map(|&m| node(m)).collect(),
            edges: g.edges.iter().map(|&(x, y)| (node(x), node(y))).collect(),
        }
    }

    pub(crate) fn configs(&self, masks: &BTreeSet<Mask>) -> BTreeSet<Configuration> {
        masks.iter().map(|&m| self.set(m)).collect()
    }
}

/// Families whose traces are characterized by a predicate on the set of
/// already occurred events and the next event.
pub(crate) trait Sequential {
    fn size(&self) -> usize;

    /// `e` is not in `done`; decides whether `e` may occur next.
    fn can_extend(&self, done: Mask, e: usize) -> bool;

    fn is_trace_seq(&self, seq: &[usize]) -> bool {
        let mut done = 0;
        for &e in seq {
            if done & bit(e) != 0 || !self.can_extend(done, e) {
                return false;
            }
            done |= bit(e);
        }
        true
    }

    fn enabled(&self, done: Mask) -> Mask {
        bits(full(self.size()) & !done).filter(|&e| self.can_extend(done, e)).fold(0, |m, e| m | bit(e))
    }

    fn trace_seqs(&self) -> Vec<Vec<usize>> {
        fn go<S: Sequential + ?Sized>(s: &S, done: Mask, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(acc.clone());
            for e in bits(s.enabled(done)) {
                acc.push(e);
                go(s, done | bit(e), acc, out);
                acc.pop();
            }
        }
        let mut out = Vec::new();
        go(self, 0, &mut Vec::new(), &mut out);
        out
    }

    /// Alphabets of all traces.
    fn reachable_sets(&self) -> BTreeSet<Mask> {
        self.extension_table().into_keys().collect()
    }

    /// Enabled events for every reachable prefix set. Two structures over the
    /// same numbering have equal trace sets iff their tables are equal.
    fn extension_table(&self) -> BTreeMap<Mask, Mask> {
        let mut table = BTreeMap::new();
        let mut queue = VecDeque::from([0]);
        table.insert(0, self.enabled(0));
        while let Some(x) = queue.pop_front() {
            for e in bits(table[&x]) {
                let y = x | bit(e);
                if let std::collections::btree_map::Entry::Vacant(v) = table.entry(y) {
                    v.insert(self.enabled(y));
                    queue.push_back(y);
                }
            }
        }
        table
    }
}

/// Reachable configurations and steps as masks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub(crate) struct MaskGraph {
    pub nodes: BTreeSet<Mask>,
    pub edges: BTreeSet<(Mask, Mask)>,
}

/// Families with a step relation between configurations.
pub(crate) trait Stepper {
    fn size(&self) -> usize;

    fn step(&self, x: Mask, y: Mask) -> bool;

    /// Least fixed point from the empty configuration.
    fn mask_graph(&self) -> MaskGraph {
        let all = full(self.size());
        let mut g = MaskGraph::default();
        g.nodes.insert(0);
        let mut queue = VecDeque::from([0]);
        while let Some(x) = queue.pop_front() {
            for extra in submasks(all & !x).skip(1) {
                let y = x | extra;
                if self.step(x, y) {
                    g.edges.insert((x, y));
                    if g.nodes.insert(y) {
                        queue.push_back(y);
                    }
                }
            }
        }
        g
    }
}

/// A partial order on a set of numbered events; `below[i]` holds every
/// `j <= i` (including `i`) for `i` in the carrier and is empty otherwise.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct MaskPoset {
    pub carrier: Mask,
    pub below: Vec<Mask>,
}

impl MaskPoset {
    /// Reflexive-transitive closure of `strict` restricted to `carrier`.
    /// Returns `None` when the closure is not antisymmetric.
    pub(crate) fn close(carrier: Mask, strict: &[Mask]) -> Option<MaskPoset> {
        let mut below: Vec<Mask> = strict.iter().enumerate().map(|(i, &b)| {
            if carrier & bit(i) != 0 { (b & carrier) | bit(i) } else { 0 }
        }).collect();
        close_in_place(carrier, &mut below);
        for i in bits(carrier) {
            for j in bits(below[i] & !bit(i)) {
                if below[j] & bit(i) != 0 {
                    return None;
                }
            }
        }
        Some(MaskPoset { carrier, below })
    }
}

/// Warshall closure over `carrier`; `rel[i]` is the predecessor mask of `i`.
pub(crate) fn close_in_place(carrier: Mask, rel: &mut [Mask]) {
    for k in bits(carrier) {
        for i in bits(carrier) {
            if rel[i] & bit(k) != 0 {
                rel[i] |= rel[k];
            }
        }
    }
}

/// Whether the relation given by predecessor masks has a cycle (self-loops
/// included) inside `carrier`.
pub(crate) fn has_cycle(carrier: Mask, preds: &[Mask]) -> bool {
    let mut reach: Vec<Mask> = preds.iter().map(|&p| p & carrier).collect();
    close_in_place(carrier, &mut reach);
    bits(carrier).any(|i| reach[i] & bit(i) != 0)
}

/// Position weight of each event in a trace; unlisted events weigh nothing.
pub(crate) fn position_weights(seq: &[usize], n: usize) -> Vec<u128> {
    let mut w = vec![0u128; n];
    for (p, &e) in seq.iter().enumerate() {
        w[e] = 1u128 << p;
    }
    w
}

pub(crate) fn weight(m: Mask, w: &[u128]) -> u128 {
    bits(m).map(|i| w[i]).sum()
}

/// Subsets of `domain` satisfying the upward closed predicate `sat`, none of
/// whose proper subsets satisfies it.
pub(crate) fn minimal_sets(domain: Mask, sat: impl Fn(Mask) -> bool) -> Vec<Mask> {
    submasks(domain)
        .filter(|&u| sat(u) && bits(u).all(|x| !sat(u & !bit(x))))
        .collect()
}
